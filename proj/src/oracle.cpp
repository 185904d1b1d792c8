#include "riccati/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

namespace riccati {

using nlohmann::json;

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

template <std::size_t N>
using State = std::array<cplx, N>;

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms)
{
    State<N> out = y;
    for (const auto& [w, k] : terms) {
        for (std::size_t i = 0; i < N; ++i) out[i] += h * w * (*k)[i];
    }
    return out;
}

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    double max_error = 0.0;
};

// Integrates y' = f(x, y) through every point of xs, calling record(i, y) at
// each. check(x, y) may throw to abort.
template <std::size_t N, typename F, typename Rec, typename Check>
Stats dopri5(F&& f, State<N> y, std::span<const double> xs, double tol, Rec&& record, Check&& check)
{
    if (!(tol >= 1e-13 && tol <= 1e-6)) fail(ErrorKind::InvalidArgument, "oracle tol must lie in [1e-13, 1e-6]");
    if (xs.empty()) fail(ErrorKind::InvalidArgument, "no sample points");
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) fail(ErrorKind::InvalidArgument, "sample points must increase", xs[i]);
    }
    Stats st;
    record(0, y);
    double x = xs.front();
    State<N> k1 = f(x, y);
    double h = 0.0;
    {
        double scale = 0.0;
        for (std::size_t i = 0; i < N; ++i) scale = std::max(scale, std::abs(k1[i]) / (tol + tol * std::abs(y[i])));
        h = scale > 0.0 ? 0.5 * std::pow(tol, 0.2) / std::pow(scale * tol, 1.0) : 1e-3;
        h = std::clamp(h, 1e-10, 1e-2);
    }
    double err_prev = 1e-4;
    for (std::size_t idx = 1; idx < xs.size(); ++idx) {
        const double target = xs[idx];
        std::size_t guard = 0;
        while (x < target) {
            if (++guard > 10000000) fail(ErrorKind::BlowUp, "step size collapsed", x);
            bool last = false;
            double hs = h;
            if (x + hs >= target || target - (x + hs) < 1e-12 * std::abs(target)) {
                hs = target - x;
                last = true;
            }
            const State<N> k2 = f(x + c2 * hs, axpy<N>(y, hs, {{a21, &k1}}));
            const State<N> k3 = f(x + c3 * hs, axpy<N>(y, hs, {{a31, &k1}, {a32, &k2}}));
            const State<N> k4 = f(x + c4 * hs, axpy<N>(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
            const State<N> k5 = f(x + c5 * hs, axpy<N>(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
            const State<N> k6 =
                f(x + hs, axpy<N>(y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
            const State<N> yn = axpy<N>(y, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
            const State<N> k7 = f(x + hs, yn);
            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const cplx e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(yn[i]));
                err = std::max(err, std::abs(e) / sc);
            }
            if (!std::isfinite(err)) err = 1e10;
            if (err <= 1.0) {
                x = last ? target : x + hs;
                y = yn;
                k1 = k7;
                check(x, y);
                ++st.accepted;
                st.max_error = std::max(st.max_error, err);
                const double fac = err == 0.0 ? 5.0
                                              : std::clamp(0.9 * std::pow(err, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0),
                                                           0.2, 5.0);
                err_prev = std::max(err, 1e-4);
                if (!last) h = hs * fac;
                else h = std::max(h, hs);
            } else {
                ++st.rejected;
                h = hs * std::max(0.2, 0.9 * std::pow(err, -0.2));
            }
        }
        record(idx, y);
    }
    return st;
}

}  // namespace

cplx SchrodingerSolution::y(std::size_t i) const
{
    if (std::abs(phi.at(i)) == 0.0) fail(ErrorKind::ZeroWavefunction, "wave function vanishes", x.at(i));
    return dphi[i] / phi[i];
}

OracleSolution integrate_riccati(const Potential& V, cplx y0, std::span<const double> xs, double tol)
{
    OracleSolution sol;
    sol.tol = tol;
    sol.x.assign(xs.begin(), xs.end());
    sol.y.resize(xs.size());
    auto f = [&](double x, const State<1>& s) { return State<1>{V(x) - s[0] * s[0]}; };
    const Stats st = dopri5<1>(
        f, State<1>{y0}, xs, tol, [&](std::size_t i, const State<1>& s) { sol.y[i] = s[0]; },
        [](double x, const State<1>& s) {
            if (!(std::abs(s[0]) <= 1e8)) fail(ErrorKind::BlowUp, "Riccati solution blows up", x);
        });
    sol.accepted = st.accepted;
    sol.rejected = st.rejected;
    sol.max_error = st.max_error;
    return sol;
}

AmplitudeSolution integrate_riccati_amplitude(const Potential& V, cplx y0, std::span<const double> xs, double tol)
{
    AmplitudeSolution sol;
    sol.x.assign(xs.begin(), xs.end());
    sol.y.resize(xs.size());
    sol.log_amp2.resize(xs.size());
    auto f = [&](double x, const State<2>& s) { return State<2>{V(x) - s[0] * s[0], 2.0 * s[0].real()}; };
    dopri5<2>(
        f, State<2>{y0, 0.0}, xs, tol,
        [&](std::size_t i, const State<2>& s) {
            sol.y[i] = s[0];
            sol.log_amp2[i] = s[1].real();
        },
        [](double x, const State<2>& s) {
            if (!(std::abs(s[0]) <= 1e8)) fail(ErrorKind::BlowUp, "Riccati solution blows up", x);
        });
    return sol;
}

SchrodingerSolution integrate_schrodinger(const Potential& V, cplx phi0, cplx dphi0, std::span<const double> xs,
                                          double tol)
{
    SchrodingerSolution sol;
    sol.tol = tol;
    sol.x.assign(xs.begin(), xs.end());
    sol.phi.resize(xs.size());
    sol.dphi.resize(xs.size());
    auto f = [&](double x, const State<2>& s) { return State<2>{s[1], V(x) * s[0]}; };
    dopri5<2>(
        f, State<2>{phi0, dphi0}, xs, tol,
        [&](std::size_t i, const State<2>& s) {
            sol.phi[i] = s[0];
            sol.dphi[i] = s[1];
        },
        [](double, const State<2>&) {});
    return sol;
}

std::vector<cplx> boundary_seeds(const Disk& d, std::size_t n)
{
    std::vector<cplx> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        out.push_back(d.center() + std::polar(d.radius(), phi));
    }
    return out;
}

json ContainmentReport::to_json() const
{
    json s = json::array();
    for (const auto& r : seeds) {
        json e = {{"seed", complex_to_json(r.seed)},
                  {"worst_margin", r.worst_margin},
                  {"worst_x", r.worst_x},
                  {"via_schrodinger", r.via_schrodinger}};
        e["first_failure_x"] = r.first_failure_x ? json(*r.first_failure_x) : json(nullptr);
        s.push_back(std::move(e));
    }
    json out = {{"seeds", s}, {"worst_margin", worst_margin}, {"pass", pass}, {"tol", tol}};
    out["first_failure_x"] = first_failure_x ? json(*first_failure_x) : json(nullptr);
    return out;
}

ContainmentReport containment_report(const EstimateTrajectory& traj, const Potential& V,
                                     const std::vector<cplx>& seeds, double tol, double oracle_tol)
{
    if (traj.points.empty()) fail(ErrorKind::InvalidArgument, "empty trajectory");
    std::vector<double> xs;
    for (const auto& p : traj.points) {
        if (xs.empty() || p.x > xs.back()) xs.push_back(p.x);
        else if (p.x < xs.back()) fail(ErrorKind::InvalidArgument, "trajectory x must not decrease", p.x);
    }
    ContainmentReport rep;
    rep.tol = tol;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (const cplx& seed : seeds) {
        SeedResult r;
        r.seed = seed;
        std::vector<cplx> ys;
        try {
            const OracleSolution sol = integrate_riccati(V, seed, xs, oracle_tol);
            ys = sol.y;
            for (const cplx& y : ys) {
                if (std::abs(y) > 1e4) {
                    ys.clear();
                    break;
                }
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::BlowUp) throw;
            ys.clear();
        }
        if (ys.empty()) {
            r.via_schrodinger = true;
            const SchrodingerSolution s = integrate_schrodinger(V, 1.0, seed, xs, oracle_tol);
            ys.resize(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = s.y(i);
        }
        r.worst_margin = std::numeric_limits<double>::infinity();
        std::size_t i = 0;
        for (const auto& p : traj.points) {
            while (xs[i] < p.x) ++i;
            const double margin = p.R - std::abs(ys[i] - cplx(p.alpha, p.beta));
            if (margin < r.worst_margin) {
                r.worst_margin = margin;
                r.worst_x = p.x;
            }
            if (margin < -tol && !r.first_failure_x) r.first_failure_x = p.x;
        }
        if (r.worst_margin < rep.worst_margin) rep.worst_margin = r.worst_margin;
        if (r.first_failure_x && (!rep.first_failure_x || *r.first_failure_x < *rep.first_failure_x)) {
            rep.first_failure_x = r.first_failure_x;
        }
        rep.seeds.push_back(r);
    }
    rep.pass = !rep.first_failure_x;
    return rep;
}

}  // namespace riccati
