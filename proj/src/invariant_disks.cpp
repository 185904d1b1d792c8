#include "riccati/invariant_disks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riccati {

using nlohmann::json;

namespace {

std::size_t node_below(std::span<const double> pts, double x)
{
    auto it = std::upper_bound(pts.begin(), pts.end(), x);
    std::size_t j = it == pts.begin() ? 0 : static_cast<std::size_t>(it - pts.begin()) - 1;
    return std::min(j, pts.size() - 1);
}

}  // namespace

EstimateInputs::EstimateInputs(Potential V, Grid grid, AlphaModel alpha, WModel W)
    : V_(std::move(V)), grid_(std::move(grid)), alpha_(std::move(alpha)), W_(std::move(W))
{
    if (!alpha_) fail(ErrorKind::InvalidArgument, "alpha model is required");
    alpha_s_ = sample<double>(grid_, [&](std::size_t k, double x) { return alpha_(k, x).a; });
    U_s_ = sample<double>(grid_, [&](std::size_t k, double x) { return U(k, x); });
    W_s_ = sample<double>(grid_, [&](std::size_t k, double x) { return this->W(k, x).w; });
    log_sigma_s_.pieces.resize(grid_.piece_count());
    double acc = 0.0;
    for (std::size_t k = 0; k < grid_.piece_count(); ++k) {
        auto pts = grid_.piece_points(k);
        auto& out = log_sigma_s_.pieces[k];
        out.reserve(pts.size());
        out.push_back(acc);
        for (std::size_t j = 1; j < pts.size(); ++j) {
            acc += gauss_legendre([&](double t) { return 2.0 * alpha_(k, t).a; }, pts[j - 1], pts[j]);
            out.push_back(acc);
        }
    }
}

AlphaModel alpha_from_approx(std::shared_ptr<const GluedApprox> approx)
{
    return [approx](std::size_t k, double x) {
        const ApproxJet j = approx->jet(k, x);
        const cplx dy = j.vt - j.y * j.y;
        const cplx ddy = j.vt_d1 - 2.0 * j.y * dy;
        return AlphaJet{j.y.real(), dy.real(), ddy.real()};
    };
}

EstimateInputs EstimateInputs::from_approx(std::shared_ptr<const GluedApprox> approx)
{
    if (!approx) fail(ErrorKind::InvalidArgument, "null approximation");
    EstimateInputs in(approx->potential(), approx->grid(), alpha_from_approx(approx));
    in.approx_ = std::move(approx);
    return in;
}

double EstimateInputs::U(std::size_t piece, double x) const
{
    const AlphaJet a = alpha_(piece, x);
    return V_(x).real() - a.a * a.a - a.d1;
}

double EstimateInputs::U_d1(std::size_t piece, double x) const
{
    const AlphaJet a = alpha_(piece, x);
    return V_.d1(x).real() - 2.0 * a.a * a.d1 - a.d2;
}

WJet EstimateInputs::W(std::size_t piece, double x) const
{
    if (W_) return W_(piece, x);
    return {U(piece, x), U_d1(piece, x)};
}

double EstimateInputs::log_sigma(std::size_t piece, double x) const
{
    auto pts = grid_.piece_points(piece);
    const std::size_t j = node_below(pts, x);
    const double base = log_sigma_s_.pieces.at(piece)[j];
    if (pts[j] == x) return base;
    return base + gauss_legendre([&](double t) { return 2.0 * alpha_(piece, t).a; }, pts[j], x);
}

PiecewiseSamples<double> compute_U(const Grid& grid, const Potential& V, const PiecewiseSamples<double>& alpha,
                                   const PiecewiseSamples<double>& alpha_d1)
{
    PiecewiseSamples<double> out;
    out.pieces.resize(grid.piece_count());
    for (std::size_t k = 0; k < grid.piece_count(); ++k) {
        auto pts = grid.piece_points(k);
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const double a = alpha.at(k, j);
            out.pieces[k].push_back(V(pts[j]).real() - a * a - alpha_d1.at(k, j));
        }
    }
    return out;
}

double determinator(const EstimateInputs& in, std::size_t piece, double x, double beta, double R)
{
    const AlphaJet a = in.alpha(piece, x);
    const WJet W = in.W(piece, x);
    const double U = in.U(piece, x);
    return 2.0 * a.a * W.w + 0.5 * W.d1 - R * std::abs(W.w - U) + beta * in.potential()(x).imag();
}

double determinator_via_approx(const GluedApprox& approx, const Potential& V, std::size_t piece, double x,
                               double beta)
{
    const ApproxJet j = approx.jet(piece, x);
    const PotentialJet v = V.jet(x);
    const double gap = (v.v - j.vt).real();
    const double gap_d1 = (v.d1 - j.vt_d1).real();
    return 2.0 * j.y.real() * gap + 0.5 * gap_d1 - j.y.imag() * j.vt.imag() + beta * v.v.imag();
}

std::string_view to_string(Case c)
{
    switch (c) {
    case Case::A: return "A";
    case Case::B: return "B";
    case Case::Thm2: return "THM2";
    case Case::Lens: return "LENS";
    }
    return "?";
}

std::vector<TrajectoryPoint> EstimateTrajectory::piece_points(std::size_t piece) const
{
    std::vector<TrajectoryPoint> out;
    for (const auto& p : points) {
        if (p.piece == piece) out.push_back(p);
    }
    return out;
}

namespace {

struct Local {
    AlphaJet a;
    double U;
    double U_d1;
    WJet W;
    double imV;
};

Local local(const EstimateInputs& in, std::size_t k, double x)
{
    return {in.alpha(k, x), in.U(k, x), in.U_d1(k, x), in.W(k, x), in.potential()(x).imag()};
}

double source(const EstimateInputs& in, std::size_t k, double x, Branch b)
{
    const double imV = in.potential()(x).imag();
    const double gap = std::abs(in.W(k, x).w - in.U(k, x));
    return (b == Branch::A ? -imV : imV) + gap;
}

// One grid step of c' = -2 alpha c + g from a to b.
double step_carried(const EstimateInputs& in, std::size_t k, double a, double b, double c, Branch br)
{
    auto two_alpha = [&](double t) { return 2.0 * in.alpha(k, t).a; };
    const double total = gauss_legendre(two_alpha, a, b);
    const auto nodes = gauss_legendre_nodes(a, b);
    const auto weights = gauss_legendre_weights(a, b);
    double acc = std::exp(-total) * c;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double partial = gauss_legendre(two_alpha, a, nodes[i]);
        acc += weights[i] * std::exp(partial - total) * source(in, k, nodes[i], br);
    }
    return acc;
}

struct BranchPoint {
    TrajectoryPoint pt;
    double carried = 0.0;
    double tol = 0.0;
    bool valid = false;
};

BranchPoint branch_point(const EstimateInputs& in, std::size_t k, double x, double c, Branch br, double ctol)
{
    const Local l = local(in, k, x);
    const double g = (br == Branch::A ? -l.imV : l.imV) + std::abs(l.W.w - l.U);
    const double dc = -2.0 * l.a.a * c + g;
    const double o = l.W.w / c;
    const double dO = (l.W.d1 * c - l.W.w * dc) / (c * c);
    double q, u, dq, du;
    if (br == Branch::A) {
        q = c, u = o, dq = dc, du = dO;
    } else {
        u = c, q = o, du = dc, dq = dO;
    }
    BranchPoint bp;
    TrajectoryPoint& p = bp.pt;
    p.x = x;
    p.piece = k;
    p.alpha = l.a.a;
    p.R = 0.5 * (q + u);
    p.beta = 0.5 * (u - q);
    p.dR = 0.5 * (dq + du);
    p.dbeta = 0.5 * (du - dq);
    p.U = l.U;
    p.W = l.W.w;
    const double t1 = 2.0 * l.a.a * l.W.w;
    const double t2 = 0.5 * l.W.d1;
    const double t3 = p.R * std::abs(l.W.w - l.U);
    const double t4 = p.beta * l.imV;
    p.D = t1 + t2 - t3 + t4;
    p.kind = br == Branch::A ? Case::A : Case::B;
    bp.carried = c;
    bp.tol = ctol * (1.0 + std::abs(c) * (std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4)));
    bp.valid = c * p.D >= -bp.tol;
    return bp;
}

Branch other(Branch b) { return b == Branch::A ? Branch::B : Branch::A; }

void check_radius(const BranchPoint& bp)
{
    const TrajectoryPoint& p = bp.pt;
    if (!std::isfinite(p.R) || !std::isfinite(p.beta)) {
        fail(ErrorKind::ZeroCrossing, "carried quantity vanished", p.x);
    }
    if (p.R < -1e-9 * (1.0 + std::abs(p.R) + std::abs(p.beta))) {
        fail(ErrorKind::NegativeRadius, "radius became negative", p.x);
    }
}

double next_carried(const EstimateInputs& in, std::size_t k, double a, double b, double c, Branch br)
{
    const double n = step_carried(in, k, a, b, c, br);
    if (n == 0.0 || (n > 0.0) != (c > 0.0)) {
        fail(ErrorKind::ZeroCrossing, br == Branch::A ? "R - beta crosses zero" : "R + beta crosses zero", b);
    }
    return n;
}

}  // namespace

EstimateTrajectory thm2_evolve(const EstimateInputs& in, std::size_t piece, const WModel& W)
{
    EstimateTrajectory traj;
    for (double x : in.grid().piece_points(piece)) {
        const Local l = local(in, piece, x);
        const WJet w = W ? W(piece, x) : l.W;
        if (!(w.w > 0.0)) fail(ErrorKind::ConditionViolated, "real-centered estimate needs W > 0", x);
        const double s = std::sqrt(w.w);
        const double t1 = 2.0 * l.a.a * w.w;
        const double t2 = 0.5 * w.d1;
        const double t3 = s * (std::abs(w.w - l.U) + std::abs(l.imV));
        const double lhs = t1 + t2 - t3;
        if (lhs < -1e-9 * (1.0 + std::abs(t1) + std::abs(t2) + std::abs(t3))) {
            fail(ErrorKind::ConditionViolated, "real-centered invariance condition fails", x);
        }
        TrajectoryPoint p;
        p.x = x;
        p.piece = piece;
        p.alpha = l.a.a;
        p.beta = 0.0;
        p.R = s;
        p.D = lhs;
        p.kind = Case::Thm2;
        p.dR = w.d1 / (2.0 * s);
        p.dbeta = 0.0;
        p.U = l.U;
        p.W = w.w;
        traj.points.push_back(p);
    }
    return traj;
}

WModel thm2_minimal_W(const EstimateInputs& in, std::size_t piece, double R0, double slack)
{
    if (!(R0 > 0.0)) fail(ErrorKind::InvalidArgument, "real-centered estimate needs a positive starting radius");
    auto pts = in.grid().piece_points(piece);
    auto rhs = [&](double x, double s) {
        const double g = std::abs(s * s - in.U(piece, x)) + std::abs(in.potential()(x).imag());
        return g + slack * (1.0 + g) - 2.0 * in.alpha(piece, x).a * s;
    };
    constexpr int substeps = 8;
    auto table = std::make_shared<std::vector<std::pair<double, double>>>();
    table->reserve(pts.size());
    double s = R0;
    table->emplace_back(pts.front(), s);
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        const double h = (pts[j + 1] - pts[j]) / substeps;
        double x = pts[j];
        for (int i = 0; i < substeps; ++i) {
            const double k1 = rhs(x, s);
            const double k2 = rhs(x + 0.5 * h, s + 0.5 * h * k1);
            const double k3 = rhs(x + 0.5 * h, s + 0.5 * h * k2);
            const double k4 = rhs(x + h, s + h * k3);
            s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x = pts[j] + (i + 1) * h;
        }
        if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorKind::ConditionViolated, "real-centered estimate radius collapsed", pts[j + 1]);
        table->emplace_back(pts[j + 1], s);
    }
    return [table, rhs_in = &in, piece, slack](std::size_t k, double x) {
        if (k != piece) fail(ErrorKind::InvalidArgument, "W model queried on another piece", x);
        auto it = std::lower_bound(table->begin(), table->end(), x,
                                   [](const auto& e, double v) { return e.first < v; });
        if (it == table->end() || it->first != x) fail(ErrorKind::InvalidArgument, "W model queried off the grid", x);
        const double s = it->second;
        const double g = std::abs(s * s - rhs_in->U(piece, x)) + std::abs(rhs_in->potential()(x).imag());
        const double ds = g + slack * (1.0 + g) - 2.0 * rhs_in->alpha(piece, x).a * s;
        return WJet{s * s, 2.0 * s * ds};
    };
}

EstimateTrajectory thm1_evolve(const EstimateInputs& in, std::size_t piece, Branch branch, double beta0,
                               double R0, double consistency_tol)
{
    auto pts = in.grid().piece_points(piece);
    const double W0 = in.W(piece, pts.front()).w;
    if (std::abs(R0 * R0 - beta0 * beta0 - W0) > 1e-8 * (1.0 + std::abs(W0))) {
        fail(ErrorKind::InvalidArgument, "initial disk violates R^2 - beta^2 = W", pts.front());
    }
    double c = branch == Branch::A ? R0 - beta0 : R0 + beta0;
    if (c == 0.0) fail(ErrorKind::ZeroCrossing, "carried quantity is zero", pts.front());
    EstimateTrajectory traj;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        const BranchPoint bp = branch_point(in, piece, pts[j], c, branch, consistency_tol);
        check_radius(bp);
        if (!bp.valid) fail(ErrorKind::ConsistencyViolated, "consistency condition fails", pts[j]);
        traj.points.push_back(bp.pt);
        if (j + 1 < pts.size()) c = next_carried(in, piece, pts[j], pts[j + 1], c, branch);
    }
    traj.constants["branch"] = branch == Branch::A ? "A" : "B";
    traj.constants["c"] = branch == Branch::A ? R0 - beta0 : R0 + beta0;
    return traj;
}

std::vector<double> log_sigma2U_variation(const EstimateInputs& in, std::size_t piece)
{
    auto pts = in.grid().piece_points(piece);
    auto f = [&](double x) { return 2.0 * in.log_sigma(piece, x) + std::log(std::abs(in.U(piece, x))); };
    auto df = [&](double x) { return 4.0 * in.alpha(piece, x).a + in.U_d1(piece, x) / in.U(piece, x); };
    std::vector<double> tv(pts.size(), 0.0);
    for (std::size_t j = 1; j < pts.size(); ++j) {
        const double a = pts[j - 1];
        const double b = pts[j];
        std::vector<double> probe{a};
        for (double n : gauss_legendre_nodes(a, b)) probe.push_back(n);
        probe.push_back(b);
        std::vector<double> split{a};
        double prev = df(a);
        for (std::size_t i = 1; i < probe.size(); ++i) {
            const double cur = df(probe[i]);
            if ((prev < 0.0 && cur > 0.0) || (prev > 0.0 && cur < 0.0)) {
                double lo = probe[i - 1];
                double hi = probe[i];
                double flo = prev;
                for (int it = 0; it < 60 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = df(mid);
                    if ((fm > 0.0) == (flo > 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                split.push_back(0.5 * (lo + hi));
            }
            prev = cur;
        }
        split.push_back(b);
        double acc = 0.0;
        double fprev = f(split.front());
        for (std::size_t i = 1; i < split.size(); ++i) {
            const double fc = f(split[i]);
            acc += std::abs(fc - fprev);
            fprev = fc;
        }
        tv[j] = tv[j - 1] + acc;
    }
    return tv;
}

EstimateTrajectory lemma_inv_evolve(const EstimateInputs& in, std::size_t piece, double T0, int half_plane)
{
    if (!(T0 >= 1.0)) fail(ErrorKind::InvalidArgument, "T0 must be >= 1");
    if (half_plane != 1 && half_plane != -1) fail(ErrorKind::InvalidArgument, "half_plane must be +1 or -1");
    auto pts = in.grid().piece_points(piece);
    for (double x : pts) {
        if (!(in.U(piece, x) < 0.0)) fail(ErrorKind::SignViolation, "lemma needs U < 0", x);
    }
    const std::vector<double> tv = log_sigma2U_variation(in, piece);
    const double h = half_plane;
    EstimateTrajectory traj;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        const double x = pts[j];
        const Local l = local(in, piece, x);
        const double T = T0 * std::exp(0.5 * tv[j]);
        const double dT = T * 0.5 * std::abs(4.0 * l.a.a + l.U_d1 / l.U);
        const double s = std::sqrt(-l.U);
        const double ds = -l.U_d1 / (2.0 * s);
        TrajectoryPoint p;
        p.x = x;
        p.piece = piece;
        p.alpha = l.a.a;
        p.beta = h * 0.5 * s * (T + 1.0 / T);
        p.R = 0.5 * s * (T - 1.0 / T);
        p.dR = 0.5 * ds * (T - 1.0 / T) + 0.5 * s * (dT + dT / (T * T));
        p.dbeta = h * (0.5 * ds * (T + 1.0 / T) + 0.5 * s * (dT - dT / (T * T)));
        p.U = l.U;
        p.W = l.U;
        p.D = 2.0 * l.a.a * l.U + 0.5 * l.U_d1 + p.beta * l.imV;
        p.kind = (p.R - p.beta) * p.D >= 0.0 ? Case::A : Case::B;
        traj.points.push_back(p);
    }
    traj.constants["T0"] = T0;
    traj.constants["T_end"] = T0 * std::exp(0.5 * tv.back());
    traj.constants["total_variation"] = tv.back();
    return traj;
}

LensResult lemma_inv2_lens(const EstimateInputs& in, std::size_t piece, double c1, double c2)
{
    auto pts = in.grid().piece_points(piece);
    for (double x : pts) {
        const Local l = local(in, piece, x);
        if (!(l.U > 0.0)) fail(ErrorKind::SignViolation, "lens needs U > 0", x);
        const double cond = l.U_d1 + 4.0 * l.a.a * l.U;
        if (cond < -1e-9 * (1.0 + std::abs(l.U_d1) + std::abs(4.0 * l.a.a * l.U))) {
            fail(ErrorKind::SignViolation, "lens needs U' + 4 alpha U >= 0", x);
        }
    }
    const double x0 = pts.front();
    const double start = std::exp(in.log_sigma(piece, x0)) * std::sqrt(in.U(piece, x0));
    LensResult out;
    out.c1 = c1 > 0.0 ? c1 : start;
    out.c2 = c2 > 0.0 ? c2 : start;
    for (double x : pts) {
        const Local l = local(in, piece, x);
        const double sigma = std::exp(in.log_sigma(piece, x));
        const double us = l.U * sigma;
        const double dus = (l.U_d1 + 2.0 * l.a.a * l.U) * sigma;
        TrajectoryPoint p;
        p.x = x;
        p.piece = piece;
        p.alpha = l.a.a;
        p.U = l.U;
        p.W = l.U;
        p.kind = Case::Lens;

        p.R = 0.5 * (us / out.c1 + out.c1 / sigma);
        p.beta = 0.5 * (us / out.c1 - out.c1 / sigma);
        p.dR = 0.5 * (dus / out.c1 - 2.0 * l.a.a * out.c1 / sigma);
        p.dbeta = 0.5 * (dus / out.c1 + 2.0 * l.a.a * out.c1 / sigma);
        p.D = 2.0 * l.a.a * l.U + 0.5 * l.U_d1 + p.beta * l.imV;
        out.upper.points.push_back(p);

        p.R = 0.5 * (us / out.c2 + out.c2 / sigma);
        p.beta = -0.5 * (us / out.c2 - out.c2 / sigma);
        p.dR = 0.5 * (dus / out.c2 - 2.0 * l.a.a * out.c2 / sigma);
        p.dbeta = -0.5 * (dus / out.c2 + 2.0 * l.a.a * out.c2 / sigma);
        p.D = 2.0 * l.a.a * l.U + 0.5 * l.U_d1 + p.beta * l.imV;
        out.lower.points.push_back(p);
    }
    out.upper.constants["c"] = out.c1;
    out.lower.constants["c"] = out.c2;
    return out;
}

std::string_view to_string(PieceMode m)
{
    switch (m) {
    case PieceMode::Auto: return "auto";
    case PieceMode::A: return "A";
    case PieceMode::B: return "B";
    case PieceMode::Thm2: return "thm2";
    }
    return "?";
}

PieceMode piece_mode_from_string(const std::string& s)
{
    if (s == "auto") return PieceMode::Auto;
    if (s == "A") return PieceMode::A;
    if (s == "B") return PieceMode::B;
    if (s == "thm2") return PieceMode::Thm2;
    fail(ErrorKind::ParseError, "unknown piece mode '" + s + "'");
}

json Policy::to_json() const
{
    json modes = json::array();
    for (PieceMode m : piece_modes) modes.push_back(std::string(to_string(m)));
    return {{"default_W", "U"},
            {"switch_eta", switch_eta},
            {"jump_rule", "grow_R"},
            {"consistency_tol", consistency_tol},
            {"piece_modes", modes}};
}

Policy Policy::from_json(const json& j)
{
    Policy p;
    try {
        if (j.value("default_W", std::string("U")) != "U") {
            fail(ErrorKind::ParseError, "only default_W = \"U\" is supported");
        }
        if (j.value("jump_rule", std::string("grow_R")) != "grow_R") {
            fail(ErrorKind::ParseError, "only jump_rule = \"grow_R\" is supported");
        }
        p.switch_eta = j.value("switch_eta", p.switch_eta);
        p.consistency_tol = j.value("consistency_tol", p.consistency_tol);
        if (j.contains("piece_modes")) {
            for (const auto& m : j.at("piece_modes")) p.piece_modes.push_back(piece_mode_from_string(m.get<std::string>()));
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, std::string("policy: ") + e.what());
    }
    return p;
}

Disk jump_disk(const Disk& old, double alpha_new, double W, double where)
{
    const double R_eff = old.radius() + std::abs(alpha_new - old.alpha());
    const double top = old.beta() + R_eff;
    const double bottom = old.beta() - R_eff;
    double u, l;
    if (W < 0.0) {
        const double aw = -W;
        const double s = std::sqrt(aw);
        if (bottom > 0.0) {
            u = std::max({top, aw / bottom, s});
            l = aw / u;
        } else if (top < 0.0) {
            const double uu = std::max({-bottom, aw / (-top), s});
            u = -aw / uu;
            l = -uu;
        } else {
            fail(ErrorKind::JumpImpossible, "old disk meets the real axis but W < 0", where);
        }
    } else if (W == 0.0) {
        if (bottom >= 0.0) {
            u = std::max(top, 0.0);
            l = 0.0;
        } else if (top <= 0.0) {
            u = 0.0;
            l = bottom;
        } else {
            fail(ErrorKind::JumpImpossible, "old disk straddles the real axis but W = 0", where);
        }
    } else {
        const double s = std::sqrt(W);
        const double lo = std::max(top, std::numeric_limits<double>::min());
        const double hi = bottom < 0.0 ? W / (-bottom) : std::numeric_limits<double>::infinity();
        if (lo > hi) fail(ErrorKind::JumpImpossible, "W too small to contain the old disk", where);
        u = std::clamp(s, lo, hi);
        l = -W / u;
    }
    return Disk({alpha_new, 0.5 * (u + l)}, 0.5 * (u - l));
}

EstimateTrajectory evolve_pipeline(const EstimateInputs& in, const Policy& policy, const Disk& init)
{
    const Grid& grid = in.grid();
    EstimateTrajectory traj;
    json switches = json::array();
    json jumps = json::array();
    json modes = json::array();
    Disk cur = init;
    // Branch of the previous A/B piece, if the previous piece was one.
    bool have_last = false;
    Branch last_branch = Branch::A;

    for (std::size_t k = 0; k < grid.piece_count(); ++k) {
        auto pts = grid.piece_points(k);
        const double xL = pts.front();
        const PieceMode mode = policy.mode(k);
        modes.push_back(std::string(to_string(mode)));
        const double aL = in.alpha(k, xL).a;

        if (mode == PieceMode::Thm2) {
            const double R = std::abs(cur.center() - cplx(aL, 0.0)) + cur.radius();
            EstimateTrajectory seg = thm2_evolve(in, k, thm2_minimal_W(in, k, R));
            if (k > 0) seg.points.front().jump = true;
            jumps.push_back({{"x", xL},
                             {"before", {cur.alpha(), cur.beta(), cur.radius()}},
                             {"after", {aL, 0.0, R}}});
            traj.points.insert(traj.points.end(), seg.points.begin(), seg.points.end());
            cur = traj.points.back().disk();
            have_last = false;
            continue;
        }

        const double WL = in.W(k, xL).w;
        const Disk start = jump_disk(cur, aL, WL, xL);
        if (k > 0 || std::abs(start.radius() - cur.radius()) + std::abs(start.center() - cur.center()) > 0.0) {
            jumps.push_back({{"x", xL},
                             {"before", {cur.alpha(), cur.beta(), cur.radius()}},
                             {"after", {start.alpha(), start.beta(), start.radius()}}});
        }
        const double q0 = start.radius() - start.beta();
        const double u0 = start.radius() + start.beta();

        auto carried_of = [](Branch b, double q, double u) { return b == Branch::A ? q : u; };
        auto try_point = [&](Branch b, double c) -> std::optional<BranchPoint> {
            if (c == 0.0) return std::nullopt;
            return branch_point(in, k, xL, c, b, policy.consistency_tol);
        };

        Branch br;
        if (mode == PieceMode::A) {
            br = Branch::A;
        } else if (mode == PieceMode::B) {
            br = Branch::B;
        } else {
            auto pa = try_point(Branch::A, q0);
            auto pb = try_point(Branch::B, u0);
            const bool va = pa && pa->valid;
            const bool vb = pb && pb->valid;
            if (!va && !vb) fail(ErrorKind::PolicyExhausted, "neither branch A nor B applies", xL);
            if (va && vb) {
                if (have_last) {
                    br = last_branch;
                } else if (WL >= 0.0) {
                    br = in.potential()(xL).imag() < 0.0 ? Branch::A : Branch::B;
                } else {
                    br = std::abs(q0) >= std::abs(u0) ? Branch::A : Branch::B;
                }
            } else {
                br = va ? Branch::A : Branch::B;
            }
        }
        double c = carried_of(br, q0, u0);
        if (c == 0.0) fail(ErrorKind::ZeroCrossing, "carried quantity is zero at piece start", xL);

        for (std::size_t j = 0; j < pts.size(); ++j) {
            const double x = pts[j];
            BranchPoint bp = branch_point(in, k, x, c, br, policy.consistency_tol);
            const double q = bp.pt.R - bp.pt.beta;
            const double u = bp.pt.R + bp.pt.beta;
            if (!bp.valid) {
                if (mode != PieceMode::Auto) fail(ErrorKind::ConsistencyViolated, "consistency condition fails", x);
                const Branch ob = other(br);
                const double oc = carried_of(ob, q, u);
                if (oc == 0.0) fail(ErrorKind::PolicyExhausted, "neither branch A nor B applies", x);
                BranchPoint alt = branch_point(in, k, x, oc, ob, policy.consistency_tol);
                if (!alt.valid) fail(ErrorKind::PolicyExhausted, "neither branch A nor B applies", x);
                switches.push_back({{"x", x}, {"from", br == Branch::A ? "A" : "B"}, {"to", ob == Branch::A ? "A" : "B"}});
                br = ob;
                c = oc;
                bp = alt;
            } else if (mode == PieceMode::Auto && bp.pt.W >= 0.0) {
                const double imV = in.potential()(x).imag();
                const Branch target = imV < 0.0 ? Branch::A : Branch::B;
                const double tc = carried_of(target, q, u);
                const double eta = policy.switch_eta * std::sqrt(1.0 + std::abs(bp.pt.U));
                if (target != br && tc > eta) {
                    BranchPoint alt = branch_point(in, k, x, tc, target, policy.consistency_tol);
                    if (alt.valid) {
                        switches.push_back({{"x", x}, {"from", br == Branch::A ? "A" : "B"},
                                            {"to", target == Branch::A ? "A" : "B"}});
                        br = target;
                        c = tc;
                        bp = alt;
                    }
                }
            }
            check_radius(bp);
            bp.pt.jump = (j == 0 && k > 0);
            traj.points.push_back(bp.pt);
            if (j + 1 < pts.size()) c = next_carried(in, k, x, pts[j + 1], c, br);
        }
        last_branch = br;
        have_last = true;
        cur = traj.points.back().disk();
    }
    traj.constants["switches"] = switches;
    traj.constants["jumps"] = jumps;
    traj.constants["piece_modes"] = modes;
    return traj;
}

bool Lemma1Residual::holds(double tol) const
{
    return margin >= -(tol + 64.0 * std::numeric_limits<double>::epsilon() * scale);
}

std::vector<Lemma1Residual> lemma1_residuals(const EstimateTrajectory& traj, const EstimateInputs& in)
{
    std::vector<Lemma1Residual> out;
    out.reserve(traj.points.size());
    for (const auto& p : traj.points) {
        const AlphaJet a = in.alpha(p.piece, p.x);
        const cplx V = in.potential()(p.x);
        Lemma1Residual r;
        r.x = p.x;
        r.dR = p.dR + 2.0 * a.a * p.R;
        r.dalpha = -V.real() + a.a * a.a + a.d1 + p.W;
        r.dbeta = p.dbeta + 2.0 * a.a * p.beta - V.imag();
        r.margin = r.dR - std::abs(r.dalpha) - std::abs(r.dbeta);
        r.scale = std::abs(p.dR) + std::abs(2.0 * a.a * p.R) + std::abs(V.real()) + a.a * a.a + std::abs(a.d1) +
                  std::abs(p.W) + std::abs(p.dbeta) + std::abs(2.0 * a.a * p.beta) + std::abs(V.imag());
        out.push_back(r);
    }
    return out;
}

namespace {

// Three-point derivative on one run of points: central inside, one-sided at
// the ends.
std::vector<double> run_derivative(const std::vector<double>& x, const std::vector<double>& f)
{
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0);
    if (n < 3) fail(ErrorKind::InvalidGrid, "need at least three points per piece");
    auto three = [&](std::size_t i0, double at) {
        const double x0 = x[i0], x1 = x[i0 + 1], x2 = x[i0 + 2];
        const double l0 = (2.0 * at - x1 - x2) / ((x0 - x1) * (x0 - x2));
        const double l1 = (2.0 * at - x0 - x2) / ((x1 - x0) * (x1 - x2));
        const double l2 = (2.0 * at - x0 - x1) / ((x2 - x0) * (x2 - x1));
        return l0 * f[i0] + l1 * f[i0 + 1] + l2 * f[i0 + 2];
    };
    d[0] = three(0, x[0]);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = three(i - 1, x[i]);
    d[n - 1] = three(n - 3, x[n - 1]);
    return d;
}

}  // namespace

std::vector<Lemma1Residual> lemma1_residuals_numeric(const EstimateTrajectory& traj, const EstimateInputs& in)
{
    EstimateTrajectory copy = traj;
    std::size_t start = 0;
    while (start < copy.points.size()) {
        std::size_t end = start + 1;
        while (end < copy.points.size() && copy.points[end].piece == copy.points[start].piece
               && !copy.points[end].jump) {
            ++end;
        }
        std::vector<double> xs, R, beta;
        for (std::size_t i = start; i < end; ++i) {
            xs.push_back(copy.points[i].x);
            R.push_back(copy.points[i].R);
            beta.push_back(copy.points[i].beta);
        }
        const auto dR = run_derivative(xs, R);
        const auto db = run_derivative(xs, beta);
        for (std::size_t i = start; i < end; ++i) {
            copy.points[i].dR = dR[i - start];
            copy.points[i].dbeta = db[i - start];
        }
        start = end;
    }
    return lemma1_residuals(copy, in);
}

}  // namespace riccati
