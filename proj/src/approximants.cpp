#include "riccati/approximants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace riccati {

using nlohmann::json;

namespace {

constexpr double zero_potential_eps = 1e-12;

PotentialJet checked_jet(const Potential& v, double x)
{
    const PotentialJet j = v.jet(x);
    if (std::abs(j.v) < zero_potential_eps) fail(ErrorKind::ZeroPotential, "V_WKB vanishes", x);
    return j;
}

cplx principal_root(cplx v)
{
    // Treat a negative zero imaginary part as +0 so that real negative
    // potentials give the root i sqrt|V|.
    if (v.imag() == 0.0) v = cplx(v.real(), 0.0);
    return std::sqrt(v);
}

}  // namespace

WkbAnsatz::WkbAnsatz(Potential vwkb, int sign, Interval region)
    : vwkb_(std::move(vwkb)), sign_(sign), region_(region)
{
    if (sign != 1 && sign != -1) fail(ErrorKind::InvalidArgument, "WKB sign must be +1 or -1");
    if (!(std::isfinite(region.lo) && std::isfinite(region.hi) && region.hi > region.lo)) {
        fail(ErrorKind::InvalidArgument, "WKB region must be a bounded interval");
    }
    constexpr int samples = 257;
    std::vector<double> angles;
    angles.reserve(samples);
    for (int i = 0; i < samples; ++i) {
        const double x = region.lo + (region.hi - region.lo) * i / (samples - 1);
        angles.push_back(std::arg(checked_jet(vwkb_, x).v));
    }
    std::sort(angles.begin(), angles.end());
    const double two_pi = 2.0 * std::numbers::pi;
    double best_gap = angles.front() + two_pi - angles.back();
    double best_mid = angles.back() + 0.5 * best_gap;
    for (std::size_t i = 1; i < angles.size(); ++i) {
        const double gap = angles[i] - angles[i - 1];
        if (gap > best_gap) {
            best_gap = gap;
            best_mid = angles[i - 1] + 0.5 * gap;
        }
    }
    if (best_gap < 0.5) fail(ErrorKind::InvalidArgument, "arg V_WKB winds around the origin");
    cut_ = best_mid;
    root_sign_ = 1.0;
    const cplx r = root(region.lo);
    const cplx p = principal_root(vwkb_(region.lo));
    if (std::abs(r - p) > std::abs(r + p)) root_sign_ = -1.0;
}

cplx WkbAnsatz::root(double x) const
{
    const cplx v = vwkb_(x);
    const double two_pi = 2.0 * std::numbers::pi;
    double theta = std::arg(v);
    while (theta > cut_) theta -= two_pi;
    while (theta <= cut_ - two_pi) theta += two_pi;
    return root_sign_ * std::polar(std::sqrt(std::abs(v)), 0.5 * theta);
}

cplx wkb_y(const WkbAnsatz& ansatz, double x)
{
    const PotentialJet j = checked_jet(ansatz.vwkb(), x);
    return static_cast<double>(ansatz.sign()) * ansatz.root(x) - j.d1 / (4.0 * j.v);
}

cplx vtilde_wkb(const WkbAnsatz& ansatz, double x)
{
    const PotentialJet j = checked_jet(ansatz.vwkb(), x);
    return j.v + (5.0 / 16.0) * j.d1 * j.d1 / (j.v * j.v) - j.d2 / (4.0 * j.v);
}

cplx vtilde_wkb_d1(const WkbAnsatz& ansatz, double x)
{
    const PotentialJet j = checked_jet(ansatz.vwkb(), x);
    const cplx v2 = j.v * j.v;
    return j.d1 + (7.0 / 8.0) * j.d1 * j.d2 / v2 - (5.0 / 8.0) * j.d1 * j.d1 * j.d1 / (v2 * j.v)
         - j.d3 / (4.0 * j.v);
}

double wkb_condition(const Potential& V, double x)
{
    const PotentialJet j = V.jet(x);
    if (std::abs(j.v) < zero_potential_eps) fail(ErrorKind::ZeroPotential, "V vanishes", x);
    return std::abs(j.d2 / (j.v * j.v)) + std::abs(j.d1 * j.d1 / (j.v * j.v * j.v));
}

AiryAnsatz::AiryAnsatz(LinearPotential va, double x0, Interval region)
    : va_(va), x0_(x0), region_(region)
{
    if (!(std::isfinite(region.lo) && std::isfinite(region.hi))) {
        fail(ErrorKind::InvalidArgument, "Airy region must be bounded");
    }
    const double T = std::max(std::abs(region.lo - x0), std::abs(region.hi - x0));
    const cplx a = va.a + va.b * x0;
    const cplx b = va.b;
    c1_ = {1.0, 0.0};
    c2_ = {0.0, 1.0};
    double max1 = 1.0;
    double max2 = T;
    double Tn = T;
    int quiet = 0;
    for (std::size_t n = 0;; ++n) {
        if (c1_.size() >= max_terms) {
            fail(ErrorKind::SeriesNotConverged, "Airy power series did not converge; split the region");
        }
        const double denom = static_cast<double>((n + 1) * (n + 2));
        const cplx prev1 = n >= 1 ? c1_[n - 1] : cplx(0.0, 0.0);
        const cplx prev2 = n >= 1 ? c2_[n - 1] : cplx(0.0, 0.0);
        c1_.push_back((a * c1_[n] + b * prev1) / denom);
        c2_.push_back((a * c2_[n] + b * prev2) / denom);
        Tn *= T;
        const double t1 = std::abs(c1_.back()) * Tn;
        const double t2 = std::abs(c2_.back()) * Tn;
        max1 = std::max(max1, t1);
        max2 = std::max(max2, t2);
        if (T == 0.0) break;
        quiet = (t1 < 1e-14 * max1 && t2 < 1e-14 * max2) ? quiet + 1 : 0;
        if (quiet >= 3 && n >= 6) break;
    }
}

AiryAnsatz::Values AiryAnsatz::eval(double x) const
{
    const double t = x - x0_;
    cplx p1 = 0.0, d1 = 0.0, p2 = 0.0, d2 = 0.0;
    for (std::size_t n = c1_.size(); n-- > 0;) {
        p1 = p1 * t + c1_[n];
        p2 = p2 * t + c2_[n];
        if (n >= 1) {
            d1 = d1 * t + static_cast<double>(n) * c1_[n];
            d2 = d2 * t + static_cast<double>(n) * c2_[n];
        }
    }
    return {p1, d1, p2, d2};
}

cplx AiryAnsatz::wronskian(double x) const
{
    const Values v = eval(x);
    return v.phi1 * v.dphi2 - v.dphi1 * v.phi2;
}

AiryAnsatz airy_basis(const LinearPotential& va, double x0, Interval region)
{
    return AiryAnsatz(va, x0, region);
}

Potential VwkbSpec::apply(const Potential& V) const
{
    Potential out = factor == cplx(1.0, 0.0) ? V : multiply(V, factor);
    if (shift != cplx(0.0, 0.0)) {
        // Affine modification: add a constant through a tabulation-free wrapper.
        struct Shifted final : detail::PotentialImpl {
            Potential base;
            cplx shift;
            Shifted(Potential b, cplx s) : base(std::move(b)), shift(s) {}
            PotentialJet jet(double x) const override
            {
                PotentialJet j = base.jet(x);
                j.v += shift;
                return j;
            }
            json to_json() const override
            {
                return {{"kind", "shifted"}, {"shift", complex_to_json(shift)}, {"base", base.to_json()}};
            }
        };
        out = Potential(std::make_shared<Shifted>(out, shift),
                        out.is_real() && shift.imag() == 0.0, out.domain());
    }
    return out;
}

json VwkbSpec::to_json() const
{
    if (shift == cplx(0.0, 0.0) && factor.imag() == 0.0 && factor.real() > 0.0 && factor.real() <= 1.0) {
        return {{"kind", "damp"}, {"factor", factor.real()}};
    }
    if (shift == cplx(0.0, 0.0)) return {{"kind", "multiply"}, {"factor", complex_to_json(factor)}};
    return {{"kind", "affine"}, {"factor", complex_to_json(factor)}, {"shift", complex_to_json(shift)}};
}

VwkbSpec VwkbSpec::from_json(const json& j)
{
    const std::string kind = j.at("kind").get<std::string>();
    VwkbSpec s;
    if (kind == "damp") {
        const double f = j.at("factor").get<double>();
        if (!(f > 0.0 && f <= 1.0)) fail(ErrorKind::ParseError, "damp factor must lie in (0, 1]");
        s.factor = f;
    } else if (kind == "multiply") {
        s.factor = complex_from_json(j.at("factor"));
    } else if (kind == "affine") {
        s.factor = complex_from_json(j.at("factor"));
        s.shift = complex_from_json(j.at("shift"));
    } else {
        fail(ErrorKind::ParseError, "unknown vwkb kind '" + kind + "'");
    }
    return s;
}

Interval RegionPlan::domain() const
{
    if (regions.empty()) fail(ErrorKind::InvalidArgument, "empty region plan");
    return {regions.front().interval.lo, regions.back().interval.hi};
}

std::vector<double> RegionPlan::breakpoints() const
{
    std::vector<double> out;
    for (std::size_t k = 1; k < regions.size(); ++k) out.push_back(regions[k].interval.lo);
    return out;
}

void RegionPlan::validate() const
{
    if (regions.empty()) fail(ErrorKind::InvalidArgument, "empty region plan");
    for (std::size_t k = 0; k < regions.size(); ++k) {
        const auto& r = regions[k];
        if (!(r.interval.hi > r.interval.lo)) fail(ErrorKind::InvalidArgument, "empty region", r.interval.lo);
        if (k > 0 && r.interval.lo != regions[k - 1].interval.hi) {
            fail(ErrorKind::InvalidArgument, "regions must share endpoints", r.interval.lo);
        }
        if (r.kind == RegionKind::Wkb && r.sign != 1 && r.sign != -1) {
            fail(ErrorKind::InvalidArgument, "WKB sign must be +1 or -1", r.interval.lo);
        }
    }
}

json RegionPlan::to_json() const
{
    json out = json::array();
    for (const auto& r : regions) {
        json j = {{"interval", {r.interval.lo, r.interval.hi}}};
        if (r.kind == RegionKind::Wkb) {
            j["kind"] = "wkb";
            j["sign"] = r.sign > 0 ? "+" : "-";
            j["vwkb"] = r.vwkb.to_json();
        } else {
            j["kind"] = "airy";
            j["taylor_at"] = r.taylor_at;
            j["b_re_offset"] = r.b_re_offset;
        }
        out.push_back(std::move(j));
    }
    return out;
}

RegionPlan RegionPlan::from_json(const json& j)
{
    RegionPlan plan;
    try {
        for (const auto& e : j) {
            RegionSpec r;
            r.interval = {e.at("interval").at(0).get<double>(), e.at("interval").at(1).get<double>()};
            const std::string kind = e.at("kind").get<std::string>();
            if (kind == "wkb") {
                r.kind = RegionKind::Wkb;
                const std::string sign = e.value("sign", std::string("+"));
                if (sign != "+" && sign != "-") fail(ErrorKind::ParseError, "sign must be \"+\" or \"-\"");
                r.sign = sign == "+" ? 1 : -1;
                if (e.contains("vwkb")) r.vwkb = VwkbSpec::from_json(e.at("vwkb"));
            } else if (kind == "airy") {
                r.kind = RegionKind::Airy;
                r.taylor_at = e.value("taylor_at", 0.5 * (r.interval.lo + r.interval.hi));
                r.b_re_offset = e.value("b_re_offset", 0.0);
            } else {
                fail(ErrorKind::ParseError, "unknown region kind '" + kind + "'");
            }
            plan.regions.push_back(r);
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, std::string("region plan: ") + e.what());
    }
    plan.validate();
    return plan;
}

cplx GluedApprox::wkb_phase(const WkbPiece& w, double x) const
{
    auto it = std::upper_bound(w.nodes.begin(), w.nodes.end(), x);
    std::size_t j = it == w.nodes.begin() ? 0 : static_cast<std::size_t>(it - w.nodes.begin()) - 1;
    j = std::min(j, w.nodes.size() - 1);
    if (w.nodes[j] == x) return w.phase[j];
    return w.phase[j] + gauss_legendre([&](double t) { return w.ansatz.root(t); }, w.nodes[j], x);
}

ApproxJet GluedApprox::jet(std::size_t piece, double x) const
{
    const Piece& pc = pieces_.at(piece);
    if (pc.wkb) {
        const WkbPiece& w = *pc.wkb;
        const PotentialJet j = checked_jet(w.ansatz.vwkb(), x);
        const cplx shift = -j.d1 / (4.0 * j.v);
        const cplx zeta = static_cast<double>(w.ansatz.sign()) * w.ansatz.root(x);
        const cplx y_main = zeta + shift;
        const cplx y_other = -zeta + shift;
        cplx y;
        if (w.q == cplx(0.0, 0.0)) {
            y = y_main;
        } else if (w.p == cplx(0.0, 0.0)) {
            y = y_other;
        } else {
            const cplx phase = static_cast<double>(w.ansatz.sign()) * wkb_phase(w, x);
            const cplx lm = std::log(w.p) + phase;
            const cplx lo = std::log(w.q) - phase;
            cplx num, den;
            if (lm.real() >= lo.real()) {
                const cplx r = std::exp(lo - lm);
                num = y_main + r * y_other;
                den = 1.0 + r;
            } else {
                const cplx r = std::exp(lm - lo);
                num = r * y_main + y_other;
                den = r + 1.0;
            }
            if (std::abs(den) < 1e-12) fail(ErrorKind::ZeroWavefunction, "glued wave function vanishes", x);
            y = num / den;
        }
        return {y, vtilde_wkb(w.ansatz, x), vtilde_wkb_d1(w.ansatz, x)};
    }
    const AiryPiece& a = *pc.airy;
    const AiryAnsatz::Values v = a.basis.eval(x);
    const cplx phi = v.phi1 + a.c2 * v.phi2;
    const cplx dphi = v.dphi1 + a.c2 * v.dphi2;
    if (std::abs(phi) <= 1e-14 * (std::abs(v.phi1) + std::abs(a.c2 * v.phi2))) {
        fail(ErrorKind::ZeroWavefunction, "glued wave function vanishes", x);
    }
    return {dphi / phi, a.basis.va()(x), a.basis.va().b};
}

std::vector<cplx> GluedApprox::vtilde_jumps() const
{
    std::vector<cplx> out;
    for (std::size_t k = 0; k + 1 < grid_.piece_count(); ++k) {
        const double b = grid_.piece_interval(k).hi;
        out.push_back(vtilde(k + 1, b) - vtilde(k, b));
    }
    return out;
}

GluedApprox glue(const Potential& V, const RegionPlan& plan, const Grid& grid, std::optional<cplx> seed_y)
{
    plan.validate();
    if (grid.piece_count() != plan.regions.size()) {
        fail(ErrorKind::InvalidGrid, "grid pieces do not match the region plan");
    }
    for (std::size_t k = 0; k < plan.regions.size(); ++k) {
        const Interval g = grid.piece_interval(k);
        const Interval r = plan.regions[k].interval;
        if (std::abs(g.lo - r.lo) > 1e-12 || std::abs(g.hi - r.hi) > 1e-12) {
            fail(ErrorKind::InvalidGrid, "grid breakpoints differ from region boundaries", r.lo);
        }
    }

    GluedApprox out(V, plan, grid);
    std::optional<cplx> incoming = seed_y;
    for (std::size_t k = 0; k < plan.regions.size(); ++k) {
        const RegionSpec& spec = plan.regions[k];
        const Interval region = grid.piece_interval(k);
        GluedApprox::Piece piece;
        if (spec.kind == RegionKind::Wkb) {
            WkbAnsatz ansatz(spec.vwkb.apply(V), spec.sign, region);
            GluedApprox::WkbPiece w{ansatz, 1.0, 0.0, {}, {}};
            if (incoming) {
                const cplx y_main = wkb_y(ansatz, region.lo);
                const cplx y_other = y_main - 2.0 * static_cast<double>(spec.sign) * ansatz.root(region.lo);
                w.p = *incoming - y_other;
                w.q = y_main - *incoming;
            }
            auto pts = grid.piece_points(k);
            w.nodes.assign(pts.begin(), pts.end());
            w.phase.assign(pts.size(), 0.0);
            for (std::size_t j = 1; j < pts.size(); ++j) {
                w.phase[j] = w.phase[j - 1]
                           + gauss_legendre([&](double t) { return ansatz.root(t); }, pts[j - 1], pts[j]);
            }
            piece.wkb = std::move(w);
        } else {
            const LinearPotential taylor = linearize_at(V, spec.taylor_at);
            const LinearPotential va = taylor.with_slope_offset(spec.b_re_offset, spec.taylor_at);
            AiryAnsatz basis = airy_basis(va, region.lo, region);
            piece.airy = GluedApprox::AiryPiece{std::move(basis), incoming.value_or(0.0)};
        }
        out.pieces_.push_back(std::move(piece));
        incoming = out.ytilde(k, region.hi);
    }

    out.y_ = sample<cplx>(grid, [&](std::size_t k, double x) { return out.jet(k, x).y; });
    out.vt_ = sample<cplx>(grid, [&](std::size_t k, double x) { return out.jet(k, x).vt; });
    out.alpha_.pieces.resize(grid.piece_count());
    out.beta_.pieces.resize(grid.piece_count());
    for (std::size_t k = 0; k < grid.piece_count(); ++k) {
        for (const cplx& y : out.y_.pieces[k]) {
            out.alpha_.pieces[k].push_back(y.real());
            out.beta_.pieces[k].push_back(y.imag());
        }
    }
    return out;
}

GluedApprox glue(const Potential& V, const RegionPlan& plan, const Grid& grid, cplx phi, cplx dphi)
{
    if (std::abs(phi) == 0.0) fail(ErrorKind::ZeroWavefunction, "seed wave function vanishes");
    return glue(V, plan, grid, std::optional<cplx>(dphi / phi));
}

}  // namespace riccati
