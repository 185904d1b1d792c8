#include "riccati/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>

namespace riccati {

using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double half_pi = std::numbers::pi / 2;

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

AlphaModel constant_alpha(double a)
{
    return [a](std::size_t, double) { return AlphaJet{a, 0.0, 0.0}; };
}

Grid single_piece_grid(const Scenario& s) { return Grid::uniform_pieces(s.domain.lo, s.domain.hi, s.grid_size); }

double param(const Scenario& s, const char* key)
{
    if (!s.params.contains(key)) fail(ErrorKind::InvalidArgument, std::string("scenario needs parameter '") + key + "'");
    return s.params.at(key).get<double>();
}

// Uniform grid over the plan, or, with "grid_extent", the nodes of the grid
// over [lo, grid_extent] that fall inside the domain.
Grid pipeline_grid(const Scenario& s)
{
    if (!s.params.contains("grid_extent")) {
        return Grid::uniform_pieces(s.domain.lo, s.domain.hi, s.grid_size, s.plan->breakpoints());
    }
    const double hi = s.params.at("grid_extent").get<double>();
    if (!(hi > s.domain.hi)) fail(ErrorKind::InvalidArgument, "grid extent must exceed the domain");
    std::vector<double> bps = s.plan->breakpoints();
    bps.push_back(s.domain.hi);
    const Grid full = Grid::uniform_pieces(s.domain.lo, hi, s.grid_size, bps);
    std::vector<double> pts;
    for (double x : full.points()) {
        if (x <= s.domain.hi) pts.push_back(x);
    }
    return Grid(std::move(pts), s.plan->breakpoints());
}

void require_real(const Scenario& s, const Grid& g)
{
    for (double x : g.points()) {
        if (s.potential(x).imag() != 0.0) fail(ErrorKind::InvalidArgument, "scenario needs a real potential", x);
    }
}

// Sign changes of beta - R and beta + R between consecutive points of one piece,
// attributed to the branch that carried the disk from the left point.
struct CrossingStats {
    int lower_crossings = 0;
    int lower_outside_B = 0;
    int upper_crossings = 0;
    int upper_outside_A = 0;
    std::optional<double> first_bad;
};

CrossingStats crossing_stats(const EstimateTrajectory& t)
{
    CrossingStats st;
    for (std::size_t i = 0; i + 1 < t.points.size(); ++i) {
        const auto& p = t.points[i];
        const auto& q = t.points[i + 1];
        if (p.piece != q.piece) continue;
        if ((p.beta - p.R > 0.0) != (q.beta - q.R > 0.0)) {
            ++st.lower_crossings;
            if (p.kind != Case::B) {
                ++st.lower_outside_B;
                if (!st.first_bad) st.first_bad = q.x;
            }
        }
        if ((p.beta + p.R > 0.0) != (q.beta + q.R > 0.0)) {
            ++st.upper_crossings;
            if (p.kind != Case::A) {
                ++st.upper_outside_A;
                if (!st.first_bad) st.first_bad = q.x;
            }
        }
    }
    return st;
}

struct Lemma1Summary {
    double worst = std::numeric_limits<double>::infinity();
    double where = 0.0;
    bool holds = true;
};

void add_lemma1(Lemma1Summary& sum, const EstimateTrajectory& t, const EstimateInputs& in)
{
    for (const auto& r : lemma1_residuals(t, in)) {
        if (r.margin < sum.worst) {
            sum.worst = r.margin;
            sum.where = r.x;
        }
        if (!r.holds()) sum.holds = false;
    }
}

std::vector<double> distinct_xs(const EstimateTrajectory& t)
{
    std::vector<double> xs;
    for (const auto& p : t.points) {
        if (xs.empty() || p.x > xs.back()) xs.push_back(p.x);
    }
    return xs;
}

// Index of the first point on the last piece.
std::size_t last_piece_start(const EstimateTrajectory& t)
{
    const std::size_t k = t.points.back().piece;
    for (std::size_t i = 0; i < t.points.size(); ++i) {
        if (t.points[i].piece == k) return i;
    }
    return 0;
}

std::size_t nearest_point(const EstimateTrajectory& t, double x)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < t.points.size(); ++i) {
        if (std::abs(t.points[i].x - x) < std::abs(t.points[best].x - x)) best = i;
    }
    return best;
}

// Oracle Im y at every trajectory point, started from the initial disk center.
std::vector<double> oracle_im_along(const EstimateTrajectory& t, const Potential& V, cplx y0)
{
    const std::vector<double> xs = distinct_xs(t);
    const OracleSolution sol = integrate_riccati(V, y0, xs, 1e-10);
    std::vector<double> out;
    std::size_t i = 0;
    for (const auto& p : t.points) {
        while (xs[i] < p.x) ++i;
        out.push_back(sol.y[i].imag());
    }
    return out;
}

// Bracket expressions of the V > 0 WKB hypothesis.
std::pair<double, double> wkb_positive_brackets(const PotentialJet& j)
{
    const double v = j.v.real(), d1 = j.d1.real(), d2 = j.d2.real(), d3 = j.d3.real();
    const double b1 = -0.625 * d1 * d1 / (v * v * v) + d2 / (2.0 * v * v);
    const double b2 = -(5.0 / 12.0) * d1 * d1 / (v * v * v) + 0.625 * d1 * d1 * d1 / std::pow(v, 4.5) +
                      d2 / (3.0 * v * v) - 0.75 * d1 * d2 / std::pow(v, 3.5) + d3 / (6.0 * std::pow(v, 2.5));
    return {b1, b2};
}

double wkb_negative_hypothesis(const PotentialJet& j)
{
    const double v = j.v.real(), d1 = j.d1.real(), d2 = j.d2.real();
    return -d2 / (4.0 * v * v) - 5.0 * d1 * d1 / (16.0 * std::pow(std::abs(v), 3));
}

}  // namespace

std::size_t default_grid_size()
{
    const char* env = std::getenv("RICCATI_GRID");
    if (!env || !*env) return 2048;
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (*end != '\0' || v < 64) fail(ErrorKind::InvalidArgument, "RICCATI_GRID must be an integer >= 64");
    return static_cast<std::size_t>(v);
}

std::string_view to_string(ScenarioKind k)
{
    switch (k) {
    case ScenarioKind::Pipeline: return "pipeline";
    case ScenarioKind::NegativeIncreasing: return "negative_increasing";
    case ScenarioKind::WkbNegative: return "wkb_negative";
    case ScenarioKind::ExponentialBound: return "exponential_bound";
    case ScenarioKind::WkbPositive: return "wkb_positive";
    }
    return "?";
}

ScenarioKind scenario_kind_from_string(const std::string& s)
{
    for (ScenarioKind k : {ScenarioKind::Pipeline, ScenarioKind::NegativeIncreasing, ScenarioKind::WkbNegative,
                           ScenarioKind::ExponentialBound, ScenarioKind::WkbPositive}) {
        if (to_string(k) == s) return k;
    }
    fail(ErrorKind::ParseError, "unknown scenario kind '" + s + "'");
}

json Scenario::to_json() const
{
    json j = {{"name", name},
              {"variant", variant},
              {"kind", std::string(to_string(kind))},
              {"potential", potential.to_json()},
              {"domain", {domain.lo, domain.hi}},
              {"policy", policy.to_json()},
              {"params", params},
              {"grid", grid_size},
              {"checks", checks}};
    j["plan"] = plan ? plan->to_json() : json(nullptr);
    return j;
}

Scenario Scenario::from_json(const json& j)
{
    try {
        Scenario s;
        s.name = j.at("name").get<std::string>();
        s.variant = j.value("variant", std::string());
        s.kind = scenario_kind_from_string(j.at("kind").get<std::string>());
        s.potential = potential_from_json(j.at("potential"));
        s.domain = {j.at("domain").at(0).get<double>(), j.at("domain").at(1).get<double>()};
        if (j.contains("plan") && !j.at("plan").is_null()) s.plan = RegionPlan::from_json(j.at("plan"));
        if (j.contains("policy")) s.policy = Policy::from_json(j.at("policy"));
        s.params = j.value("params", json::object());
        s.grid_size = j.value("grid", default_grid_size());
        s.checks = j.value("checks", std::vector<std::string>{});
        if (s.grid_size < 64) fail(ErrorKind::InvalidArgument, "grid size must be >= 64");
        if (!(s.domain.lo < s.domain.hi)) fail(ErrorKind::InvalidArgument, "empty scenario domain");
        if (s.kind == ScenarioKind::Pipeline) {
            if (!s.plan) fail(ErrorKind::ParseError, "pipeline scenario needs a plan");
            s.plan->validate();
            const Interval d = s.plan->domain();
            if (d.lo != s.domain.lo || d.hi != s.domain.hi) {
                fail(ErrorKind::InvalidArgument, "plan does not cover the scenario domain");
            }
        }
        return s;
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, std::string("scenario: ") + e.what());
    }
}

std::string_view to_string(Variant51 v)
{
    switch (v) {
    case Variant51::Baseline: return "baseline";
    case Variant51::Flipped: return "flipped";
    case Variant51::Thm2Tail: return "thm2_tail";
    }
    return "?";
}

Variant51 variant51_from_string(const std::string& s)
{
    for (Variant51 v : {Variant51::Baseline, Variant51::Flipped, Variant51::Thm2Tail}) {
        if (to_string(v) == s) return v;
    }
    fail(ErrorKind::InvalidArgument, "unknown example_5_1 variant '" + s + "'");
}

Scenario scenario_example_5_1(Variant51 variant, std::size_t grid_size)
{
    Scenario s;
    s.name = "example_5_1";
    s.variant = std::string(to_string(variant));
    s.kind = ScenarioKind::Pipeline;
    s.potential = make_sine_potential(10000.0, 0.05);
    s.domain = {0.0, half_pi};
    RegionSpec a{{0.0, 0.715}, RegionKind::Wkb, +1, {}, 0.0, 0.0};
    RegionSpec b{{0.715, 0.83}, RegionKind::Airy, +1, {}, pi / 4, 0.0};
    RegionSpec c{{0.83, half_pi}, RegionKind::Wkb, +1, {}, 0.0, 0.0};
    if (variant == Variant51::Flipped) c.vwkb.factor = 0.9;
    s.plan = RegionPlan{{a, b, c}};
    if (variant == Variant51::Thm2Tail) s.policy.piece_modes = {PieceMode::Auto, PieceMode::Auto, PieceMode::Thm2};
    s.params = {{"initial_R", 2.5}};
    s.grid_size = grid_size;
    s.checks = {"containment", "lemma1"};
    switch (variant) {
    case Variant51::Baseline:
        s.checks.insert(s.checks.end(), {"upper_half_plane", "lower_bound_converges"});
        break;
    case Variant51::Flipped:
        s.checks.insert(s.checks.end(),
                        {"upper_bound_converges", "radius_grows_toward_end", "lens_shrinks"});
        break;
    case Variant51::Thm2Tail: s.checks.push_back("beta_zero_in_tail"); break;
    }
    return s;
}

Example52Params example_5_2_defaults(const std::string& variant)
{
    Example52Params p;
    if (variant.empty() || variant == "baseline") return p;
    if (variant == "flipped") {
        p.wkb_c.factor = 1.1;
        p.variant = "flipped";
        return p;
    }
    if (variant == "uncalibrated") {
        p.taylor_at = pi / 4;
        p.airy_b_offset = 0.0;
        p.variant = "uncalibrated";
        return p;
    }
    fail(ErrorKind::InvalidArgument, "unknown example_5_2 variant '" + variant + "'");
}

namespace {

Scenario example_5_2_impl(const Example52Params& p, double offset, std::size_t grid_size, bool front)
{
    if (!(std::abs(offset) <= 0.3 + 1e-12)) fail(ErrorKind::InvalidArgument, "Airy slope offset must lie within 0.3 |b|");
    if (!(p.taylor_at >= 0.52 && p.taylor_at <= 0.83)) {
        fail(ErrorKind::InvalidArgument, "Taylor point must lie in the Airy region");
    }
    Scenario s;
    s.name = "example_5_2";
    s.variant = p.variant;
    s.kind = ScenarioKind::Pipeline;
    s.potential = make_sine_potential(500.0, -0.2);
    const LinearPotential lin = linearize_at(s.potential, p.taylor_at);
    RegionSpec a{{0.0, 0.52}, RegionKind::Wkb, +1, {}, 0.0, 0.0};
    RegionSpec b{{0.52, 0.83}, RegionKind::Airy, +1, {}, p.taylor_at, offset * std::abs(lin.b)};
    RegionSpec c{{0.83, half_pi}, RegionKind::Wkb, +1, p.wkb_c, 0.0, 0.0};
    s.grid_size = grid_size;
    if (front) {
        s.domain = {0.0, 0.83};
        s.plan = RegionPlan{{a, b}};
    } else {
        s.domain = {0.0, half_pi};
        s.plan = RegionPlan{{a, b, c}};
    }
    s.params = {{"initial_R", p.initial_R},
                {"airy_b_offset", offset},
                {"taylor_at", p.taylor_at},
                {"wkb_c", p.wkb_c.to_json()}};
    if (front) s.params["grid_extent"] = half_pi;
    // Regions (a) and (b) alone only reach the axis; the disk is below it in region (c).
    if (front) {
        s.checks = {"containment", "lemma1", "crossing_cases", "vtilde_close"};
    } else {
        s.checks = {"containment", "lemma1", "crosses_real_axis", "crossing_cases", "vtilde_close"};
        if (p.variant != "uncalibrated") s.checks.push_back("lens_insensitive");
    }
    return s;
}

}  // namespace

Scenario scenario_example_5_2(const Example52Params& params, std::size_t grid_size)
{
    return example_5_2_impl(params, params.airy_b_offset.value_or(example_5_2_calibrated_offset), grid_size, false);
}

Scenario example_5_2_front(const Example52Params& params, double offset, std::size_t grid_size)
{
    return example_5_2_impl(params, offset, grid_size, true);
}

json Calibration::to_json() const
{
    json c = json::array();
    for (const auto& k : candidates) c.push_back({{"offset", k.offset}, {"accepted", k.accepted}, {"reason", k.reason}});
    return {{"offset", offset}, {"candidates", c}};
}

Calibration calibrate_example_5_2(const Example52Params& base, std::size_t grid_size)
{
    Calibration cal;
    std::optional<double> best;
    for (int i = 0; i < 16; ++i) {
        CalibrationCandidate cand;
        cand.offset = static_cast<double>(2 * i - 15) / 50.0;
        try {
            const ScenarioEstimate est = estimate_scenario(example_5_2_front(base, cand.offset, grid_size));
            const CrossingStats st = crossing_stats(est.trajectory);
            if (st.lower_crossings == 0) {
                cand.reason = "beta - R never crosses zero";
            } else if (st.lower_outside_B > 0 || st.upper_outside_A > 0) {
                cand.reason = "crossing outside the required case at x = " + fmt(*st.first_bad);
            } else {
                cand.accepted = true;
                cand.reason = "ok";
            }
        } catch (const Error& e) {
            cand.reason = std::string(to_string(e.kind()));
            if (e.where()) cand.reason += " at x = " + fmt(*e.where());
        }
        if (cand.accepted && (!best || std::abs(cand.offset) < std::abs(*best))) best = cand.offset;
        cal.candidates.push_back(cand);
    }
    if (!best) fail(ErrorKind::CalibrationFailed, "no Airy slope offset yields the required case pattern");
    cal.offset = *best;
    return cal;
}

Scenario scenario_negative_increasing(const Potential& V, Interval domain, double c, std::size_t grid_size)
{
    Scenario s;
    s.name = "negative_increasing";
    s.variant = "default";
    s.kind = ScenarioKind::NegativeIncreasing;
    s.potential = V;
    s.domain = domain;
    s.params = {{"c", c}};
    s.grid_size = grid_size;
    s.checks = {"containment", "lemma1", "beta_plus_R_constant", "beta_minus_R_formula", "real_sign_preserved",
                "amplitude_relation"};
    const Grid g = single_piece_grid(s);
    require_real(s, g);
    for (double x : g.points()) {
        if (V(x).real() > 0.0 || V.d1(x).real() < 0.0) fail(ErrorKind::InvalidArgument, "needs V <= 0 and V' >= 0", x);
    }
    if (!(c > 0.0) || c * c < std::abs(V(domain.lo).real())) {
        fail(ErrorKind::ConstraintViolated, "c^2 must be at least |V(x0)|", domain.lo);
    }
    return s;
}

Scenario scenario_wkb_negative(const Potential& V, Interval domain, double T0, double lambda, std::size_t grid_size)
{
    if (!(lambda > 0.0)) fail(ErrorKind::InvalidArgument, "lambda must be positive");
    if (!(T0 >= 1.0)) fail(ErrorKind::InvalidArgument, "T0 must be >= 1");
    Scenario s;
    s.name = "wkb_negative";
    s.variant = "default";
    s.kind = ScenarioKind::WkbNegative;
    s.potential = lambda == 1.0 ? V : scale(V, lambda);
    s.domain = domain;
    s.params = {{"T0", T0}, {"lambda", lambda}};
    s.grid_size = grid_size;
    s.checks = {"containment", "lemma1", "hypothesis", "T_shrinks_with_lambda", "real_sign_preserved",
                "amplitude_relation"};
    const Grid g = single_piece_grid(s);
    require_real(s, g);
    for (double x : g.points()) {
        const PotentialJet j = s.potential.jet(x);
        if (!(j.v.real() < 0.0)) fail(ErrorKind::InvalidArgument, "needs V < 0", x);
        if (!(wkb_negative_hypothesis(j) < 1.0)) fail(ErrorKind::HypothesisViolated, "-V''/(4V^2) - 5V'^2/(16|V|^3) >= 1", x);
    }
    return s;
}

Scenario scenario_exponential_bound(const Potential& V, Interval domain, double c, double T0, std::size_t grid_size)
{
    if (!(c >= 0.0)) fail(ErrorKind::InvalidArgument, "c must be >= 0");
    if (!(T0 >= 1.0)) fail(ErrorKind::InvalidArgument, "T0 must be >= 1");
    Scenario s;
    s.name = "exponential_bound";
    s.variant = "default";
    s.kind = ScenarioKind::ExponentialBound;
    s.potential = V;
    s.domain = domain;
    s.params = {{"c", c}, {"T0", T0}};
    s.grid_size = grid_size;
    s.checks = {"containment", "lemma1", "U_below_minus_c2", "radius_grows_with_interval", "real_sign_preserved",
                "amplitude_relation"};
    require_real(s, single_piece_grid(s));
    return s;
}

Scenario scenario_wkb_positive(const Potential& V, Interval domain, double c1, double c2, std::size_t grid_size)
{
    Scenario s;
    s.name = "wkb_positive";
    s.variant = "default";
    s.kind = ScenarioKind::WkbPositive;
    s.potential = V;
    s.domain = domain;
    s.params = {{"vwkb_factor", 0.25}, {"c1", c1}, {"c2", c2}};
    s.grid_size = grid_size;
    s.checks = {"containment", "lemma1", "hypothesis", "lens_axis_points", "lens_thins", "real_sign_preserved",
                "amplitude_relation"};
    const Grid g = single_piece_grid(s);
    require_real(s, g);
    for (double x : g.points()) {
        const PotentialJet j = V.jet(x);
        if (!(j.v.real() > 0.0)) fail(ErrorKind::InvalidArgument, "needs V > 0", x);
        const auto [b1, b2] = wkb_positive_brackets(j);
        if (!(b1 > -1.0) || !(b2 > -1.0)) fail(ErrorKind::HypothesisViolated, "bracket <= -1", x);
    }
    return s;
}

AlphaModel wkb_alpha_model(const WkbAnsatz& ansatz)
{
    return [ansatz](std::size_t, double x) {
        const PotentialJet j = ansatz.vwkb().jet(x);
        if (std::abs(j.v) == 0.0) fail(ErrorKind::ZeroPotential, "V_WKB vanishes", x);
        const double s = ansatz.sign();
        const cplx r = ansatz.root(x);
        const cplx r1 = j.d1 / (2.0 * r);
        const cplx r2 = j.d2 / (2.0 * r) - j.d1 * j.d1 / (4.0 * r * r * r);
        const cplx v = j.v;
        const cplx L = j.d1 / v;
        const cplx L1 = j.d2 / v - j.d1 * j.d1 / (v * v);
        const cplx L2 = j.d3 / v - 3.0 * j.d1 * j.d2 / (v * v) + 2.0 * j.d1 * j.d1 * j.d1 / (v * v * v);
        return AlphaJet{(s * r - 0.25 * L).real(), (s * r1 - 0.25 * L1).real(), (s * r2 - 0.25 * L2).real()};
    };
}

ScenarioEstimate estimate_scenario(const Scenario& s)
{
    switch (s.kind) {
    case ScenarioKind::Pipeline: {
        if (!s.plan) fail(ErrorKind::InvalidArgument, "pipeline scenario needs a plan");
        s.plan->validate();
        Grid g = pipeline_grid(s);
        auto approx = std::make_shared<const GluedApprox>(glue(s.potential, *s.plan, g));
        EstimateInputs in = EstimateInputs::from_approx(approx);
        const double R = s.params.value("initial_R", 1.0);
        const double U0 = in.U(0, s.domain.lo);
        if (!(R > 0.0) || R * R < U0) fail(ErrorKind::InvalidArgument, "initial radius below sqrt(U(x0))", s.domain.lo);
        const Disk init({in.alpha(0, s.domain.lo).a, std::sqrt(R * R - U0)}, R);
        EstimateTrajectory t = evolve_pipeline(in, s.policy, init);
        return ScenarioEstimate{std::move(in), std::move(t), std::nullopt, init, approx};
    }
    case ScenarioKind::NegativeIncreasing: {
        const double c = param(s, "c");
        EstimateInputs in(s.potential, single_piece_grid(s), constant_alpha(0.0));
        const double q0 = std::abs(s.potential(s.domain.lo).real()) / c;
        if (q0 > c) fail(ErrorKind::ConstraintViolated, "c^2 must be at least |V(x0)|", s.domain.lo);
        const double beta0 = 0.5 * (c + q0);
        const double R0 = 0.5 * (c - q0);
        EstimateTrajectory t = thm1_evolve(in, 0, Branch::B, beta0, R0);
        const Disk init({0.0, beta0}, R0);
        return ScenarioEstimate{std::move(in), std::move(t), std::nullopt, init, nullptr};
    }
    case ScenarioKind::WkbNegative: {
        const WkbAnsatz ansatz(s.potential, +1, s.domain);
        EstimateInputs in(s.potential, single_piece_grid(s), wkb_alpha_model(ansatz));
        EstimateTrajectory t = lemma_inv_evolve(in, 0, param(s, "T0"), +1);
        const Disk init = t.points.front().disk();
        return ScenarioEstimate{std::move(in), std::move(t), std::nullopt, init, nullptr};
    }
    case ScenarioKind::ExponentialBound: {
        const Grid g = single_piece_grid(s);
        double sup = 0.0;
        for (double x : g.points()) sup = std::max(sup, std::sqrt(std::max(0.0, s.potential(x).real())));
        const double alpha = param(s, "c") + sup;
        EstimateInputs in(s.potential, g, constant_alpha(alpha));
        EstimateTrajectory t = lemma_inv_evolve(in, 0, param(s, "T0"), +1);
        t.constants["alpha"] = alpha;
        const Disk init = t.points.front().disk();
        return ScenarioEstimate{std::move(in), std::move(t), std::nullopt, init, nullptr};
    }
    case ScenarioKind::WkbPositive: {
        const VwkbSpec spec{param(s, "vwkb_factor"), 0.0};
        const WkbAnsatz ansatz(spec.apply(s.potential), +1, s.domain);
        EstimateInputs in(s.potential, single_piece_grid(s), wkb_alpha_model(ansatz));
        LensResult lens = lemma_inv2_lens(in, 0, s.params.value("c1", 0.0), s.params.value("c2", 0.0));
        const Disk init = lens.upper.points.front().disk();
        return ScenarioEstimate{std::move(in), std::move(lens.upper), std::move(lens.lower), init, nullptr};
    }
    }
    fail(ErrorKind::InvalidArgument, "unknown scenario kind");
}

Grid scenario_grid(const Scenario& s)
{
    if (s.kind == ScenarioKind::Pipeline) {
        if (!s.plan) fail(ErrorKind::InvalidArgument, "pipeline scenario needs a plan");
        return pipeline_grid(s);
    }
    return single_piece_grid(s);
}

std::vector<double> lens_radii(const EstimateTrajectory& a, const EstimateTrajectory& b)
{
    if (a.points.size() != b.points.size()) fail(ErrorKind::InvalidArgument, "trajectories differ in length");
    std::vector<double> out;
    out.reserve(a.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        if (a.points[i].x != b.points[i].x) fail(ErrorKind::InvalidArgument, "trajectories on different grids", a.points[i].x);
        out.push_back(lens_radius(a.points[i].disk(), b.points[i].disk()));
    }
    return out;
}

std::vector<double> lens_thickness(const EstimateTrajectory& upper, const EstimateTrajectory& lower)
{
    if (upper.points.size() != lower.points.size()) fail(ErrorKind::InvalidArgument, "trajectories differ in length");
    std::vector<double> out;
    out.reserve(upper.points.size());
    for (std::size_t i = 0; i < upper.points.size(); ++i) {
        const auto& a = upper.points[i];
        const auto& b = lower.points[i];
        out.push_back(a.U / (b.R - b.beta) + a.U / (a.R + a.beta));
    }
    return out;
}

double lens_overlap_fraction(const Disk& a1, const Disk& b1, const Disk& a2, const Disk& b2, int n)
{
    auto box = [](const Disk& a, const Disk& b) {
        return std::array<double, 4>{std::max(a.alpha() - a.radius(), b.alpha() - b.radius()),
                                     std::min(a.alpha() + a.radius(), b.alpha() + b.radius()),
                                     std::max(a.bottom(), b.bottom()), std::min(a.top(), b.top())};
    };
    const auto l1 = box(a1, b1);
    const auto l2 = box(a2, b2);
    const double x0 = std::min(l1[0], l2[0]), x1 = std::max(l1[1], l2[1]);
    const double y0 = std::min(l1[2], l2[2]), y1 = std::max(l1[3], l2[3]);
    if (!(x1 > x0) || !(y1 > y0)) return 0.0;
    long in1 = 0, in2 = 0, both = 0;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const cplx z(x0 + (x1 - x0) * (i + 0.5) / n, y0 + (y1 - y0) * (k + 0.5) / n);
            const bool p = disk_contains(a1, z) && disk_contains(b1, z);
            const bool q = disk_contains(a2, z) && disk_contains(b2, z);
            in1 += p;
            in2 += q;
            both += p && q;
        }
    }
    if (in1 == 0 || in2 == 0) return 0.0;
    return static_cast<double>(both) / static_cast<double>(std::max(in1, in2));
}

RealStructure real_potential_structure(const Potential& V, const std::vector<cplx>& seeds,
                                       std::span<const double> xs, double tol)
{
    RealStructure out;
    for (const cplx& y0 : seeds) {
        const double im0 = y0.imag();
        if (im0 == 0.0) continue;
        AmplitudeSolution sol;
        try {
            sol = integrate_riccati_amplitude(V, y0, xs, tol);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::BlowUp) throw;
            ++out.skipped;
            continue;
        }
        ++out.checked;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double im = sol.y[i].imag();
            if ((im > 0.0) != (im0 > 0.0) || im == 0.0) {
                out.sign_preserved = false;
                if (!out.first_sign_change) out.first_sign_change = xs[i];
            }
            const double inv = std::exp(sol.log_amp2[i]) * im;
            out.max_relative_drift = std::max(out.max_relative_drift, std::abs(inv - im0) / std::abs(im0));
        }
    }
    return out;
}

bool ScenarioRun::pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

json ScenarioRun::to_json() const
{
    json c = json::array();
    for (const auto& k : checks) {
        c.push_back({{"name", k.name}, {"kind", k.exact ? "exact" : "qualitative"}, {"pass", k.passed},
                     {"detail", k.detail}});
    }
    json j = {{"scenario", scenario.to_json()}, {"pass", pass()}, {"checks", c},
              {"constants", trajectory.constants}};
    j["containment"] = containment ? containment->to_json() : json(nullptr);
    if (containment_lower) j["containment_lower"] = containment_lower->to_json();
    return j;
}

namespace {

Scenario with_domain(Scenario s, Interval d)
{
    s.domain = d;
    return s;
}

struct CheckContext {
    const Scenario& s;
    const ScenarioEstimate& est;
    const ScenarioRun& run;
    const RunOptions& opt;
};

CheckResult evaluate_check(const std::string& name, const CheckContext& ctx)
{
    const Scenario& s = ctx.s;
    const EstimateTrajectory& t = ctx.est.trajectory;
    CheckResult r;
    r.name = name;
    auto result = [&](bool exact, bool ok, std::string detail) {
        r.exact = exact;
        r.passed = ok;
        r.detail = std::move(detail);
        return r;
    };

    if (name == "containment") {
        bool ok = ctx.run.containment && ctx.run.containment->pass;
        std::string d = ctx.run.containment ? "worst margin " + fmt(ctx.run.containment->worst_margin) : "no oracle";
        if (ctx.run.containment_lower) {
            ok = ok && ctx.run.containment_lower->pass;
            d += ", lower disk " + fmt(ctx.run.containment_lower->worst_margin);
        }
        return result(false, ok, d);
    }
    if (name == "lemma1") {
        Lemma1Summary sum;
        add_lemma1(sum, t, ctx.est.inputs);
        if (ctx.est.lower) add_lemma1(sum, *ctx.est.lower, ctx.est.inputs);
        return result(true, sum.holds, "min margin " + fmt(sum.worst) + " at x = " + fmt(sum.where));
    }
    if (name == "upper_half_plane") {
        for (const auto& p : t.points) {
            if (!(p.beta - p.R > 0.0)) return result(false, false, "beta - R <= 0 at x = " + fmt(p.x));
        }
        return result(false, true, "beta - R > 0 everywhere");
    }
    if (name == "lower_bound_converges" || name == "upper_bound_converges") {
        const std::vector<double> im = oracle_im_along(t, s.potential, ctx.est.initial.center());
        const bool lower = name == "lower_bound_converges";
        auto gap = [&](std::size_t i) {
            const auto& p = t.points[i];
            return lower ? im[i] - (p.beta - p.R) : (p.beta + p.R) - im[i];
        };
        const double g0 = gap(last_piece_start(t));
        const double g1 = gap(t.points.size() - 1);
        return result(false, g1 < 0.5 * g0 && g1 > -ctx.opt.containment_tol,
                      "gap " + fmt(g0) + " -> " + fmt(g1));
    }
    if (name == "radius_grows_toward_end") {
        const std::size_t i0 = last_piece_start(t);
        const double r0 = t.points[i0].R;
        const double r1 = t.points.back().R;
        const double rmid = t.points[(i0 + t.points.size() - 1) / 2].R;
        return result(false, r0 < rmid && rmid < r1, "R " + fmt(r0) + " -> " + fmt(rmid) + " -> " + fmt(r1));
    }
    if (name == "lens_shrinks") {
        const ScenarioEstimate other = estimate_scenario(scenario_example_5_1(Variant51::Baseline, s.grid_size));
        const std::vector<double> lr = lens_radii(other.trajectory, t);
        const std::size_t i0 = last_piece_start(t);
        const std::size_t i14 = nearest_point(t, 1.4);
        const double rmin = std::min(t.points[i14].R, other.trajectory.points[i14].R);
        const bool ok = lr[i14] >= 0.0 && lr[i14] < rmin && lr.back() < 0.5 * lr[i0];
        return result(false, ok,
                      "lens " + fmt(lr[i0]) + " -> " + fmt(lr.back()) + ", at 1.4 " + fmt(lr[i14]) + " vs " + fmt(rmin));
    }
    if (name == "beta_zero_in_tail") {
        for (std::size_t i = last_piece_start(t); i < t.points.size(); ++i) {
            if (t.points[i].beta != 0.0) return result(true, false, "beta != 0 at x = " + fmt(t.points[i].x));
        }
        return result(true, true, "beta = 0 on the last piece");
    }
    if (name == "crosses_real_axis") {
        const bool starts_above = t.points.front().beta - t.points.front().R > 0.0;
        const bool ends_below = std::any_of(t.points.begin(), t.points.end(),
                                            [](const TrajectoryPoint& p) { return p.beta + p.R < 0.0; });
        return result(false, starts_above && ends_below,
                      std::string("starts above: ") + (starts_above ? "yes" : "no") +
                          ", reaches lower half plane: " + (ends_below ? "yes" : "no"));
    }
    if (name == "crossing_cases") {
        const CrossingStats st = crossing_stats(t);
        const bool ok = st.lower_crossings > 0 && st.lower_outside_B == 0 && st.upper_outside_A == 0;
        return result(false, ok,
                      std::to_string(st.lower_crossings) + " lower and " + std::to_string(st.upper_crossings) +
                          " upper crossings, " + std::to_string(st.lower_outside_B + st.upper_outside_A) +
                          " in the wrong case");
    }
    if (name == "vtilde_close") {
        const GluedApprox& ap = *ctx.est.approx;
        const Grid& g = ap.grid();
        double vmax = 0.0;
        for (double x : g.points()) vmax = std::max(vmax, std::abs(s.potential(x)));
        double worst = 0.0, where = 0.0;
        for (std::size_t k = 0; k < g.piece_count(); ++k) {
            if (ap.plan().regions[k].kind != RegionKind::Wkb) continue;
            auto pts = g.piece_points(k);
            for (std::size_t j = 0; j < pts.size(); ++j) {
                const double d = std::abs(ap.vtilde().at(k, j) - s.potential(pts[j]));
                if (d > worst) {
                    worst = d;
                    where = pts[j];
                }
            }
        }
        return result(false, worst <= 0.1 * vmax,
                      "max |V~ - V| " + fmt(worst) + " at x = " + fmt(where) + ", limit " + fmt(0.1 * vmax));
    }
    if (name == "lens_insensitive") {
        const double off = s.params.at("airy_b_offset").get<double>();
        const double taylor = s.params.at("taylor_at").get<double>();
        auto variant_pair = [&](double o) {
            Example52Params b = example_5_2_defaults("baseline");
            Example52Params f = example_5_2_defaults("flipped");
            b.taylor_at = f.taylor_at = taylor;
            b.airy_b_offset = f.airy_b_offset = o;
            b.initial_R = f.initial_R = s.params.value("initial_R", 1.0);
            return std::make_pair(estimate_scenario(scenario_example_5_2(b, s.grid_size)).trajectory,
                                  estimate_scenario(scenario_example_5_2(f, s.grid_size)).trajectory);
        };
        const auto p1 = variant_pair(off);
        const auto p2 = variant_pair(off - 0.04);
        const std::size_t i0 = last_piece_start(p1.first);
        const std::size_t n = p1.first.points.size();
        double worst = 1.0;
        for (int k = 0; k < 10; ++k) {
            const std::size_t i = i0 + (n - 1 - i0) * static_cast<std::size_t>(k) / 9;
            worst = std::min(worst, lens_overlap_fraction(p1.first.points[i].disk(), p1.second.points[i].disk(),
                                                          p2.first.points[i].disk(), p2.second.points[i].disk()));
        }
        return result(false, worst >= 0.95, "min area overlap " + fmt(worst));
    }
    if (name == "beta_plus_R_constant" || name == "beta_minus_R_formula") {
        const double c = param(s, "c");
        double worst = 0.0, where = 0.0;
        for (const auto& p : t.points) {
            const double d = name == "beta_plus_R_constant"
                                 ? std::abs(p.beta + p.R - c)
                                 : std::abs(p.beta - p.R - std::abs(s.potential(p.x).real()) / c);
            if (d > worst) {
                worst = d;
                where = p.x;
            }
        }
        return result(true, worst <= 1e-9, "max deviation " + fmt(worst) + " at x = " + fmt(where));
    }
    if (name == "hypothesis") {
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& p : t.points) {
            const PotentialJet j = s.potential.jet(p.x);
            if (s.kind == ScenarioKind::WkbNegative) {
                worst = std::min(worst, 1.0 - wkb_negative_hypothesis(j));
            } else {
                const auto [b1, b2] = wkb_positive_brackets(j);
                worst = std::min({worst, b1 + 1.0, b2 + 1.0});
            }
        }
        return result(true, worst > 0.0, "min slack " + fmt(worst));
    }
    if (name == "T_shrinks_with_lambda") {
        const double lambda = param(s, "lambda");
        const Scenario big = scenario_wkb_negative(s.potential, s.domain, param(s, "T0"), 10.0, s.grid_size);
        const ScenarioEstimate e = estimate_scenario(big);
        const double tv0 = t.constants.at("total_variation").get<double>();
        const double tv1 = e.trajectory.constants.at("total_variation").get<double>();
        return result(false, tv1 < tv0,
                      "TV " + fmt(tv0) + " at lambda " + fmt(lambda) + ", " + fmt(tv1) + " at " + fmt(10.0 * lambda));
    }
    if (name == "U_below_minus_c2") {
        const double c = param(s, "c");
        for (const auto& p : t.points) {
            if (!(p.U < -c * c)) return result(true, false, "U >= -c^2 at x = " + fmt(p.x));
        }
        return result(true, true, "U < -c^2 everywhere");
    }
    if (name == "radius_grows_with_interval") {
        const Interval half{0.5 * (s.domain.lo + s.domain.hi), s.domain.hi};
        const ScenarioEstimate e = estimate_scenario(with_domain(s, half));
        const double r_full = t.points.back().R;
        const double r_half = e.trajectory.points.back().R;
        return result(false, r_full > r_half,
                      "R(x1) " + fmt(r_full) + " from x0 = " + fmt(s.domain.lo) + ", " + fmt(r_half) + " from " +
                          fmt(half.lo));
    }
    if (name == "lens_axis_points") {
        double worst = 0.0, where = 0.0;
        for (const EstimateTrajectory* tr : {&t, &*ctx.est.lower}) {
            for (const auto& p : tr->points) {
                for (double sgn : {-1.0, 1.0}) {
                    const cplx z(p.alpha + sgn * std::sqrt(p.U), 0.0);
                    const double d = std::abs(std::abs(z - cplx(p.alpha, p.beta)) - p.R) / std::max(1.0, p.R);
                    if (d > worst) {
                        worst = d;
                        where = p.x;
                    }
                }
            }
        }
        return result(true, worst <= 1e-9, "max distance / max(1, R) " + fmt(worst) + " at x = " + fmt(where));
    }
    if (name == "lens_thins") {
        const std::vector<double> th = lens_thickness(t, *ctx.est.lower);
        const double mid = th[th.size() / 2];
        return result(false, th.back() < 0.5 * mid && mid < 0.5 * th.front(),
                      "thickness " + fmt(th.front()) + " -> " + fmt(mid) + " -> " + fmt(th.back()));
    }
    if (name == "real_sign_preserved" || name == "amplitude_relation") {
        std::vector<cplx> seeds = boundary_seeds(ctx.est.initial, ctx.opt.seeds);
        if (ctx.est.lower) {
            const auto more = boundary_seeds(ctx.est.lower->points.front().disk(), ctx.opt.seeds);
            seeds.insert(seeds.end(), more.begin(), more.end());
        }
        const std::vector<double> xs = distinct_xs(t);
        const RealStructure rs = real_potential_structure(s.potential, seeds, xs, 1e-10);
        if (name == "real_sign_preserved") {
            return result(true, rs.sign_preserved && rs.checked > 0,
                          std::to_string(rs.checked) + " seeds" +
                              (rs.first_sign_change ? ", sign change at x = " + fmt(*rs.first_sign_change) : ""));
        }
        return result(true, rs.checked > 0 && rs.max_relative_drift <= 1e-6,
                      "max relative drift " + fmt(rs.max_relative_drift));
    }
    fail(ErrorKind::InvalidArgument, "unknown check '" + name + "'");
}

bool needs_oracle(const std::string& name)
{
    return name == "containment" || name == "lower_bound_converges" || name == "upper_bound_converges" ||
           name == "real_sign_preserved" || name == "amplitude_relation";
}

}  // namespace

ScenarioRun run_scenario(const Scenario& s, const RunOptions& opt)
{
    if (opt.seeds < 4) fail(ErrorKind::InvalidArgument, "at least 4 seeds are required");
    ScenarioEstimate est = estimate_scenario(s);
    ScenarioRun run;
    run.scenario = s;
    run.trajectory = est.trajectory;
    run.lower = est.lower;
    run.initial = est.initial;
    if (opt.with_oracle) {
        run.containment =
            containment_report(est.trajectory, s.potential, boundary_seeds(est.initial, opt.seeds), opt.containment_tol);
        if (est.lower) {
            const Disk d = est.lower->points.front().disk();
            run.containment_lower =
                containment_report(*est.lower, s.potential, boundary_seeds(d, opt.seeds), opt.containment_tol);
        }
    }
    const CheckContext ctx{s, est, run, opt};
    for (const std::string& name : s.checks) {
        if (!opt.with_oracle && needs_oracle(name)) continue;
        run.checks.push_back(evaluate_check(name, ctx));
    }
    return run;
}

std::vector<RegistryEntry> scenario_registry()
{
    return {
        {"example_5_1", {"baseline", "flipped", "thm2_tail"}, "V = 10000(-1/2 + (1 + 0.05i) sin^2 x), glued WKB/Airy"},
        {"example_5_2", {"baseline", "flipped", "uncalibrated"},
         "V = 500(-1/2 + (1 - 0.2i) sin^2 x), Riccati solution crosses the real axis"},
        {"negative_increasing", {"default"}, "V <= 0, V' >= 0, alpha = 0, beta + R = c"},
        {"wkb_negative", {"default"}, "V < 0, alpha = -V'/(4V), total-variation disks"},
        {"exponential_bound", {"default"}, "alpha = c + sup sqrt(max(0, V)), total-variation disks"},
        {"wkb_positive", {"default"}, "V > 0, V_WKB = V/4, lens of two disks"},
    };
}

Scenario make_scenario(const std::string& name, const std::string& variant, const json& overrides,
                       std::size_t grid_size)
{
    auto get = [&](const char* key, double def) { return overrides.contains(key) ? overrides.at(key).get<double>() : def; };
    if (grid_size < 64) fail(ErrorKind::InvalidArgument, "grid size must be >= 64");
    const bool plain = variant.empty() || variant == "default";
    if (name == "example_5_1") {
        Scenario s = scenario_example_5_1(variant51_from_string(variant.empty() ? "baseline" : variant), grid_size);
        s.params["initial_R"] = get("initial_R", 2.5);
        return s;
    }
    if (name == "example_5_2") {
        Example52Params p = example_5_2_defaults(variant);
        if (overrides.contains("airy_b_offset")) p.airy_b_offset = overrides.at("airy_b_offset").get<double>();
        p.initial_R = get("initial_R", p.initial_R);
        p.taylor_at = get("taylor_at", p.taylor_at);
        return scenario_example_5_2(p, grid_size);
    }
    if (!plain) fail(ErrorKind::InvalidArgument, "scenario '" + name + "' has no variant '" + variant + "'");
    if (name == "negative_increasing") {
        return scenario_negative_increasing(make_linear_potential({-2.0, 1.0}), {0.0, 1.0}, get("c", 1.5), grid_size);
    }
    if (name == "wkb_negative") {
        return scenario_wkb_negative(make_sine_potential(10000.0, 0.0), {0.0, 0.6}, get("T0", 2.0), get("lambda", 1.0),
                                     grid_size);
    }
    if (name == "exponential_bound") {
        return scenario_exponential_bound(make_sine_potential(10000.0, 0.0), {0.6, 0.9}, get("c", 5.0), get("T0", 2.0),
                                          grid_size);
    }
    if (name == "wkb_positive") {
        return scenario_wkb_positive(make_trig_potential(300.0, 500.0), {0.3, 1.2}, get("c1", 0.0), get("c2", 0.0),
                                     grid_size);
    }
    fail(ErrorKind::InvalidArgument, "unknown scenario '" + name + "'");
}

}  // namespace riccati
