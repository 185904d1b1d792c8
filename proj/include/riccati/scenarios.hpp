#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "riccati/approximants.hpp"
#include "riccati/invariant_disks.hpp"
#include "riccati/oracle.hpp"
#include "riccati/potential.hpp"

namespace riccati {

/// Grid size used by scenarios unless overridden: $RICCATI_GRID or 2048.
std::size_t default_grid_size();

enum class ScenarioKind { Pipeline, NegativeIncreasing, WkbNegative, ExponentialBound, WkbPositive };

std::string_view to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& s);

/// Executable description of one worked example.
///
/// Pipeline scenarios carry a region plan and a policy; the others carry an
/// analytic alpha choice described by `params`:
///   NegativeIncreasing: {"c"}
///   WkbNegative:        {"T0", "lambda"}
///   ExponentialBound:   {"c", "T0"}
///   WkbPositive:        {"vwkb_factor", "c1", "c2"}
///   Pipeline:           {"initial_R"}
struct Scenario {
    std::string name;
    std::string variant;
    ScenarioKind kind = ScenarioKind::Pipeline;
    Potential potential = make_constant_potential(0.0);
    Interval domain;
    std::optional<RegionPlan> plan;
    Policy policy;
    nlohmann::json params = nlohmann::json::object();
    std::size_t grid_size = 2048;
    /// Names of the assertions run_scenario evaluates.
    std::vector<std::string> checks;

    nlohmann::json to_json() const;
    static Scenario from_json(const nlohmann::json& j);
};

enum class Variant51 { Baseline, Flipped, Thm2Tail };

std::string_view to_string(Variant51 v);
Variant51 variant51_from_string(const std::string& s);

Scenario scenario_example_5_1(Variant51 variant, std::size_t grid_size = default_grid_size());

struct Example52Params {
    /// Airy slope offset as a multiple of |b|; unset selects the calibrated value.
    std::optional<double> airy_b_offset;
    /// V_WKB in region (c).
    VwkbSpec wkb_c;
    double taylor_at = 0.675;
    double initial_R = 1.0;
    /// Tag stored in the scenario, "baseline" or "flipped".
    std::string variant = "baseline";
};

/// Calibrated Airy slope offset (multiple of |b|) shipped as the default.
inline constexpr double example_5_2_calibrated_offset = -0.06;

/// example_5_2 defaults for "baseline" (V_WKB = V in region (c)) and
/// "flipped" (V_WKB = 1.1 V in region (c)).
Example52Params example_5_2_defaults(const std::string& variant);

Scenario scenario_example_5_2(const Example52Params& params, std::size_t grid_size = default_grid_size());

struct CalibrationCandidate {
    double offset = 0.0;
    bool accepted = false;
    std::string reason;
};

struct Calibration {
    double offset = 0.0;
    std::vector<CalibrationCandidate> candidates;

    nlohmann::json to_json() const;
};

/// Sweeps 16 offsets evenly over [-0.3, 0.3] |b| on regions (a) and (b) and
/// keeps those for which the pipeline reaches the end of region (b), starts
/// region (b) or switches into case B there, and lets beta - R cross zero
/// only under case B. Returns the accepted offset of least magnitude.
/// Throws CalibrationFailed if none is accepted.
Calibration calibrate_example_5_2(const Example52Params& base, std::size_t grid_size = default_grid_size());

/// Regions (a) and (b) of example_5_2 only, as used by the calibration.
Scenario example_5_2_front(const Example52Params& params, double offset, std::size_t grid_size);

/// alpha = 0, W = U = V on [x0, x1]; branch B with beta + R = c.
/// Throws ConstraintViolated if c^2 < |V(x0)| and InvalidArgument unless
/// V <= 0 and V' >= 0 on the grid.
Scenario scenario_negative_increasing(const Potential& V, Interval domain, double c,
                                      std::size_t grid_size = default_grid_size());

/// alpha = -V'/(4V) with the total-variation disks; V = lambda * V_base.
Scenario scenario_wkb_negative(const Potential& V, Interval domain, double T0, double lambda = 1.0,
                               std::size_t grid_size = default_grid_size());

/// alpha = c + sup sqrt(max(0, V)) with the total-variation disks.
Scenario scenario_exponential_bound(const Potential& V, Interval domain, double c, double T0 = 1.0,
                                    std::size_t grid_size = default_grid_size());

/// alpha from the WKB ansatz with V_WKB = V/4 and the lens of two disks.
Scenario scenario_wkb_positive(const Potential& V, Interval domain, double c1 = 0.0, double c2 = 0.0,
                               std::size_t grid_size = default_grid_size());

/// Re y of the WKB ansatz (sign * sqrt(V_WKB) - V_WKB'/(4 V_WKB)) with two
/// analytic derivatives.
AlphaModel wkb_alpha_model(const WkbAnsatz& ansatz);

struct CheckResult {
    std::string name;
    /// Algebraic identity rather than a qualitative shape claim.
    bool exact = false;
    bool passed = false;
    std::string detail;
};

struct ScenarioRun {
    Scenario scenario;
    EstimateTrajectory trajectory;
    /// Second disk of a lens scenario.
    std::optional<EstimateTrajectory> lower;
    Disk initial;
    std::optional<ContainmentReport> containment;
    std::optional<ContainmentReport> containment_lower;
    std::vector<CheckResult> checks;

    bool pass() const;
    nlohmann::json to_json() const;
};

struct RunOptions {
    std::size_t seeds = 16;
    double containment_tol = 1e-4;
    bool with_oracle = true;
};

/// Builds the estimate, runs the oracle containment and evaluates the checks.
/// Engine errors propagate.
ScenarioRun run_scenario(const Scenario& s, const RunOptions& opt = {});

/// Estimate only: the inputs and the trajectory (plus the lower disk for lens
/// scenarios).
struct ScenarioEstimate {
    EstimateInputs inputs;
    EstimateTrajectory trajectory;
    std::optional<EstimateTrajectory> lower;
    Disk initial;
    std::shared_ptr<const GluedApprox> approx;
};
ScenarioEstimate estimate_scenario(const Scenario& s);

/// Grid the estimate of `s` runs on.
Grid scenario_grid(const Scenario& s);

/// Registered names with their variants, e.g. "example_5_1" -> {baseline, flipped, thm2_tail}.
struct RegistryEntry {
    std::string name;
    std::vector<std::string> variants;
    std::string summary;
};
std::vector<RegistryEntry> scenario_registry();

/// Default scenario for a registered name; `overrides` may set "c", "T0",
/// "lambda", "c1", "c2", "airy_b_offset", "initial_R" where meaningful.
Scenario make_scenario(const std::string& name, const std::string& variant = "",
                       const nlohmann::json& overrides = nlohmann::json::object(),
                       std::size_t grid_size = default_grid_size());

/// Radius of the smallest circle around the intersection of the two disks
/// at every common point (both trajectories on the same grid).
std::vector<double> lens_radii(const EstimateTrajectory& a, const EstimateTrajectory& b);

/// Vertical extent of the lens of the two disks of a V > 0 scenario, from
/// top of the lower disk U/(R - beta) and bottom of the upper one -U/(R + beta).
std::vector<double> lens_thickness(const EstimateTrajectory& upper, const EstimateTrajectory& lower);

/// Area of (a1 & b1) & (a2 & b2) over the larger of the two lens areas,
/// estimated on an n x n sample grid over their bounding box.
double lens_overlap_fraction(const Disk& a1, const Disk& b1, const Disk& a2, const Disk& b2, int n = 400);

/// Real V: Im y keeps its sign and |phi|^2 Im y stays equal to Im y(x0) for
/// every seed off the real axis. Seeds that blow up are skipped.
struct RealStructure {
    bool sign_preserved = true;
    std::optional<double> first_sign_change;
    double max_relative_drift = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
};
RealStructure real_potential_structure(const Potential& V, const std::vector<cplx>& seeds,
                                       std::span<const double> xs, double tol = 1e-10);

}  // namespace riccati
