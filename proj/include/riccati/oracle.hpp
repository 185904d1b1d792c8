#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "riccati/core.hpp"
#include "riccati/invariant_disks.hpp"
#include "riccati/potential.hpp"

namespace riccati {

/// Reference solution sampled at the requested points.
struct OracleSolution {
    std::vector<double> x;
    std::vector<cplx> y;
    double tol = 0.0;
    std::string method = "dopri5";
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    /// Largest normalized local error estimate over accepted steps (<= 1).
    double max_error = 0.0;
};

struct SchrodingerSolution {
    std::vector<double> x;
    std::vector<cplx> phi;
    std::vector<cplx> dphi;
    double tol = 0.0;

    /// phi'/phi at sample i; throws ZeroWavefunction where phi vanishes.
    cplx y(std::size_t i) const;
};

/// y' = V - y^2 from y(xs[0]) = y0 with Dormand-Prince 5(4) and PI step
/// control; every sample point is hit exactly. tol in [1e-13, 1e-6] is used
/// as both absolute and relative tolerance. Throws BlowUp when |y| > 1e8.
OracleSolution integrate_riccati(const Potential& V, cplx y0, std::span<const double> xs, double tol);

/// Riccati solution together with log|phi|^2 = 2 int Re y, integrated as one
/// system so that |phi|^2 Im y can be checked along the way.
struct AmplitudeSolution {
    std::vector<double> x;
    std::vector<cplx> y;
    std::vector<double> log_amp2;
};
AmplitudeSolution integrate_riccati_amplitude(const Potential& V, cplx y0, std::span<const double> xs,
                                              double tol);

/// phi'' = V phi from (phi0, phi0') at xs[0], same integrator.
SchrodingerSolution integrate_schrodinger(const Potential& V, cplx phi0, cplx dphi0,
                                          std::span<const double> xs, double tol);

/// n points on the boundary of d, starting at angle 0.
std::vector<cplx> boundary_seeds(const Disk& d, std::size_t n);

struct SeedResult {
    cplx seed;
    /// min over the trajectory of R - |y - m|.
    double worst_margin = 0.0;
    double worst_x = 0.0;
    std::optional<double> first_failure_x;
    bool via_schrodinger = false;
};

struct ContainmentReport {
    std::vector<SeedResult> seeds;
    double worst_margin = 0.0;
    std::optional<double> first_failure_x;
    bool pass = false;
    double tol = 0.0;

    nlohmann::json to_json() const;
};

/// Integrates every seed from the first trajectory point and compares with
/// every trajectory disk. A seed whose Riccati solution exceeds |y| = 1e4 or
/// blows up is redone through the Schrodinger form. pass iff every margin is
/// >= -tol.
ContainmentReport containment_report(const EstimateTrajectory& traj, const Potential& V,
                                     const std::vector<cplx>& seeds, double tol,
                                     double oracle_tol = 1e-10);

}  // namespace riccati
