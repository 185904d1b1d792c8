#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "riccati/approximants.hpp"
#include "riccati/core.hpp"
#include "riccati/potential.hpp"

namespace riccati {

/// alpha and its first two derivatives at one point of a smooth piece.
struct AlphaJet {
    double a = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// W and W' at one point of a smooth piece.
struct WJet {
    double w = 0.0;
    double d1 = 0.0;
};

using AlphaModel = std::function<AlphaJet(std::size_t piece, double x)>;
using WModel = std::function<WJet(std::size_t piece, double x)>;

/// Everything the estimates need on a grid: the true potential, alpha with
/// analytic derivatives, W (default W = U), U = Re V - alpha^2 - alpha' and
/// log sigma = int_{x0}^x 2 alpha.
class EstimateInputs {
public:
    /// An empty W model selects W = U.
    EstimateInputs(Potential V, Grid grid, AlphaModel alpha, WModel W = {});

    /// alpha = Re y~ of a glued approximation, W = U.
    static EstimateInputs from_approx(std::shared_ptr<const GluedApprox> approx);

    const Potential& potential() const { return V_; }
    const Grid& grid() const { return grid_; }
    const GluedApprox* approx() const { return approx_.get(); }
    bool w_is_u() const { return !W_; }

    AlphaJet alpha(std::size_t piece, double x) const { return alpha_(piece, x); }
    double U(std::size_t piece, double x) const;
    double U_d1(std::size_t piece, double x) const;
    WJet W(std::size_t piece, double x) const;
    double log_sigma(std::size_t piece, double x) const;

    /// Grid samples, stored per piece.
    const PiecewiseSamples<double>& alpha_samples() const { return alpha_s_; }
    const PiecewiseSamples<double>& U_samples() const { return U_s_; }
    const PiecewiseSamples<double>& W_samples() const { return W_s_; }
    const PiecewiseSamples<double>& log_sigma_samples() const { return log_sigma_s_; }

private:
    Potential V_;
    Grid grid_;
    AlphaModel alpha_;
    WModel W_;
    std::shared_ptr<const GluedApprox> approx_;
    PiecewiseSamples<double> alpha_s_;
    PiecewiseSamples<double> U_s_;
    PiecewiseSamples<double> W_s_;
    PiecewiseSamples<double> log_sigma_s_;
};

/// AlphaModel of alpha = Re y~.
AlphaModel alpha_from_approx(std::shared_ptr<const GluedApprox> approx);

/// Re V - alpha^2 - alpha' pointwise.
PiecewiseSamples<double> compute_U(const Grid& grid, const Potential& V,
                                   const PiecewiseSamples<double>& alpha,
                                   const PiecewiseSamples<double>& alpha_d1);

/// 2 alpha W + W'/2 - R |W - U| + beta Im V.
double determinator(const EstimateInputs& in, std::size_t piece, double x, double beta, double R);

/// 2 alpha Re(V - V~) + Re(V - V~)'/2 - beta~ Im V~ + beta Im V, valid for
/// alpha = Re y~ and W = U.
double determinator_via_approx(const GluedApprox& approx, const Potential& V, std::size_t piece,
                               double x, double beta);

enum class Case { A, B, Thm2, Lens };

std::string_view to_string(Case c);

struct TrajectoryPoint {
    double x = 0.0;
    std::size_t piece = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double R = 0.0;
    double D = 0.0;
    Case kind = Case::A;
    /// First point of a piece reached through a disk jump.
    bool jump = false;
    /// Analytic derivatives of R and beta on the piece.
    double dR = 0.0;
    double dbeta = 0.0;
    double U = 0.0;
    double W = 0.0;

    Disk disk() const { return Disk({alpha, beta}, R); }
};

/// Per-point record over the whole grid. Breakpoints appear twice: once as
/// the last point of the left piece and once as the first of the right one.
struct EstimateTrajectory {
    std::vector<TrajectoryPoint> points;
    nlohmann::json constants = nlohmann::json::object();

    std::vector<TrajectoryPoint> piece_points(std::size_t piece) const;
};

/// Real-centered disks on one piece: R = sqrt(W), m = alpha. Throws ConditionViolated at
/// the first grid point where 2 alpha W + W'/2 - sqrt(W)(|W-U| + |Im V|) < 0
/// or W <= 0. `W` overrides the inputs' W.
EstimateTrajectory thm2_evolve(const EstimateInputs& in, std::size_t piece, const WModel& W = {});

/// W = s^2 where s solves s' = (1 + slack)(|s^2 - U| + |Im V|) + slack - 2 alpha s
/// from s = R0 at the left end of the piece, so that the real-centered condition
/// holds with a small margin. Only defined at the grid points of the piece.
WModel thm2_minimal_W(const EstimateInputs& in, std::size_t piece, double R0, double slack = 1e-9);

enum class Branch { A, B };

/// A/B estimate on one piece from (beta0, R0) at its left end, which must satisfy
/// R0^2 - beta0^2 = W. Branch A integrates R - beta, branch B integrates
/// R + beta. Throws ZeroCrossing, NegativeRadius or ConsistencyViolated.
EstimateTrajectory thm1_evolve(const EstimateInputs& in, std::size_t piece, Branch branch,
                               double beta0, double R0, double consistency_tol = 1e-9);

/// T(x) = T0 exp(TV_[x0,x) log|sigma^2 U| / 2) on one piece with U < 0;
/// beta = half_plane * sqrt|U| (T + 1/T)/2, R = sqrt|U| (T - 1/T)/2.
/// Throws SignViolation if U >= 0 somewhere.
EstimateTrajectory lemma_inv_evolve(const EstimateInputs& in, std::size_t piece, double T0,
                                    int half_plane = +1);

/// TV of log|sigma^2 U| over [x_first, x] for every grid point of the piece,
/// with the sign changes of its derivative located inside each interval.
std::vector<double> log_sigma2U_variation(const EstimateInputs& in, std::size_t piece);

struct LensResult {
    EstimateTrajectory upper;
    EstimateTrajectory lower;
    double c1 = 0.0;
    double c2 = 0.0;
};

/// The two disks whose intersection is invariant when U > 0 and
/// U' + 4 alpha U >= 0. Nonpositive c1 or c2 default to sigma sqrt(U) at
/// the left end. Throws SignViolation.
LensResult lemma_inv2_lens(const EstimateInputs& in, std::size_t piece, double c1 = 0.0,
                           double c2 = 0.0);

enum class PieceMode { Auto, A, B, Thm2 };

std::string_view to_string(PieceMode m);
PieceMode piece_mode_from_string(const std::string& s);

struct Policy {
    double switch_eta = 1e-3;
    double consistency_tol = 1e-9;
    /// One entry per piece; missing entries mean Auto.
    std::vector<PieceMode> piece_modes;

    PieceMode mode(std::size_t piece) const
    {
        return piece < piece_modes.size() ? piece_modes[piece] : PieceMode::Auto;
    }

    nlohmann::json to_json() const;
    static Policy from_json(const nlohmann::json& j);
};

/// Smallest disk centered at alpha_new + i beta with R^2 - beta^2 = W that
/// contains `old`. Throws JumpImpossible if no member of that family does.
Disk jump_disk(const Disk& old, double alpha_new, double W, double where);

/// Runs the estimates over all pieces, choosing A, B or real-centered disks per the policy
/// and jumping at breakpoints so that each new disk contains the old one.
/// The initial disk is first replaced by the smallest admissible disk
/// containing it.
EstimateTrajectory evolve_pipeline(const EstimateInputs& in, const Policy& policy, const Disk& init);

struct Lemma1Residual {
    double x = 0.0;
    double dR = 0.0;
    double dalpha = 0.0;
    double dbeta = 0.0;
    double margin = 0.0;
    /// Sum of the magnitudes of the terms entering the three residuals.
    double scale = 0.0;

    /// margin >= -(tol + 64 eps scale): the absolute tolerance plus the
    /// rounding error of forming the residuals.
    bool holds(double tol = 1e-6) const;
};

/// delta R = R' + 2 alpha R, delta alpha = -Re V + alpha^2 + alpha' + W,
/// delta beta = beta' + 2 alpha beta - Im V with the analytic R', beta' of the
/// trajectory; margin = delta R - |delta alpha| - |delta beta|.
std::vector<Lemma1Residual> lemma1_residuals(const EstimateTrajectory& traj, const EstimateInputs& in);

/// Same margin with R' and beta' from finite differences of the samples.
std::vector<Lemma1Residual> lemma1_residuals_numeric(const EstimateTrajectory& traj,
                                                     const EstimateInputs& in);

}  // namespace riccati
