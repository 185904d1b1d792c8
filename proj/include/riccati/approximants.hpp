#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "riccati/core.hpp"
#include "riccati/potential.hpp"

namespace riccati {

/// WKB ansatz V_WKB^{-1/4} exp(sign * int sqrt(V_WKB)) on a region.
///
/// The square root is continued continuously along the region: the branch
/// cut is placed in the widest angular gap of arg V_WKB over the region and
/// the overall sign is fixed so that the root agrees with the principal root
/// at the left endpoint (a negative zero imaginary part counts as +0).
class WkbAnsatz {
public:
    WkbAnsatz(Potential vwkb, int sign, Interval region);

    const Potential& vwkb() const { return vwkb_; }
    int sign() const { return sign_; }
    const Interval& region() const { return region_; }

    /// Continuous-branch sqrt(V_WKB(x)).
    cplx root(double x) const;

private:
    Potential vwkb_;
    int sign_;
    Interval region_;
    double cut_ = 0.0;
    double root_sign_ = 1.0;
};

/// y = sign * sqrt(V_WKB) - V_WKB' / (4 V_WKB). Throws ZeroPotential.
cplx wkb_y(const WkbAnsatz& ansatz, double x);

/// V_WKB + (5/16) V_WKB'^2 / V_WKB^2 - V_WKB'' / (4 V_WKB). Throws ZeroPotential.
cplx vtilde_wkb(const WkbAnsatz& ansatz, double x);

/// Derivative of vtilde_wkb.
cplx vtilde_wkb_d1(const WkbAnsatz& ansatz, double x);

/// |V''/V^2| + |V'^2/V^3|. Throws ZeroPotential.
double wkb_condition(const Potential& V, double x);

/// Fundamental solutions of phi'' = (a + b x) phi about x0, normalized by
/// (phi1, phi1')(x0) = (1, 0) and (phi2, phi2')(x0) = (0, 1), as truncated
/// power series in t = x - x0.
class AiryAnsatz {
public:
    static constexpr std::size_t max_terms = 512;

    AiryAnsatz(LinearPotential va, double x0, Interval region);

    const LinearPotential& va() const { return va_; }
    double x0() const { return x0_; }
    const Interval& region() const { return region_; }
    std::size_t terms() const { return c1_.size(); }

    struct Values {
        cplx phi1, dphi1, phi2, dphi2;
    };
    Values eval(double x) const;
    /// phi1 phi2' - phi1' phi2 at x.
    cplx wronskian(double x) const;

private:
    LinearPotential va_;
    double x0_;
    Interval region_;
    std::vector<cplx> c1_;
    std::vector<cplx> c2_;
};

/// Throws SeriesNotConverged if the series over `region` needs more than
/// AiryAnsatz::max_terms terms.
AiryAnsatz airy_basis(const LinearPotential& va, double x0, Interval region);

/// Modification V_WKB = factor * V + shift applied to the true potential.
struct VwkbSpec {
    cplx factor{1.0, 0.0};
    cplx shift{0.0, 0.0};

    Potential apply(const Potential& V) const;
    nlohmann::json to_json() const;
    static VwkbSpec from_json(const nlohmann::json& j);
};

enum class RegionKind { Wkb, Airy };

struct RegionSpec {
    Interval interval;
    RegionKind kind = RegionKind::Wkb;
    int sign = +1;
    VwkbSpec vwkb;
    /// Airy: Taylor point of the linear potential.
    double taylor_at = 0.0;
    /// Airy: real offset added to the slope b.
    double b_re_offset = 0.0;
};

/// Ordered partition of the domain into WKB and Airy regions.
struct RegionPlan {
    std::vector<RegionSpec> regions;

    Interval domain() const;
    std::vector<double> breakpoints() const;
    /// Throws InvalidArgument unless the regions tile their domain.
    void validate() const;

    nlohmann::json to_json() const;
    static RegionPlan from_json(const nlohmann::json& j);
};

/// Value of y~, V~ and V~' at one point of a smooth piece.
struct ApproxJet {
    cplx y;
    cplx vt;
    cplx vt_d1;
};

/// Approximate Riccati solution y~ = phi~'/phi~ of a glued WKB/Airy wave
/// function. y~ is continuous, V~ = y~' + y~^2 is smooth on each piece.
class GluedApprox {
public:
    const RegionPlan& plan() const { return plan_; }
    const Potential& potential() const { return V_; }
    const Grid& grid() const { return grid_; }

    /// Evaluation on piece k at any x in that piece.
    ApproxJet jet(std::size_t piece, double x) const;
    cplx ytilde(std::size_t piece, double x) const { return jet(piece, x).y; }
    cplx vtilde(std::size_t piece, double x) const { return jet(piece, x).vt; }

    /// Grid samples.
    const PiecewiseSamples<cplx>& ytilde() const { return y_; }
    const PiecewiseSamples<cplx>& vtilde() const { return vt_; }
    const PiecewiseSamples<double>& alpha() const { return alpha_; }
    const PiecewiseSamples<double>& beta_tilde() const { return beta_; }

    /// Jump of V~ across each breakpoint (right minus left limit).
    std::vector<cplx> vtilde_jumps() const;

private:
    friend GluedApprox glue(const Potential& V, const RegionPlan& plan, const Grid& grid,
                            std::optional<cplx> seed_y);

    struct WkbPiece {
        WkbAnsatz ansatz;
        // y~ = (p y_main E + q y_other / E) / (p E + q / E), E = exp(sign * phase).
        cplx p;
        cplx q;
        std::vector<double> nodes;
        std::vector<cplx> phase;
    };
    struct AiryPiece {
        AiryAnsatz basis;
        cplx c2;
    };
    struct Piece {
        std::optional<WkbPiece> wkb;
        std::optional<AiryPiece> airy;
    };

    GluedApprox(Potential V, RegionPlan plan, Grid grid)
        : V_(std::move(V)), plan_(std::move(plan)), grid_(std::move(grid))
    {
    }

    cplx wkb_phase(const WkbPiece& w, double x) const;

    Potential V_;
    RegionPlan plan_;
    Grid grid_;
    std::vector<Piece> pieces_;
    PiecewiseSamples<cplx> y_;
    PiecewiseSamples<cplx> vt_;
    PiecewiseSamples<double> alpha_;
    PiecewiseSamples<double> beta_;
};

/// Glues the plan left to right so that y~ is continuous. The first piece
/// starts from y~ = seed_y, or from its pure WKB (or Airy phi1) solution when
/// no seed is given. The grid breakpoints must equal the plan boundaries.
GluedApprox glue(const Potential& V, const RegionPlan& plan, const Grid& grid,
                 std::optional<cplx> seed_y = std::nullopt);

/// Seed given as (phi, phi') at the left endpoint; phi must be nonzero.
GluedApprox glue(const Potential& V, const RegionPlan& plan, const Grid& grid, cplx phi,
                 cplx dphi);

}  // namespace riccati
