#pragma once

#include <utility>

#include "riccati/core.hpp"

namespace riccati {

/// Riccati flow y' = V - y^2 for a constant potential V = zeta^2.
struct ConstantFlow {
    cplx zeta;
    cplx V;

    /// zeta is the principal square root of V.
    static ConstantFlow from_potential(cplx V);
    /// Uses zeta as given (the conjugate branch is -zeta).
    static ConstantFlow from_zeta(cplx zeta);
};

/// tanh(z), evaluated through exp(-2|Re z|) so that it saturates to +-1
/// instead of overflowing.
cplx safe_tanh(cplx z);

/// y(x) for y(0) = y0: zeta (y0 + tau zeta) / (tau y0 + zeta), tau = tanh(zeta x).
/// Throws PoleEncountered when the solution has blown up before x.
cplx exact_solution(const ConstantFlow& flow, cplx y0, double x);

/// Image at x of the circle |y - m0| = R0 under the flow.
/// Throws DegenerateToLine if the image is a straight line.
Disk propagate_circle(const ConstantFlow& flow, cplx m0, double R0, double x);

struct FixedPoints {
    bool both_centers = false;
    cplx stable;
    cplx unstable;
};

/// Re zeta > 0: zeta is stable. Re zeta < 0: -zeta is stable.
/// Re zeta = 0: both fixed points are centers.
FixedPoints classify_fixed_points(const ConstantFlow& flow);

/// Centers +-i sqrt(R0^2 + |zeta|^2) of the two stationary circles of radius
/// R0. Requires Re zeta = 0 (NotImaginary otherwise).
std::pair<cplx, cplx> stationary_circle_centers(cplx zeta, double R0);

}  // namespace riccati
