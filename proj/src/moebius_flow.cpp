#include "riccati/moebius_flow.hpp"

#include <algorithm>
#include <cmath>

namespace riccati {

namespace {

constexpr double saturation = 350.0;

// cosh(z) and sinh(z), both divided by exp(|Re z|) so they stay bounded.
struct ScaledHyperbolic {
    cplx c;
    cplx s;
};

ScaledHyperbolic scaled_cosh_sinh(cplx z)
{
    const bool flip = z.real() < 0.0;
    const cplx w = flip ? -z : z;
    const cplx e = w.real() > saturation ? cplx(0.0, 0.0) : std::exp(-2.0 * w);
    ScaledHyperbolic h{0.5 * (1.0 + e), 0.5 * (1.0 - e)};
    if (flip) h.s = -h.s;
    return h;
}

double pole_eps(cplx zeta) { return 1e-12 * (1.0 + std::abs(zeta)); }
double degeneracy_eps(cplx zeta) { return 1e-12 * std::pow(1.0 + std::abs(zeta), 2); }

}  // namespace

ConstantFlow ConstantFlow::from_potential(cplx V)
{
    if (!is_finite(V) || V == cplx(0.0, 0.0)) fail(ErrorKind::InvalidArgument, "constant flow needs V != 0");
    return {std::sqrt(V), V};
}

ConstantFlow ConstantFlow::from_zeta(cplx zeta)
{
    if (!is_finite(zeta) || zeta == cplx(0.0, 0.0)) {
        fail(ErrorKind::InvalidArgument, "constant flow needs zeta != 0");
    }
    return {zeta, zeta * zeta};
}

cplx safe_tanh(cplx z)
{
    if (z.real() > saturation) return 1.0;
    if (z.real() < -saturation) return -1.0;
    const ScaledHyperbolic h = scaled_cosh_sinh(z);
    return h.s / h.c;
}

cplx exact_solution(const ConstantFlow& flow, cplx y0, double x)
{
    const cplx zeta = flow.zeta;
    const ScaledHyperbolic h = scaled_cosh_sinh(zeta * x);
    const cplx den = h.s * y0 + zeta * h.c;
    const double scale = std::max(std::abs(h.c), std::abs(h.s));
    if (std::abs(den) < pole_eps(zeta) * scale) {
        fail(ErrorKind::PoleEncountered, "Riccati solution has a pole", x);
    }
    return zeta * (h.c * y0 + zeta * h.s) / den;
}

Disk propagate_circle(const ConstantFlow& flow, cplx m0, double R0, double x)
{
    if (!(R0 >= 0.0)) fail(ErrorKind::InvalidArgument, "negative initial radius");
    const cplx zeta = flow.zeta;
    const ScaledHyperbolic h = scaled_cosh_sinh(zeta * x);
    // The circle formulas in tau = s/c, multiplied through by |c|^2.
    const cplx a = h.s * m0 + zeta * h.c;
    const double den = std::norm(a) - R0 * R0 * std::norm(h.s);
    const double scale = std::max(std::norm(h.c), std::norm(h.s));
    if (den <= degeneracy_eps(zeta) * scale) {
        fail(ErrorKind::DegenerateToLine, "circle degenerates to a line", x);
    }
    const cplx num = (h.c * m0 + zeta * h.s) * std::conj(a) - R0 * R0 * std::conj(h.s) * h.c;
    const cplx m = zeta * num / den;
    const double R = R0 * std::abs(h.s * h.s - h.c * h.c) * std::norm(zeta) / den;
    return Disk(m, R);
}

FixedPoints classify_fixed_points(const ConstantFlow& flow)
{
    const cplx zeta = flow.zeta;
    if (zeta.real() > 0.0) return {false, zeta, -zeta};
    if (zeta.real() < 0.0) return {false, -zeta, zeta};
    return {true, zeta, -zeta};
}

std::pair<cplx, cplx> stationary_circle_centers(cplx zeta, double R0)
{
    if (zeta == cplx(0.0, 0.0)) fail(ErrorKind::InvalidArgument, "zeta must be nonzero");
    if (!(R0 >= 0.0)) fail(ErrorKind::InvalidArgument, "negative radius");
    if (std::abs(zeta.real()) > 1e-12 * (1.0 + std::abs(zeta))) {
        fail(ErrorKind::NotImaginary, "stationary circles need Re zeta = 0");
    }
    const double h = std::sqrt(R0 * R0 + std::norm(zeta));
    return {cplx(0.0, h), cplx(0.0, -h)};
}

}  // namespace riccati
