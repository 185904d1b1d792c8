#include <doctest.h>

#include <cmath>
#include <random>

#include "riccati/moebius_flow.hpp"
#include "riccati/oracle.hpp"

using namespace riccati;

namespace {

// Circle through three images on the boundary; used as a fit-free oracle.
Disk circle_through(cplx a, cplx b, cplx c)
{
    const cplx ab = b - a;
    const cplx ac = c - a;
    const double d = 2.0 * (ab.real() * ac.imag() - ab.imag() * ac.real());
    const double nb = std::norm(ab);
    const double nc = std::norm(ac);
    const cplx u((ac.imag() * nb - ab.imag() * nc) / d, (ab.real() * nc - ac.real() * nb) / d);
    return Disk(a + u, std::abs(u));
}

}  // namespace

TEST_CASE("fixed points are invariant")
{
    const auto f = ConstantFlow::from_zeta({2.0, -1.0});
    for (double x : {0.0, 0.3, 5.0}) {
        CHECK(std::abs(exact_solution(f, f.zeta, x) - f.zeta) < 1e-14);
        CHECK(std::abs(exact_solution(f, -f.zeta, x) + f.zeta) < 1e-14);
    }
}

TEST_CASE("exact_solution matches the ODE oracle")
{
    const auto f = ConstantFlow::from_zeta({2.0, -1.0});
    const std::vector<double> xs{0.0, 0.3};
    const auto sol = integrate_riccati(make_constant_potential(f.V), 0.0, xs, 1e-12);
    CHECK(std::abs(exact_solution(f, 0.0, 0.3) - sol.y.back()) < 1e-9);
}

TEST_CASE("safe_tanh saturates")
{
    CHECK(safe_tanh({800.0, 3.0}) == cplx(1.0, 0.0));
    CHECK(safe_tanh({-800.0, 3.0}) == cplx(-1.0, 0.0));
    CHECK(std::abs(safe_tanh({0.3, 0.2}) - std::tanh(cplx(0.3, 0.2))) < 1e-15);
}

TEST_CASE("propagate_circle")
{
    const auto f = ConstantFlow::from_zeta({2.0, -1.0});
    const Disk p = propagate_circle(f, f.zeta, 0.0, 0.7);
    CHECK(std::abs(p.center() - f.zeta) < 1e-14);
    CHECK(p.radius() == 0.0);

    const auto g = ConstantFlow::from_zeta({0.0, 1.0});
    const Disk s = propagate_circle(g, {0.0, std::sqrt(2.0)}, 1.0, 3.3);
    CHECK(std::abs(s.center() - cplx(0.0, std::sqrt(2.0))) < 1e-12);
    CHECK(s.radius() == doctest::Approx(1.0).epsilon(1e-12));

    // Against the circle through 64 boundary images: all lie on the result.
    const Disk q = propagate_circle(f, 0.0, 1.0, 0.5);
    for (int k = 0; k < 64; ++k) {
        const cplx z = std::polar(1.0, 2.0 * M_PI * k / 64.0);
        CHECK(std::abs(std::abs(exact_solution(f, z, 0.5) - q.center()) - q.radius()) < 1e-8);
    }
    const Disk t = circle_through(exact_solution(f, 1.0, 0.5), exact_solution(f, cplx(0, 1), 0.5),
                                  exact_solution(f, -1.0, 0.5));
    CHECK(std::abs(t.center() - q.center()) < 1e-8);
    CHECK(std::abs(t.radius() - q.radius()) < 1e-8);
}

TEST_CASE("propagate_circle degenerates when the pole crosses the boundary")
{
    const auto f = ConstantFlow::from_zeta(1.0);
    // y' = 1 - y^2 from y0 = -1.5 reaches a pole at atanh(1/1.5) ~ 0.8047; the
    // boundary point -1.5 of the circle around -1 with radius 0.5 hits it then.
    const double x_pole = std::atanh(1.0 / 1.5);
    CHECK_THROWS_AS(propagate_circle(f, -1.0, 0.5, x_pole), Error);
    CHECK_NOTHROW(propagate_circle(f, -1.0, 0.5, 0.5));
    CHECK_THROWS_AS(propagate_circle(f, 0.0, -1.0, 0.5), Error);
}

TEST_CASE("classify_fixed_points")
{
    const auto a = classify_fixed_points(ConstantFlow::from_zeta({2.0, -1.0}));
    CHECK_FALSE(a.both_centers);
    CHECK(a.stable == cplx(2.0, -1.0));
    CHECK(a.unstable == cplx(-2.0, 1.0));
    const auto b = classify_fixed_points(ConstantFlow::from_zeta(-1.0));
    CHECK(b.stable == cplx(1.0, 0.0));
    CHECK(b.unstable == cplx(-1.0, 0.0));
    CHECK(classify_fixed_points(ConstantFlow::from_zeta({0.0, 1.0})).both_centers);
}

TEST_CASE("stationary circles")
{
    auto [p, m] = stationary_circle_centers({0.0, 1.0}, 0.0);
    CHECK(std::abs(p - cplx(0.0, 1.0)) < 1e-15);
    CHECK(std::abs(m - cplx(0.0, -1.0)) < 1e-15);
    std::tie(p, m) = stationary_circle_centers({0.0, 1.0}, 1.0);
    CHECK(p.imag() == doctest::Approx(std::sqrt(2.0)));
    std::tie(p, m) = stationary_circle_centers({0.0, 2.0}, 2.0);
    CHECK(p.imag() == doctest::Approx(std::sqrt(8.0)));
    const auto f = ConstantFlow::from_zeta({0.0, 2.0});
    for (double x : {0.1, 1.0, 5.0}) {
        for (cplx c : {p, m}) {
            const Disk d = propagate_circle(f, c, 2.0, x);
            CHECK(std::abs(d.center() - c) < 1e-9);
            CHECK(std::abs(d.radius() - 2.0) < 1e-9);
        }
    }
    CHECK_THROWS_AS(stationary_circle_centers({1.0, 1.0}, 1.0), Error);
}

TEST_CASE("from_potential picks the principal root")
{
    const auto f = ConstantFlow::from_potential({-4.0, 0.0});
    CHECK(std::abs(f.zeta - cplx(0.0, 2.0)) < 1e-15);
    CHECK_THROWS_AS(ConstantFlow::from_potential(0.0), Error);
}

TEST_CASE("random circles stay circles through 3 images")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int checked = 0;
    for (int i = 0; i < 40; ++i) {
        const auto f = ConstantFlow::from_zeta({u(rng), u(rng)});
        const cplx m0(u(rng), u(rng));
        const double R0 = 0.1 + 0.2 * std::abs(u(rng));
        const double x = 0.25 * std::abs(u(rng));
        Disk d;
        try {
            d = propagate_circle(f, m0, R0, x);
        } catch (const Error&) {
            continue;
        }
        if (d.radius() > 1e3) continue;
        const Disk t = circle_through(exact_solution(f, m0 + R0, x), exact_solution(f, m0 + cplx(0, R0), x),
                                      exact_solution(f, m0 - R0, x));
        CHECK(std::abs(t.center() - d.center()) < 1e-8 * (1 + d.radius()));
        CHECK(std::abs(t.radius() - d.radius()) < 1e-8 * (1 + d.radius()));
        ++checked;
    }
    CHECK(checked > 20);
}
