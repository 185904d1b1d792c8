#include <doctest.h>

#include <cmath>

#include "riccati/moebius_flow.hpp"
#include "riccati/oracle.hpp"

using namespace riccati;

namespace {

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(a + (b - a) * i / (n - 1));
    return xs;
}

}  // namespace

TEST_CASE("fixed point stays fixed")
{
    const cplx zeta(2.0, -1.0);
    const auto sol = integrate_riccati(make_constant_potential(zeta * zeta), zeta, linspace(0, 3, 31), 1e-10);
    for (cplx y : sol.y) CHECK(std::abs(y - zeta) < 1e-12);
    CHECK(sol.method == "dopri5");
}

TEST_CASE("constant potential against the closed form")
{
    const cplx zeta(0.7, 1.3);
    const auto flow = ConstantFlow::from_zeta(zeta);
    const double tol = 1e-10;
    const auto xs = linspace(0, 2, 41);
    const auto sol = integrate_riccati(make_constant_potential(zeta * zeta), {0.3, -0.2}, xs, tol);
    REQUIRE(sol.x == xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const cplx e = exact_solution(flow, {0.3, -0.2}, xs[i]);
        CHECK(std::abs(sol.y[i] - e) < 10 * tol * (1 + std::abs(e)));
    }
    CHECK(sol.accepted > 0);
    CHECK(sol.max_error <= 1.0);
}

TEST_CASE("real potential keeps the upper half plane")
{
    const Potential V = make_sine_potential(10000, 0.0);
    const auto sol = integrate_riccati(V, {1.0, 0.5}, linspace(0, 1.5, 301), 1e-10);
    for (cplx y : sol.y) CHECK(y.imag() > 0.0);
}

TEST_CASE("argument checks")
{
    const Potential V = make_constant_potential(1.0);
    CHECK_THROWS_AS(integrate_riccati(V, 0.0, linspace(0, 1, 3), 1e-3), Error);
    CHECK_THROWS_AS(integrate_riccati(V, 0.0, std::vector<double>{0.0, 0.5, 0.4}, 1e-10), Error);
    CHECK_THROWS_AS(integrate_riccati(V, 0.0, std::vector<double>{}, 1e-10), Error);
}

TEST_CASE("blow-up carries its location")
{
    // y' = -1 - y^2 from y0 = -5 has a pole at x = atan(1/5).
    try {
        integrate_riccati(make_constant_potential(-1.0), -5.0, linspace(0, 1, 11), 1e-10);
        FAIL("no blow-up");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BlowUp);
        REQUIRE(e.where());
        CHECK(*e.where() == doctest::Approx(std::atan(0.2)).epsilon(1e-4));
    }
}

TEST_CASE("Schrodinger oracle")
{
    const auto xs = linspace(0, 1, 11);
    const auto flat = integrate_schrodinger(make_constant_potential(0.0), 1.0, 0.0, xs, 1e-10);
    for (cplx p : flat.phi) CHECK(std::abs(p - 1.0) < 1e-14);
    const double tol = 1e-10;
    const auto ex = integrate_schrodinger(make_constant_potential(1.0), 1.0, 1.0, xs, tol);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(std::abs(ex.phi[i] - std::exp(xs[i])) < 10 * tol * std::exp(xs[i]));
        CHECK(std::abs(ex.y(i) - 1.0) < 1e-8);
    }
    const auto node = integrate_schrodinger(make_constant_potential(-1.0), 0.0, 1.0, xs, tol);
    CHECK_THROWS_AS(node.y(0), Error);
}

TEST_CASE("amplitude integration")
{
    // Real V: |phi|^2 Im y is constant (Wronskian of phi and its conjugate).
    const Potential V = make_trig_potential(-50.0, 80.0);
    const auto xs = linspace(0, 1.5, 151);
    const auto a = integrate_riccati_amplitude(V, {0.5, 2.0}, xs, 1e-11);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(std::abs(std::exp(a.log_amp2[i]) * a.y[i].imag() - 2.0) < 1e-7);
    }
    const auto r = integrate_riccati(V, {0.5, 2.0}, xs, 1e-11);
    CHECK(std::abs(r.y.back() - a.y.back()) < 1e-8 * std::abs(r.y.back()));
}

TEST_CASE("boundary_seeds")
{
    const Disk d({1.0, 2.0}, 0.5);
    const auto s = boundary_seeds(d, 16);
    REQUIRE(s.size() == 16);
    CHECK(std::abs(s[0] - cplx(1.5, 2.0)) < 1e-15);
    for (cplx z : s) CHECK(std::abs(std::abs(z - d.center()) - 0.5) < 1e-15);
}

TEST_CASE("containment on a stationary circle")
{
    const auto [up, down] = stationary_circle_centers({0.0, 1.0}, 1.0);
    EstimateTrajectory t;
    for (double x : linspace(0, 4, 81)) {
        TrajectoryPoint p;
        p.x = x;
        p.beta = up.imag();
        p.R = 1.0;
        t.points.push_back(p);
    }
    const auto rep = containment_report(t, make_constant_potential(-1.0), boundary_seeds(t.points[0].disk(), 8),
                                        1e-8);
    CHECK(rep.pass);
    CHECK(rep.worst_margin >= -1e-8);
    CHECK_FALSE(rep.first_failure_x);
    CHECK(rep.to_json().at("pass") == true);
}

TEST_CASE("shrunken disks fail at the first escaping point")
{
    const auto [up, down] = stationary_circle_centers({0.0, 1.0}, 1.0);
    EstimateTrajectory t;
    const auto xs = linspace(0, 4, 81);
    for (double x : xs) {
        TrajectoryPoint p;
        p.x = x;
        p.beta = up.imag();
        p.R = x < 1.0 ? 1.0 : 0.5;
        t.points.push_back(p);
    }
    const auto rep = containment_report(t, make_constant_potential(-1.0), boundary_seeds(t.points[0].disk(), 8),
                                        1e-8);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.first_failure_x);
    CHECK(*rep.first_failure_x == doctest::Approx(1.0));
}
