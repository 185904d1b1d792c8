#include <doctest.h>

#include <cmath>
#include <numbers>

#include "riccati/approximants.hpp"
#include "riccati/oracle.hpp"

using namespace riccati;
using std::numbers::pi;

namespace {

RegionPlan plan_example_1(VwkbSpec c = {})
{
    RegionPlan p;
    p.regions = {RegionSpec{{0.0, 0.715}, RegionKind::Wkb, +1, {}, 0.0, 0.0},
                 RegionSpec{{0.715, 0.83}, RegionKind::Airy, +1, {}, pi / 4, 0.0},
                 RegionSpec{{0.83, pi / 2}, RegionKind::Wkb, +1, c, 0.0, 0.0}};
    return p;
}

void check_continuous(const GluedApprox& g)
{
    const auto& y = g.ytilde();
    for (std::size_t k = 0; k + 1 < y.pieces.size(); ++k) {
        const cplx left = y.pieces[k].back();
        const cplx right = y.pieces[k + 1].front();
        CHECK(std::abs(left - right) <= 1e-9 * (1.0 + std::abs(left)));
    }
}

}  // namespace

TEST_CASE("wkb_y on constant potentials")
{
    const Interval r{0.0, 1.0};
    CHECK(std::abs(wkb_y(WkbAnsatz(make_constant_potential(-1.0), +1, r), 0.4) - cplx(0.0, 1.0)) < 1e-15);
    CHECK(std::abs(wkb_y(WkbAnsatz(make_constant_potential(1.0), +1, r), 0.4) - cplx(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(wkb_y(WkbAnsatz(make_constant_potential(1.0), -1, r), 0.4) - cplx(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("wkb_y is the log-derivative of the WKB wave function")
{
    const Potential V = make_sine_potential(10000, 0.05);
    const WkbAnsatz w(V, +1, {0.0, 0.715});
    const double x = 0.2;
    // d/dx log V^{-1/4} by central differences, plus the root.
    const double h = 1e-5;
    const cplx dlog = -0.25 * (std::log(V(x + h)) - std::log(V(x - h))) / (2.0 * h);
    const cplx expect = std::sqrt(V(x)) + dlog;
    CHECK(std::abs(wkb_y(w, x) - expect) < 1e-6 * std::abs(expect));
    CHECK(std::abs(w.root(x) * w.root(x) - V(x)) < 1e-9 * std::abs(V(x)));
}

TEST_CASE("WKB root is continuous across the negative real axis")
{
    // arg V crosses pi on [0.3, 1.2] for a potential with small negative imaginary part.
    const Potential V = make_trig_potential({-200.0, -1.0}, {0.0, 2.0});
    const WkbAnsatz w(V, +1, {0.0, 1.5});
    double prev_x = 0.0;
    cplx prev = w.root(0.0);
    for (int i = 1; i <= 300; ++i) {
        const double x = 1.5 * i / 300.0;
        const cplx r = w.root(x);
        CHECK(std::abs(r - prev) < 0.05 * std::abs(prev) + 1e-12);
        prev = r;
        prev_x = x;
    }
    CHECK(prev_x == 1.5);
    CHECK_THROWS_AS(WkbAnsatz(V, 2, {0.0, 1.0}), Error);
}

TEST_CASE("vtilde_wkb")
{
    const WkbAnsatz c(make_constant_potential({3.0, 1.0}), +1, {0.0, 1.0});
    CHECK(std::abs(vtilde_wkb(c, 0.5) - cplx(3.0, 1.0)) < 1e-15);
    CHECK(std::abs(vtilde_wkb_d1(c, 0.5)) < 1e-15);

    const Potential V = make_sine_potential(10000, 0.05);
    const WkbAnsatz d(VwkbSpec{0.9}.apply(V), +1, {0.83, pi / 2});
    const cplx diff = vtilde_wkb(d, 1.0) - V(1.0);
    CHECK(std::abs(diff) == doctest::Approx(0.1 * std::abs(V(1.0))).epsilon(0.05));
    // The derivative terms are an order of magnitude smaller than the shift.
    CHECK(std::abs(vtilde_wkb(d, 1.0) - 0.9 * V(1.0)) < 0.1 * std::abs(diff));

    // Derivative against finite differences.
    const WkbAnsatz e(V, +1, {0.0, 0.715});
    const double h = 1e-6;
    const cplx fd = (vtilde_wkb(e, 0.3 + h) - vtilde_wkb(e, 0.3 - h)) / (2.0 * h);
    CHECK(std::abs(vtilde_wkb_d1(e, 0.3) - fd) < 1e-5 * std::abs(fd) + 1e-3);
}

TEST_CASE("wkb_condition")
{
    CHECK(wkb_condition(make_constant_potential(-2.0), 0.3) == 0.0);
    const Potential V = make_sine_potential(10000, 0.05);
    CHECK(wkb_condition(V, pi / 4) > 1e-2);
    CHECK(wkb_condition(V, 0.2) < 1e-2);
    CHECK(wkb_condition(V, pi / 4) > 100.0 * wkb_condition(V, 0.2));
    CHECK_THROWS_AS(wkb_condition(make_constant_potential(0.0), 0.1), Error);
}

TEST_CASE("Airy basis closed forms")
{
    const AiryAnsatz free(LinearPotential{0.0, 0.0}, 0.2, {0.0, 1.0});
    for (double x : {0.0, 0.5, 1.0}) {
        const auto v = free.eval(x);
        CHECK(std::abs(v.phi1 - 1.0) < 1e-15);
        CHECK(std::abs(v.phi2 - (x - 0.2)) < 1e-15);
    }
    const AiryAnsatz hyp(LinearPotential{1.0, 0.0}, 0.2, {0.0, 1.0});
    for (double x : {0.0, 0.5, 1.0}) {
        const auto v = hyp.eval(x);
        CHECK(std::abs(v.phi1 - std::cosh(x - 0.2)) < 1e-12);
        CHECK(std::abs(v.phi2 - std::sinh(x - 0.2)) < 1e-12);
        CHECK(std::abs(v.dphi1 - std::sinh(x - 0.2)) < 1e-12);
    }
}

TEST_CASE("Airy basis against the Schrodinger oracle")
{
    const Potential V = make_sine_potential(10000, 0.05);
    const LinearPotential lin = linearize_at(V, pi / 4);
    const AiryAnsatz a = airy_basis(lin, pi / 4, {0.715, 0.83});
    std::vector<double> xs;
    for (int i = 0; i <= 20; ++i) xs.push_back(pi / 4 + (0.83 - pi / 4) * i / 20.0);
    const Potential VA = make_linear_potential(lin);
    const auto s1 = integrate_schrodinger(VA, 1.0, 0.0, xs, 1e-12);
    const auto s2 = integrate_schrodinger(VA, 0.0, 1.0, xs, 1e-12);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto v = a.eval(xs[i]);
        CHECK(std::abs(v.phi1 - s1.phi[i]) < 1e-9 * (1.0 + std::abs(v.phi1)));
        CHECK(std::abs(v.phi2 - s2.phi[i]) < 1e-9 * (1.0 + std::abs(v.phi2)));
    }
    for (double x : {0.715, 0.75, pi / 4, 0.83}) CHECK(std::abs(a.wronskian(x) - 1.0) < 1e-10);
}

TEST_CASE("Airy series refuses regions it cannot cover")
{
    CHECK_THROWS_AS(airy_basis(LinearPotential{0.0, 1e9}, 0.0, {-10.0, 10.0}), Error);
}

TEST_CASE("VwkbSpec")
{
    const Potential V = make_sine_potential(10000, 0.05);
    const Potential same = VwkbSpec{}.apply(V);
    CHECK(same(0.4) == V(0.4));
    CHECK(std::abs(VwkbSpec{0.25}.apply(V)(0.4) - 0.25 * V(0.4)) < 1e-12);
    const VwkbSpec aff{{1.1, 0.0}, {2.0, -1.0}};
    CHECK(std::abs(aff.apply(V)(0.4) - (1.1 * V(0.4) + cplx(2.0, -1.0))) < 1e-9);
    for (const VwkbSpec& s : {VwkbSpec{}, VwkbSpec{0.9}, VwkbSpec{1.1}, aff}) {
        const VwkbSpec t = VwkbSpec::from_json(s.to_json());
        CHECK(t.factor == s.factor);
        CHECK(t.shift == s.shift);
    }
    CHECK_THROWS_AS(VwkbSpec::from_json({{"kind", "damp"}, {"factor", 1.5}}), Error);
}

TEST_CASE("RegionPlan validation and JSON")
{
    const RegionPlan p = plan_example_1(VwkbSpec{0.9});
    CHECK_NOTHROW(p.validate());
    CHECK(p.breakpoints() == std::vector<double>{0.715, 0.83});
    CHECK(p.domain().hi == pi / 2);
    const RegionPlan q = RegionPlan::from_json(p.to_json());
    CHECK(q.to_json() == p.to_json());

    RegionPlan gap = p;
    gap.regions[1].interval.lo = 0.72;
    CHECK_THROWS_AS(gap.validate(), Error);
    CHECK_THROWS_AS(RegionPlan::from_json(nlohmann::json::array()), Error);
    CHECK_THROWS_AS(RegionPlan::from_json(nlohmann::json::parse(R"([{"interval":[0,1],"kind":"x"}])")), Error);
}

TEST_CASE("glue on a constant potential")
{
    const cplx v(-4.0, 1.0);
    RegionPlan p;
    p.regions = {RegionSpec{{0.0, 1.0}, RegionKind::Wkb, +1, {}, 0.0, 0.0}};
    const Grid g = Grid::uniform_pieces(0.0, 1.0, 64);
    const GluedApprox a = glue(make_constant_potential(v), p, g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        CHECK(std::abs(a.ytilde().at(0, j) - std::sqrt(v)) < 1e-13);
        CHECK(std::abs(a.vtilde().at(0, j) - v) < 1e-12);
    }
}

TEST_CASE("glue example_5_1 plan")
{
    const Potential V = make_sine_potential(10000, 0.05);
    const RegionPlan p = plan_example_1();
    const Grid g = Grid::uniform_pieces(0.0, pi / 2, 1024, p.breakpoints());
    const GluedApprox a = glue(V, p, g);
    check_continuous(a);
    const auto jumps = a.vtilde_jumps();
    REQUIRE(jumps.size() == 2);
    for (cplx j : jumps) CHECK(is_finite(j));
    // V~ is V_A on the Airy region.
    const LinearPotential lin = linearize_at(V, pi / 4);
    CHECK(std::abs(a.vtilde(1, 0.8) - lin(0.8)) < 1e-6 * std::abs(lin(0.8)) + 1e-6);
    // V~ = y~' + y~^2 against finite differences.
    const double h = 1e-6;
    const cplx dy = (a.ytilde(0, 0.4 + h) - a.ytilde(0, 0.4 - h)) / (2.0 * h);
    const cplx y = a.ytilde(0, 0.4);
    CHECK(std::abs(dy + y * y - a.vtilde(0, 0.4)) < 1e-4 * std::abs(a.vtilde(0, 0.4)));
    CHECK_THROWS_AS(glue(V, p, Grid::uniform_pieces(0.0, pi / 2, 1024, {0.7, 0.83})), Error);
}

TEST_CASE("glue example_5_2 plan")
{
    const Potential V = make_sine_potential(500, -0.2);
    RegionPlan p;
    p.regions = {RegionSpec{{0.0, 0.52}, RegionKind::Wkb, +1, {}, 0.0, 0.0},
                 RegionSpec{{0.52, 0.83}, RegionKind::Airy, +1, {}, 0.675, 0.0},
                 RegionSpec{{0.83, pi / 2}, RegionKind::Wkb, +1, {}, 0.0, 0.0}};
    const Grid g = Grid::uniform_pieces(0.0, pi / 2, 1024, p.breakpoints());
    check_continuous(glue(V, p, g));
}

TEST_CASE("glue from a wave function seed")
{
    const Potential V = make_sine_potential(10000, 0.05);
    const RegionPlan p = plan_example_1();
    const Grid g = Grid::uniform_pieces(0.0, pi / 2, 512, p.breakpoints());
    const GluedApprox a = glue(V, p, g, 1.0, cplx(0.3, 70.0));
    CHECK(std::abs(a.ytilde().at(0, 0) - cplx(0.3, 70.0)) < 1e-9);
    CHECK_THROWS_AS(glue(V, p, g, 0.0, 1.0), Error);
}
