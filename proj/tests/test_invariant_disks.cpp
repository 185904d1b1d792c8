#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "riccati/invariant_disks.hpp"
#include "riccati/moebius_flow.hpp"
#include "riccati/oracle.hpp"

using namespace riccati;
using std::numbers::pi;

namespace {

AlphaModel constant_alpha(double a)
{
    return [a](std::size_t, double) { return AlphaJet{a, 0.0, 0.0}; };
}

// alpha = -V'/(4V) for real V, with two derivatives.
AlphaModel wkb_real_alpha(const Potential& V)
{
    return [V](std::size_t, double x) {
        const auto j = V.jet(x);
        const double v = j.v.real(), d1 = j.d1.real(), d2 = j.d2.real(), d3 = j.d3.real();
        return AlphaJet{-d1 / (4 * v), -(d2 / v - d1 * d1 / (v * v)) / 4,
                        -(d3 / v - 3 * d2 * d1 / (v * v) + 2 * d1 * d1 * d1 / (v * v * v)) / 4};
    };
}

Grid one_piece(double lo, double hi, std::size_t n = 257) { return Grid::uniform_pieces(lo, hi, n); }

RegionPlan plan_example_1(VwkbSpec c = {})
{
    RegionPlan p;
    p.regions = {RegionSpec{{0.0, 0.715}, RegionKind::Wkb, +1, {}, 0.0, 0.0},
                 RegionSpec{{0.715, 0.83}, RegionKind::Airy, +1, {}, pi / 4, 0.0},
                 RegionSpec{{0.83, pi / 2}, RegionKind::Wkb, +1, c, 0.0, 0.0}};
    return p;
}

std::shared_ptr<const GluedApprox> example_1_approx(VwkbSpec c = {}, std::size_t n = 1024)
{
    const RegionPlan p = plan_example_1(c);
    return std::make_shared<const GluedApprox>(
        glue(make_sine_potential(10000, 0.05), p, Grid::uniform_pieces(0.0, pi / 2, n, p.breakpoints())));
}

}  // namespace

TEST_CASE("compute_U")
{
    const Potential V = make_trig_potential({-3.0, 1.0}, {2.0, 0.0});
    const EstimateInputs zero(V, one_piece(0.0, 1.0), constant_alpha(0.0));
    for (double x : {0.0, 0.5, 1.0}) CHECK(zero.U(0, x) == doctest::Approx(V(x).real()));

    const Potential Vn = make_trig_potential(-5.0, 2.0);
    const EstimateInputs wkb(Vn, one_piece(0.2, 1.2), wkb_real_alpha(Vn));
    for (double x : {0.2, 0.7, 1.2}) {
        const auto j = Vn.jet(x);
        const double v = j.v.real(), d1 = j.d1.real(), d2 = j.d2.real();
        const double expect = v * (1.0 + d2 / (4 * v * v) + 5 * d1 * d1 / (16 * std::pow(std::abs(v), 3)));
        CHECK(wkb.U(0, x) == doctest::Approx(expect).epsilon(1e-12));
    }

    const double c = 1.0;
    const EstimateInputs shifted(Vn, one_piece(0.0, 1.0), constant_alpha(c + 0.0));
    for (double x : {0.0, 0.5, 1.0}) CHECK(shifted.U(0, x) < -c * c);

    // Sampled U matches the free function.
    const Grid g = one_piece(0.0, 1.0, 65);
    const auto a = sample<double>(g, [](std::size_t, double x) { return x * x; });
    const auto da = sample<double>(g, [](std::size_t, double x) { return 2 * x; });
    const auto U = compute_U(g, V, a, da);
    CHECK(U.at(0, 32) == doctest::Approx(V(0.5).real() - 0.0625 - 1.0));
}

TEST_CASE("determinator special cases")
{
    const Potential V = make_linear_potential({-2.0, 1.0});
    const EstimateInputs in(V, one_piece(0.0, 1.0), constant_alpha(0.0));
    for (double x : {0.0, 0.3, 1.0}) CHECK(determinator(in, 0, x, 1.2, 0.4) == doctest::Approx(0.5));

    const EstimateInputs flat(make_constant_potential(-3.0), one_piece(0.0, 1.0), constant_alpha(0.0));
    CHECK(determinator(flat, 0, 0.4, 2.0, 1.0) == 0.0);
}

TEST_CASE("determinator agrees with its approximation form")
{
    const auto approx = example_1_approx();
    const EstimateInputs in = EstimateInputs::from_approx(approx);
    for (double x : {0.1, 0.3, 0.6}) {
        const double beta = approx->ytilde(0, x).imag();
        const double d1 = determinator(in, 0, x, beta, 1.0);
        const double d2 = determinator_via_approx(*approx, in.potential(), 0, x, beta);
        CHECK(std::abs(d1 - d2) < 1e-8 * (1.0 + std::abs(d1)));
    }
    // V~ = V, V real: the determinator vanishes.
    const Potential Vc = make_constant_potential(-4.0);
    RegionPlan p;
    p.regions = {RegionSpec{{0.0, 1.0}, RegionKind::Wkb, +1, {}, 0.0, 0.0}};
    const GluedApprox flat = glue(Vc, p, one_piece(0.0, 1.0));
    CHECK(std::abs(determinator_via_approx(flat, Vc, 0, 0.5, 0.7)) < 1e-12);
}

TEST_CASE("region (c) determinator sign and its flip")
{
    auto interior_signs = [](VwkbSpec c) {
        const auto approx = example_1_approx(c);
        int neg = 0, pos = 0;
        for (int i = 1; i < 20; ++i) {
            const double x = 0.83 + (pi / 2 - 0.83) * i / 20.0;
            const double beta = approx->ytilde(2, x).imag();
            (determinator_via_approx(*approx, approx->potential(), 2, x, beta) < 0 ? neg : pos)++;
        }
        return std::pair{neg, pos};
    };
    const auto [neg, pos] = interior_signs({});
    CHECK(neg == 19);
    CHECK(pos == 0);
    const auto [neg9, pos9] = interior_signs(VwkbSpec{0.9});
    CHECK(pos9 == 19);
    CHECK(neg9 == 0);
}

TEST_CASE("thm2_evolve")
{
    const EstimateInputs in(make_constant_potential(4.0), one_piece(0.0, 1.0), constant_alpha(0.0));
    const auto t = thm2_evolve(in, 0);
    for (const auto& p : t.points) {
        CHECK(p.R == doctest::Approx(2.0));
        CHECK(p.beta == 0.0);
        CHECK(p.kind == Case::Thm2);
    }
    for (const auto& r : lemma1_residuals(t, in)) CHECK(r.holds());

    const EstimateInputs dec(make_linear_potential({4.0, -1.0}), one_piece(0.0, 1.0), constant_alpha(0.0));
    CHECK_THROWS_AS(thm2_evolve(dec, 0), Error);
    const EstimateInputs neg(make_constant_potential(-1.0), one_piece(0.0, 1.0), constant_alpha(0.0));
    CHECK_THROWS_AS(thm2_evolve(neg, 0), Error);
}

TEST_CASE("thm2_minimal_W satisfies the condition")
{
    const EstimateInputs in(make_linear_potential({4.0, -1.0}), one_piece(0.0, 1.0), constant_alpha(1.0));
    const WModel W = thm2_minimal_W(in, 0, 2.0);
    const auto t = thm2_evolve(in, 0, W);
    CHECK(t.points.front().R == doctest::Approx(2.0));
    for (const auto& r : lemma1_residuals(t, in)) CHECK(r.holds());
}

TEST_CASE("thm1_evolve branch B: increasing negative potential")
{
    const Potential V = make_linear_potential({-2.0, 1.0});
    const EstimateInputs in(V, one_piece(0.0, 1.0), constant_alpha(0.0));
    const double c = 1.5;
    const double q0 = 2.0 / c;
    const auto t = thm1_evolve(in, 0, Branch::B, (c + q0) / 2, (c - q0) / 2);
    for (const auto& p : t.points) {
        CHECK(std::abs(p.beta + p.R - c) < 1e-9);
        CHECK(std::abs(p.beta - p.R - std::abs(V(p.x).real()) / c) < 1e-9);
        CHECK(p.kind == Case::B);
    }
    CHECK(t.points.back().beta - t.points.back().R == doctest::Approx(1.0 / 1.5));
    for (const auto& r : lemma1_residuals(t, in)) CHECK(r.holds());
    // R0^2 - beta0^2 must equal W.
    CHECK_THROWS_AS(thm1_evolve(in, 0, Branch::B, 1.0, 0.1), Error);
}

TEST_CASE("thm1_evolve branch A with a negative determinator")
{
    // V decreasing and negative: D = V'/2 < 0, so branch A applies.
    const Potential V = make_linear_potential({-1.0, -1.0});
    const EstimateInputs in(V, one_piece(0.0, 1.0), constant_alpha(0.0));
    const double c = 2.0;
    const double beta0 = (c + 1.0 / c) / 2, R0 = (c - 1.0 / c) / 2;
    const auto t = thm1_evolve(in, 0, Branch::A, beta0, R0);
    for (const auto& p : t.points) {
        // R - beta stays -1/c and R^2 - beta^2 = V.
        CHECK(std::abs(p.R - p.beta + 1.0 / c) < 1e-9);
        CHECK(std::abs(p.R * p.R - p.beta * p.beta - V(p.x).real()) < 1e-9);
        CHECK(p.kind == Case::A);
    }
    for (const auto& r : lemma1_residuals(t, in)) CHECK(r.holds());
    std::vector<cplx> seeds = boundary_seeds(t.points.front().disk(), 8);
    CHECK(containment_report(t, V, seeds, 1e-8).pass);
}

TEST_CASE("lemma_inv_evolve on constant data")
{
    const EstimateInputs in(make_constant_potential(-4.0), one_piece(0.0, 2.0), constant_alpha(0.0));
    const auto one = lemma_inv_evolve(in, 0, 1.0);
    for (const auto& p : one.points) {
        CHECK(p.R == 0.0);
        CHECK(p.beta == doctest::Approx(2.0));
    }
    const auto t = lemma_inv_evolve(in, 0, 2.0);
    const auto [up, down] = stationary_circle_centers({0.0, 2.0}, t.points.front().R);
    for (const auto& p : t.points) {
        CHECK(p.R == doctest::Approx(t.points.front().R));
        CHECK(p.beta == doctest::Approx(up.imag()));
    }
    const auto lower = lemma_inv_evolve(in, 0, 2.0, -1);
    CHECK(lower.points.front().beta == doctest::Approx(down.imag()));
    for (double v : log_sigma2U_variation(in, 0)) CHECK(v == 0.0);

    const EstimateInputs pos(make_constant_potential(1.0), one_piece(0.0, 1.0), constant_alpha(0.0));
    CHECK_THROWS_AS(lemma_inv_evolve(pos, 0, 2.0), Error);
}

TEST_CASE("log_sigma2U_variation counts both monotone parts")
{
    // alpha = 0 and U = V = -(2 + cos 2x)/... : |U| rises then falls on [0, pi].
    const Potential V = make_trig_potential(-3.0, 2.0);  // -3 + 2 sin^2 x
    const EstimateInputs in(V, one_piece(0.0, pi, 513), constant_alpha(0.0));
    const auto tv = log_sigma2U_variation(in, 0);
    // log|U| goes from log 3 down to log 1 and back.
    CHECK(tv.back() == doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-8));
    for (std::size_t i = 1; i < tv.size(); ++i) CHECK(tv[i] >= tv[i - 1]);
}

TEST_CASE("lemma_inv2_lens meets the real axis at alpha +- sqrt(U)")
{
    const EstimateInputs in(make_constant_potential(4.0), one_piece(0.0, 1.0), constant_alpha(0.0));
    const auto lens = lemma_inv2_lens(in, 0);
    for (std::size_t i = 0; i < lens.upper.points.size(); ++i) {
        for (const auto* t : {&lens.upper, &lens.lower}) {
            const Disk d = t->points[i].disk();
            CHECK(std::abs(std::abs(cplx(2.0, 0.0) - d.center()) - d.radius()) < 1e-12);
            CHECK(std::abs(std::abs(cplx(-2.0, 0.0) - d.center()) - d.radius()) < 1e-12);
        }
    }
    const EstimateInputs neg(make_constant_potential(-4.0), one_piece(0.0, 1.0), constant_alpha(0.0));
    CHECK_THROWS_AS(lemma_inv2_lens(neg, 0), Error);
}

TEST_CASE("jump_disk")
{
    const Disk old({0.0, 3.0}, 1.0);
    const Disk d = jump_disk(old, 0.5, -4.0, 0.0);
    CHECK(d.alpha() == 0.5);
    CHECK(disk_contains_disk(d, old, 1e-12));
    CHECK(d.radius() * d.radius() - d.beta() * d.beta() == doctest::Approx(-4.0));

    const Disk e = jump_disk(old, 0.0, 9.0, 0.0);
    CHECK(disk_contains_disk(e, old, 1e-12));
    CHECK(e.radius() * e.radius() - e.beta() * e.beta() == doctest::Approx(9.0));

    CHECK_THROWS_AS(jump_disk(Disk({0.0, 0.0}, 1.0), 0.0, -1.0, 0.3), Error);
    try {
        jump_disk(Disk({0.0, 0.0}, 1.0), 0.0, -1.0, 0.3);
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::JumpImpossible);
        CHECK(err.where() == 0.3);
    }
}

TEST_CASE("pipeline on a stationary circle matches the Moebius flow")
{
    const Potential V = make_constant_potential(-4.0);
    const Grid g = one_piece(0.0, 3.0, 129);
    const EstimateInputs in(V, g, constant_alpha(0.0));
    const double R0 = 1.0;
    const auto [up, down] = stationary_circle_centers({0.0, 2.0}, R0);
    const auto t = evolve_pipeline(in, Policy{}, Disk(up, R0));
    const auto flow = ConstantFlow::from_potential(-4.0);
    for (const auto& p : t.points) {
        const Disk m = propagate_circle(flow, up, R0, p.x);
        CHECK(std::abs(m.center() - p.disk().center()) < 1e-6);
        CHECK(std::abs(m.radius() - p.R) < 1e-6);
    }
    for (const auto& r : lemma1_residuals(t, in)) {
        CHECK(std::abs(r.dR) < 1e-8);
        CHECK(std::abs(r.dalpha) < 1e-8);
        CHECK(std::abs(r.dbeta) < 1e-8);
    }
}

TEST_CASE("pipeline disks contain the Moebius image on a constant complex potential")
{
    const cplx zeta(0.5, 2.0);
    const Potential V = make_constant_potential(zeta * zeta);
    RegionPlan p;
    p.regions = {RegionSpec{{0.0, 2.0}, RegionKind::Wkb, +1, {}, 0.0, 0.0}};
    const auto approx = std::make_shared<const GluedApprox>(glue(V, p, one_piece(0.0, 2.0, 257)));
    const EstimateInputs in = EstimateInputs::from_approx(approx);
    const Disk init(zeta + cplx(0.0, 0.5), 0.3);
    const auto t = evolve_pipeline(in, Policy{}, init);
    const auto flow = ConstantFlow::from_zeta(zeta);
    for (const auto& q : t.points) {
        const Disk m = propagate_circle(flow, init.center(), init.radius(), q.x);
        CHECK(disk_contains_disk(q.disk(), m, 1e-6));
    }
}

TEST_CASE("example_5_1 pipeline residuals")
{
    const auto approx = example_1_approx({}, 2048);
    const EstimateInputs in = EstimateInputs::from_approx(approx);
    const cplx y0 = approx->ytilde().at(0, 0);
    const auto t = evolve_pipeline(in, Policy{}, Disk(y0, 2.5));
    CHECK(t.points.back().x == doctest::Approx(pi / 2));
    for (const auto& r : lemma1_residuals(t, in)) CHECK(r.holds());
    // Finite-difference residuals agree up to discretization error.
    const auto num = lemma1_residuals_numeric(t, in);
    std::size_t bad = 0;
    for (const auto& r : num) bad += r.margin < -1e-2 * (1.0 + r.scale);
    CHECK(bad == 0);
    bool saw_jump = false;
    for (const auto& q : t.points) saw_jump = saw_jump || q.jump;
    CHECK(saw_jump);
}

TEST_CASE("Policy JSON")
{
    Policy p;
    p.switch_eta = 2e-3;
    p.piece_modes = {PieceMode::Auto, PieceMode::B, PieceMode::Thm2};
    const Policy q = Policy::from_json(p.to_json());
    CHECK(q.switch_eta == p.switch_eta);
    CHECK(q.piece_modes == p.piece_modes);
    CHECK(q.mode(7) == PieceMode::Auto);
    CHECK(piece_mode_from_string("thm2") == PieceMode::Thm2);
    CHECK_THROWS_AS(piece_mode_from_string("C"), Error);
}
