#include <doctest.h>

#include <cmath>

#include "riccati/core.hpp"

using namespace riccati;

TEST_CASE("disk_contains")
{
    const Disk unit({0.0, 0.0}, 1.0);
    CHECK(disk_contains(unit, {1.0, 0.0}));
    CHECK_FALSE(disk_contains(unit, {1.0, 1.0}));
    // i lies inside the R0 = 1 stationary circle of zeta = i.
    CHECK(disk_contains(Disk({0.0, std::sqrt(2.0)}, 1.0), {0.0, 1.0}));
    CHECK(disk_contains(unit, {1.0 + 1e-9, 0.0}, 1e-8));
}

TEST_CASE("disk_contains_disk")
{
    CHECK(disk_contains_disk(Disk({0.0, 0.0}, 2.0), Disk({0.5, 0.0}, 1.0)));
    CHECK(disk_contains_disk(Disk({0.0, 0.0}, 1.0), Disk({0.0, 0.0}, 1.0)));
    CHECK_FALSE(disk_contains_disk(Disk({0.0, 0.0}, 1.0), Disk({1.0, 0.0}, 0.5)));
}

TEST_CASE("lens_radius")
{
    const Disk a({0.0, 0.0}, 1.0);
    CHECK(lens_radius(a, Disk({0.5, 0.0}, 0.2)) == doctest::Approx(0.2));
    CHECK(lens_radius(a, Disk({3.0, 0.0}, 1.0)) < 0.0);
    // Two unit disks a distance 1 apart meet in a lens of half-chord sqrt(3)/2.
    CHECK(lens_radius(a, Disk({1.0, 0.0}, 1.0)) == doctest::Approx(std::sqrt(3.0) / 2.0));
}

TEST_CASE("grid layout")
{
    const Grid g = Grid::uniform_pieces(0.0, 1.0, 101, {0.25, 0.5});
    CHECK(g.size() == 101);
    CHECK(g.piece_count() == 3);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    CHECK(g.breakpoints() == std::vector<double>{0.25, 0.5});
    CHECK(g.points()[g.piece_last(0)] == 0.25);
    CHECK(g.piece_last(0) == g.piece_first(1));
    CHECK(g.piece_of(0.25) == 1);
    CHECK(g.piece_of(1.0) == 2);
    CHECK(g.index_of(0.5) == g.piece_first(2));
    CHECK_THROWS_AS(g.index_of(0.123456), Error);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g.points()[i] > g.points()[i - 1]);
}

TEST_CASE("grid rejects bad input")
{
    CHECK_THROWS_AS(Grid({0.0, 0.5, 0.4, 1.0}, {}), Error);
    CHECK_THROWS_AS(Grid::uniform_pieces(0.0, 1.0, 20, {0.5, 0.51}), Error);
}

TEST_CASE("cumulative_integral")
{
    const Grid g = Grid::uniform_pieces(0.0, 1.0, 129);
    const auto zero = sample<double>(g, [](std::size_t, double) { return 0.0; });
    const auto F0 = cumulative_integral(g, zero, 0.0);
    for (double v : F0.pieces[0]) CHECK(v == 0.0);

    const auto f = sample<double>(g, [](std::size_t, double x) { return 2.0 * x; });
    CHECK(cumulative_integral(g, f, 0.0).back() == doctest::Approx(1.0).epsilon(1e-10));

    // Anchored inside: F(x0) = 0.
    const auto F = cumulative_integral(g, f, 0.5);
    CHECK(std::abs(F.at(0, 64)) < 1e-14);
    CHECK(F.back() == doctest::Approx(0.75).epsilon(1e-10));
}

TEST_CASE("cumulative_integral does not smooth across breakpoints")
{
    const Grid g = Grid::uniform_pieces(0.0, 2.0, 201, {1.0});
    // Step function: 0 on the left piece, 1 on the right one.
    const auto f = sample<double>(g, [](std::size_t k, double) { return k == 0 ? 0.0 : 1.0; });
    const auto F = cumulative_integral(g, f, 0.0);
    CHECK(F.pieces[0].back() == doctest::Approx(0.0));
    CHECK(F.back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("numeric_derivative")
{
    const Grid g = Grid::uniform_pieces(0.0, 1.0, 1001);
    const auto c = sample<double>(g, [](std::size_t, double) { return 3.0; });
    const auto dc = numeric_derivative(g, c);
    for (double v : dc.pieces[0]) CHECK(std::abs(v) < 1e-9);

    const auto f = sample<double>(g, [](std::size_t, double x) { return x * x; });
    const auto d = numeric_derivative(g, f);
    const auto pts = g.piece_points(0);
    for (std::size_t j = 0; j < pts.size(); ++j) CHECK(std::abs(d.at(0, j) - 2.0 * pts[j]) < 1e-6);
}

TEST_CASE("gauss_legendre integrates degree 15 exactly")
{
    const double v = gauss_legendre([](double x) { return std::pow(x, 15) + x * x; }, 0.0, 2.0);
    CHECK(v == doctest::Approx(std::pow(2.0, 16) / 16.0 + 8.0 / 3.0).epsilon(1e-14));
}
