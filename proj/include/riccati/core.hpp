#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "riccati/error.hpp"

namespace riccati {

using cplx = std::complex<double>;

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Closed real interval [lo, hi].
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const { return x >= lo && x <= hi; }
    double length() const { return hi - lo; }
};

/// Closed disk in the complex plane. The center m = alpha + i beta is the
/// approximate Riccati solution, the radius its error bound.
class Disk {
public:
    Disk() = default;
    Disk(cplx center, double radius);

    cplx center() const { return center_; }
    double radius() const { return radius_; }
    double alpha() const { return center_.real(); }
    double beta() const { return center_.imag(); }
    /// Highest point of the disk, beta + R.
    double top() const { return center_.imag() + radius_; }
    /// Lowest point of the disk, beta - R.
    double bottom() const { return center_.imag() - radius_; }

private:
    cplx center_{0.0, 0.0};
    double radius_ = 0.0;
};

/// True iff |z - center| <= radius + tol.
bool disk_contains(const Disk& d, cplx z, double tol = 0.0);

/// True iff |outer.center - inner.center| + inner.radius <= outer.radius + tol.
bool disk_contains_disk(const Disk& outer, const Disk& inner, double tol = 0.0);

/// Radius of the smallest circle enclosing the intersection of two disks.
/// Returns a negative value when the disks are disjoint.
double lens_radius(const Disk& a, const Disk& b);

/// Grid of strictly increasing points split into smooth pieces by breakpoints.
/// Piece k covers the point indices [piece_first(k), piece_last(k)]; adjacent
/// pieces share their boundary point.
class Grid {
public:
    static constexpr std::size_t min_interior_points = 8;

    Grid(std::vector<double> points, std::vector<double> breakpoints);

    /// Uniform spacing on every piece; n_points total (breakpoints included),
    /// distributed proportionally to piece length.
    static Grid uniform_pieces(double lo, double hi, std::size_t n_points,
                               std::vector<double> breakpoints = {});

    std::span<const double> points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }

    /// Interior breakpoints (piece boundaries other than the endpoints).
    std::vector<double> breakpoints() const;

    std::size_t piece_count() const { return bounds_.size() - 1; }
    std::size_t piece_first(std::size_t k) const { return bounds_.at(k); }
    std::size_t piece_last(std::size_t k) const { return bounds_.at(k + 1); }
    Interval piece_interval(std::size_t k) const;
    std::span<const double> piece_points(std::size_t k) const;

    /// Piece containing x; at a breakpoint the piece to the right is returned
    /// (the last piece for the right endpoint).
    std::size_t piece_of(double x) const;

    /// Index of the grid point equal to x; throws if x is not a grid point.
    std::size_t index_of(double x) const;

private:
    std::vector<double> points_;
    std::vector<std::size_t> bounds_;
};

/// Function sampled on a Grid, stored per piece so that values may differ on
/// the two sides of a breakpoint.
template <typename T>
struct PiecewiseSamples {
    std::vector<std::vector<T>> pieces;

    const T& at(std::size_t piece, std::size_t j) const { return pieces.at(piece).at(j); }
    T& at(std::size_t piece, std::size_t j) { return pieces.at(piece).at(j); }
    /// Value at the right end of the grid.
    const T& back() const { return pieces.back().back(); }
};

template <typename T, typename F>
PiecewiseSamples<T> sample(const Grid& grid, F&& f)
{
    PiecewiseSamples<T> s;
    s.pieces.resize(grid.piece_count());
    for (std::size_t k = 0; k < grid.piece_count(); ++k) {
        auto pts = grid.piece_points(k);
        s.pieces[k].reserve(pts.size());
        for (double x : pts) s.pieces[k].push_back(static_cast<T>(f(k, x)));
    }
    return s;
}

/// Antiderivative F of f with F(x0) = 0. Composite Simpson per smooth piece,
/// never across a breakpoint; x0 must be a grid point.
PiecewiseSamples<double> cumulative_integral(const Grid& grid, const PiecewiseSamples<double>& f,
                                             double x0);
PiecewiseSamples<cplx> cumulative_integral(const Grid& grid, const PiecewiseSamples<cplx>& f,
                                           double x0);

/// Second-order finite differences per piece: central in the interior,
/// one-sided at piece edges.
PiecewiseSamples<double> numeric_derivative(const Grid& grid, const PiecewiseSamples<double>& f);
PiecewiseSamples<cplx> numeric_derivative(const Grid& grid, const PiecewiseSamples<cplx>& f);

/// 8-point Gauss-Legendre rule on [a, b].
template <typename F>
auto gauss_legendre(F&& f, double a, double b) -> decltype(f(a))
{
    static constexpr std::array<double, 4> nodes{0.1834346424956498, 0.5255324099163290,
                                                 0.7966664774136267, 0.9602898564975363};
    static constexpr std::array<double, 4> weights{0.3626837833783620, 0.3137066458778873,
                                                   0.2223810344533745, 0.1012285362903763};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    decltype(f(a)) acc{};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        acc += weights[i] * (f(mid - half * nodes[i]) + f(mid + half * nodes[i]));
    }
    return acc * half;
}

/// Nodes of the 8-point rule mapped to [a, b], ascending.
std::array<double, 8> gauss_legendre_nodes(double a, double b);
/// Weights of the 8-point rule mapped to [a, b], matching gauss_legendre_nodes.
std::array<double, 8> gauss_legendre_weights(double a, double b);

}  // namespace riccati
