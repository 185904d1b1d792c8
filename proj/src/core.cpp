#include "riccati/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace riccati {

Disk::Disk(cplx center, double radius) : center_(center), radius_(radius)
{
    if (!is_finite(center) || !std::isfinite(radius)) {
        fail(ErrorKind::InvalidArgument, "disk with non-finite center or radius");
    }
    if (radius < 0.0) fail(ErrorKind::InvalidArgument, "disk radius must be non-negative");
}

bool disk_contains(const Disk& d, cplx z, double tol)
{
    return std::abs(z - d.center()) <= d.radius() + tol;
}

bool disk_contains_disk(const Disk& outer, const Disk& inner, double tol)
{
    return std::abs(outer.center() - inner.center()) + inner.radius() <= outer.radius() + tol;
}

double lens_radius(const Disk& a, const Disk& b)
{
    const double d = std::abs(a.center() - b.center());
    const double r1 = a.radius();
    const double r2 = b.radius();
    if (d > r1 + r2) return -1.0;
    if (d + std::min(r1, r2) <= std::max(r1, r2)) return std::min(r1, r2);
    // Proper intersection: chord at distance t from a's center along the
    // center line; the lens spans [d - r2, r1] along that line.
    const double t = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    const double half_chord = std::sqrt(std::max(0.0, r1 * r1 - t * t));
    const double sag1 = r1 - t;
    const double sag2 = t - (d - r2);
    if (std::max(sag1, sag2) <= half_chord) return half_chord;
    return sag1 > half_chord ? r1 : r2;
}

// ---------------------------------------------------------------------------

Grid::Grid(std::vector<double> points, std::vector<double> breakpoints)
    : points_(std::move(points))
{
    if (points_.size() < 2) fail(ErrorKind::InvalidGrid, "grid needs at least two points");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i])) fail(ErrorKind::InvalidGrid, "non-finite grid point");
        if (i > 0 && !(points_[i] > points_[i - 1])) {
            fail(ErrorKind::InvalidGrid, "grid points must be strictly increasing", points_[i]);
        }
    }
    std::sort(breakpoints.begin(), breakpoints.end());
    bounds_.push_back(0);
    for (double b : breakpoints) {
        if (b <= points_.front() || b >= points_.back()) {
            fail(ErrorKind::InvalidGrid, "breakpoint outside the open grid interval", b);
        }
        auto it = std::lower_bound(points_.begin(), points_.end(), b);
        if (it == points_.end() || *it != b) {
            fail(ErrorKind::InvalidGrid, "breakpoint is not a grid point", b);
        }
        const auto idx = static_cast<std::size_t>(it - points_.begin());
        if (idx == bounds_.back()) fail(ErrorKind::InvalidGrid, "duplicate breakpoint", b);
        bounds_.push_back(idx);
    }
    bounds_.push_back(points_.size() - 1);
    for (std::size_t k = 0; k + 1 < bounds_.size(); ++k) {
        if (bounds_[k + 1] - bounds_[k] < min_interior_points + 1) {
            fail(ErrorKind::InvalidGrid, "piece has fewer than 8 interior points",
                 points_[bounds_[k]]);
        }
    }
}

Grid Grid::uniform_pieces(double lo, double hi, std::size_t n_points, std::vector<double> breakpoints)
{
    if (!(hi > lo)) fail(ErrorKind::InvalidGrid, "empty grid interval");
    std::sort(breakpoints.begin(), breakpoints.end());
    std::vector<double> edges{lo};
    edges.insert(edges.end(), breakpoints.begin(), breakpoints.end());
    edges.push_back(hi);
    const std::size_t pieces = edges.size() - 1;
    const std::size_t min_intervals = min_interior_points + 1;
    if (n_points < 2 || n_points - 1 < pieces * min_intervals) {
        fail(ErrorKind::InvalidGrid, "too few grid points for the requested breakpoints");
    }
    for (std::size_t k = 0; k < pieces; ++k) {
        if (!(edges[k + 1] > edges[k])) fail(ErrorKind::InvalidGrid, "breakpoints out of range");
    }

    // Largest-remainder apportionment of the intervals, with a floor per piece.
    const std::size_t total = n_points - 1;
    const std::size_t spare = total - pieces * min_intervals;
    std::vector<std::size_t> counts(pieces, min_intervals);
    std::vector<double> remainders(pieces);
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < pieces; ++k) {
        const double share = spare * (edges[k + 1] - edges[k]) / (hi - lo);
        const auto whole = static_cast<std::size_t>(std::floor(share));
        counts[k] += whole;
        assigned += whole;
        remainders[k] = share - whole;
    }
    std::vector<std::size_t> order(pieces);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t i = 0; assigned < spare; ++i, ++assigned) ++counts[order[i % pieces]];

    std::vector<double> pts;
    pts.reserve(n_points);
    pts.push_back(lo);
    for (std::size_t k = 0; k < pieces; ++k) {
        const double a = edges[k];
        const double b = edges[k + 1];
        for (std::size_t j = 1; j <= counts[k]; ++j) {
            pts.push_back(j == counts[k] ? b : a + (b - a) * static_cast<double>(j) / counts[k]);
        }
    }
    return Grid(std::move(pts), std::move(breakpoints));
}

std::vector<double> Grid::breakpoints() const
{
    std::vector<double> out;
    for (std::size_t k = 1; k + 1 < bounds_.size(); ++k) out.push_back(points_[bounds_[k]]);
    return out;
}

Interval Grid::piece_interval(std::size_t k) const
{
    return {points_[piece_first(k)], points_[piece_last(k)]};
}

std::span<const double> Grid::piece_points(std::size_t k) const
{
    const std::size_t first = piece_first(k);
    return std::span<const double>(points_).subspan(first, piece_last(k) - first + 1);
}

std::size_t Grid::piece_of(double x) const
{
    for (std::size_t k = 0; k + 1 < piece_count(); ++k) {
        if (x < points_[bounds_[k + 1]]) return k;
    }
    return piece_count() - 1;
}

std::size_t Grid::index_of(double x) const
{
    auto it = std::lower_bound(points_.begin(), points_.end(), x);
    if (it == points_.end() || *it != x) fail(ErrorKind::InvalidArgument, "not a grid point", x);
    return static_cast<std::size_t>(it - points_.begin());
}

// ---------------------------------------------------------------------------

namespace {

// Integral over [x0, x1] of the quadratic through (x0,f0), (x1,f1), (x2,f2).
template <typename T>
T quad_first(double x0, double x1, double x2, const T& f0, const T& f1, const T& f2)
{
    const double h0 = x1 - x0;
    const double h1 = x2 - x1;
    const double w0 = h0 * (3.0 * h1 + 2.0 * h0) / (6.0 * (h0 + h1));
    const double w1 = h0 * (3.0 * h1 + h0) / (6.0 * h1);
    const double w2 = -h0 * h0 * h0 / (6.0 * h1 * (h0 + h1));
    return w0 * f0 + w1 * f1 + w2 * f2;
}

// Integral over [x1, x2] of the same quadratic.
template <typename T>
T quad_second(double x0, double x1, double x2, const T& f0, const T& f1, const T& f2)
{
    return quad_first(x2, x1, x0, f2, f1, f0) * -1.0;
}

template <typename T>
PiecewiseSamples<T> cumulative_impl(const Grid& grid, const PiecewiseSamples<T>& f, double x0)
{
    if (f.pieces.size() != grid.piece_count()) {
        fail(ErrorKind::InvalidGrid, "samples do not match the grid");
    }
    PiecewiseSamples<T> out;
    out.pieces.resize(grid.piece_count());
    T offset{};
    for (std::size_t k = 0; k < grid.piece_count(); ++k) {
        auto xs = grid.piece_points(k);
        const auto& fs = f.pieces[k];
        if (fs.size() != xs.size()) fail(ErrorKind::InvalidGrid, "samples do not match the grid");
        auto& F = out.pieces[k];
        F.assign(xs.size(), T{});
        F[0] = offset;
        const std::size_t n = xs.size() - 1;  // intervals
        std::size_t i = 0;
        for (; i + 2 <= n; i += 2) {
            const T left = quad_first(xs[i], xs[i + 1], xs[i + 2], fs[i], fs[i + 1], fs[i + 2]);
            const T right = quad_second(xs[i], xs[i + 1], xs[i + 2], fs[i], fs[i + 1], fs[i + 2]);
            F[i + 1] = F[i] + left;
            F[i + 2] = F[i] + (left + right);
        }
        if (i < n) {
            // Odd interval count: last interval from the trailing triple.
            F[n] = F[n - 1] + quad_second(xs[n - 2], xs[n - 1], xs[n], fs[n - 2], fs[n - 1], fs[n]);
        }
        offset = F[n];
    }
    // Shift so that F(x0) = 0.
    const std::size_t idx = grid.index_of(x0);
    const std::size_t piece = grid.piece_of(x0);
    const T base = out.pieces[piece][idx - grid.piece_first(piece)];
    for (auto& piece_values : out.pieces) {
        for (auto& v : piece_values) v -= base;
    }
    return out;
}

template <typename T>
PiecewiseSamples<T> derivative_impl(const Grid& grid, const PiecewiseSamples<T>& f)
{
    if (f.pieces.size() != grid.piece_count()) {
        fail(ErrorKind::InvalidGrid, "samples do not match the grid");
    }
    PiecewiseSamples<T> out;
    out.pieces.resize(grid.piece_count());
    for (std::size_t k = 0; k < grid.piece_count(); ++k) {
        auto xs = grid.piece_points(k);
        const auto& fs = f.pieces[k];
        if (xs.size() < 3) fail(ErrorKind::InvalidGrid, "piece with fewer than 3 points", xs[0]);
        auto& d = out.pieces[k];
        d.resize(xs.size());
        const std::size_t n = xs.size() - 1;
        auto three_point = [&](std::size_t i0, std::size_t at) {
            // Derivative at xs[at] of the quadratic through i0, i0+1, i0+2.
            const double a = xs[i0], b = xs[i0 + 1], c = xs[i0 + 2];
            const double x = xs[at];
            const double wa = (2.0 * x - b - c) / ((a - b) * (a - c));
            const double wb = (2.0 * x - a - c) / ((b - a) * (b - c));
            const double wc = (2.0 * x - a - b) / ((c - a) * (c - b));
            return wa * fs[i0] + wb * fs[i0 + 1] + wc * fs[i0 + 2];
        };
        d[0] = three_point(0, 0);
        for (std::size_t i = 1; i < n; ++i) d[i] = three_point(i - 1, i);
        d[n] = three_point(n - 2, n);
    }
    return out;
}

}  // namespace

PiecewiseSamples<double> cumulative_integral(const Grid& grid, const PiecewiseSamples<double>& f,
                                             double x0)
{
    return cumulative_impl(grid, f, x0);
}

PiecewiseSamples<cplx> cumulative_integral(const Grid& grid, const PiecewiseSamples<cplx>& f,
                                           double x0)
{
    return cumulative_impl(grid, f, x0);
}

PiecewiseSamples<double> numeric_derivative(const Grid& grid, const PiecewiseSamples<double>& f)
{
    return derivative_impl(grid, f);
}

PiecewiseSamples<cplx> numeric_derivative(const Grid& grid, const PiecewiseSamples<cplx>& f)
{
    return derivative_impl(grid, f);
}

std::array<double, 8> gauss_legendre_nodes(double a, double b)
{
    static constexpr std::array<double, 4> nodes{0.1834346424956498, 0.5255324099163290,
                                                 0.7966664774136267, 0.9602898564975363};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::array<double, 8> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        out[3 - i] = mid - half * nodes[i];
        out[4 + i] = mid + half * nodes[i];
    }
    return out;
}

std::array<double, 8> gauss_legendre_weights(double a, double b)
{
    static constexpr std::array<double, 4> weights{0.3626837833783620, 0.3137066458778873,
                                                   0.2223810344533745, 0.1012285362903763};
    const double half = 0.5 * (b - a);
    std::array<double, 8> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        out[3 - i] = weights[i] * half;
        out[4 + i] = weights[i] * half;
    }
    return out;
}

}  // namespace riccati
