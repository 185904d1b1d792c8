#include "riccati/potential.hpp"

#include <algorithm>
#include <cmath>

namespace riccati {

using nlohmann::json;

LinearPotential LinearPotential::with_slope_offset(cplx delta, double pivot) const
{
    const cplx value = a + b * pivot;
    const cplx slope = b + delta;
    return {value - slope * pivot, slope};
}

Potential::Potential(std::shared_ptr<const detail::PotentialImpl> impl, bool real, Interval domain)
    : impl_(std::move(impl)), real_(real), domain_(domain)
{
    if (!impl_) fail(ErrorKind::InvalidArgument, "null potential");
}

json Potential::to_json() const
{
    json j = impl_->to_json();
    if (std::isfinite(domain_.lo) && std::isfinite(domain_.hi)) {
        j["domain"] = {domain_.lo, domain_.hi};
    }
    return j;
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j)
{
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
    fail(ErrorKind::ParseError, "complex value must be a number or [re, im]");
}

namespace {

class TrigPotential final : public detail::PotentialImpl {
public:
    TrigPotential(cplx offset, cplx amplitude, json description)
        : offset_(offset), amplitude_(amplitude), description_(std::move(description))
    {
    }

    PotentialJet jet(double x) const override
    {
        const double s = std::sin(x);
        const double s2 = std::sin(2.0 * x);
        const double c2 = std::cos(2.0 * x);
        return {offset_ + amplitude_ * (s * s), amplitude_ * s2, 2.0 * amplitude_ * c2,
                -4.0 * amplitude_ * s2};
    }

    json to_json() const override { return description_; }

private:
    cplx offset_;
    cplx amplitude_;
    json description_;
};

class LinearImpl final : public detail::PotentialImpl {
public:
    explicit LinearImpl(LinearPotential lin) : lin_(lin) {}

    PotentialJet jet(double x) const override { return {lin_(x), lin_.b, 0.0, 0.0}; }

    json to_json() const override
    {
        return {{"kind", "linear"}, {"a", complex_to_json(lin_.a)}, {"b", complex_to_json(lin_.b)}};
    }

private:
    LinearPotential lin_;
};

class ConstantImpl final : public detail::PotentialImpl {
public:
    explicit ConstantImpl(cplx value) : value_(value) {}

    PotentialJet jet(double) const override { return {value_, 0.0, 0.0, 0.0}; }

    json to_json() const override { return {{"kind", "constant"}, {"value", complex_to_json(value_)}}; }

private:
    cplx value_;
};

class ScaledImpl final : public detail::PotentialImpl {
public:
    ScaledImpl(Potential base, cplx factor) : base_(std::move(base)), factor_(factor) {}

    PotentialJet jet(double x) const override
    {
        const PotentialJet j = base_.jet(x);
        return {factor_ * j.v, factor_ * j.d1, factor_ * j.d2, factor_ * j.d3};
    }

    json to_json() const override
    {
        return {{"kind", "scaled"}, {"factor", complex_to_json(factor_)}, {"base", base_.to_json()}};
    }

private:
    Potential base_;
    cplx factor_;
};

// Natural cubic spline of one real component.
class Spline {
public:
    Spline(const std::vector<double>& xs, std::vector<double> ys) : y_(std::move(ys))
    {
        const std::size_t n = xs.size();
        m_.assign(n, 0.0);
        if (n < 3) return;
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = xs[i] - xs[i - 1];
            const double h1 = xs[i + 1] - xs[i];
            const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
            const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            d[i] = (rhs - h0 * d[i - 1]) / diag;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = d[i] - c[i] * m_[i + 1];
        }
    }

    // Value and three derivatives on segment i at x.
    std::array<double, 4> eval(const std::vector<double>& xs, std::size_t i, double x) const
    {
        const double h = xs[i + 1] - xs[i];
        const double a = xs[i + 1] - x;
        const double b = x - xs[i];
        const double m0 = m_[i];
        const double m1 = m_[i + 1];
        const double c0 = y_[i] / h - m0 * h / 6.0;
        const double c1 = y_[i + 1] / h - m1 * h / 6.0;
        return {m0 * a * a * a / (6.0 * h) + m1 * b * b * b / (6.0 * h) + c0 * a + c1 * b,
                -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - c0 + c1,
                m0 * a / h + m1 * b / h,
                (m1 - m0) / h};
    }

private:
    std::vector<double> y_;
    std::vector<double> m_;
};

class TableImpl final : public detail::PotentialImpl {
public:
    TableImpl(std::vector<double> xs, std::vector<double> re, std::vector<double> im)
        : xs_(std::move(xs)), re_vals_(re), im_vals_(im), re_(xs_, std::move(re)),
          im_(xs_, std::move(im))
    {
    }

    PotentialJet jet(double x) const override
    {
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        std::size_t i = it == xs_.begin() ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
        i = std::min(i, xs_.size() - 2);
        const auto r = re_.eval(xs_, i, x);
        const auto m = im_.eval(xs_, i, x);
        return {{r[0], m[0]}, {r[1], m[1]}, {r[2], m[2]}, {r[3], m[3]}};
    }

    json to_json() const override
    {
        return {{"kind", "table"}, {"x", xs_}, {"re", re_vals_}, {"im", im_vals_}};
    }

private:
    std::vector<double> xs_;
    std::vector<double> re_vals_;
    std::vector<double> im_vals_;
    Spline re_;
    Spline im_;
};

}  // namespace

Potential make_trig_potential(cplx offset, cplx amplitude)
{
    json d = {{"kind", "trig"}, {"offset", complex_to_json(offset)},
              {"amplitude", complex_to_json(amplitude)}};
    return Potential(std::make_shared<TrigPotential>(offset, amplitude, std::move(d)),
                     offset.imag() == 0.0 && amplitude.imag() == 0.0);
}

Potential make_sine_potential(double prefactor, double c_im)
{
    if (!(prefactor > 0.0)) fail(ErrorKind::InvalidArgument, "sine potential needs prefactor > 0");
    const cplx offset = -0.5 * prefactor;
    const cplx amplitude = prefactor * cplx(1.0, c_im);
    json d = {{"kind", "sine"}, {"prefactor", prefactor}, {"c_im", c_im}};
    return Potential(std::make_shared<TrigPotential>(offset, amplitude, std::move(d)),
                     c_im == 0.0);
}

Potential make_constant_potential(cplx value)
{
    return Potential(std::make_shared<ConstantImpl>(value), value.imag() == 0.0);
}

Potential make_linear_potential(const LinearPotential& lin)
{
    return Potential(std::make_shared<LinearImpl>(lin), lin.a.imag() == 0.0 && lin.b.imag() == 0.0);
}

Potential make_tabulated_potential(std::vector<double> xs, std::vector<double> re,
                                   std::vector<double> im)
{
    if (xs.size() < 4) fail(ErrorKind::InvalidArgument, "table needs at least 4 samples");
    if (im.empty()) im.assign(xs.size(), 0.0);
    if (re.size() != xs.size() || im.size() != xs.size()) {
        fail(ErrorKind::InvalidArgument, "table columns differ in length");
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) fail(ErrorKind::InvalidArgument, "table x must increase", xs[i]);
    }
    const bool real = std::all_of(im.begin(), im.end(), [](double v) { return v == 0.0; });
    const Interval domain{xs.front(), xs.back()};
    return Potential(std::make_shared<TableImpl>(std::move(xs), std::move(re), std::move(im)), real,
                     domain);
}

Potential multiply(const Potential& v, cplx factor)
{
    return Potential(std::make_shared<ScaledImpl>(v, factor), v.is_real() && factor.imag() == 0.0,
                     v.domain());
}

Potential scale(const Potential& v, double lambda)
{
    if (!(lambda > 0.0)) fail(ErrorKind::InvalidArgument, "scale needs lambda > 0");
    if (lambda == 1.0) return v;
    return multiply(v, lambda);
}

Potential damp(const Potential& v, double factor)
{
    if (!(factor > 0.0 && factor <= 1.0)) {
        fail(ErrorKind::InvalidArgument, "damp factor must lie in (0, 1]");
    }
    if (factor == 1.0) return v;
    return multiply(v, factor);
}

LinearPotential linearize_at(const Potential& v, double x0)
{
    if (!v.domain().contains(x0)) fail(ErrorKind::InvalidArgument, "linearization point outside domain", x0);
    const PotentialJet j = v.jet(x0);
    return {j.v - x0 * j.d1, j.d1};
}

Potential potential_from_json(const json& j)
{
    try {
        const std::string kind = j.at("kind").get<std::string>();
        Potential p = [&]() -> Potential {
            if (kind == "sine") {
                return make_sine_potential(j.at("prefactor").get<double>(), j.value("c_im", 0.0));
            }
            if (kind == "trig") {
                return make_trig_potential(complex_from_json(j.at("offset")),
                                           complex_from_json(j.at("amplitude")));
            }
            if (kind == "linear") {
                return make_linear_potential({complex_from_json(j.at("a")), complex_from_json(j.at("b"))});
            }
            if (kind == "constant") return make_constant_potential(complex_from_json(j.at("value")));
            if (kind == "table") {
                std::vector<double> im;
                if (j.contains("im")) im = j.at("im").get<std::vector<double>>();
                return make_tabulated_potential(j.at("x").get<std::vector<double>>(),
                                                j.at("re").get<std::vector<double>>(), std::move(im));
            }
            if (kind == "scaled") {
                return multiply(potential_from_json(j.at("base")), complex_from_json(j.at("factor")));
            }
            fail(ErrorKind::ParseError, "unknown potential kind '" + kind + "'");
        }();
        if (j.contains("domain")) {
            const auto& d = j.at("domain");
            p = p.with_domain({d.at(0).get<double>(), d.at(1).get<double>()});
        }
        return p;
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, std::string("potential: ") + e.what());
    }
}

}  // namespace riccati
