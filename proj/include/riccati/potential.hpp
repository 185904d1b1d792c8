#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "riccati/core.hpp"

namespace riccati {

/// Value and the first three derivatives of a potential at one point.
struct PotentialJet {
    cplx v;
    cplx d1;
    cplx d2;
    cplx d3;
};

/// V_A(x) = a + b x, the potential of an Airy region.
struct LinearPotential {
    cplx a;
    cplx b;

    cplx operator()(double x) const { return a + b * x; }
    /// Replaces the slope by b + delta while keeping the value at `pivot`.
    LinearPotential with_slope_offset(cplx delta, double pivot) const;
};

namespace detail {
struct PotentialImpl {
    virtual ~PotentialImpl() = default;
    virtual PotentialJet jet(double x) const = 0;
    virtual nlohmann::json to_json() const = 0;
};
}  // namespace detail

/// Complex potential V(x) with analytic derivatives up to third order.
/// Immutable; copies share the underlying definition.
class Potential {
public:
    Potential(std::shared_ptr<const detail::PotentialImpl> impl, bool real, Interval domain = {});

    PotentialJet jet(double x) const { return impl_->jet(x); }
    cplx operator()(double x) const { return impl_->jet(x).v; }
    cplx d1(double x) const { return impl_->jet(x).d1; }
    cplx d2(double x) const { return impl_->jet(x).d2; }
    cplx d3(double x) const { return impl_->jet(x).d3; }

    const Interval& domain() const { return domain_; }
    Potential with_domain(Interval domain) const { return Potential(impl_, real_, domain); }

    /// True when the imaginary part vanishes identically by construction.
    bool is_real() const { return real_; }

    nlohmann::json to_json() const;

private:
    std::shared_ptr<const detail::PotentialImpl> impl_;
    bool real_ = false;
    Interval domain_;
};

/// offset + amplitude * sin^2(x).
Potential make_trig_potential(cplx offset, cplx amplitude);
/// prefactor * (-1/2 + (1 + i c_im) sin^2 x).
Potential make_sine_potential(double prefactor, double c_im);
Potential make_constant_potential(cplx value);
Potential make_linear_potential(const LinearPotential& lin);
/// Natural cubic spline through tabulated real and imaginary parts.
Potential make_tabulated_potential(std::vector<double> xs, std::vector<double> re,
                                   std::vector<double> im);

/// factor * V with all derivatives scaled.
Potential multiply(const Potential& v, cplx factor);
/// lambda * V, lambda > 0.
Potential scale(const Potential& v, double lambda);
/// factor * V with factor in (0, 1]; meant as a WKB ansatz potential only.
Potential damp(const Potential& v, double factor);

/// First-order Taylor polynomial of V at x0.
LinearPotential linearize_at(const Potential& v, double x0);

/// Builds a potential from its JSON fragment:
/// {"kind":"sine","prefactor":..,"c_im":..} | {"kind":"linear","a":[re,im],"b":[re,im]}
/// | {"kind":"table","x":[..],"re":[..],"im":[..]} | {"kind":"trig",...}
/// | {"kind":"constant","value":[re,im]} | {"kind":"scaled","factor":[re,im],"base":{..}}.
Potential potential_from_json(const nlohmann::json& j);

nlohmann::json complex_to_json(cplx z);
cplx complex_from_json(const nlohmann::json& j);

}  // namespace riccati
