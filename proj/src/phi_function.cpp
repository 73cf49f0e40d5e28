#include "phientropy/phi_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "phientropy/quadrature.hpp"

namespace phientropy {

PhiFunction PhiFunction::affine(double slope, double intercept) {
  if (!std::isfinite(slope) || !std::isfinite(intercept))
    throw InvalidInput("affine phi needs finite coefficients");
  PhiFunction f;
  f.kind_ = Kind::Affine;
  f.slope_ = slope;
  f.intercept_ = intercept;
  return f;
}

PhiFunction PhiFunction::entropy() {
  PhiFunction f;
  f.kind_ = Kind::Entropy;
  return f;
}

PhiFunction PhiFunction::power(double q) {
  if (q == 1.0) return affine(1.0, 0.0);
  if (!(q > 1.0 && q <= 2.0)) throw InvalidInput(fmt::format("power exponent {} outside (1, 2]", q));
  PhiFunction f;
  f.kind_ = Kind::Power;
  f.q_ = q;
  return f;
}

PhiFunction PhiFunction::unchecked_power(double q) {
  if (!(q > 1.0) || !std::isfinite(q)) throw InvalidInput("power exponent must exceed 1");
  PhiFunction f;
  f.kind_ = Kind::Power;
  f.q_ = q;
  f.admissible_ = q <= 2.0;
  return f;
}

PhiFunction PhiFunction::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw InvalidInput("empty phi string");
  auto number = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(parts.at(i), &used);
      if (used != parts[i].size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw InvalidInput("malformed phi string '" + text + "'");
    }
  };
  if (parts[0] == "entropy" && parts.size() == 1) return entropy();
  if (parts[0] == "power" && parts.size() == 2) {
    const double q = number(1);
    return (q > 1.0 && q <= 2.0) || q == 1.0 ? power(q) : unchecked_power(q);
  }
  if (parts[0] == "affine" && parts.size() == 3) return affine(number(1), number(2));
  throw InvalidInput("unknown phi string '" + text + "'");
}

std::string PhiFunction::name() const {
  switch (kind_) {
    case Kind::Affine:
      return fmt::format("affine:{}:{}", slope_, intercept_);
    case Kind::Entropy:
      return "entropy";
    case Kind::Power:
      return fmt::format("power:{}", q_);
  }
  return {};
}

double PhiFunction::phi(double t) const {
  switch (kind_) {
    case Kind::Affine:
      return slope_ * t + intercept_;
    case Kind::Entropy:
      return t > 0.0 ? t * std::log(t) : 0.0;
    case Kind::Power:
      return std::pow(t, q_);
  }
  return 0.0;
}

double PhiFunction::psi(double t) const {
  switch (kind_) {
    case Kind::Affine:
      return slope_;
    case Kind::Entropy:
      return 1.0 + std::log(t);
    case Kind::Power:
      return q_ * std::pow(t, q_ - 1.0);
  }
  return 0.0;
}

double PhiFunction::psi_prime(double t) const {
  switch (kind_) {
    case Kind::Affine:
      return 0.0;
    case Kind::Entropy:
      return 1.0 / t;
    case Kind::Power:
      return q_ * (q_ - 1.0) * std::pow(t, q_ - 2.0);
  }
  return 0.0;
}

double PhiFunction::entropy_minus_t(double t) const {
  return kind_ == Kind::Entropy ? phi(t) - t : phi(t);
}

ScalarFunction PhiFunction::phi_view() const {
  const PhiFunction self = *this;
  return {[self](double t) { return self.phi(t); }, [self](double t) { return self.psi(t); },
          Interval::nonnegative(), name()};
}

ScalarFunction PhiFunction::psi_view() const {
  const PhiFunction self = *this;
  return {[self](double t) { return self.psi(t); }, [self](double t) { return self.psi_prime(t); },
          psi_singular_at_zero() ? Interval::positive() : Interval::nonnegative(), "psi of " + name()};
}

bool PhiFunction::psi_singular_at_zero() const { return kind_ == Kind::Entropy; }

double divided_difference(const ScalarFunction& f, double lambda, double mu) {
  if (!f.domain.contains(lambda, kDomainSlack)) throw DomainViolation(lambda, f.domain.lo, f.domain.hi);
  if (!f.domain.contains(mu, kDomainSlack)) throw DomainViolation(mu, f.domain.lo, f.domain.hi);
  const double hi = std::max(lambda, mu);
  const double lo = std::min(lambda, mu);
  if (hi - lo > 1e-6 * (1.0 + std::abs(hi) + std::abs(lo))) {
    return (f.value(hi) - f.value(lo)) / (hi - lo);
  }
  if (!f.derivative) throw InvalidInput("divided difference near the diagonal needs a derivative");
  if (hi == lo) return f.derivative(hi);
  const auto& rule = gauss_legendre_unit(16);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double tau = rule.nodes[k];
    acc += rule.weights[k] * f.derivative(tau * hi + (1.0 - tau) * lo);
  }
  return acc;
}

}  // namespace phientropy
