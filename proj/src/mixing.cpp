#include "coaldetect/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coaldetect/errors.hpp"

namespace coaldetect {

MixingDensity MixingDensity::coalescent(double tau, double z_lower, double z_upper, MixingTag tag) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("mixing density: tau must be positive");
  if (!(z_lower >= 0.0) || !(z_upper > z_lower)) throw DomainError("mixing density: need 0 <= z_lower < z_upper");
  if (tag == MixingTag::point_mass) throw DomainError("mixing density: use point_mass()");
  MixingDensity out;
  out.tag_ = tag;
  out.tau_ = tau;
  out.z_lower_ = z_lower;
  out.z_upper_ = z_upper;
  return out;
}

MixingDensity MixingDensity::point_mass(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("point mass: p must lie in [0, 1]");
  MixingDensity out;
  out.tag_ = MixingTag::point_mass;
  out.point_ = p;
  return out;
}

double MixingDensity::success_prob(double z) const {
  if (is_point_mass()) return point_;
  return -0.75 * std::expm1(-2.0 * (tau_ + z));
}

std::pair<double, double> MixingDensity::support() const {
  if (is_point_mass()) return {point_, point_};
  const double upper = std::isinf(z_upper_) ? 0.75 : success_prob(z_upper_);
  return {success_prob(z_lower_), upper};
}

double MixingDensity::density(double x) const {
  if (is_point_mass()) return 0.0;
  const auto [lo, hi] = support();
  if (!(x > lo && x < hi)) return 0.0;
  // z(x) = -ln(1 - 4x/3)/2 - tau, dz/dx = (2/3) / (1 - 4x/3).
  const double u = 1.0 - x / 0.75;
  const double z = -0.5 * std::log(u) - tau_;
  const double mass = std::isinf(z_upper_) ? std::exp(-z_lower_) : std::exp(-z_lower_) - std::exp(-z_upper_);
  return std::exp(-z) * (2.0 / 3.0) / u / mass;
}

double MixingDensity::p_bar() const {
  if (is_point_mass()) return point_;
  const auto [lo, hi] = support();
  return std::isinf(z_upper_) ? 0.5 * (lo + hi) : hi;
}

double MixingDensity::rho() const {
  if (is_point_mass()) return 0.0;
  // The density increases in x, so its extremes on (lower, p_bar) are at the ends.
  const auto [lo, hi] = support();
  const double at_lower = density(std::nextafter(lo, hi));
  const double at_cutoff = density(std::nextafter(p_bar(), lo));
  return std::min({1.0, at_lower, 1.0 / at_cutoff});
}

MixingDensity null_mixing_density(double tau) {
  return MixingDensity::coalescent(tau, 0.0, std::numeric_limits<double>::infinity(), MixingTag::null_model);
}

MixtureDecomposition mixture_decompose(double f) {
  if (!(f > 0.0 && f < 1.0)) throw DomainError("mixture_decompose: f must lie in (0, 1)");
  const double inf = std::numeric_limits<double>::infinity();
  auto null_density = null_mixing_density(1.0);
  auto signal = MixingDensity::coalescent(1.0 - f, 0.0, f, MixingTag::signal);
  auto alternative = MixingDensity::coalescent(1.0 - f, 0.0, inf, MixingTag::alternative);
  const double phi = null_density.support().first - signal.support().first;
  return MixtureDecomposition{f, -std::expm1(-f), phi, null_density, signal, alternative};
}

}  // namespace coaldetect
