#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

// Asymptotic Kolmogorov tail P[sqrt(n) D > t] (with the Stephens correction).
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double t = (sn + 0.12 + 0.11 / sn) * d;
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * t * t);
    sum += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

// One-sample KS p-value against a continuous CDF.
inline double ks_test(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - u, u - static_cast<double>(i) / n});
  }
  return ks_pvalue(d, x.size());
}

// Pearson chi-square GOF p-value; cells with expected count < 5 are pooled
// into their neighbours.
inline double chi_square_pvalue(const std::vector<double>& observed, const std::vector<double>& expected) {
  std::vector<double> obs;
  std::vector<double> exp;
  double o_acc = 0.0;
  double e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += expected[i];
    if (e_acc >= 5.0) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (!exp.empty()) {
    obs.back() += o_acc;
    exp.back() += e_acc;
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  const double dof = static_cast<double>(obs.size()) - 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
}

inline double binomial_pmf(std::size_t k, double p, std::size_t j) {
  if (p <= 0.0) return j == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return j == k ? 1.0 : 0.0;
  return boost::math::pdf(boost::math::binomial(static_cast<double>(k), p), static_cast<double>(j));
}

inline double success_prob(double tau, double z) { return 0.75 * (1.0 - std::exp(-2.0 * (tau + z))); }

// P[theta = j] for Z ~ Exp(1) on [z_lo, z_hi), by Boost quadrature.
inline double mixture_pmf(std::size_t k, double tau, double z_lo, double z_hi, std::size_t j) {
  auto integrand = [&](double z) { return binomial_pmf(k, success_prob(tau, z), j) * std::exp(-(z - z_lo)); };
  double value = 0.0;
  if (std::isinf(z_hi)) {
    boost::math::quadrature::exp_sinh<double> integrator;
    value = integrator.integrate([&](double u) { return integrand(z_lo + u); }, 0.0, std::numeric_limits<double>::infinity());
    return value;
  }
  value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, z_lo, z_hi, 15, 1e-13);
  return value / -std::expm1(-(z_hi - z_lo));
}

}  // namespace oracle
