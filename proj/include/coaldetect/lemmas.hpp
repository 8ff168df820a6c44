#pragma once

#include <cmath>

#include "coaldetect/errors.hpp"

namespace coaldetect {

/// h_b(s) = (sqrt(1 + b (s - 1)) - 1)^2, the Hellinger integrand of a
/// b-weighted mixture at likelihood ratio s.
template <typename Scalar>
Scalar helper_h_b(Scalar b, Scalar s) {
  if (!(b > 0) || !(s >= 0)) throw DomainError("h_b: need b > 0 and s >= 0");
  const Scalar inner = 1 + b * (s - 1);
  if (inner < 0) throw DomainError("h_b: 1 + b (s - 1) is negative");
  const Scalar root_minus_one = (inner - 1) / (std::sqrt(inner) + 1);
  return root_minus_one * root_minus_one;
}

/// Phi_j(x) = (j/k) log x + ((k - j)/k) log(1 - x).
template <typename Scalar>
Scalar helper_phi(int j, int k, Scalar x) {
  if (k <= 0 || j < 0 || j > k || !(x > 0 && x < 1)) throw DomainError("phi: need 0 <= j <= k, k > 0, x in (0, 1)");
  const Scalar a = Scalar(j) / Scalar(k);
  return a * std::log(x) + (1 - a) * std::log1p(-x);
}

template <typename Scalar>
Scalar helper_phi_derivative(int j, int k, Scalar x) {
  const Scalar a = Scalar(j) / Scalar(k);
  return (a - x) / (x * (1 - x));
}

/// Psi_{j,p}(x) = (j/k) log(p / (p - x)) + ((k - j)/k) log((1 - p) / (1 - p + x)).
template <typename Scalar>
Scalar helper_psi(int j, int k, Scalar p, Scalar x) {
  if (k <= 0 || j < 0 || j > k || !(p > 0 && p < 1) || !(x >= 0 && x < p)) {
    throw DomainError("psi: need 0 <= j <= k, p in (0, 1), x in [0, p)");
  }
  const Scalar a = Scalar(j) / Scalar(k);
  return -a * std::log1p(-x / p) - (1 - a) * std::log1p(x / (1 - p));
}

template <typename Scalar>
Scalar helper_psi_derivative(int j, int k, Scalar p, Scalar x) {
  const Scalar a = Scalar(j) / Scalar(k);
  return a / (p - x) - (1 - a) / (1 - p + x);
}

template <typename Scalar>
Scalar helper_psi_second_derivative(int j, int k, Scalar p, Scalar x) {
  const Scalar a = Scalar(j) / Scalar(k);
  return a / ((p - x) * (p - x)) + (1 - a) / ((1 - p + x) * (1 - p + x));
}

}  // namespace coaldetect
