#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coaldetect/errors.hpp"
#include "coaldetect/mixing.hpp"

namespace coaldetect {

enum class Provenance { null_model, signal, alternative, mixture, binomial, empirical };

std::string to_string(Provenance provenance);

/// Law of theta on {0, ..., k}. `log_prob` is kept alongside `prob` because
/// likelihood ratios far in the tails underflow in linear space.
struct ThetaPmf {
  std::size_t k = 0;
  Eigen::VectorXd prob;
  Eigen::VectorXd log_prob;
  Provenance provenance = Provenance::empirical;
  std::optional<double> sigma_f;

  /// P[theta <= j].
  double cdf(std::size_t j) const;
  /// Throws DomainError unless entries are nonnegative and sum to 1 within 1e-10.
  void validate() const;
};

/// Entry j = C(k, j) E[X^j (1 - X)^(k - j)], each by adaptive Gauss-Legendre
/// quadrature in the Z variable, truncated at Z - z_lower = 40.
ThetaPmf pmf_theta(std::size_t k, const MixingDensity& mix);

/// (1 - weight) a + weight b, entrywise in log space.
ThetaPmf mix_pmfs(const ThetaPmf& a, const ThetaPmf& b, double weight);

ThetaPmf empirical_pmf(std::size_t k, std::span<const int> samples);

/// Sum_j (sqrt p_j - sqrt q_j)^2 for any pair of dense vectors.
template <typename DerivedP, typename DerivedQ>
double hellinger2(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedQ>& q) {
  return (p.array().sqrt() - q.array().sqrt()).square().sum();
}

/// Half the l1 distance.
template <typename DerivedP, typename DerivedQ>
double total_variation(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedQ>& q) {
  return 0.5 * (p - q).cwiseAbs().sum();
}

double hellinger2(const ThetaPmf& p, const ThetaPmf& q);
double tv(const ThetaPmf& p, const ThetaPmf& q);

/// Squared Hellinger distance between m-fold products: 2 (1 - (1 - h2/2)^m).
double tensorize_h2(double h2_single, std::size_t m);

struct TvBracket {
  double lower;
  double upper;
};

/// Interval [H_m^2 / 2, sqrt(H_m^2 (1 - H_m^2 / 4))] containing the m-gene TV.
TvBracket tv_bracket_m(double h2_single, std::size_t m);

/// Per-entry Hellinger contributions between P0 and (1 - sigma) P0 + sigma P1,
/// written through the likelihood ratio P1/P0:
///   [sqrt(1 + sigma (r_j - 1)) - 1]^2 P0_j.
Eigen::VectorXd hellinger2_mixture_terms(const ThetaPmf& p0, const ThetaPmf& p1, double sigma);

struct ScanRow {
  double f = 0.0;
  double kappa = 0.0;
  std::size_t k = 0;
  double h2 = 0.0;
  double ratio = 0.0;  // h2 / (f^2 sqrt k)
  double h2_j0 = 0.0;  // p0 <= j/k <= p0 + C sqrt(log k / k)
  double h2_j1 = 0.0;  // above J0
  double h2_jprime = 0.0;  // j/k < p0
};

/// k = ceil(f^(-2 + 2 kappa)); refuses k > 1e8.
std::size_t scan_sites(double f, double kappa);

/// Exact H^2(P0, Q) at (f, k) with its decomposition over J0, J1, J'.
ScanRow hellinger_row(double f, std::size_t k, double interval_constant = 1.0);

std::vector<ScanRow> hellinger_scaling_scan(double kappa, std::span<const double> f_grid,
                                            double interval_constant = 1.0, std::size_t threads = 1);

/// ceil(x) that forgives representation error just above an integer.
std::size_t ceil_count(double x);

}  // namespace coaldetect
