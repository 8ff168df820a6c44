#include "coaldetect/exact_dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coaldetect/parallel.hpp"
#include "coaldetect/quadrature.hpp"

namespace coaldetect {

namespace {

constexpr double kZTruncation = 40.0;
constexpr double kPanelTolerance = 1e-14;

double log_choose(std::size_t k, std::size_t j) {
  return std::lgamma(static_cast<double>(k) + 1.0) - std::lgamma(static_cast<double>(j) + 1.0) -
         std::lgamma(static_cast<double>(k - j) + 1.0);
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void fill_linear(ThetaPmf& pmf) { pmf.prob = pmf.log_prob.array().exp(); }

// log of C(k, j) E[X^j (1 - X)^(k - j)] for the coalescent mixing law.
class BinomialMixtureIntegrand {
 public:
  BinomialMixtureIntegrand(std::size_t k, const MixingDensity& mix)
      : k_(k),
        tau_(mix.tau() + mix.z_lower()),
        span_(std::min(mix.z_upper() - mix.z_lower(), kZTruncation)),
        log_mass_(std::isinf(mix.z_upper()) ? 0.0 : std::log(-std::expm1(-(mix.z_upper() - mix.z_lower())))) {}

  double log_entry(std::size_t j) const {
    const double jd = static_cast<double>(j);
    const double rest = static_cast<double>(k_ - j);
    const double log_c = log_choose(k_, j);
    auto log_integrand = [&](double s) {
      const double u = std::exp(-2.0 * (tau_ + s));
      double value = -s + log_c;
      if (j > 0) value += jd * (std::log(0.75) + std::log1p(-u));
      if (k_ > j) value += rest * (std::log(0.25) + std::log1p(3.0 * u));
      return value;
    };

    std::vector<double> breaks{0.0, span_};
    for (const double tail : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      if (tail < span_) breaks.push_back(tail);
    }
    // Concentrate panels where x(s) is within a few binomial sd of j/k.
    const double x_lo = success(0.0);
    const double x_hi = success(span_);
    const double centre = jd / static_cast<double>(k_);
    const double sd = std::sqrt(std::max(centre * (1.0 - centre), 1.0 / static_cast<double>(k_)) /
                                static_cast<double>(k_));
    for (const double t : {-8.0, -4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
      const double x = centre + t * sd;
      if (x > x_lo && x < x_hi) breaks.push_back(-0.5 * std::log1p(-x / 0.75) - tau_);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    double scale = -std::numeric_limits<double>::infinity();
    for (const double s : breaks) scale = std::max(scale, log_integrand(s));

    const double scaled = integrate_adaptive<double, 20>(
        [&](double s) { return std::exp(log_integrand(s) - scale); }, breaks, kPanelTolerance);
    return scale + std::log(scaled) - log_mass_;
  }

 private:
  double success(double s) const { return -0.75 * std::expm1(-2.0 * (tau_ + s)); }

  std::size_t k_;
  double tau_;
  double span_;
  double log_mass_;
};

Provenance provenance_of(MixingTag tag) {
  switch (tag) {
    case MixingTag::null_model: return Provenance::null_model;
    case MixingTag::signal: return Provenance::signal;
    case MixingTag::alternative: return Provenance::alternative;
    case MixingTag::point_mass: return Provenance::binomial;
  }
  return Provenance::empirical;
}

void require_same_k(const ThetaPmf& p, const ThetaPmf& q) {
  if (p.k != q.k || p.prob.size() != q.prob.size()) throw DomainError("pmfs have different k");
}

}  // namespace

std::string to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::null_model: return "P0";
    case Provenance::signal: return "P1";
    case Provenance::alternative: return "Q";
    case Provenance::mixture: return "mixture";
    case Provenance::binomial: return "binomial";
    case Provenance::empirical: return "empirical";
  }
  return "unknown";
}

double ThetaPmf::cdf(std::size_t j) const {
  if (j >= k) return prob.sum();
  return prob.head(static_cast<Eigen::Index>(j + 1)).sum();
}

void ThetaPmf::validate() const {
  if (prob.size() != static_cast<Eigen::Index>(k + 1)) throw DomainError("pmf: wrong length");
  if ((prob.array() < 0.0).any() || !prob.allFinite()) throw DomainError("pmf: negative or non-finite entry");
  if (std::abs(prob.sum() - 1.0) > 1e-10) throw DomainError("pmf: entries do not sum to 1");
}

ThetaPmf pmf_theta(std::size_t k, const MixingDensity& mix) {
  ThetaPmf out;
  out.k = k;
  out.provenance = provenance_of(mix.tag());
  out.log_prob.resize(static_cast<Eigen::Index>(k + 1));

  if (k == 0) {
    out.log_prob(0) = 0.0;
  } else if (mix.is_point_mass()) {
    const double p = mix.success_prob(0.0);
    for (std::size_t j = 0; j <= k; ++j) {
      double value = log_choose(k, j);
      if (j > 0) value += static_cast<double>(j) * std::log(p);
      if (k > j) value += static_cast<double>(k - j) * std::log1p(-p);
      out.log_prob(static_cast<Eigen::Index>(j)) = value;
    }
  } else {
    const BinomialMixtureIntegrand integrand(k, mix);
    for (std::size_t j = 0; j <= k; ++j) out.log_prob(static_cast<Eigen::Index>(j)) = integrand.log_entry(j);
  }
  fill_linear(out);
  out.validate();
  return out;
}

ThetaPmf mix_pmfs(const ThetaPmf& a, const ThetaPmf& b, double weight) {
  require_same_k(a, b);
  if (!(weight >= 0.0 && weight <= 1.0)) throw DomainError("mix_pmfs: weight must lie in [0, 1]");
  ThetaPmf out;
  out.k = a.k;
  out.provenance = Provenance::mixture;
  out.sigma_f = weight;
  out.log_prob.resize(a.log_prob.size());
  const double log_keep = std::log1p(-weight);
  const double log_weight = std::log(weight);
  for (Eigen::Index j = 0; j < a.log_prob.size(); ++j) {
    out.log_prob(j) = log_add(log_keep + a.log_prob(j), log_weight + b.log_prob(j));
  }
  fill_linear(out);
  return out;
}

ThetaPmf empirical_pmf(std::size_t k, std::span<const int> samples) {
  if (samples.empty()) throw DomainError("empirical_pmf: no samples");
  ThetaPmf out;
  out.k = k;
  out.provenance = Provenance::empirical;
  out.prob = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k + 1));
  for (const int value : samples) {
    if (value < 0 || static_cast<std::size_t>(value) > k) throw DomainError("empirical_pmf: sample outside [0, k]");
    out.prob(value) += 1.0;
  }
  out.prob /= static_cast<double>(samples.size());
  out.log_prob = out.prob.array().log();
  return out;
}

double hellinger2(const ThetaPmf& p, const ThetaPmf& q) {
  require_same_k(p, q);
  return hellinger2(p.prob, q.prob);
}

double tv(const ThetaPmf& p, const ThetaPmf& q) {
  require_same_k(p, q);
  return total_variation(p.prob, q.prob);
}

double tensorize_h2(double h2_single, std::size_t m) {
  if (!(h2_single >= 0.0 && h2_single <= 2.0)) throw DomainError("tensorize_h2: h2 must lie in [0, 2]");
  if (m < 1) throw DomainError("tensorize_h2: m must be at least 1");
  // 1 - (1 - h/2)^m without cancellation for small h.
  return -2.0 * std::expm1(static_cast<double>(m) * std::log1p(-0.5 * h2_single));
}

TvBracket tv_bracket_m(double h2_single, std::size_t m) {
  const double h2m = tensorize_h2(h2_single, m);
  return {0.5 * h2m, std::min(1.0, std::sqrt(h2m * (1.0 - 0.25 * h2m)))};
}

Eigen::VectorXd hellinger2_mixture_terms(const ThetaPmf& p0, const ThetaPmf& p1, double sigma) {
  require_same_k(p0, p1);
  if (!(sigma >= 0.0 && sigma < 1.0)) throw DomainError("hellinger2_mixture_terms: sigma must lie in [0, 1)");
  Eigen::VectorXd terms(p0.log_prob.size());
  if (sigma == 0.0) return Eigen::VectorXd::Zero(p0.log_prob.size());
  const double log_keep = std::log1p(-sigma);
  const double log_sigma = std::log(sigma);
  for (Eigen::Index j = 0; j < terms.size(); ++j) {
    // log(1 + sigma (r - 1)) with r = P1_j / P0_j.
    const double log_mix_ratio = log_add(log_keep, log_sigma + p1.log_prob(j) - p0.log_prob(j));
    const double root_minus_one = std::expm1(0.5 * log_mix_ratio);
    terms(j) = root_minus_one == 0.0 ? 0.0 : std::exp(p0.log_prob(j) + 2.0 * std::log(std::abs(root_minus_one)));
  }
  return terms;
}

std::size_t ceil_count(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("count must be finite and nonnegative");
  return static_cast<std::size_t>(std::ceil(x * (1.0 - 1e-12)));
}

std::size_t scan_sites(double f, double kappa) {
  if (!(f > 0.0 && f < 1.0)) throw DomainError("scan: f must lie in (0, 1)");
  if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("scan: kappa must lie in (0, 1)");
  const double k = std::pow(f, -2.0 + 2.0 * kappa);
  if (k > 1e8) throw DomainError("scan: k = f^(-2+2 kappa) exceeds 1e8");
  return std::max<std::size_t>(1, ceil_count(k));
}

ScanRow hellinger_row(double f, std::size_t k, double interval_constant) {
  if (k > 100'000'000) throw DomainError("scan: k exceeds 1e8");
  const auto mixture = mixture_decompose(f);
  const ThetaPmf p0 = pmf_theta(k, mixture.null_density);
  const ThetaPmf p1 = pmf_theta(k, mixture.signal);
  const Eigen::VectorXd terms = hellinger2_mixture_terms(p0, p1, mixture.sigma_f);

  ScanRow row;
  row.f = f;
  row.k = k;
  row.h2 = terms.sum();
  row.ratio = row.h2 / (f * f * std::sqrt(static_cast<double>(k)));

  const double p_low = mixture.null_density.support().first;
  const double kd = static_cast<double>(k);
  const double width = k > 1 ? interval_constant * std::sqrt(std::log(kd) / kd) : 0.0;
  for (std::size_t j = 0; j <= k; ++j) {
    const double x = static_cast<double>(j) / kd;
    const double term = terms(static_cast<Eigen::Index>(j));
    if (x < p_low) {
      row.h2_jprime += term;
    } else if (x <= p_low + width) {
      row.h2_j0 += term;
    } else {
      row.h2_j1 += term;
    }
  }
  return row;
}

std::vector<ScanRow> hellinger_scaling_scan(double kappa, std::span<const double> f_grid, double interval_constant,
                                            std::size_t threads) {
  std::vector<std::size_t> sites;
  for (const double f : f_grid) sites.push_back(scan_sites(f, kappa));
  std::vector<ScanRow> rows(f_grid.size());
  parallel_for(f_grid.size(), threads, [&](std::size_t i) {
    rows[i] = hellinger_row(f_grid[i], sites[i], interval_constant);
    rows[i].kappa = kappa;
  });
  return rows;
}

}  // namespace coaldetect
