#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "coaldetect/exact_dist.hpp"
#include "coaldetect/mixing.hpp"
#include "coaldetect/quadrature.hpp"
#include "oracles.hpp"

using namespace coaldetect;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

void expect_matches_oracle(const ThetaPmf& pmf, double tau, double z_lo, double z_hi) {
  for (std::size_t j = 0; j <= pmf.k; ++j) {
    const double expected = oracle::mixture_pmf(pmf.k, tau, z_lo, z_hi, j);
    EXPECT_NEAR(pmf.prob(static_cast<Eigen::Index>(j)), expected, 1e-11 + 1e-9 * expected) << "j=" << j;
  }
}

// Integral of the density over its support after x = 3/4 - s^2, which
// removes the inverse square-root singularity at 3/4. Below s ~ 1e-8 the
// point 3/4 - s^2 rounds to 3/4 itself, so the check is good to ~1e-7.
double density_mass(const MixingDensity& mix) {
  const auto [lo, hi] = mix.support();
  const double s_lo = std::sqrt(0.75 - hi);
  const double s_hi = std::sqrt(0.75 - lo);
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double s) { return mix.density(0.75 - s * s) * 2.0 * s; }, s_lo, s_hi, 15, 1e-13);
}

}  // namespace

TEST(Quadrature, GaussLegendreIsExactOnPolynomials) {
  const double value = gauss_legendre<double, 20>([](double x) { return std::pow(x, 39) + 3 * x * x; }, -1.0, 2.0);
  EXPECT_NEAR(value, (std::pow(2.0, 40) - 1.0) / 40.0 + 9.0, 1e-13 * std::pow(2.0, 40) / 40.0);
  double weight_sum = 0.0;
  for (double w : GaussLegendre<double, 20>::rule().weights) weight_sum += w;
  EXPECT_NEAR(weight_sum, 2.0, 1e-15);
}

TEST(Mixing, DensityIntegratesToOne) {
  const auto d = mixture_decompose(0.1);
  EXPECT_NEAR(density_mass(d.null_density), 1.0, 1e-7);
  EXPECT_NEAR(density_mass(d.signal), 1.0, 1e-10);
  EXPECT_NEAR(density_mass(d.alternative), 1.0, 1e-7);
  EXPECT_NEAR(d.sigma_f, -std::expm1(-0.1), 1e-16);
}

TEST(Mixing, SupportAndRho) {
  const auto d = mixture_decompose(0.05);
  const auto [lo, hi] = d.signal.support();
  EXPECT_NEAR(lo, oracle::success_prob(0.95, 0.0), 1e-15);
  EXPECT_NEAR(hi, oracle::success_prob(0.95, 0.05), 1e-15);
  EXPECT_NEAR(d.phi_f, d.null_density.support().first - lo, 1e-15);
  EXPECT_GT(d.null_density.rho(), 0.0);
  EXPECT_LE(d.null_density.rho(), 1.0);
  EXPECT_EQ(d.null_density.density(0.1), 0.0);
}

TEST(PmfTheta, OneSiteGivesClosedFormMean) {
  // E0[X] = (3/4)(1 - e^{-2} E[e^{-2Z}]) = (3/4)(1 - e^{-2}/3).
  const auto pmf = pmf_theta(1, null_mixing_density(1.0));
  const double mean = 0.75 * (1.0 - std::exp(-2.0) / 3.0);
  EXPECT_NEAR(pmf.prob(1), mean, 1e-13);
  EXPECT_NEAR(pmf.prob(0), 1.0 - mean, 1e-13);
  EXPECT_NEAR(pmf.prob(1), 0.716166179191, 1e-12);
}

TEST(PmfTheta, MatchesIndependentQuadrature) {
  expect_matches_oracle(pmf_theta(10, null_mixing_density(1.0)), 1.0, 0.0, kInf);
  const auto d = mixture_decompose(0.1);
  expect_matches_oracle(pmf_theta(20, d.signal), 0.9, 0.0, 0.1);
  expect_matches_oracle(pmf_theta(50, d.alternative), 0.9, 0.0, kInf);
}

TEST(PmfTheta, ZeroSitesAndPointMass) {
  const auto none = pmf_theta(0, null_mixing_density(1.0));
  ASSERT_EQ(none.prob.size(), 1);
  EXPECT_EQ(none.prob(0), 1.0);
  const auto binom = pmf_theta(7, MixingDensity::point_mass(0.3));
  for (std::size_t j = 0; j <= 7; ++j) EXPECT_NEAR(binom.prob(static_cast<Eigen::Index>(j)), oracle::binomial_pmf(7, 0.3, j), 1e-15);
  EXPECT_EQ(binom.provenance, Provenance::binomial);
}

TEST(PmfTheta, LargeKStaysNormalised) {
  const auto pmf = pmf_theta(10000, null_mixing_density(1.0));
  EXPECT_NO_THROW(pmf.validate());
  EXPECT_NEAR(pmf.prob.sum(), 1.0, 1e-10);
  EXPECT_TRUE(pmf.log_prob.allFinite());
}

TEST(Mixture, QIsTheSigmaMixtureOfP0AndP1) {
  for (double f : {0.02, 0.1}) {
    for (std::size_t k : {10u, 50u}) {
      const auto d = mixture_decompose(f);
      const auto q = pmf_theta(k, d.alternative);
      const auto mixed = mix_pmfs(pmf_theta(k, d.null_density), pmf_theta(k, d.signal), d.sigma_f);
      EXPECT_LT(tv(q, mixed), 1e-9) << "f=" << f << " k=" << k;
    }
  }
}

TEST(Distances, HellingerAndTvBasics) {
  Eigen::Vector3d p(0.2, 0.3, 0.5);
  Eigen::Vector3d q(0.5, 0.3, 0.2);
  EXPECT_NEAR(total_variation(p, q), 0.3, 1e-15);
  EXPECT_NEAR(hellinger2(p, q), 2 * std::pow(std::sqrt(0.5) - std::sqrt(0.2), 2), 1e-15);
  EXPECT_EQ(hellinger2(p, p), 0.0);
}

TEST(Distances, RatioFormMatchesDirectHellinger) {
  for (std::size_t k : {10u, 50u}) {
    const auto d = mixture_decompose(0.1);
    const auto p0 = pmf_theta(k, d.null_density);
    const auto q = pmf_theta(k, d.alternative);
    const double direct = hellinger2(p0, q);
    const double ratio_form = hellinger2_mixture_terms(p0, pmf_theta(k, d.signal), d.sigma_f).sum();
    EXPECT_NEAR(ratio_form, direct, 1e-9 * direct);
  }
}

TEST(Distances, FrozenHellingerValues) {
  // Cross-checked against Boost quadrature pmfs when first computed.
  const auto d = mixture_decompose(0.1);
  EXPECT_NEAR(hellinger2(pmf_theta(10, d.null_density), pmf_theta(10, d.alternative)), 6.9323384189e-04, 1e-13);
  std::vector<double> p(11), q(11);
  double direct = 0.0;
  for (std::size_t j = 0; j <= 10; ++j) {
    const double a = oracle::mixture_pmf(10, 1.0, 0.0, kInf, j);
    const double b = oracle::mixture_pmf(10, 0.9, 0.0, kInf, j);
    direct += std::pow(std::sqrt(a) - std::sqrt(b), 2);
  }
  EXPECT_NEAR(direct, 6.9323384189e-04, 1e-12);
}

TEST(Tensorize, FormulaAndBracket) {
  EXPECT_NEAR(tensorize_h2(0.01, 1), 0.01, 1e-16);
  EXPECT_NEAR(tensorize_h2(0.001, 10), 2 * (1 - std::pow(1 - 0.0005, 10)), 1e-14);
  EXPECT_NEAR(tensorize_h2(0.5, 100000), 2.0, 1e-12);
  const auto bracket = tv_bracket_m(0.001, 10);
  const double h2m = 2 * (1 - std::pow(1 - 0.0005, 10));
  EXPECT_NEAR(bracket.upper, std::sqrt(h2m * (1 - h2m / 4)), 1e-12);
  EXPECT_NEAR(bracket.upper, 0.0999, 5e-4);
  EXPECT_LE(bracket.lower, bracket.upper);
  // The exact TV of the m-fold product lies in the bracket (m = 3, k = 2).
  const auto d = mixture_decompose(0.3);
  const auto p0 = pmf_theta(2, d.null_density);
  const auto q = pmf_theta(2, d.alternative);
  Eigen::VectorXd pp(27), qq(27);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        pp(9 * a + 3 * b + c) = p0.prob(a) * p0.prob(b) * p0.prob(c);
        qq(9 * a + 3 * b + c) = q.prob(a) * q.prob(b) * q.prob(c);
      }
  const double exact_tv = total_variation(pp, qq);
  const auto b3 = tv_bracket_m(hellinger2(p0, q), 3);
  EXPECT_GE(exact_tv, b3.lower);
  EXPECT_LE(exact_tv, b3.upper);
  EXPECT_NEAR(hellinger2(pp, qq), tensorize_h2(hellinger2(p0, q), 3), 1e-14);
}

TEST(Scan, SitesAndRowDecomposition) {
  EXPECT_EQ(scan_sites(0.02, 0.5), 50u);
  EXPECT_EQ(scan_sites(0.05, 0.5), 20u);
  EXPECT_EQ(ceil_count(3.0000000000000004), 3u);
  EXPECT_EQ(ceil_count(3.01), 4u);
  const auto row = hellinger_row(0.04, 100);
  EXPECT_NEAR(row.h2_j0 + row.h2_j1 + row.h2_jprime, row.h2, 1e-15);
  EXPECT_NEAR(row.ratio, row.h2 / (0.04 * 0.04 * 10.0), 1e-15);
  EXPECT_GT(row.h2, 0.0);
}

TEST(EmpiricalPmf, CountsAndRejectsOutOfRange) {
  const std::vector<int> samples{0, 1, 1, 3};
  const auto pmf = empirical_pmf(3, samples);
  EXPECT_DOUBLE_EQ(pmf.prob(1), 0.5);
  EXPECT_DOUBLE_EQ(pmf.cdf(2), 0.75);
  const std::vector<int> bad{4};
  EXPECT_THROW(empirical_pmf(3, bad), DomainError);
}
