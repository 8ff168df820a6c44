#pragma once

#include <utility>

namespace coaldetect {

enum class MixingTag { null_model, signal, alternative, point_mass };

/// Law of the per-gene success probability X = (3/4)(1 - e^{-2(tau + Z)}),
/// with Z ~ Exp(1) conditioned on [z_lower, z_upper). A point mass at p is
/// also representable so pure binomials share the same code path.
class MixingDensity {
 public:
  /// `z_upper` may be +inf.
  static MixingDensity coalescent(double tau, double z_lower, double z_upper, MixingTag tag);
  static MixingDensity point_mass(double p);

  bool is_point_mass() const noexcept { return tag_ == MixingTag::point_mass; }
  MixingTag tag() const noexcept { return tag_; }

  double tau() const noexcept { return tau_; }
  double z_lower() const noexcept { return z_lower_; }
  double z_upper() const noexcept { return z_upper_; }

  /// X as a function of Z.
  double success_prob(double z) const;

  /// Support (lower, upper) of X.
  std::pair<double, double> support() const;

  /// Density of X by change of variables; zero off the support.
  double density(double x) const;

  /// Cutoff p_bar below which rho <= density <= 1/rho holds on the support.
  double p_bar() const;
  double rho() const;

 private:
  MixingDensity() = default;

  MixingTag tag_ = MixingTag::null_model;
  double tau_ = 0.0;
  double z_lower_ = 0.0;
  double z_upper_ = 0.0;
  double point_ = 0.0;
};

/// Single-gene null: two species diverging at tau, Z ~ Exp(1).
MixingDensity null_mixing_density(double tau);

/// Q = (1 - sigma_f) P0 + sigma_f P1 for the divergence shortened from 1 to 1 - f.
struct MixtureDecomposition {
  double f;
  double sigma_f;  // P[Z <= f] = 1 - e^{-f}
  double phi_f;    // p0 minus the lower support end of P1
  MixingDensity null_density;
  MixingDensity signal;       // Q conditioned on Z <= f
  MixingDensity alternative;  // Q itself
};

MixtureDecomposition mixture_decompose(double f);

}  // namespace coaldetect
