#pragma once

// Planted-factor trust networks with known ground truth:
//   T(i,j) = clip01(a1*mu + a2*x(i) + a3*y(j) + F(i,:) . G(j,:) + noise)

#include <cstdint>

#include "matrust/trust_core.hpp"

namespace matrust {

struct SyntheticSpec {
  std::size_t n = 100;
  int rank = 3;
  // Fraction of the n(n-1) off-diagonal pairs that are observed; ignored when
  // num_observations is non-zero.
  double density = 0.1;
  std::size_t num_observations = 0;

  double mu = 0.6;
  double trustor_bias_sd = 0.0;
  double trustee_bias_sd = 0.0;
  Coefficients alpha = Coefficients::Ones();
  // Latent entries are drawn from N(0, factor_sd^2).
  double factor_sd = 0.2;
  double noise_sd = 0.0;
  bool clip = true;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  SparseTrustMatrix observed;  // noisy, clipped ratings on K
  BiasTerms planted_bias;
  Matrix F;
  Matrix G;
  SyntheticSpec spec;

  /// Noise-free (clipped) rating for any pair.
  double truth(UserIndex i, UserIndex j) const;
};

/// Throws ValidationError for n < 2, rank < 1, or more observations than
/// off-diagonal pairs.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace matrust
