#pragma once

// Training engine: alternates between the latent trustor/trustee matrices
// (row-wise ridge regressions) and the three bias coefficients (a 3x3 ridge
// regression), each step an exact block minimization of the same objective.

#include <functional>
#include <vector>

#include "matrust/trust_core.hpp"

namespace matrust {

/// Which factor matrix a row update targets. Trustor rows read the residual
/// matrix by rows, trustee rows by columns (the transposed pattern).
enum class Side { kTrustor, kTrustee };

/// P(i,j) = T(i,j) - (a1*mu + a2*x(i) + a3*y(j)) on K.
ResidualMatrix latent_residuals(const SparseTrustMatrix& t, const BiasTerms& bias,
                                const Coefficients& alpha);

/// P(i,j) = T(i,j) - F0(i,:) . G0(j,:) on K.
ResidualMatrix coefficient_residuals(const SparseTrustMatrix& t, const Matrix& F0,
                                     const Matrix& G0);

/// One ridge pass over every row of `current` with `fixed` held constant.
///
/// For each user u with at least one observation on `side`, solves
///   min_f  sum_k (P_k - f . fixed(v_k,:))^2 + lambda * |f|^2
/// over that user's observations k = (u, v_k). Users without observations keep
/// their current row. Systems are factored with Cholesky and fall back to LU;
/// a singular system (only possible at lambda = 0) throws SolverError.
/// Rows are independent, so `threads` > 1 gives bit-identical output.
Matrix row_ridge_update(const ResidualMatrix& p, const Matrix& current, const Matrix& fixed,
                        double lambda, Side side = Side::kTrustor, unsigned threads = 1);

struct FactorPair {
  Matrix F0;
  Matrix G0;
};

/// n x r starting matrices. kUniformJitter: 1/r plus uniform noise in
/// [-1/(10r), 1/(10r)]; kRandom: uniform in [0, 2/r]. Deterministic in `seed`.
FactorPair initial_factors(std::size_t n, int r, InitMode mode, std::uint64_t seed);

struct MatrixUpdateStats {
  int iterations = 0;
  double last_delta = 0.0;
  bool converged = false;
};

/// Called after every half-step with the current (F0, G0).
using HalfStepHook = std::function<void(Side, const Matrix&, const Matrix&)>;

/// Alternating factorization of P starting from the given F0, G0: update F0
/// with G0 fixed, then G0 with F0 fixed, until
/// sqrt(|dF0|^2 + |dG0|^2) < hp.xi2 or hp.m2 sweeps elapse.
MatrixUpdateStats refine_matrices(const ResidualMatrix& p, const HyperParams& hp, Matrix& F0,
                                  Matrix& G0, const HalfStepHook& hook = {});

/// refine_matrices from a fresh initial_factors(n, r, hp.init, hp.rng_seed).
FactorPair update_matrices(const ResidualMatrix& p, int r, const HyperParams& hp);

struct CoefficientUpdate {
  Coefficients alpha = Coefficients::Zero();
  bool used_pseudo_inverse = false;
};

/// alpha = (A'A + lambda I)^-1 A'b with rows A(k,:) = (mu, x(i), y(j)) and
/// b(k) = P(i,j). A singular system falls back to the pseudo-inverse.
CoefficientUpdate update_coefficients(const ResidualMatrix& p, const BiasTerms& bias,
                                      double lambda);

/// Training objective: squared error on K plus lambda times the squared
/// Frobenius norms of the full trustor/trustee matrices, i.e. the latent
/// blocks, the fixed bias columns (n*mu^2, |x|^2, |y|^2) and |alpha|^2 (the
/// coefficient term carries lambda, not n*lambda, matching the update).
double objective(const SparseTrustMatrix& t, const Matrix& F0, const Matrix& G0,
                 const Coefficients& alpha, const BiasTerms& bias, double lambda);

struct TraceStep {
  enum class Kind { kInitial, kTrustorUpdate, kTrusteeUpdate, kCoefficientUpdate };
  Kind kind = Kind::kInitial;
  int outer = 0;
  double objective = 0.0;
};

struct OuterIteration {
  double objective = 0.0;
  Coefficients alpha = Coefficients::Zero();
  double delta = 0.0;  // L2 distance between successive full (F, G)
  int inner_iterations = 0;
  bool used_pseudo_inverse = false;
};

struct TrainTrace {
  std::vector<OuterIteration> outer;
  std::vector<TraceStep> steps;  // filled when hp.trace_substeps
  bool converged = false;
};

struct TrainResult {
  FactorModel model;
  TrainTrace trace;
};

/// Full training run. Bias and alpha = (1,1,1) are set up first; each outer
/// pass refits F0, G0 against the bias-adjusted residuals (warm-started from
/// the previous pass) and then refits alpha against the latent residuals,
/// stopping once the full (F, G) move by less than hp.xi1 or after hp.m1
/// passes. freeze_coefficients keeps alpha at (1,1,1); use_bias = false drops
/// bias and alpha entirely.
TrainResult train(const SparseTrustMatrix& t, const HyperParams& hp);

}  // namespace matrust
