#pragma once

// Domain types shared by every matrust module: the partially observed trust
// matrix, bias terms, the trained factor model and the training knobs.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace matrust {

using UserIndex = std::uint32_t;

// Row-major so that a user's stereotype is one contiguous run of r doubles.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Coefficients = Eigen::Vector3d;

/// Base for all errors raised by the library. The category drives the CLI
/// exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing files, unreadable or truncated streams.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Bad input data or bad parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure inside training.
class SolverError : public Error {
 public:
  using Error::Error;
};

struct TrustObservation {
  UserIndex trustor = 0;
  UserIndex trustee = 0;
  double rating = 0.0;

  friend bool operator==(const TrustObservation&, const TrustObservation&) = default;
};

/// The observed set K of a partially observed n x n trust matrix.
///
/// Observations are kept sorted by (trustor, trustee), which doubles as the
/// CSR row index. The column index stores, per trustee, positions into the
/// sorted observation array (ascending trustor). Immutable after construction.
class SparseTrustMatrix {
 public:
  SparseTrustMatrix() = default;

  /// Validates and indexes `observations`. Throws ValidationError on
  /// self-ratings, ratings outside [0,1], indices >= n, or duplicate pairs.
  /// `labels`, when non-empty, must have exactly n entries.
  SparseTrustMatrix(std::size_t n, std::vector<TrustObservation> observations,
                    std::vector<std::string> labels = {});

  std::size_t num_users() const { return n_; }
  std::size_t num_observations() const { return observations_.size(); }
  bool empty() const { return observations_.empty(); }

  std::span<const TrustObservation> observations() const { return observations_; }

  /// Out-edges of trustor i, ascending trustee.
  std::span<const TrustObservation> row(UserIndex i) const;

  /// Positions into observations() of the in-edges of trustee j, ascending
  /// trustor.
  std::span<const std::size_t> column(UserIndex j) const;

  std::size_t row_size(UserIndex i) const { return row_offsets_[i + 1] - row_offsets_[i]; }
  std::size_t column_size(UserIndex j) const { return col_offsets_[j + 1] - col_offsets_[j]; }

  /// Position of (i, j) in observations(), or npos when unobserved.
  std::size_t find(UserIndex i, UserIndex j) const;

  /// External user ids; empty when the matrix was built from bare indices.
  const std::vector<std::string>& labels() const { return labels_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t n_ = 0;
  std::vector<TrustObservation> observations_;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_offsets_{0};
  std::vector<std::size_t> col_entries_;
  std::vector<std::string> labels_;
};

/// All observed triples in (trustor, trustee) order.
std::vector<TrustObservation> observed_pairs(const SparseTrustMatrix& t);

/// Global, trustor and trustee bias (the three specified factors).
struct BiasTerms {
  double mu = 0.0;
  Vector x;  // trustor bias, length n
  Vector y;  // trustee bias, length n

  static BiasTerms zeros(std::size_t n) { return {0.0, Vector::Zero(n), Vector::Zero(n)}; }
};

/// Everything needed for constant-time prediction.
struct FactorModel {
  static constexpr std::size_t kSpecifiedFactors = 3;

  Matrix F0;  // n x r latent trustor factors
  Matrix G0;  // n x r latent trustee factors
  Coefficients alpha = Coefficients::Zero();
  BiasTerms bias;
  std::vector<std::string> labels;

  std::size_t n() const { return static_cast<std::size_t>(F0.rows()); }
  std::size_t r() const { return static_cast<std::size_t>(F0.cols()); }
  std::size_t c() const { return kSpecifiedFactors; }
  std::size_t s() const { return c() + r(); }

  /// Throws ValidationError if shapes disagree or any entry is non-finite.
  void validate() const;
};

enum class InitMode { kUniformJitter, kRandom };

struct HyperParams {
  double lambda = 1.0;
  int r = 10;
  int m1 = 10;
  int m2 = 100;
  double xi1 = 1e-6;
  double xi2 = 1e-6;
  bool use_bias = true;
  bool freeze_coefficients = false;
  std::uint64_t rng_seed = 0;
  InitMode init = InitMode::kUniformJitter;
  unsigned threads = 1;
  // Record the objective after every half-step, not just per outer pass.
  bool trace_substeps = false;

  void validate() const;
};

/// Values on exactly the sparsity pattern of a SparseTrustMatrix, aligned
/// with its observations() order. Holds a non-owning pointer to the pattern,
/// which must outlive the residuals.
class ResidualMatrix {
 public:
  ResidualMatrix(const SparseTrustMatrix& pattern, std::vector<double> values);

  const SparseTrustMatrix& pattern() const { return *pattern_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  std::size_t size() const { return values_.size(); }

 private:
  const SparseTrustMatrix* pattern_;
  std::vector<double> values_;
};

}  // namespace matrust
