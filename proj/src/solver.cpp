#include "matrust/solver.hpp"

#include <cmath>
#include <random>
#include <thread>

#include "matrust/bias.hpp"

namespace matrust {

namespace {

void check_factor_shape(const SparseTrustMatrix& t, const Matrix& m, const char* name) {
  if (static_cast<std::size_t>(m.rows()) != t.num_users()) {
    throw ValidationError(std::string(name) + " has " + std::to_string(m.rows()) +
                          " rows, expected " + std::to_string(t.num_users()));
  }
}

// Per-thread scratch for the r x r normal equations.
struct RowSolver {
  explicit RowSolver(Eigen::Index r) : gram(r, r), rhs(r), llt(r) {}

  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
  Eigen::LLT<Eigen::MatrixXd> llt;

  template <typename Visit>
  void solve_into(Matrix& out, UserIndex u, const Matrix& fixed, double lambda, Visit&& visit) {
    gram.setZero();
    rhs.setZero();
    visit([&](double target, UserIndex other) {
      const auto g = fixed.row(other);
      gram.selfadjointView<Eigen::Lower>().rankUpdate(g.transpose());
      rhs.noalias() += target * g.transpose();
    });
    gram.diagonal().array() += lambda;
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

    if (lambda > 0.0) {
      llt.compute(gram);
      if (llt.info() == Eigen::Success) {
        out.row(u) = llt.solve(rhs).transpose();
        return;
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) {
      throw SolverError("singular ridge system for user " + std::to_string(u) +
                        " (lambda = 0 with rank-deficient factors)");
    }
    out.row(u) = lu.solve(rhs).transpose();
  }
};

void update_range(const ResidualMatrix& p, Matrix& out, const Matrix& fixed, double lambda,
                  Side side, UserIndex begin, UserIndex end) {
  const auto& t = p.pattern();
  const auto obs = t.observations();
  RowSolver solver(fixed.cols());
  for (UserIndex u = begin; u < end; ++u) {
    if (side == Side::kTrustor) {
      if (t.row_size(u) == 0) continue;
      const auto base = static_cast<std::size_t>(t.row(u).data() - obs.data());
      solver.solve_into(out, u, fixed, lambda, [&](auto&& accumulate) {
        const auto row = t.row(u);
        for (std::size_t k = 0; k < row.size(); ++k) accumulate(p[base + k], row[k].trustee);
      });
    } else {
      if (t.column_size(u) == 0) continue;
      solver.solve_into(out, u, fixed, lambda, [&](auto&& accumulate) {
        for (auto k : t.column(u)) accumulate(p[k], obs[k].trustor);
      });
    }
  }
}

double squared_distance(const Matrix& a, const Matrix& b) { return (a - b).squaredNorm(); }

}  // namespace

ResidualMatrix latent_residuals(const SparseTrustMatrix& t, const BiasTerms& bias,
                                const Coefficients& alpha) {
  const auto n = static_cast<Eigen::Index>(t.num_users());
  if (bias.x.size() != n || bias.y.size() != n) {
    throw ValidationError("bias dimensions do not match the trust matrix");
  }
  std::vector<double> values;
  values.reserve(t.num_observations());
  const double global = alpha[0] * bias.mu;
  for (const auto& o : t.observations()) {
    values.push_back(o.rating - (global + alpha[1] * bias.x[o.trustor] + alpha[2] * bias.y[o.trustee]));
  }
  return ResidualMatrix(t, std::move(values));
}

ResidualMatrix coefficient_residuals(const SparseTrustMatrix& t, const Matrix& F0,
                                     const Matrix& G0) {
  check_factor_shape(t, F0, "F0");
  check_factor_shape(t, G0, "G0");
  if (F0.cols() != G0.cols()) throw ValidationError("F0 and G0 have different widths");
  std::vector<double> values;
  values.reserve(t.num_observations());
  for (const auto& o : t.observations()) {
    values.push_back(o.rating - F0.row(o.trustor).dot(G0.row(o.trustee)));
  }
  return ResidualMatrix(t, std::move(values));
}

Matrix row_ridge_update(const ResidualMatrix& p, const Matrix& current, const Matrix& fixed,
                        double lambda, Side side, unsigned threads) {
  const auto& t = p.pattern();
  check_factor_shape(t, current, "updated factor matrix");
  check_factor_shape(t, fixed, "fixed factor matrix");
  if (current.cols() != fixed.cols()) throw ValidationError("factor matrices differ in width");
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");

  Matrix out = current;
  const auto n = static_cast<UserIndex>(t.num_users());
  threads = std::max(1u, std::min<unsigned>(threads, n));
  if (threads == 1) {
    update_range(p, out, fixed, lambda, side, 0, n);
    return out;
  }

  // Each worker owns a disjoint block of output rows.
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(threads);
  const UserIndex chunk = (n + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const UserIndex begin = std::min<UserIndex>(n, w * chunk);
    const UserIndex end = std::min<UserIndex>(n, begin + chunk);
    workers.emplace_back([&, w, begin, end] {
      try {
        update_range(p, out, fixed, lambda, side, begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : workers) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

FactorPair initial_factors(std::size_t n, int r, InitMode mode, std::uint64_t seed) {
  if (r < 1) throw ValidationError("r must be >= 1");
  std::mt19937_64 rng(seed);
  const double base = 1.0 / r;
  std::uniform_real_distribution<double> jitter(-base / 10.0, base / 10.0);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * base);
  auto draw = [&] { return mode == InitMode::kRandom ? uniform(rng) : base + jitter(rng); };

  FactorPair out{Matrix(n, r), Matrix(n, r)};
  for (Eigen::Index i = 0; i < out.F0.size(); ++i) out.F0.data()[i] = draw();
  for (Eigen::Index i = 0; i < out.G0.size(); ++i) out.G0.data()[i] = draw();
  return out;
}

MatrixUpdateStats refine_matrices(const ResidualMatrix& p, const HyperParams& hp, Matrix& F0,
                                  Matrix& G0, const HalfStepHook& hook) {
  MatrixUpdateStats stats;
  for (int it = 0; it < hp.m2; ++it) {
    Matrix F1 = row_ridge_update(p, F0, G0, hp.lambda, Side::kTrustor, hp.threads);
    if (hook) hook(Side::kTrustor, F1, G0);
    Matrix G1 = row_ridge_update(p, G0, F1, hp.lambda, Side::kTrustee, hp.threads);
    if (hook) hook(Side::kTrustee, F1, G1);

    stats.last_delta = std::sqrt(squared_distance(F1, F0) + squared_distance(G1, G0));
    stats.iterations = it + 1;
    F0 = std::move(F1);
    G0 = std::move(G1);
    if (stats.last_delta < hp.xi2) {
      stats.converged = true;
      break;
    }
  }
  return stats;
}

FactorPair update_matrices(const ResidualMatrix& p, int r, const HyperParams& hp) {
  auto factors = initial_factors(p.pattern().num_users(), r, hp.init, hp.rng_seed);
  refine_matrices(p, hp, factors.F0, factors.G0);
  return factors;
}

CoefficientUpdate update_coefficients(const ResidualMatrix& p, const BiasTerms& bias,
                                      double lambda) {
  const auto& t = p.pattern();
  if (t.empty()) throw ValidationError("coefficient update needs at least one observation");
  if (bias.x.size() != static_cast<Eigen::Index>(t.num_users()) ||
      bias.y.size() != static_cast<Eigen::Index>(t.num_users())) {
    throw ValidationError("bias dimensions do not match the trust matrix");
  }
  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  const auto obs = t.observations();
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const Eigen::Vector3d a(bias.mu, bias.x[obs[k].trustor], bias.y[obs[k].trustee]);
    gram.noalias() += a * a.transpose();
    rhs.noalias() += p[k] * a;
  }
  gram.diagonal().array() += lambda;

  CoefficientUpdate out;
  Eigen::LLT<Eigen::Matrix3d> llt(gram);
  // LLT only reports failure on a non-positive pivot; also reject a numerically
  // singular Gram matrix (e.g. x identically zero at lambda = 0).
  Eigen::FullPivLU<Eigen::Matrix3d> lu(gram);
  if (llt.info() == Eigen::Success && lu.isInvertible()) {
    out.alpha = llt.solve(rhs);
  } else {
    out.alpha = gram.completeOrthogonalDecomposition().solve(rhs);
    out.used_pseudo_inverse = true;
  }
  return out;
}

double objective(const SparseTrustMatrix& t, const Matrix& F0, const Matrix& G0,
                 const Coefficients& alpha, const BiasTerms& bias, double lambda) {
  double loss = 0.0;
  for (const auto& o : t.observations()) {
    const double pred = F0.row(o.trustor).dot(G0.row(o.trustee)) + alpha[0] * bias.mu +
                        alpha[1] * bias.x[o.trustor] + alpha[2] * bias.y[o.trustee];
    const double e = o.rating - pred;
    loss += e * e;
  }
  const double n = static_cast<double>(t.num_users());
  const double specified = n * bias.mu * bias.mu + bias.x.squaredNorm() + bias.y.squaredNorm();
  return loss + lambda * (F0.squaredNorm() + G0.squaredNorm() + alpha.squaredNorm() + specified);
}

TrainResult train(const SparseTrustMatrix& t, const HyperParams& hp) {
  hp.validate();
  if (t.empty()) throw ValidationError("cannot train on an empty trust matrix");
  const auto n = t.num_users();

  FactorModel model;
  model.labels = t.labels();
  if (hp.use_bias) {
    model.bias = compute_bias(t);
    model.alpha = Coefficients::Ones();
  } else {
    model.bias = BiasTerms::zeros(n);
    model.alpha = Coefficients::Zero();
  }
  auto init = initial_factors(n, hp.r, hp.init, hp.rng_seed);
  model.F0 = std::move(init.F0);
  model.G0 = std::move(init.G0);
  const bool learn_alpha = hp.use_bias && !hp.freeze_coefficients;

  TrainResult result;
  auto& trace = result.trace;
  int outer = 0;
  auto record = [&](TraceStep::Kind kind, const Matrix& F, const Matrix& G) {
    trace.steps.push_back(
        {kind, outer, objective(t, F, G, model.alpha, model.bias, hp.lambda)});
  };
  if (hp.trace_substeps) record(TraceStep::Kind::kInitial, model.F0, model.G0);
  HalfStepHook hook;
  if (hp.trace_substeps) {
    hook = [&](Side side, const Matrix& F, const Matrix& G) {
      record(side == Side::kTrustor ? TraceStep::Kind::kTrustorUpdate
                                    : TraceStep::Kind::kTrusteeUpdate,
             F, G);
    };
  }

  for (outer = 1; outer <= hp.m1; ++outer) {
    const Matrix F_prev = model.F0;
    const Matrix G_prev = model.G0;
    const Coefficients alpha_prev = model.alpha;

    OuterIteration rec;
    const auto latent = latent_residuals(t, model.bias, model.alpha);
    rec.inner_iterations = refine_matrices(latent, hp, model.F0, model.G0, hook).iterations;

    if (learn_alpha) {
      const auto resid = coefficient_residuals(t, model.F0, model.G0);
      const auto cu = update_coefficients(resid, model.bias, hp.lambda);
      model.alpha = cu.alpha;
      rec.used_pseudo_inverse = cu.used_pseudo_inverse;
      if (hp.trace_substeps) record(TraceStep::Kind::kCoefficientUpdate, model.F0, model.G0);
    }

    // The specified columns of F and G are constant except for alpha, which
    // fills whole columns of length n.
    rec.delta = std::sqrt(squared_distance(model.F0, F_prev) + squared_distance(model.G0, G_prev) +
                          static_cast<double>(n) * (model.alpha - alpha_prev).squaredNorm());
    rec.alpha = model.alpha;
    rec.objective = objective(t, model.F0, model.G0, model.alpha, model.bias, hp.lambda);
    trace.outer.push_back(rec);
    if (!model.F0.allFinite() || !model.G0.allFinite() || !model.alpha.allFinite()) {
      throw SolverError("training diverged to non-finite values");
    }
    if (rec.delta < hp.xi1) {
      trace.converged = true;
      break;
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace matrust
