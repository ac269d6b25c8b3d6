#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "racegp/kernel.hpp"

namespace racegp {

inline constexpr double kNoiseFloor = 1e-8;

/// Exact GP posterior given fixed hyperparameters.
struct GPModel {
  Eigen::MatrixXd X;  // n x d training inputs
  Eigen::VectorXd y;  // n targets
  KernelExpr kernel = KernelExpr::leaf(KernelKind::rbf);
  double noise2 = 0.0;  // observation noise variance
  double jitter = 0.0;  // extra diagonal needed for the factorisation to succeed
  Eigen::MatrixXd chol;  // lower factor of K(X, X) + (noise2 + jitter) I
  Eigen::VectorXd alpha;  // (K + (noise2 + jitter) I)^-1 y

  Eigen::Index size() const { return X.rows(); }
};

/// Cholesky of K + noise2 I with jitter escalation 1e-10 .. 1e-4 by decades.
/// Throws NotPositiveDefinite if every attempt fails.
GPModel gp_fit(Eigen::MatrixXd X, Eigen::VectorXd y, const KernelExpr& kernel, double noise2);

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;       // predictive variance, observation noise included
  std::size_t clipped = 0;   // variances that came out slightly negative and were set to 0
};

Prediction gp_predict(const GPModel& m, const Eigen::MatrixXd& Xs);

double log_marginal_likelihood(const GPModel& m);

struct OptimizerOptions {
  int budget = 300;  // marginal-likelihood evaluations
  int restarts = 5;
  std::uint64_t seed = 0;
  double noise_floor = kNoiseFloor;
  bool optimize_noise = true;
};

struct OptimizeResult {
  KernelExpr kernel;
  double noise2 = 0.0;
  double lml = 0.0;
  double initial_lml = 0.0;
  int evaluations = 0;
};

/// Multi-start coordinate search in log-hyperparameter space maximising the
/// log marginal likelihood. Only improvements are accepted, so lml never
/// drops below initial_lml. Deterministic for a given seed.
OptimizeResult optimize_hyperparams(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const KernelExpr& kernel, double noise2,
                                    const OptimizerOptions& options = {});

}  // namespace racegp
