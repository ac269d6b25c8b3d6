#include "racegp/gp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

#include "racegp/errors.hpp"

namespace racegp {

namespace {

constexpr std::array<double, 8> kJitterLadder = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4};
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

struct Factor {
  Eigen::MatrixXd chol;
  double jitter = 0.0;
};

std::optional<Factor> factorize(const Eigen::MatrixXd& K, double noise2) {
  for (double jitter : kJitterLadder) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += noise2 + jitter;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(A);
    if (llt.info() == Eigen::Success && A.diagonal().allFinite()) {
      A.triangularView<Eigen::StrictlyUpper>().setZero();
      return Factor{std::move(A), jitter};
    }
  }
  return std::nullopt;
}

double lml_from(const Eigen::MatrixXd& chol, const Eigen::VectorXd& y, const Eigen::VectorXd& alpha) {
  const double n = static_cast<double>(y.size());
  return -0.5 * y.dot(alpha) - chol.diagonal().array().log().sum() - 0.5 * n * kLog2Pi;
}

Eigen::VectorXd solve_alpha(const Eigen::MatrixXd& chol, const Eigen::VectorXd& y) {
  Eigen::VectorXd a = chol.triangularView<Eigen::Lower>().solve(y);
  chol.transpose().triangularView<Eigen::Upper>().solveInPlace(a);
  return a;
}

}  // namespace

GPModel gp_fit(Eigen::MatrixXd X, Eigen::VectorXd y, const KernelExpr& kernel, double noise2) {
  if (X.rows() < 1) throw Error("gp_fit needs at least one training point");
  if (X.rows() != y.size()) throw LengthMismatch("gp_fit: X and y differ in length");
  if (!(noise2 > 0.0)) throw ConfigError("gp_fit: noise2 must be > 0");
  GPModel m;
  m.X = std::move(X);
  m.y = std::move(y);
  m.kernel = kernel;
  m.noise2 = noise2;
  auto f = factorize(gram(kernel, m.X), noise2);
  if (!f) {
    throw NotPositiveDefinite("kernel " + kernel.to_string() +
                              " is not positive definite even with jitter 1e-4");
  }
  m.chol = std::move(f->chol);
  m.jitter = f->jitter;
  m.alpha = solve_alpha(m.chol, m.y);
  return m;
}

Prediction gp_predict(const GPModel& m, const Eigen::MatrixXd& Xs) {
  Prediction p;
  const Eigen::MatrixXd Ks = gram(m.kernel, m.X, Xs);  // n x q
  p.mean = Ks.transpose() * m.alpha;
  const Eigen::MatrixXd V = m.chol.triangularView<Eigen::Lower>().solve(Ks);
  p.var = gram_diagonal(m.kernel, Xs) - V.colwise().squaredNorm().transpose();
  p.var.array() += m.noise2;
  for (Eigen::Index i = 0; i < p.var.size(); ++i) {
    if (p.var(i) < 0.0) {
      p.var(i) = 0.0;
      ++p.clipped;
    }
  }
  return p;
}

double log_marginal_likelihood(const GPModel& m) { return lml_from(m.chol, m.y, m.alpha); }

OptimizeResult optimize_hyperparams(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const KernelExpr& kernel, double noise2,
                                    const OptimizerOptions& options) {
  if (options.budget < 1) throw ConfigError("optimizer budget must be >= 1");
  if (X.rows() != y.size()) throw LengthMismatch("optimize_hyperparams: X and y differ in length");

  GramCache cache(X);
  const std::size_t kernel_params = kernel.parameter_count();
  const double log_floor = std::log(options.noise_floor);
  const auto names = kernel.parameter_names();

  std::vector<double> lo(kernel_params), hi(kernel_params);
  for (std::size_t i = 0; i < kernel_params; ++i) {
    const bool raw = names[i].ends_with(".c");
    lo[i] = raw ? -10.0 : -12.0;
    hi[i] = raw ? 10.0 : 8.0;
  }
  if (options.optimize_noise) {
    lo.push_back(log_floor);
    hi.push_back(4.0);
  }
  const std::size_t dim = lo.size();

  const auto unpack = [&](const std::vector<double>& v) {
    const KernelExpr k = kernel.with_parameters(std::span<const double>(v.data(), kernel_params));
    const double nz = options.optimize_noise ? std::max(std::exp(v.back()), options.noise_floor) : noise2;
    return std::pair{k, nz};
  };

  int evaluations = 0;
  const auto objective = [&](const std::vector<double>& v) {
    ++evaluations;
    try {
      const auto [k, nz] = unpack(v);
      const auto f = factorize(cache.evaluate(k), nz);
      if (!f) return -std::numeric_limits<double>::infinity();
      const Eigen::VectorXd a = solve_alpha(f->chol, y);
      const double value = lml_from(f->chol, y, a);
      return std::isfinite(value) ? value : -std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  std::vector<double> x0 = kernel.parameters();
  if (options.optimize_noise) x0.push_back(std::log(std::max(noise2, options.noise_floor)));
  for (std::size_t i = 0; i < dim; ++i) x0[i] = std::clamp(x0[i], lo[i], hi[i]);

  struct Search {
    std::vector<double> x;
    std::vector<double> step;
    double fx = -std::numeric_limits<double>::infinity();
  };

  // one sweep of adaptive coordinate search; returns false once the budget is spent
  const auto sweep = [&](Search& s, int limit) {
    for (std::size_t i = 0; i < dim; ++i) {
      if (evaluations >= limit) return false;
      std::vector<double> trial = s.x;
      trial[i] = std::clamp(s.x[i] + s.step[i], lo[i], hi[i]);
      double f = trial[i] != s.x[i] ? objective(trial) : -std::numeric_limits<double>::infinity();
      if (f > s.fx) {
        s.x = std::move(trial);
        s.fx = f;
        s.step[i] = std::clamp(2.0 * s.step[i], -4.0, 4.0);
        continue;
      }
      if (evaluations >= limit) return false;
      trial = s.x;
      trial[i] = std::clamp(s.x[i] - s.step[i], lo[i], hi[i]);
      f = trial[i] != s.x[i] ? objective(trial) : -std::numeric_limits<double>::infinity();
      if (f > s.fx) {
        s.x = std::move(trial);
        s.fx = f;
        s.step[i] = std::clamp(-2.0 * s.step[i], -4.0, 4.0);
      } else {
        s.step[i] *= 0.5;
      }
    }
    return true;
  };
  const auto converged = [](const Search& s) {
    return std::all_of(s.step.begin(), s.step.end(), [](double v) { return std::abs(v) < 1e-3; });
  };

  OptimizeResult result{kernel, noise2, 0.0, 0.0, 0};
  Search first{x0, std::vector<double>(dim, 1.0)};
  first.fx = objective(x0);
  result.initial_lml = first.fx;

  std::vector<Search> starts{first};
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int restarts = std::max(1, options.restarts);
  for (int r = 1; r < restarts && evaluations < options.budget; ++r) {
    Search s{x0, std::vector<double>(dim, 1.0)};
    for (std::size_t i = 0; i < dim; ++i) s.x[i] = std::clamp(x0[i] + normal(rng), lo[i], hi[i]);
    s.fx = objective(s.x);
    starts.push_back(std::move(s));
  }

  // short exploration of every start, then the best one gets the rest
  const int explore = std::max(1, options.budget / (4 * restarts));
  for (auto& s : starts) {
    const int limit = std::min(options.budget, evaluations + explore);
    while (evaluations < limit && !converged(s)) {
      if (!sweep(s, limit)) break;
    }
  }
  auto best = std::max_element(starts.begin(), starts.end(),
                               [](const Search& a, const Search& b) { return a.fx < b.fx; });
  Search s = *best;
  while (evaluations < options.budget && !converged(s)) {
    if (!sweep(s, options.budget)) break;
  }

  if (s.fx > result.initial_lml) {
    const auto [k, nz] = unpack(s.x);
    result.kernel = k;
    result.noise2 = nz;
    result.lml = s.fx;
  } else {
    result.kernel = kernel;
    result.noise2 = options.optimize_noise ? std::max(noise2, options.noise_floor) : noise2;
    result.lml = result.initial_lml;
  }
  result.evaluations = evaluations;
  return result;
}

}  // namespace racegp
