#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// suites. Deliberately naive: scalar loops, explicit inverses, no caching.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "racegp/kernel.hpp"

namespace oracle {

inline double base_kernel(racegp::KernelKind kind, const racegp::Hyperparams& h,
                          const std::vector<double>& a, const std::vector<double>& b) {
  double r2 = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    r2 += (a[i] - b[i]) * (a[i] - b[i]);
    dot += (a[i] - h.c) * (b[i] - h.c);
  }
  const double r = std::sqrt(r2);
  switch (kind) {
    case racegp::KernelKind::rbf:
      return h.sigma2 * std::exp(-r2 / (2.0 * h.l * h.l));
    case racegp::KernelKind::rq:
      return h.sigma2 * std::pow(1.0 + r2 / (2.0 * h.alpha * h.l * h.l), -h.alpha);
    case racegp::KernelKind::periodic: {
      double s2 = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double s = std::sin(std::numbers::pi * (a[i] - b[i]) / h.p);
        s2 += s * s;
      }
      return h.sigma2 * std::exp(-2.0 * s2 / (h.l * h.l));
    }
    case racegp::KernelKind::linear:
      return h.sigma_b2 + h.sigma_v2 * dot;
    case racegp::KernelKind::matern: {
      const double d = r / h.l;
      if (h.nu == 0.5) return h.sigma2 * std::exp(-d);
      if (h.nu == 1.5) return h.sigma2 * (1.0 + std::sqrt(3.0) * d) * std::exp(-std::sqrt(3.0) * d);
      return h.sigma2 * (1.0 + std::sqrt(5.0) * d + 5.0 * d * d / 3.0) * std::exp(-std::sqrt(5.0) * d);
    }
  }
  return 0.0;
}

inline double kernel(const racegp::KernelExpr& k, const std::vector<double>& a,
                     const std::vector<double>& b) {
  using Op = racegp::KernelExpr::Op;
  if (k.op() == Op::sum) return kernel(k.left(), a, b) + kernel(k.right(), a, b);
  if (k.op() == Op::product) return kernel(k.left(), a, b) * kernel(k.right(), a, b);
  std::vector<double> sa, sb;
  if (k.active_dims().empty()) {
    sa = a;
    sb = b;
  } else {
    for (int d : k.active_dims()) {
      sa.push_back(a[d]);
      sb.push_back(b[d]);
    }
  }
  return base_kernel(k.kind(), k.hyper(), sa, sb);
}

inline std::vector<double> row(const Eigen::MatrixXd& X, Eigen::Index i) {
  std::vector<double> v(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) v[j] = X(i, j);
  return v;
}

inline Eigen::MatrixXd brute_gram(const racegp::KernelExpr& k, const Eigen::MatrixXd& A,
                            const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) K(i, j) = kernel(k, row(A, i), row(B, j));
  }
  return K;
}

struct Posterior {
  Eigen::VectorXd mean, var, alpha;
  double lml = 0.0;
};

// Explicit inverse and determinant of K + noise2 I.
inline Posterior dense_gp(const racegp::KernelExpr& k, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& y, double noise2, const Eigen::MatrixXd& Xs) {
  Eigen::MatrixXd K = brute_gram(k, X, X);
  K.diagonal().array() += noise2;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  const Eigen::MatrixXd Kinv = lu.inverse();
  const Eigen::MatrixXd Ks = brute_gram(k, X, Xs);
  Posterior p;
  p.alpha = Kinv * y;
  p.mean = Ks.transpose() * p.alpha;
  p.var.resize(Xs.rows());
  for (Eigen::Index j = 0; j < Xs.rows(); ++j) {
    const Eigen::VectorXd ks = Ks.col(j);
    p.var(j) = kernel(k, row(Xs, j), row(Xs, j)) - ks.dot(Kinv * ks) + noise2;
  }
  p.lml = -0.5 * y.dot(p.alpha) - 0.5 * std::log(lu.determinant()) -
          0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
  return p;
}

// One of the twelve study combos with randomised hyperparameters.
inline racegp::KernelExpr random_combo(std::mt19937_64& rng) {
  const auto& names = racegp::study_combos();
  std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
  racegp::KernelExpr k = racegp::build_kernel_combo(names[pick(rng)]);
  std::uniform_real_distribution<double> U(-0.7, 0.7);
  std::vector<double> params = k.parameters();
  for (double& p : params) p += U(rng);
  return k.with_parameters(params);
}

}  // namespace oracle
