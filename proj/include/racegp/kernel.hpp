#pragma once

#include <Eigen/Core>

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace racegp {

enum class KernelKind { rbf, rq, periodic, linear, matern };

std::string_view to_string(KernelKind kind);
/// "RBF", "RQ", "PER", "LIN", "MAT" (also the long names), case-insensitive.
KernelKind kernel_kind_from_string(std::string_view name);

/// Union of every base-kernel hyperparameter; each kind reads its own subset.
///   RBF   sigma2 exp(-r^2 / (2 l^2))
///   RQ    sigma2 (1 + r^2 / (2 alpha l^2))^(-alpha)
///   PER   sigma2 exp(-2 sum_d sin^2(pi (x_d - x2_d) / p) / l^2)
///   LIN   sigma_b2 + sigma_v2 (x - c).(x' - c)
///   MAT   sigma2 Matern_nu(r / l), nu in {1/2, 3/2, 5/2}
/// with r the Euclidean distance over the active dimensions.
struct Hyperparams {
  double sigma2 = 1.0;
  double l = 1.0;
  double alpha = 1.0;
  double p = 4.0;
  double sigma_b2 = 0.1;
  double sigma_v2 = 0.1;
  double c = 0.0;
  double nu = 2.5;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Immutable expression tree over the base kernels, closed under sum and
/// product. Copies share structure.
class KernelExpr {
 public:
  enum class Op { leaf, sum, product };

  /// Throws ConfigError if the hyperparameters violate the kind's constraints.
  /// An empty active_dims selects every feature.
  static KernelExpr leaf(KernelKind kind, Hyperparams hp = {}, std::vector<int> active_dims = {});
  static KernelExpr sum(KernelExpr left, KernelExpr right);
  static KernelExpr product(KernelExpr left, KernelExpr right);

  Op op() const;
  KernelKind kind() const;  // leaf only
  const Hyperparams& hyper() const;  // leaf only
  const std::vector<int>& active_dims() const;  // leaf only
  const KernelExpr& left() const;
  const KernelExpr& right() const;

  /// e.g. "RQ+LIN", "(RBF*RQ)+LIN"
  std::string to_string() const;

  /// Free parameters in optimiser coordinates: logs of the positive
  /// hyperparameters, the linear offset c as is. Depth-first, left to right.
  std::vector<double> parameters() const;
  std::vector<std::string> parameter_names() const;
  /// Same structure with parameters replaced. Throws if the count differs.
  KernelExpr with_parameters(std::span<const double> params) const;
  std::size_t parameter_count() const;

  friend bool operator==(const KernelExpr& a, const KernelExpr& b);

 private:
  struct Node;
  explicit KernelExpr(std::shared_ptr<const Node> node);
  KernelExpr with_parameters_impl(std::span<const double> params, std::size_t& pos) const;
  std::shared_ptr<const Node> node_;
};

using FeatureVector = std::span<const double>;

/// Direct scalar evaluation of k(x, x2).
double kernel_eval(const KernelExpr& k, FeatureVector x, FeatureVector x2);

/// K(X, X2) with rows as points.
Eigen::MatrixXd gram(const KernelExpr& k, const Eigen::MatrixXd& X, const Eigen::MatrixXd& X2);
/// K(X, X), exactly symmetric: the upper triangle is mirrored.
Eigen::MatrixXd gram(const KernelExpr& k, const Eigen::MatrixXd& X);
/// k(x_i, x_i) for every row.
Eigen::VectorXd gram_diagonal(const KernelExpr& k, const Eigen::MatrixXd& X);

/// Pairwise quantities of a fixed point set, cached per active-dimension
/// mask, so that repeated gram evaluations during hyperparameter search only
/// redo the elementwise kernel arithmetic.
class GramCache {
 public:
  GramCache(const Eigen::MatrixXd& X, const Eigen::MatrixXd& X2, bool symmetric);
  explicit GramCache(const Eigen::MatrixXd& X) : GramCache(X, X, true) {}

  Eigen::MatrixXd evaluate(const KernelExpr& k);

  Eigen::Index rows() const { return X_.rows(); }
  Eigen::Index cols() const { return X2_.rows(); }

 private:
  struct Pairwise {
    Eigen::ArrayXXd sqdist;
    Eigen::ArrayXXd dist;  // empty until a kernel needs it
    Eigen::ArrayXXd inner;  // x . x2
    Eigen::ArrayXd row_sum;
    Eigen::ArrayXd col_sum;
    int dims = 0;
  };
  const Pairwise& pairwise(const std::vector<int>& active_dims, bool need_dist);
  Eigen::ArrayXXd evaluate_node(const KernelExpr& k);
  Eigen::ArrayXXd periodic_node(const std::vector<int>& active_dims, const Hyperparams& hp);

  Eigen::MatrixXd X_;
  Eigen::MatrixXd X2_;
  bool symmetric_;
  std::array<std::unique_ptr<Pairwise>, 256> cache_{};
};

/// The twelve two-kernel combinations of the model-selection study, in a fixed
/// order: RBF+PER, RBF+LIN, RQ+PER, RQ+LIN, MAT+PER, MAT+LIN, RBF*RQ, MAT*PER,
/// MAT*RBF, MAT*LIN, RQ*LIN, RQ*MAT.
const std::array<std::string, 12>& study_combos();

/// Canonical combo name for any accepted spelling ("rq+lin", "RBFxRQ",
/// "RBF×RQ", ...). Throws UnknownCombo.
std::string canonical_combo(std::string_view name);

/// Two-leaf expression with default hyperparameters. Throws UnknownCombo.
KernelExpr build_kernel_combo(std::string_view name);

}  // namespace racegp
