#include "racegp/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "racegp/errors.hpp"

namespace racegp {

struct KernelExpr::Node {
  Op op = Op::leaf;
  KernelKind kind = KernelKind::rbf;
  Hyperparams hp;
  std::vector<int> dims;
  std::vector<KernelExpr> children;  // left, right
};

namespace {

constexpr double kPi = std::numbers::pi;

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void check_hyper(KernelKind kind, const Hyperparams& hp) {
  const auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string(to_string(kind)) + " kernel: " + name + " must be > 0");
    }
  };
  switch (kind) {
    case KernelKind::rbf:
      positive(hp.sigma2, "sigma2");
      positive(hp.l, "l");
      break;
    case KernelKind::rq:
      positive(hp.sigma2, "sigma2");
      positive(hp.l, "l");
      positive(hp.alpha, "alpha");
      break;
    case KernelKind::periodic:
      positive(hp.sigma2, "sigma2");
      positive(hp.l, "l");
      positive(hp.p, "p");
      break;
    case KernelKind::linear:
      if (!(hp.sigma_b2 >= 0.0)) throw ConfigError("LIN kernel: sigma_b2 must be >= 0");
      positive(hp.sigma_v2, "sigma_v2");
      if (!std::isfinite(hp.c)) throw ConfigError("LIN kernel: c must be finite");
      break;
    case KernelKind::matern:
      positive(hp.sigma2, "sigma2");
      positive(hp.l, "l");
      if (hp.nu != 0.5 && hp.nu != 1.5 && hp.nu != 2.5) {
        throw ConfigError("MAT kernel: nu must be 0.5, 1.5 or 2.5");
      }
      break;
  }
}

// Names of the free parameters of a leaf, in order.
std::vector<std::string> leaf_param_names(KernelKind kind) {
  switch (kind) {
    case KernelKind::rbf:
    case KernelKind::matern:
      return {"log_sigma2", "log_l"};
    case KernelKind::rq:
      return {"log_sigma2", "log_l", "log_alpha"};
    case KernelKind::periodic:
      return {"log_sigma2", "log_l", "log_p"};
    case KernelKind::linear:
      return {"log_sigma_b2", "log_sigma_v2", "c"};
  }
  return {};
}

std::vector<double> leaf_params(KernelKind kind, const Hyperparams& hp) {
  switch (kind) {
    case KernelKind::rbf:
    case KernelKind::matern:
      return {std::log(hp.sigma2), std::log(hp.l)};
    case KernelKind::rq:
      return {std::log(hp.sigma2), std::log(hp.l), std::log(hp.alpha)};
    case KernelKind::periodic:
      return {std::log(hp.sigma2), std::log(hp.l), std::log(hp.p)};
    case KernelKind::linear:
      return {std::log(std::max(hp.sigma_b2, 1e-300)), std::log(hp.sigma_v2), hp.c};
  }
  return {};
}

Hyperparams leaf_from_params(KernelKind kind, Hyperparams hp, std::span<const double> v) {
  switch (kind) {
    case KernelKind::rbf:
    case KernelKind::matern:
      hp.sigma2 = std::exp(v[0]);
      hp.l = std::exp(v[1]);
      break;
    case KernelKind::rq:
      hp.sigma2 = std::exp(v[0]);
      hp.l = std::exp(v[1]);
      hp.alpha = std::exp(v[2]);
      break;
    case KernelKind::periodic:
      hp.sigma2 = std::exp(v[0]);
      hp.l = std::exp(v[1]);
      hp.p = std::exp(v[2]);
      break;
    case KernelKind::linear:
      hp.sigma_b2 = std::exp(v[0]);
      hp.sigma_v2 = std::exp(v[1]);
      hp.c = v[2];
      break;
  }
  return hp;
}

double matern_of(double nu, double r_over_l) {
  if (nu == 0.5) return std::exp(-r_over_l);
  if (nu == 1.5) {
    const double a = std::sqrt(3.0) * r_over_l;
    return (1.0 + a) * std::exp(-a);
  }
  const double a = std::sqrt(5.0) * r_over_l;
  return (1.0 + a + a * a / 3.0) * std::exp(-a);
}

double leaf_eval(KernelKind kind, const Hyperparams& hp, const std::vector<int>& dims,
                 FeatureVector x, FeatureVector x2) {
  const std::size_t d = x.size();
  double sq = 0.0, dot = 0.0, sx = 0.0, sx2 = 0.0, sin2 = 0.0;
  std::size_t used = 0;
  const auto visit = [&](std::size_t i) {
    const double diff = x[i] - x2[i];
    sq += diff * diff;
    if (kind == KernelKind::periodic) {
      const double s = std::sin(kPi * diff / hp.p);
      sin2 += s * s;
    }
    dot += x[i] * x2[i];
    sx += x[i];
    sx2 += x2[i];
    ++used;
  };
  if (dims.empty()) {
    for (std::size_t i = 0; i < d; ++i) visit(i);
  } else {
    for (int i : dims) visit(static_cast<std::size_t>(i));
  }
  switch (kind) {
    case KernelKind::rbf:
      return hp.sigma2 * std::exp(-sq / (2.0 * hp.l * hp.l));
    case KernelKind::rq:
      return hp.sigma2 * std::pow(1.0 + sq / (2.0 * hp.alpha * hp.l * hp.l), -hp.alpha);
    case KernelKind::periodic:
      return hp.sigma2 * std::exp(-2.0 * sin2 / (hp.l * hp.l));
    case KernelKind::linear:
      return hp.sigma_b2 +
             hp.sigma_v2 * (dot - hp.c * (sx + sx2) + hp.c * hp.c * static_cast<double>(used));
    case KernelKind::matern:
      return hp.sigma2 * matern_of(hp.nu, std::sqrt(sq) / hp.l);
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::rbf:
      return "RBF";
    case KernelKind::rq:
      return "RQ";
    case KernelKind::periodic:
      return "PER";
    case KernelKind::linear:
      return "LIN";
    case KernelKind::matern:
      return "MAT";
  }
  return "?";
}

KernelKind kernel_kind_from_string(std::string_view name) {
  const std::string n = upper(name);
  if (n == "RBF") return KernelKind::rbf;
  if (n == "RQ") return KernelKind::rq;
  if (n == "PER" || n == "PERIODIC") return KernelKind::periodic;
  if (n == "LIN" || n == "LINEAR") return KernelKind::linear;
  if (n == "MAT" || n == "MATERN") return KernelKind::matern;
  throw UnknownCombo("unknown kernel '" + std::string(name) + "'");
}

KernelExpr::KernelExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

KernelExpr KernelExpr::leaf(KernelKind kind, Hyperparams hp, std::vector<int> active_dims) {
  check_hyper(kind, hp);
  for (int d : active_dims) {
    if (d < 0) throw ConfigError("active dimension indices must be non-negative");
  }
  std::sort(active_dims.begin(), active_dims.end());
  active_dims.erase(std::unique(active_dims.begin(), active_dims.end()), active_dims.end());
  auto n = std::make_shared<Node>();
  n->op = Op::leaf;
  n->kind = kind;
  n->hp = hp;
  n->dims = std::move(active_dims);
  return KernelExpr(std::move(n));
}

KernelExpr KernelExpr::sum(KernelExpr left, KernelExpr right) {
  auto n = std::make_shared<Node>();
  n->op = Op::sum;
  n->children = {std::move(left), std::move(right)};
  return KernelExpr(std::move(n));
}

KernelExpr KernelExpr::product(KernelExpr left, KernelExpr right) {
  auto n = std::make_shared<Node>();
  n->op = Op::product;
  n->children = {std::move(left), std::move(right)};
  return KernelExpr(std::move(n));
}

KernelExpr::Op KernelExpr::op() const { return node_->op; }
KernelKind KernelExpr::kind() const { return node_->kind; }
const Hyperparams& KernelExpr::hyper() const { return node_->hp; }
const std::vector<int>& KernelExpr::active_dims() const { return node_->dims; }

const KernelExpr& KernelExpr::left() const { return node_->children.at(0); }
const KernelExpr& KernelExpr::right() const { return node_->children.at(1); }

std::string KernelExpr::to_string() const {
  if (op() == Op::leaf) return std::string(racegp::to_string(kind()));
  const auto wrap = [](const KernelExpr& e) {
    return e.op() == Op::leaf ? e.to_string() : "(" + e.to_string() + ")";
  };
  return wrap(left()) + (op() == Op::sum ? "+" : "*") + wrap(right());
}

std::vector<double> KernelExpr::parameters() const {
  if (op() == Op::leaf) return leaf_params(kind(), hyper());
  std::vector<double> out = left().parameters();
  const std::vector<double> r = right().parameters();
  out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::vector<std::string> KernelExpr::parameter_names() const {
  if (op() == Op::leaf) {
    std::vector<std::string> names = leaf_param_names(kind());
    for (auto& n : names) n = std::string(racegp::to_string(kind())) + "." + n;
    return names;
  }
  std::vector<std::string> out = left().parameter_names();
  const std::vector<std::string> r = right().parameter_names();
  out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::size_t KernelExpr::parameter_count() const {
  if (op() == Op::leaf) return leaf_param_names(kind()).size();
  return left().parameter_count() + right().parameter_count();
}

KernelExpr KernelExpr::with_parameters(std::span<const double> params) const {
  if (params.size() != parameter_count()) {
    throw Error("kernel " + to_string() + " expects " + std::to_string(parameter_count()) +
                " parameters, got " + std::to_string(params.size()));
  }
  std::size_t pos = 0;
  return with_parameters_impl(params, pos);
}

KernelExpr KernelExpr::with_parameters_impl(std::span<const double> params, std::size_t& pos) const {
  if (op() == Op::leaf) {
    const std::size_t count = leaf_param_names(kind()).size();
    const Hyperparams hp = leaf_from_params(kind(), hyper(), params.subspan(pos, count));
    pos += count;
    return leaf(kind(), hp, active_dims());
  }
  KernelExpr l = left().with_parameters_impl(params, pos);
  KernelExpr r = right().with_parameters_impl(params, pos);
  return op() == Op::sum ? sum(std::move(l), std::move(r)) : product(std::move(l), std::move(r));
}

bool operator==(const KernelExpr& a, const KernelExpr& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  if (a.op() == KernelExpr::Op::leaf) {
    return a.kind() == b.kind() && a.hyper() == b.hyper() && a.active_dims() == b.active_dims();
  }
  return a.left() == b.left() && a.right() == b.right();
}

double kernel_eval(const KernelExpr& k, FeatureVector x, FeatureVector x2) {
  if (x.size() != x2.size()) throw LengthMismatch("kernel_eval: feature vectors differ in length");
  switch (k.op()) {
    case KernelExpr::Op::leaf:
      for (int d : k.active_dims()) {
        if (static_cast<std::size_t>(d) >= x.size()) throw Error("active dimension out of range");
      }
      return leaf_eval(k.kind(), k.hyper(), k.active_dims(), x, x2);
    case KernelExpr::Op::sum:
      return kernel_eval(k.left(), x, x2) + kernel_eval(k.right(), x, x2);
    case KernelExpr::Op::product:
      return kernel_eval(k.left(), x, x2) * kernel_eval(k.right(), x, x2);
  }
  return 0.0;
}

GramCache::GramCache(const Eigen::MatrixXd& X, const Eigen::MatrixXd& X2, bool symmetric)
    : X_(X), X2_(symmetric ? X : X2), symmetric_(symmetric) {
  if (X_.cols() != X2_.cols()) throw LengthMismatch("gram: feature widths differ");
}

const GramCache::Pairwise& GramCache::pairwise(const std::vector<int>& active_dims, bool need_dist) {
  std::vector<int> dims = active_dims;
  if (dims.empty()) {
    for (int i = 0; i < X_.cols(); ++i) dims.push_back(i);
  }
  unsigned mask = 0;
  for (int d : dims) {
    if (d >= X_.cols()) throw Error("active dimension out of range");
    if (d >= 8) throw Error("gram cache supports at most 8 feature dimensions");
    mask |= 1u << d;
  }
  auto& slot = cache_[mask];
  if (!slot) {
    auto pw = std::make_unique<Pairwise>();
    const Eigen::Index n = X_.rows(), m = X2_.rows();
    pw->dims = static_cast<int>(dims.size());
    pw->sqdist.resize(n, m);
    pw->inner.resize(n, m);
    pw->row_sum = Eigen::ArrayXd::Zero(n);
    pw->col_sum = Eigen::ArrayXd::Zero(m);
    for (int d : dims) {
      pw->row_sum += X_.col(d).array();
      pw->col_sum += X2_.col(d).array();
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index i_end = symmetric_ ? j + 1 : n;
      for (Eigen::Index i = 0; i < i_end; ++i) {
        double sq = 0.0, dot = 0.0;
        for (int d : dims) {
          const double a = X_(i, d), b = X2_(j, d);
          sq += (a - b) * (a - b);
          dot += a * b;
        }
        pw->sqdist(i, j) = sq;
        pw->inner(i, j) = dot;
        if (symmetric_) {
          pw->sqdist(j, i) = sq;
          pw->inner(j, i) = dot;
        }
      }
    }
    slot = std::move(pw);
  }
  if (need_dist && slot->dist.size() == 0) slot->dist = slot->sqdist.sqrt();
  return *slot;
}

Eigen::ArrayXXd GramCache::evaluate_node(const KernelExpr& k) {
  if (k.op() == KernelExpr::Op::sum) return evaluate_node(k.left()) + evaluate_node(k.right());
  if (k.op() == KernelExpr::Op::product) return evaluate_node(k.left()) * evaluate_node(k.right());

  const Hyperparams& hp = k.hyper();
  switch (k.kind()) {
    case KernelKind::rbf: {
      const Pairwise& pw = pairwise(k.active_dims(), false);
      return hp.sigma2 * (pw.sqdist * (-0.5 / (hp.l * hp.l))).exp();
    }
    case KernelKind::rq: {
      const Pairwise& pw = pairwise(k.active_dims(), false);
      const double scale = 1.0 / (2.0 * hp.alpha * hp.l * hp.l);
      return hp.sigma2 * ((1.0 + pw.sqdist * scale).log() * (-hp.alpha)).exp();
    }
    case KernelKind::periodic:
      return periodic_node(k.active_dims(), hp);
    case KernelKind::linear: {
      const Pairwise& pw = pairwise(k.active_dims(), false);
      Eigen::ArrayXXd out = pw.inner;
      out.colwise() -= hp.c * pw.row_sum;
      out.rowwise() -= hp.c * pw.col_sum.transpose();
      return hp.sigma_b2 + hp.sigma_v2 * (out + hp.c * hp.c * pw.dims);
    }
    case KernelKind::matern: {
      const Pairwise& pw = pairwise(k.active_dims(), true);
      if (hp.nu == 0.5) return hp.sigma2 * (pw.dist * (-1.0 / hp.l)).exp();
      if (hp.nu == 1.5) {
        const Eigen::ArrayXXd a = pw.dist * (std::sqrt(3.0) / hp.l);
        return hp.sigma2 * (1.0 + a) * (-a).exp();
      }
      const Eigen::ArrayXXd a = pw.dist * (std::sqrt(5.0) / hp.l);
      return hp.sigma2 * (1.0 + a + a.square() / 3.0) * (-a).exp();
    }
  }
  return {};
}

// sin^2 summed per dimension: a product of 1-D periodic kernels, which stays
// PSD where the Euclidean-distance form does not (d > 1)
Eigen::ArrayXXd GramCache::periodic_node(const std::vector<int>& active_dims,
                                         const Hyperparams& hp) {
  std::vector<int> dims = active_dims;
  if (dims.empty()) {
    for (int i = 0; i < X_.cols(); ++i) dims.push_back(i);
  }
  const Eigen::Index n = X_.rows(), m = X2_.rows();
  const double w = kPi / hp.p, g = -2.0 / (hp.l * hp.l);
  Eigen::ArrayXXd out(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index i_end = symmetric_ ? j + 1 : n;
    for (Eigen::Index i = 0; i < i_end; ++i) {
      double s2 = 0.0;
      for (int d : dims) {
        const double s = std::sin(w * (X_(i, d) - X2_(j, d)));
        s2 += s * s;
      }
      out(i, j) = hp.sigma2 * std::exp(g * s2);
    }
  }
  return out;
}

Eigen::MatrixXd GramCache::evaluate(const KernelExpr& k) {
  Eigen::MatrixXd K = evaluate_node(k).matrix();
  if (symmetric_) K.triangularView<Eigen::StrictlyLower>() = K.transpose();
  return K;
}

Eigen::MatrixXd gram(const KernelExpr& k, const Eigen::MatrixXd& X, const Eigen::MatrixXd& X2) {
  GramCache cache(X, X2, false);
  return cache.evaluate(k);
}

Eigen::MatrixXd gram(const KernelExpr& k, const Eigen::MatrixXd& X) {
  GramCache cache(X);
  return cache.evaluate(k);
}

Eigen::VectorXd gram_diagonal(const KernelExpr& k, const Eigen::MatrixXd& X) {
  Eigen::VectorXd d(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Eigen::VectorXd row = X.row(i).transpose();
    d(i) = kernel_eval(k, {row.data(), static_cast<std::size_t>(row.size())},
                       {row.data(), static_cast<std::size_t>(row.size())});
  }
  return d;
}

const std::array<std::string, 12>& study_combos() {
  static const std::array<std::string, 12> combos = {
      "RBF+PER", "RBF+LIN", "RQ+PER",  "RQ+LIN",  "MAT+PER", "MAT+LIN",
      "RBF*RQ",  "MAT*PER", "MAT*RBF", "MAT*LIN", "RQ*LIN",  "RQ*MAT"};
  return combos;
}

std::string canonical_combo(std::string_view name) {
  std::string n;
  for (std::size_t i = 0; i < name.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(name[i]);
    // U+00D7 MULTIPLICATION SIGN in UTF-8
    if (c == 0xC3 && i + 1 < name.size() && static_cast<unsigned char>(name[i + 1]) == 0x97) {
      n += '*';
      ++i;
      continue;
    }
    if (std::isspace(c)) continue;
    n += static_cast<char>(std::toupper(c));
  }
  std::string op;
  std::size_t pos = n.find_first_of("+*");
  if (pos == std::string::npos) {
    // "RBFXRQ" style: split on an X that separates two known kernel names
    for (std::size_t i = 1; i + 1 < n.size(); ++i) {
      if (n[i] != 'X') continue;
      try {
        kernel_kind_from_string(n.substr(0, i));
        kernel_kind_from_string(n.substr(i + 1));
        pos = i;
        break;
      } catch (const UnknownCombo&) {
      }
    }
    if (pos == std::string::npos) throw UnknownCombo("unknown kernel combination '" + std::string(name) + "'");
    op = "*";
  } else {
    op = n.substr(pos, 1);
  }
  std::string a = n.substr(0, pos), b = n.substr(pos + 1);
  try {
    a = std::string(to_string(kernel_kind_from_string(a)));
    b = std::string(to_string(kernel_kind_from_string(b)));
  } catch (const UnknownCombo&) {
    throw UnknownCombo("unknown kernel combination '" + std::string(name) + "'");
  }
  const std::string canon = a + op + b;
  for (const auto& c : study_combos()) {
    if (c == canon) return c;
  }
  throw UnknownCombo("'" + std::string(name) + "' is not one of the twelve study combinations");
}

KernelExpr build_kernel_combo(std::string_view name) {
  const std::string canon = canonical_combo(name);
  const std::size_t pos = canon.find_first_of("+*");
  const KernelExpr a = KernelExpr::leaf(kernel_kind_from_string(canon.substr(0, pos)));
  const KernelExpr b = KernelExpr::leaf(kernel_kind_from_string(canon.substr(pos + 1)));
  return canon[pos] == '+' ? KernelExpr::sum(a, b) : KernelExpr::product(a, b);
}

}  // namespace racegp
