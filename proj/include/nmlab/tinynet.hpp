#pragma once

// Tiny network families, their losses and exact analytic gradients.
//
//   Sigmoid221   2-2-1 sigmoid classifier, mean negative log-likelihood
//   ReluReg      1-m-1 ReLU regressor, sum of squared residuals
//   TwoH1        2-h-1 classifier with ReLU or sigmoid hidden units
//   DeepRelu     stack of ReLU layers with an affine scalar output
//
// Parameter types are templated on the scalar so that oracles can evaluate
// in extended precision; the library itself instantiates double.

#include "nmlab/datasets.hpp"
#include "nmlab/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <variant>
#include <vector>

namespace nmlab {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  using std::exp;
  return Scalar(1) / (Scalar(1) + exp(-z));
}

/// log(sigmoid(z)) without overflow for large |z|.
template <typename Scalar>
Scalar log_sigmoid(Scalar z) {
  using std::exp;
  using std::log1p;
  return z >= Scalar(0) ? -log1p(exp(-z)) : z - log1p(exp(z));
}

template <typename Scalar>
Scalar relu(Scalar z) {
  return z > Scalar(0) ? z : Scalar(0);
}

// ReLU'(0) = 0.
template <typename Scalar>
Scalar relu_slope(Scalar z) {
  return z > Scalar(0) ? Scalar(1) : Scalar(0);
}

// ---------------------------------------------------------------------------
// 2-2-1 sigmoid network. Hidden unit k computes
//   sigmoid(wk0 * x0 + wk1 * x1 + bk)
// and the output is sigmoid(v0 h0 + v1 h1 + c).
// Flat order: [w00, w01, b0, w10, w11, b1, v0, v1, c].

template <typename Scalar>
struct Sigmoid221 {
  Scalar w00{}, w01{}, b0{};
  Scalar w10{}, w11{}, b1{};
  Scalar v0{}, v1{}, c{};

  static constexpr int kSize = 9;
  using Flat = Eigen::Matrix<Scalar, kSize, 1>;

  Flat flatten() const {
    Flat f;
    f << w00, w01, b0, w10, w11, b1, v0, v1, c;
    return f;
  }

  static Sigmoid221 unflatten(const Eigen::Ref<const VectorX<Scalar>>& f) {
    if (f.size() != kSize) throw InvalidInput("sigmoid221 expects 9 parameters");
    return {f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8]};
  }

  bool operator==(const Sigmoid221&) const = default;
};

template <typename Scalar>
Scalar forward(const Sigmoid221<Scalar>& p, const Eigen::Matrix<Scalar, 2, 1>& x) {
  if (!x.allFinite()) throw InvalidInput("non-finite network input");
  const Scalar h0 = sigmoid(p.w00 * x[0] + p.w01 * x[1] + p.b0);
  const Scalar h1 = sigmoid(p.w10 * x[0] + p.w11 * x[1] + p.b1);
  return sigmoid(p.v0 * h0 + p.v1 * h1 + p.c);
}

// ---------------------------------------------------------------------------
// 1-m-1 ReLU regressor: sum_j v_j relu(w_j x + b_j) + c.
// Flat order: [w_1..w_m, b_1..b_m, v_1..v_m, c].

template <typename Scalar>
struct ReluReg {
  VectorX<Scalar> w, b, v;
  Scalar c{};

  Eigen::Index units() const { return w.size(); }
  Eigen::Index flat_size() const { return 3 * units() + 1; }

  VectorX<Scalar> flatten() const {
    VectorX<Scalar> f(flat_size());
    f << w, b, v, c;
    return f;
  }

  static ReluReg unflatten(const Eigen::Ref<const VectorX<Scalar>>& f) {
    if (f.size() < 4 || (f.size() - 1) % 3 != 0)
      throw InvalidInput("relu_reg flat vector must have 3m+1 entries");
    const Eigen::Index m = (f.size() - 1) / 3;
    return {f.segment(0, m), f.segment(m, m), f.segment(2 * m, m), f[3 * m]};
  }

  void check() const {
    if (w.size() < 1) throw InvalidInput("relu_reg needs at least one hidden unit");
    if (b.size() != w.size() || v.size() != w.size())
      throw InvalidInput("relu_reg w, b, v must have equal length");
  }

  bool operator==(const ReluReg& o) const {
    return w.size() == o.w.size() && b.size() == o.b.size() && v.size() == o.v.size() &&
           w == o.w && b == o.b && v == o.v && c == o.c;
  }
};

template <typename Scalar>
Scalar forward(const ReluReg<Scalar>& p, Scalar x) {
  using std::isfinite;
  if (!isfinite(x)) throw InvalidInput("non-finite network input");
  Scalar out(0);
  for (Eigen::Index j = 0; j < p.units(); ++j) out += p.v[j] * relu(p.w[j] * x + p.b[j]);
  return out + p.c;
}

// ---------------------------------------------------------------------------
// 2-h-1 classifier. Flat order: W1 row-major (h x 2), b1, v, c.

enum class Activation { Relu, Sigmoid };

template <typename Scalar>
struct TwoH1 {
  Activation activation = Activation::Sigmoid;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> w1;
  VectorX<Scalar> b1, v;
  Scalar c{};

  Eigen::Index width() const { return w1.rows(); }
  Eigen::Index flat_size() const { return 4 * width() + 1; }

  VectorX<Scalar> flatten() const {
    VectorX<Scalar> f(flat_size());
    const Eigen::Index h = width();
    for (Eigen::Index j = 0; j < h; ++j) {
      f[2 * j] = w1(j, 0);
      f[2 * j + 1] = w1(j, 1);
    }
    f.segment(2 * h, h) = b1;
    f.segment(3 * h, h) = v;
    f[4 * h] = c;
    return f;
  }

  static TwoH1 unflatten(Activation act, const Eigen::Ref<const VectorX<Scalar>>& f) {
    if (f.size() < 5 || (f.size() - 1) % 4 != 0)
      throw InvalidInput("two_h1 flat vector must have 4h+1 entries");
    const Eigen::Index h = (f.size() - 1) / 4;
    TwoH1 p;
    p.activation = act;
    p.w1.resize(h, 2);
    for (Eigen::Index j = 0; j < h; ++j) {
      p.w1(j, 0) = f[2 * j];
      p.w1(j, 1) = f[2 * j + 1];
    }
    p.b1 = f.segment(2 * h, h);
    p.v = f.segment(3 * h, h);
    p.c = f[4 * h];
    return p;
  }

  /// The 2-2-1 sigmoid network as a member of this family.
  static TwoH1 from(const Sigmoid221<Scalar>& s) {
    TwoH1 p;
    p.activation = Activation::Sigmoid;
    p.w1.resize(2, 2);
    p.w1 << s.w00, s.w01, s.w10, s.w11;
    p.b1.resize(2);
    p.b1 << s.b0, s.b1;
    p.v.resize(2);
    p.v << s.v0, s.v1;
    p.c = s.c;
    return p;
  }

  void check() const {
    if (w1.rows() < 1) throw InvalidInput("two_h1 needs at least one hidden unit");
    if (b1.size() != w1.rows() || v.size() != w1.rows())
      throw InvalidInput("two_h1 W1, b1, v shapes disagree");
  }

  bool operator==(const TwoH1& o) const {
    return activation == o.activation && w1.rows() == o.w1.rows() && b1.size() == o.b1.size() &&
           v.size() == o.v.size() && w1 == o.w1 && b1 == o.b1 && v == o.v && c == o.c;
  }
};

template <typename Scalar>
Scalar hidden_activation(Activation a, Scalar z) {
  return a == Activation::Relu ? relu(z) : sigmoid(z);
}

/// Output logit; forward() applies the final sigmoid.
template <typename Scalar>
Scalar logit(const TwoH1<Scalar>& p, const Eigen::Matrix<Scalar, 2, 1>& x) {
  Scalar z(0);
  for (Eigen::Index j = 0; j < p.width(); ++j)
    z += p.v[j] * hidden_activation(p.activation, p.w1(j, 0) * x[0] + p.w1(j, 1) * x[1] + p.b1[j]);
  return z + p.c;
}

template <typename Scalar>
Scalar forward(const TwoH1<Scalar>& p, const Eigen::Matrix<Scalar, 2, 1>& x) {
  if (!x.allFinite()) throw InvalidInput("non-finite network input");
  return sigmoid(logit(p, x));
}

// ---------------------------------------------------------------------------
// Deep ReLU regressor: h_0 = x, h_n = relu(W_n h_{n-1} + b_n) for n < k,
// output W_k h_{k-1} + b_k (a 1 x m_{k-1} row and a scalar bias).
// Flat order: layer by layer, W row-major then b.

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> w;
  VectorX<Scalar> b;

  bool operator==(const DenseLayer& o) const {
    return w.rows() == o.w.rows() && w.cols() == o.w.cols() && b.size() == o.b.size() && w == o.w &&
           b == o.b;
  }
};

template <typename Scalar>
struct DeepRelu {
  std::vector<DenseLayer<Scalar>> layers;

  Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().w.cols(); }

  Eigen::Index flat_size() const {
    Eigen::Index n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }

  void check() const {
    if (layers.empty()) throw InvalidInput("deep_relu needs at least one layer");
    for (std::size_t n = 0; n < layers.size(); ++n) {
      const auto& l = layers[n];
      if (l.w.rows() != l.b.size())
        throw InvalidInput("deep_relu layer " + std::to_string(n + 1) + ": bias length mismatch");
      if (n > 0 && l.w.cols() != layers[n - 1].w.rows())
        throw InvalidInput("deep_relu layer " + std::to_string(n + 1) + ": input width mismatch");
    }
    if (layers.back().w.rows() != 1) throw InvalidInput("deep_relu output layer must be scalar");
  }

  VectorX<Scalar> flatten() const {
    VectorX<Scalar> f(flat_size());
    Eigen::Index k = 0;
    for (const auto& l : layers) {
      for (Eigen::Index i = 0; i < l.w.rows(); ++i)
        for (Eigen::Index j = 0; j < l.w.cols(); ++j) f[k++] = l.w(i, j);
      for (Eigen::Index i = 0; i < l.b.size(); ++i) f[k++] = l.b[i];
    }
    return f;
  }

  /// Same layer shapes as `*this`, values taken from `f`.
  DeepRelu with_flat(const Eigen::Ref<const VectorX<Scalar>>& f) const {
    if (f.size() != flat_size()) throw InvalidInput("deep_relu flat vector has wrong length");
    DeepRelu out = *this;
    Eigen::Index k = 0;
    for (auto& l : out.layers) {
      for (Eigen::Index i = 0; i < l.w.rows(); ++i)
        for (Eigen::Index j = 0; j < l.w.cols(); ++j) l.w(i, j) = f[k++];
      for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b[i] = f[k++];
    }
    return out;
  }

  bool operator==(const DeepRelu&) const = default;
};

template <typename Scalar>
Scalar forward(const DeepRelu<Scalar>& p, const Eigen::Ref<const VectorX<Scalar>>& x) {
  if (x.size() != p.input_dim()) throw InvalidInput("deep_relu input has wrong dimension");
  if (!x.allFinite()) throw InvalidInput("non-finite network input");
  VectorX<Scalar> h = x;
  const std::size_t k = p.layers.size();
  for (std::size_t n = 0; n + 1 < k; ++n) {
    h = (p.layers[n].w * h + p.layers[n].b).unaryExpr([](Scalar z) { return relu(z); });
  }
  return (p.layers.back().w * h)(0) + p.layers.back().b[0];
}

using Sigmoid221Params = Sigmoid221<double>;
using ReluRegParams = ReluReg<double>;
using TwoH1Params = TwoH1<double>;
using DeepReluParams = DeepRelu<double>;

inline double forward(const DeepReluParams& p, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return forward<double>(p, x);
}

// ---------------------------------------------------------------------------
// Losses and analytic gradients (double precision).

/// Mean negative log-likelihood over the dataset.
double nll_loss(const Sigmoid221Params& p, const Dataset& d);
double nll_loss(const TwoH1Params& p, const Dataset& d);
inline double likelihood(double nll) { return std::exp(-nll); }

/// Fraction of points with (output > 0.5) == (y == 1).
double accuracy(const Sigmoid221Params& p, const Dataset& d);
double accuracy(const TwoH1Params& p, const Dataset& d);

Sigmoid221Params::Flat grad_nll(const Sigmoid221Params& p, const Dataset& d);
Eigen::VectorXd grad_nll(const TwoH1Params& p, const Dataset& d);

/// Mean NLL of a 2-h-1 network given as a flat vector, its gradient written
/// into `grad`, and the number of correctly classified points in `correct`.
double two_h1_evaluate(Activation act, const Eigen::Ref<const Eigen::VectorXd>& flat, const Dataset& d,
                       Eigen::Ref<Eigen::VectorXd> grad, Eigen::Index* correct = nullptr);

/// Sum of squared residuals.
double relu_loss(const ReluRegParams& p, const Dataset& d);
Eigen::VectorXd grad_relu_loss(const ReluRegParams& p, const Dataset& d);

double deep_relu_loss(const DeepReluParams& p, const Dataset& d);
Eigen::VectorXd grad_deep_relu_loss(const DeepReluParams& p, const Dataset& d);

/// Pre-activations of every ReLU layer on every point; entry n is
/// (units of layer n+1) x N.
std::vector<Eigen::MatrixXd> pre_activations(const DeepReluParams& p, const Dataset& d);

// ---------------------------------------------------------------------------
// Architecture-erased view used by certification, forging and the CLI.

using AnyParams = std::variant<Sigmoid221Params, ReluRegParams, TwoH1Params, DeepReluParams>;

enum class LossKind { Nll, Mse };

const char* arch_name(const AnyParams& p);
LossKind natural_loss(const AnyParams& p);

Eigen::VectorXd flatten(const AnyParams& p);
/// Parameters of the same architecture and shape as `shape`, values from `flat`.
AnyParams with_flat(const AnyParams& shape, const Eigen::Ref<const Eigen::VectorXd>& flat);

/// Throws InvalidInput on architecture/loss/dataset mismatch or non-finite values.
void check_compatible(const AnyParams& p, const Dataset& d, LossKind kind);

double loss(const AnyParams& p, const Dataset& d, LossKind kind);
Eigen::VectorXd gradient(const AnyParams& p, const Dataset& d, LossKind kind);

/// Throws NonSmoothPoint if any ReLU pre-activation is within `tol` of zero.
void require_smooth(const AnyParams& p, const Dataset& d, double tol = 1e-9);

using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central differences of a gradient, symmetrized as (H + H^T) / 2.
Eigen::MatrixXd hessian_fd(const GradientFn& grad, const Eigen::VectorXd& at, double step = 1e-5);

/// Hessian of the loss; requires a smooth point.
Eigen::MatrixXd hessian(const AnyParams& p, const Dataset& d, LossKind kind, double step = 1e-5);

}  // namespace nmlab
