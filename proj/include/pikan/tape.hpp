#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pikan/bspline.hpp"

namespace pikan {

/// Handle to a node on a Tape.
struct Value {
  uint32_t id = 0;
};

enum class Op : uint8_t {
  Leaf,
  Const,
  Add,
  Sub,
  Mul,
  Div,
  PowInt,
  Tanh,
  Sigmoid,
  Silu,
  Sin,
  Cos,
  Exp,
  Log,
  Square,
  Affine,    // imm0 * x + imm1
  MinConst,  // min(x, imm0); subgradient 0 when the constant side wins
  Sum,       // sum of operands
  Dot,       // sum of operand pairs a_i * b_i
  Spline,    // sum of active spline coefficients weighted by basis values
};

inline double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

inline double sigmoid_value(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu_value(double x) { return x * sigmoid_value(x); }

/// Record-then-replay scalar autodiff tape. Values are computed in fp64 at
/// record time; each node stores its operands and the local partial
/// derivatives, so reverse accumulation is a single backward sweep.
/// Parameter leaves must be registered before anything else is recorded.
/// A tape is confined to one thread; division by zero and log of a
/// nonpositive argument record non-finite values rather than throwing and
/// are caught by the finiteness check before an optimizer step.
class Tape {
 public:
  struct Node {
    double value = 0.0;
    double imm0 = 0.0;  // Affine scale / PowInt exponent / Spline aux index
    double imm1 = 0.0;  // Affine shift
    uint32_t first_arg = 0;
    uint16_t n_args = 0;
    Op op = Op::Const;
  };

  struct SplineAux {
    const KnotVector* kv = nullptr;
    int deriv = 0;
  };

  void reset() {
    nodes_.clear();
    arg_ids_.clear();
    arg_partials_.clear();
    spline_aux_.clear();
    n_params_ = 0;
    has_one_ = false;
  }

  void reserve(size_t n_nodes, size_t n_args) {
    nodes_.reserve(n_nodes);
    arg_ids_.reserve(n_args);
    arg_partials_.reserve(n_args);
  }

  size_t size() const { return nodes_.size(); }
  size_t num_params() const { return n_params_; }
  double val(Value v) const { return nodes_[v.id].value; }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Registers the trainable parameters as the leading leaves; must be the
  /// first recording on a fresh tape. backward() reports gradients for
  /// exactly these leaves, in order.
  void add_params(std::span<const double> params) {
    assert(nodes_.empty() && "parameters must be registered first");
    for (double p : params) {
      push(Op::Leaf, p);
    }
    n_params_ = params.size();
  }

  /// Non-parameter leaf (inputs, sampled coordinates).
  Value leaf(double v) { return push(Op::Leaf, v); }

  Value constant(double c) { return push(Op::Const, c); }

  /// Shared constant-1 node, used to fold plain sums into Dot accumulators.
  Value one() {
    if (!has_one_) {
      one_ = constant(1.0);
      has_one_ = true;
    }
    return one_;
  }

  Value add(Value a, Value b) {
    Value r = push(Op::Add, nodes_[a.id].value + nodes_[b.id].value);
    arg(a, 1.0);
    arg(b, 1.0);
    return r;
  }

  Value sub(Value a, Value b) {
    Value r = push(Op::Sub, nodes_[a.id].value - nodes_[b.id].value);
    arg(a, 1.0);
    arg(b, -1.0);
    return r;
  }

  Value mul(Value a, Value b) {
    const double va = nodes_[a.id].value;
    const double vb = nodes_[b.id].value;
    Value r = push(Op::Mul, va * vb);
    arg(a, vb);
    arg(b, va);
    return r;
  }

  Value div(Value a, Value b) {
    const double va = nodes_[a.id].value;
    const double vb = nodes_[b.id].value;
    Value r = push(Op::Div, va / vb);
    arg(a, 1.0 / vb);
    arg(b, -va / (vb * vb));
    return r;
  }

  Value pow_int(Value a, int n) {
    const double va = nodes_[a.id].value;
    Value r = push(Op::PowInt, ipow(va, n));
    nodes_.back().imm0 = static_cast<double>(n);
    arg(a, n == 0 ? 0.0 : n * ipow(va, n - 1));
    return r;
  }

  Value tanh_(Value a) {
    const double t = std::tanh(nodes_[a.id].value);
    Value r = push(Op::Tanh, t);
    arg(a, 1.0 - t * t);
    return r;
  }

  Value sigmoid(Value a) {
    const double s = sigmoid_value(nodes_[a.id].value);
    Value r = push(Op::Sigmoid, s);
    arg(a, s * (1.0 - s));
    return r;
  }

  Value silu(Value a) {
    const double x = nodes_[a.id].value;
    const double s = sigmoid_value(x);
    Value r = push(Op::Silu, x * s);
    arg(a, s * (1.0 + x * (1.0 - s)));
    return r;
  }

  Value sin_(Value a) {
    const double x = nodes_[a.id].value;
    Value r = push(Op::Sin, std::sin(x));
    arg(a, std::cos(x));
    return r;
  }

  Value cos_(Value a) {
    const double x = nodes_[a.id].value;
    Value r = push(Op::Cos, std::cos(x));
    arg(a, -std::sin(x));
    return r;
  }

  Value exp_(Value a) {
    const double e = std::exp(nodes_[a.id].value);
    Value r = push(Op::Exp, e);
    arg(a, e);
    return r;
  }

  Value log_(Value a) {
    const double x = nodes_[a.id].value;
    Value r = push(Op::Log, std::log(x));
    arg(a, 1.0 / x);
    return r;
  }

  Value square(Value a) {
    const double x = nodes_[a.id].value;
    Value r = push(Op::Square, x * x);
    arg(a, 2.0 * x);
    return r;
  }

  /// scale * x + shift with constant coefficients.
  Value affine(Value a, double scale, double shift) {
    Value r = push(Op::Affine, scale * nodes_[a.id].value + shift);
    nodes_.back().imm0 = scale;
    nodes_.back().imm1 = shift;
    arg(a, scale);
    return r;
  }

  Value neg(Value a) { return affine(a, -1.0, 0.0); }

  Value min_const(Value a, double c) {
    const double x = nodes_[a.id].value;
    Value r = push(Op::MinConst, x <= c ? x : c);
    nodes_.back().imm0 = c;
    arg(a, x <= c ? 1.0 : 0.0);
    return r;
  }

  Value sum(std::span<const Value> xs) {
    double s = 0.0;
    for (Value x : xs) s += nodes_[x.id].value;
    Value r = push(Op::Sum, s);
    for (Value x : xs) arg(x, 1.0);
    return r;
  }

  /// Accumulator for interleaved Dot operands; lets callers build the pair
  /// list incrementally without a temporary per call site.
  std::vector<Value>& dot_scratch() {
    scratch_.clear();
    return scratch_;
  }

  /// sum over i of pairs[2i] * pairs[2i+1].
  Value dot(std::span<const Value> pairs) {
    assert(pairs.size() % 2 == 0);
    double s = 0.0;
    for (size_t i = 0; i < pairs.size(); i += 2) {
      s += nodes_[pairs[i].id].value * nodes_[pairs[i + 1].id].value;
    }
    Value r = push(Op::Dot, s);
    for (size_t i = 0; i < pairs.size(); i += 2) {
      arg(pairs[i], nodes_[pairs[i + 1].id].value);
      arg(pairs[i + 1], nodes_[pairs[i].id].value);
    }
    return r;
  }

  /// Linear combination of the active spline coefficients with the
  /// deriv-th basis derivative row as weights. The partial with respect to
  /// x is the same combination one derivative row up, which keeps the node
  /// exact under further differentiation. basis_d / basis_d1 are rows
  /// deriv and deriv+1 of an ActiveBasis evaluated at x's current value.
  Value spline_combo(const KnotVector& kv, int deriv, Value x,
                     std::span<const Value> coeffs, const double* basis_d,
                     const double* basis_d1) {
    double s = 0.0;
    double px = 0.0;
    for (size_t i = 0; i < coeffs.size(); ++i) {
      const double c = nodes_[coeffs[i].id].value;
      s += c * basis_d[i];
      px += c * basis_d1[i];
    }
    Value r = push(Op::Spline, s);
    nodes_.back().imm0 = static_cast<double>(spline_aux_.size());
    spline_aux_.push_back(SplineAux{&kv, deriv});
    arg(x, px);
    for (size_t i = 0; i < coeffs.size(); ++i) {
      arg(coeffs[i], basis_d[i]);
    }
    return r;
  }

  /// Reverse accumulation from weighted seed nodes. grad receives
  /// d(sum_s weight_s * node_s)/d(param_i) for the registered parameters.
  void backward(std::span<const std::pair<Value, double>> seeds,
                std::vector<double>& grad) const;

  std::vector<double> backward(Value seed) const {
    std::vector<double> grad;
    const std::pair<Value, double> s[1] = {{seed, 1.0}};
    backward(std::span<const std::pair<Value, double>>(s, 1), grad);
    return grad;
  }

  /// Recomputes every node value from the leaves; used to validate that
  /// the recorded program is deterministic.
  std::vector<double> replay_values() const;

  bool all_finite() const {
    for (const Node& n : nodes_) {
      if (!std::isfinite(n.value)) return false;
    }
    return true;
  }

 private:
  Value push(Op op, double value) {
    Node n;
    n.value = value;
    n.op = op;
    n.first_arg = static_cast<uint32_t>(arg_ids_.size());
    nodes_.push_back(n);
    return Value{static_cast<uint32_t>(nodes_.size() - 1)};
  }

  void arg(Value v, double partial) {
    arg_ids_.push_back(v.id);
    arg_partials_.push_back(partial);
    ++nodes_.back().n_args;
  }

  std::vector<Node> nodes_;
  std::vector<uint32_t> arg_ids_;
  std::vector<double> arg_partials_;
  std::vector<SplineAux> spline_aux_;
  std::vector<Value> scratch_;
  size_t n_params_ = 0;
  Value one_{0};
  bool has_one_ = false;

  mutable std::vector<double> adjoint_;
};

/// Expression sugar: a tape node with operator overloads, for readable
/// residual formulas and loss construction.
struct Expr {
  Tape* tape = nullptr;
  Value v;

  double value() const { return tape->val(v); }
};

inline Expr operator+(Expr a, Expr b) { return {a.tape, a.tape->add(a.v, b.v)}; }
inline Expr operator-(Expr a, Expr b) { return {a.tape, a.tape->sub(a.v, b.v)}; }
inline Expr operator*(Expr a, Expr b) { return {a.tape, a.tape->mul(a.v, b.v)}; }
inline Expr operator/(Expr a, Expr b) { return {a.tape, a.tape->div(a.v, b.v)}; }
inline Expr operator-(Expr a) { return {a.tape, a.tape->neg(a.v)}; }

inline Expr operator+(Expr a, double c) { return {a.tape, a.tape->affine(a.v, 1.0, c)}; }
inline Expr operator+(double c, Expr a) { return a + c; }
inline Expr operator-(Expr a, double c) { return a + (-c); }
inline Expr operator-(double c, Expr a) { return {a.tape, a.tape->affine(a.v, -1.0, c)}; }
inline Expr operator*(Expr a, double c) { return {a.tape, a.tape->affine(a.v, c, 0.0)}; }
inline Expr operator*(double c, Expr a) { return a * c; }
inline Expr operator/(Expr a, double c) { return a * (1.0 / c); }
inline Expr operator/(double c, Expr a) {
  return Expr{a.tape, a.tape->constant(c)} / a;
}

inline Expr tanh(Expr a) { return {a.tape, a.tape->tanh_(a.v)}; }
inline Expr sigmoid(Expr a) { return {a.tape, a.tape->sigmoid(a.v)}; }
inline Expr silu(Expr a) { return {a.tape, a.tape->silu(a.v)}; }
inline Expr sin(Expr a) { return {a.tape, a.tape->sin_(a.v)}; }
inline Expr cos(Expr a) { return {a.tape, a.tape->cos_(a.v)}; }
inline Expr exp(Expr a) { return {a.tape, a.tape->exp_(a.v)}; }
inline Expr log(Expr a) { return {a.tape, a.tape->log_(a.v)}; }
inline Expr square(Expr a) { return {a.tape, a.tape->square(a.v)}; }
inline Expr pow_int(Expr a, int n) { return {a.tape, a.tape->pow_int(a.v, n)}; }

// double overloads so numeric code can be written once and instantiated
// for both plain evaluation and tape recording.
inline double pow_int(double x, int n) { return ipow(x, n); }
inline double square(double x) { return x * x; }
inline double silu(double x) { return silu_value(x); }
inline double sigmoid(double x) { return sigmoid_value(x); }
inline double tanh(double x) { return std::tanh(x); }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }

}  // namespace pikan
