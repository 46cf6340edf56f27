#include "pikan/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "pikan/jet.hpp"

static_assert(std::endian::native == std::endian::little,
              "parameter blobs are little-endian");

namespace pikan {

namespace {

using json = nlohmann::json;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller, two fresh uniforms per draw so the stream is position-independent.
double normal01(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double xavier_uniform(std::mt19937_64& rng, int fan_in, int fan_out) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  return (2.0 * uniform01(rng) - 1.0) * limit;
}

void check_widths(const std::vector<int>& widths) {
  if (widths.size() < 2) {
    throw std::invalid_argument("network needs at least two widths");
  }
  for (int w : widths) {
    if (w < 1 || w > kMaxWidth) {
      throw std::invalid_argument("network width out of range [1, 256]");
    }
  }
  if (widths.front() != 2) {
    throw std::invalid_argument("network input width must be 2");
  }
}

// The two scalar forward paths (plain fp64 and tape recording) share one
// implementation via these backends so they perform bit-identical
// arithmetic. Accumulations are pairwise a*b sums in a fixed order,
// matching the tape's Dot node exactly.

struct PlainBackend {
  using T = double;
  const double* params;

  T param(size_t i) const { return params[i]; }
  T input(double x) const { return x; }
  T one() const { return 1.0; }
  T affine(T x, double a, double b) const { return a * x + b; }
  T silu0(T x) const { return x * sigmoid_value(x); }
  T tanh0(T x) const { return std::tanh(x); }
  T add(T a, T b) const { return a + b; }

  T spline0(const KnotVector&, const ActiveBasis& ab, const double* coeffs,
            T) const {
    double s = 0.0;
    for (int m = 0; m < ab.count; ++m) {
      s += coeffs[m] * ab.d[0][m];
    }
    return s;
  }

  double acc = 0.0;
  void begin_accum() { acc = 0.0; }
  void accum(T a, T b) { acc += a * b; }
  T end_accum() { return acc; }

  static double value_of(T x) { return x; }
};

struct TapeBackend {
  using T = Value;
  Tape* t;
  uint32_t base;
  const double* params;
  std::vector<Value> pairs;

  T param(size_t i) const { return Value{base + static_cast<uint32_t>(i)}; }
  T input(double x) const { return t->leaf(x); }
  T one() const { return t->one(); }
  T affine(T x, double a, double b) const { return t->affine(x, a, b); }
  T silu0(T x) const { return t->silu(x); }
  T tanh0(T x) const { return t->tanh_(x); }
  T add(T a, T b) const { return t->add(a, b); }

  T spline0(const KnotVector& kv, const ActiveBasis& ab, const double* coeffs,
            T x) {
    Value cs[kMaxSplineDegree + 1];
    const size_t coeff_base = static_cast<size_t>(coeffs - params);
    for (int m = 0; m < ab.count; ++m) {
      cs[m] = param(coeff_base + static_cast<size_t>(m));
    }
    return t->spline_combo(kv, 0, x, {cs, static_cast<size_t>(ab.count)},
                           ab.d[0], ab.d[1]);
  }

  void begin_accum() { pairs.clear(); }
  void accum(T a, T b) {
    pairs.push_back(a);
    pairs.push_back(b);
  }
  T end_accum() { return t->dot(pairs); }

  double value_of(T x) const { return t->val(x); }
};

template <class B>
typename B::T kan_forward_scalar(B& b, const KanNetwork& net,
                                 const double x[2]) {
  using T = typename B::T;
  const auto& widths = net.widths();
  const KnotVector& kv = net.knots();
  T cur[kMaxWidth];
  T nxt[kMaxWidth];
  for (int c = 0; c < 2; ++c) {
    cur[c] = b.affine(b.input(x[c]), net.input_scale()[static_cast<size_t>(c)],
                      net.input_shift()[static_cast<size_t>(c)]);
  }
  const int max_w = *std::max_element(widths.begin(), widths.end());
  std::vector<ActiveBasis> ab(static_cast<size_t>(max_w));
  T f0[kMaxWidth];
  for (int l = 0; l < net.num_layers(); ++l) {
    const int n_in = widths[static_cast<size_t>(l)];
    const int n_out = widths[static_cast<size_t>(l) + 1];
    const bool last = l + 1 == net.num_layers();
    for (int i = 0; i < n_in; ++i) {
      // row 1 feeds the spline node's x-partial, which carries gradients
      // through hidden-layer inputs
      eval_active_basis(kv, b.value_of(cur[i]), 1, ab[static_cast<size_t>(i)]);
      f0[i] = b.silu0(cur[i]);
    }
    for (int j = 0; j < n_out; ++j) {
      b.begin_accum();
      for (int i = 0; i < n_in; ++i) {
        // spline branch folded into the accumulator with unit weight
        const ActiveBasis& a = ab[static_cast<size_t>(i)];
        const double* cs = b.params + net.coeff_index(l, j, i, a.first);
        b.accum(b.spline0(kv, a, cs, cur[i]), b.one());
      }
      for (int i = 0; i < n_in; ++i) {
        b.accum(b.param(net.basis_weight_index(l, j, i)), f0[i]);
      }
      for (int i = 0; i < n_in; ++i) {
        b.accum(b.param(net.residual_index(l, j, i)), f0[i]);
      }
      const T pre = b.end_accum();
      nxt[j] = last ? pre : b.tanh0(pre);
    }
    for (int j = 0; j < n_out; ++j) cur[j] = nxt[j];
  }
  return cur[0];
}

template <class B>
typename B::T mlp_forward_scalar(B& b, const MlpNetwork& net,
                                 const double x[2]) {
  using T = typename B::T;
  const auto& widths = net.widths();
  T cur[kMaxWidth];
  T nxt[kMaxWidth];
  for (int c = 0; c < 2; ++c) cur[c] = b.input(x[c]);
  for (int l = 0; l < net.num_layers(); ++l) {
    const int n_in = widths[static_cast<size_t>(l)];
    const int n_out = widths[static_cast<size_t>(l) + 1];
    const bool last = l + 1 == net.num_layers();
    for (int j = 0; j < n_out; ++j) {
      b.begin_accum();
      for (int i = 0; i < n_in; ++i) {
        b.accum(b.param(net.weight_index(l, j, i)), cur[i]);
      }
      const T pre = b.add(b.end_accum(), b.param(net.bias_index(l, j)));
      nxt[j] = last ? pre : b.tanh0(pre);
    }
    for (int j = 0; j < n_out; ++j) cur[j] = nxt[j];
  }
  return cur[0];
}

}  // namespace

// ---------------------------------------------------------------------------
// KanNetwork

KanNetwork::KanNetwork(std::vector<int> widths, int grid_size, int degree,
                       std::array<double, 2> in_lo,
                       std::array<double, 2> in_hi)
    : widths_(std::move(widths)), in_lo_(in_lo), in_hi_(in_hi) {
  check_widths(widths_);
  knots_ = std::make_shared<KnotVector>(
      make_knots(-1.0, 1.0, grid_size, degree));
  const int nb = knots_->num_basis();
  layer_base_.resize(widths_.size());
  size_t offset = 0;
  for (size_t l = 0; l + 1 < widths_.size(); ++l) {
    layer_base_[l] = offset;
    offset += static_cast<size_t>(widths_[l]) *
              static_cast<size_t>(widths_[l + 1]) *
              static_cast<size_t>(nb + 2);
  }
  params_.assign(offset, 0.0);
  for (int c = 0; c < 2; ++c) {
    const size_t sc = static_cast<size_t>(c);
    if (!(in_lo_[sc] < in_hi_[sc])) {
      throw std::invalid_argument("input domain must have positive extent");
    }
    map_a_[sc] = 2.0 / (in_hi_[sc] - in_lo_[sc]);
    map_b_[sc] = -(in_hi_[sc] + in_lo_[sc]) / (in_hi_[sc] - in_lo_[sc]);
  }
}

size_t KanNetwork::expected_param_count(const std::vector<int>& widths,
                                        int grid_size, int degree) {
  size_t n = 0;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    n += static_cast<size_t>(widths[l]) * static_cast<size_t>(widths[l + 1]) *
         static_cast<size_t>(grid_size + degree + 2);
  }
  return n;
}

size_t KanNetwork::coeff_index(int l, int out, int in, int m) const {
  const size_t n_in = static_cast<size_t>(widths_[static_cast<size_t>(l)]);
  const size_t edge = static_cast<size_t>(out) * n_in + static_cast<size_t>(in);
  return layer_base_[static_cast<size_t>(l)] +
         edge * static_cast<size_t>(knots_->num_basis()) +
         static_cast<size_t>(m);
}

size_t KanNetwork::basis_weight_index(int l, int out, int in) const {
  const size_t n_in = static_cast<size_t>(widths_[static_cast<size_t>(l)]);
  const size_t n_edges = n_in * static_cast<size_t>(widths_[static_cast<size_t>(l) + 1]);
  const size_t edge = static_cast<size_t>(out) * n_in + static_cast<size_t>(in);
  return layer_base_[static_cast<size_t>(l)] +
         n_edges * static_cast<size_t>(knots_->num_basis()) + edge;
}

size_t KanNetwork::residual_index(int l, int out, int in) const {
  const size_t n_in = static_cast<size_t>(widths_[static_cast<size_t>(l)]);
  const size_t n_edges = n_in * static_cast<size_t>(widths_[static_cast<size_t>(l) + 1]);
  const size_t edge = static_cast<size_t>(out) * n_in + static_cast<size_t>(in);
  return layer_base_[static_cast<size_t>(l)] +
         n_edges * static_cast<size_t>(knots_->num_basis() + 1) + edge;
}

void KanNetwork::init_params(uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int nb = knots_->num_basis();
  const double coeff_std = 0.1 / std::sqrt(static_cast<double>(nb));
  for (int l = 0; l < num_layers(); ++l) {
    const int n_in = widths_[static_cast<size_t>(l)];
    const int n_out = widths_[static_cast<size_t>(l) + 1];
    const int n_edges = n_in * n_out;
    size_t p = layer_base_[static_cast<size_t>(l)];
    for (int e = 0; e < n_edges; ++e) {
      for (int m = 0; m < nb; ++m) {
        params_[p++] = coeff_std * normal01(rng);
      }
    }
    for (int e = 0; e < n_edges; ++e) {
      params_[p++] = xavier_uniform(rng, n_in, n_out);
    }
    for (int e = 0; e < n_edges; ++e) {
      params_[p++] = xavier_uniform(rng, n_in, n_out);
    }
  }
  init_seed_ = seed;
}

double KanNetwork::eval(const double x[2]) const {
  PlainBackend b{params_.data()};
  return kan_forward_scalar(b, *this, x);
}

Value KanNetwork::record_scalar(Tape& t, uint32_t base,
                                const double x[2]) const {
  TapeBackend b{&t, base, params_.data(), {}};
  return kan_forward_scalar(b, *this, x);
}

JetNodes KanNetwork::record_jet(Tape& t, uint32_t base,
                                const double x[2]) const {
  const KnotVector& kv = *knots_;
  const int cnt = kv.degree + 1;
  const Value one = t.one();
  const Value zero = t.constant(0.0);

  JetNodes cur[kMaxWidth];
  JetNodes nxt[kMaxWidth];
  for (int c = 0; c < 2; ++c) {
    const size_t sc = static_cast<size_t>(c);
    JetNodes& j = cur[c];
    j.v = t.affine(t.leaf(x[c]), map_a_[sc], map_b_[sc]);
    j.dx = c == 0 ? t.constant(map_a_[0]) : zero;
    j.dy = c == 1 ? t.constant(map_a_[1]) : zero;
    j.dxx = j.dxy = j.dyy = zero;
  }

  // Per-input-unit precomputations shared by every outgoing edge.
  struct InPre {
    Value f0, f1, f2;        // SiLU value and first two derivatives
    Value txx, txy, tyy;     // products of first partials
    Value mx, my;            // f1 * d1
    Value qxx, qxy, qyy;     // second partials of SiLU(x_i)
  };
  const size_t max_w = static_cast<size_t>(
      *std::max_element(widths_.begin(), widths_.end()));
  std::vector<ActiveBasis> ab(max_w);
  std::vector<InPre> pre(max_w);
  std::vector<Value> s0(max_w);
  std::vector<Value> s1(max_w);
  std::vector<Value> s2(max_w);
  std::vector<Value> pairs;
  Value cs[kMaxSplineDegree + 1];

  auto pval = [base](size_t i) {
    return Value{base + static_cast<uint32_t>(i)};
  };

  for (int l = 0; l < num_layers(); ++l) {
    const int n_in = widths_[static_cast<size_t>(l)];
    const int n_out = widths_[static_cast<size_t>(l) + 1];
    const bool last = l + 1 == num_layers();

    for (int i = 0; i < n_in; ++i) {
      const JetNodes& xin = cur[i];
      eval_active_basis(kv, t.val(xin.v), 3, ab[static_cast<size_t>(i)]);
      auto d = silu_derivs(Expr{&t, xin.v});
      InPre& p = pre[static_cast<size_t>(i)];
      p.f0 = d[0].v;
      p.f1 = d[1].v;
      p.f2 = d[2].v;
      p.txx = t.mul(xin.dx, xin.dx);
      p.txy = t.mul(xin.dx, xin.dy);
      p.tyy = t.mul(xin.dy, xin.dy);
      p.mx = t.mul(p.f1, xin.dx);
      p.my = t.mul(p.f1, xin.dy);
      const Value qxx[4] = {p.f2, p.txx, p.f1, xin.dxx};
      const Value qxy[4] = {p.f2, p.txy, p.f1, xin.dxy};
      const Value qyy[4] = {p.f2, p.tyy, p.f1, xin.dyy};
      p.qxx = t.dot({qxx, 4});
      p.qxy = t.dot({qxy, 4});
      p.qyy = t.dot({qyy, 4});
    }

    for (int j = 0; j < n_out; ++j) {
      for (int i = 0; i < n_in; ++i) {
        const ActiveBasis& a = ab[static_cast<size_t>(i)];
        const size_t cb = coeff_index(l, j, i, a.first);
        for (int m = 0; m < cnt; ++m) {
          cs[m] = pval(cb + static_cast<size_t>(m));
        }
        const std::span<const Value> csv{cs, static_cast<size_t>(cnt)};
        const Value xv = cur[i].v;
        s0[static_cast<size_t>(i)] = t.spline_combo(kv, 0, xv, csv, a.d[0], a.d[1]);
        s1[static_cast<size_t>(i)] = t.spline_combo(kv, 1, xv, csv, a.d[1], a.d[2]);
        s2[static_cast<size_t>(i)] = t.spline_combo(kv, 2, xv, csv, a.d[2], a.d[3]);
      }

      auto edge_pairs = [&](auto&& spline_part, auto&& silu_part) {
        pairs.clear();
        for (int i = 0; i < n_in; ++i) spline_part(i);
        for (int i = 0; i < n_in; ++i) {
          pairs.push_back(pval(basis_weight_index(l, j, i)));
          pairs.push_back(silu_part(i));
        }
        for (int i = 0; i < n_in; ++i) {
          pairs.push_back(pval(residual_index(l, j, i)));
          pairs.push_back(silu_part(i));
        }
        return t.dot(pairs);
      };

      const Value pv = edge_pairs(
          [&](int i) {
            pairs.push_back(s0[static_cast<size_t>(i)]);
            pairs.push_back(one);
          },
          [&](int i) { return pre[static_cast<size_t>(i)].f0; });
      const Value pdx = edge_pairs(
          [&](int i) {
            pairs.push_back(s1[static_cast<size_t>(i)]);
            pairs.push_back(cur[i].dx);
          },
          [&](int i) { return pre[static_cast<size_t>(i)].mx; });
      const Value pdy = edge_pairs(
          [&](int i) {
            pairs.push_back(s1[static_cast<size_t>(i)]);
            pairs.push_back(cur[i].dy);
          },
          [&](int i) { return pre[static_cast<size_t>(i)].my; });

      auto second = [&](Value InPre::*tcomp, Value InPre::*qcomp,
                        Value JetNodes::*d2comp) {
        pairs.clear();
        for (int i = 0; i < n_in; ++i) {
          pairs.push_back(s2[static_cast<size_t>(i)]);
          pairs.push_back(pre[static_cast<size_t>(i)].*tcomp);
          pairs.push_back(s1[static_cast<size_t>(i)]);
          pairs.push_back(cur[i].*d2comp);
        }
        for (int i = 0; i < n_in; ++i) {
          pairs.push_back(pval(basis_weight_index(l, j, i)));
          pairs.push_back(pre[static_cast<size_t>(i)].*qcomp);
        }
        for (int i = 0; i < n_in; ++i) {
          pairs.push_back(pval(residual_index(l, j, i)));
          pairs.push_back(pre[static_cast<size_t>(i)].*qcomp);
        }
        return t.dot(pairs);
      };
      const Value pdxx = second(&InPre::txx, &InPre::qxx, &JetNodes::dxx);
      const Value pdxy = second(&InPre::txy, &InPre::qxy, &JetNodes::dxy);
      const Value pdyy = second(&InPre::tyy, &InPre::qyy, &JetNodes::dyy);

      JetNodes& out = nxt[j];
      if (last) {
        out = {pv, pdx, pdy, pdxx, pdxy, pdyy};
      } else {
        auto td = tanh_derivs(Expr{&t, pv});
        const Value t1 = td[1].v;
        const Value t2 = td[2].v;
        out.v = td[0].v;
        out.dx = t.mul(t1, pdx);
        out.dy = t.mul(t1, pdy);
        const Value hxx[4] = {t2, t.mul(pdx, pdx), t1, pdxx};
        const Value hxy[4] = {t2, t.mul(pdx, pdy), t1, pdxy};
        const Value hyy[4] = {t2, t.mul(pdy, pdy), t1, pdyy};
        out.dxx = t.dot({hxx, 4});
        out.dxy = t.dot({hxy, 4});
        out.dyy = t.dot({hyy, 4});
      }
    }
    for (int j = 0; j < n_out; ++j) cur[j] = nxt[j];
  }
  return cur[0];
}

double KanNetwork::smoothness_penalty(double coeff,
                                      std::span<double> grad) const {
  if (coeff == 0.0) return 0.0;
  const int nb = knots_->num_basis();
  double penalty = 0.0;
  for (int l = 0; l < num_layers(); ++l) {
    const int n_edges = widths_[static_cast<size_t>(l)] *
                        widths_[static_cast<size_t>(l) + 1];
    for (int e = 0; e < n_edges; ++e) {
      const size_t cb = layer_base_[static_cast<size_t>(l)] +
                        static_cast<size_t>(e) * static_cast<size_t>(nb);
      for (int m = 1; m + 1 < nb; ++m) {
        const size_t i = cb + static_cast<size_t>(m);
        const double d2 = params_[i + 1] - 2.0 * params_[i] + params_[i - 1];
        penalty += d2 * d2;
        grad[i + 1] += coeff * 2.0 * d2;
        grad[i] -= coeff * 4.0 * d2;
        grad[i - 1] += coeff * 2.0 * d2;
      }
    }
  }
  return coeff * penalty;
}

std::string KanNetwork::header_json() const {
  json h;
  h["format"] = "pikan-params";
  h["kind"] = "kan";
  h["widths"] = widths_;
  h["grid_size"] = knots_->grid_size;
  h["order"] = knots_->degree;
  h["input_lo"] = in_lo_;
  h["input_hi"] = in_hi_;
  h["seed"] = init_seed_;
  h["count"] = params_.size();
  return h.dump();
}

// ---------------------------------------------------------------------------
// MlpNetwork

MlpNetwork::MlpNetwork(std::vector<int> widths) : widths_(std::move(widths)) {
  check_widths(widths_);
  layer_base_.resize(widths_.size());
  size_t offset = 0;
  for (size_t l = 0; l + 1 < widths_.size(); ++l) {
    layer_base_[l] = offset;
    offset += static_cast<size_t>(widths_[l]) *
                  static_cast<size_t>(widths_[l + 1]) +
              static_cast<size_t>(widths_[l + 1]);
  }
  params_.assign(offset, 0.0);
}

size_t MlpNetwork::expected_param_count(const std::vector<int>& widths) {
  size_t n = 0;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    n += static_cast<size_t>(widths[l]) * static_cast<size_t>(widths[l + 1]) +
         static_cast<size_t>(widths[l + 1]);
  }
  return n;
}

size_t MlpNetwork::weight_index(int l, int out, int in) const {
  const size_t n_in = static_cast<size_t>(widths_[static_cast<size_t>(l)]);
  return layer_base_[static_cast<size_t>(l)] +
         static_cast<size_t>(out) * n_in + static_cast<size_t>(in);
}

size_t MlpNetwork::bias_index(int l, int out) const {
  const size_t n_in = static_cast<size_t>(widths_[static_cast<size_t>(l)]);
  const size_t n_out = static_cast<size_t>(widths_[static_cast<size_t>(l) + 1]);
  return layer_base_[static_cast<size_t>(l)] + n_in * n_out +
         static_cast<size_t>(out);
}

void MlpNetwork::init_params(uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int l = 0; l < num_layers(); ++l) {
    const int n_in = widths_[static_cast<size_t>(l)];
    const int n_out = widths_[static_cast<size_t>(l) + 1];
    size_t p = layer_base_[static_cast<size_t>(l)];
    for (int e = 0; e < n_in * n_out; ++e) {
      params_[p++] = xavier_uniform(rng, n_in, n_out);
    }
    for (int j = 0; j < n_out; ++j) {
      params_[p++] = 0.0;
    }
  }
  init_seed_ = seed;
}

double MlpNetwork::eval(const double x[2]) const {
  PlainBackend b{params_.data()};
  return mlp_forward_scalar(b, *this, x);
}

Value MlpNetwork::record_scalar(Tape& t, uint32_t base,
                                const double x[2]) const {
  TapeBackend b{&t, base, params_.data(), {}};
  return mlp_forward_scalar(b, *this, x);
}

JetNodes MlpNetwork::record_jet(Tape& t, uint32_t base,
                                const double x[2]) const {
  const Value zero = t.constant(0.0);
  const Value unit = t.one();

  JetNodes cur[kMaxWidth];
  JetNodes nxt[kMaxWidth];
  for (int c = 0; c < 2; ++c) {
    JetNodes& j = cur[c];
    j.v = t.leaf(x[c]);
    j.dx = c == 0 ? unit : zero;
    j.dy = c == 1 ? unit : zero;
    j.dxx = j.dxy = j.dyy = zero;
  }

  std::vector<Value> pairs;
  auto pval = [base](size_t i) {
    return Value{base + static_cast<uint32_t>(i)};
  };

  for (int l = 0; l < num_layers(); ++l) {
    const int n_in = widths_[static_cast<size_t>(l)];
    const int n_out = widths_[static_cast<size_t>(l) + 1];
    const bool last = l + 1 == num_layers();
    for (int j = 0; j < n_out; ++j) {
      auto comb = [&](Value JetNodes::*comp) {
        pairs.clear();
        for (int i = 0; i < n_in; ++i) {
          pairs.push_back(pval(weight_index(l, j, i)));
          pairs.push_back(cur[i].*comp);
        }
        return t.dot(pairs);
      };
      const Value pv = t.add(comb(&JetNodes::v), pval(bias_index(l, j)));
      const Value pdx = comb(&JetNodes::dx);
      const Value pdy = comb(&JetNodes::dy);
      const Value pdxx = comb(&JetNodes::dxx);
      const Value pdxy = comb(&JetNodes::dxy);
      const Value pdyy = comb(&JetNodes::dyy);
      JetNodes& out = nxt[j];
      if (last) {
        out = {pv, pdx, pdy, pdxx, pdxy, pdyy};
      } else {
        auto td = tanh_derivs(Expr{&t, pv});
        const Value t1 = td[1].v;
        const Value t2 = td[2].v;
        out.v = td[0].v;
        out.dx = t.mul(t1, pdx);
        out.dy = t.mul(t1, pdy);
        const Value hxx[4] = {t2, t.mul(pdx, pdx), t1, pdxx};
        const Value hxy[4] = {t2, t.mul(pdx, pdy), t1, pdxy};
        const Value hyy[4] = {t2, t.mul(pdy, pdy), t1, pdyy};
        out.dxx = t.dot({hxx, 4});
        out.dxy = t.dot({hxy, 4});
        out.dyy = t.dot({hyy, 4});
      }
    }
    for (int j = 0; j < n_out; ++j) cur[j] = nxt[j];
  }
  return cur[0];
}

std::string MlpNetwork::header_json() const {
  json h;
  h["format"] = "pikan-params";
  h["kind"] = "mlp";
  h["widths"] = widths_;
  h["seed"] = init_seed_;
  h["count"] = params_.size();
  return h.dump();
}

// ---------------------------------------------------------------------------
// Save / load

void Approximator::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path + " for writing");
  }
  out << header_json() << '\n';
  out.write(reinterpret_cast<const char*>(params_.data()),
            static_cast<std::streamsize>(params_.size() * sizeof(double)));
  if (!out) {
    throw std::runtime_error("short write to " + path);
  }
}

std::unique_ptr<Approximator> load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::string header_line;
  std::getline(in, header_line);
  json h = json::parse(header_line);
  if (h.value("format", "") != "pikan-params") {
    throw std::runtime_error(path + ": not a parameter blob");
  }
  const std::string kind = h.at("kind").get<std::string>();
  const auto widths = h.at("widths").get<std::vector<int>>();
  std::unique_ptr<Approximator> net;
  if (kind == "kan") {
    net = std::make_unique<KanNetwork>(
        widths, h.at("grid_size").get<int>(), h.at("order").get<int>(),
        h.at("input_lo").get<std::array<double, 2>>(),
        h.at("input_hi").get<std::array<double, 2>>());
  } else if (kind == "mlp") {
    net = std::make_unique<MlpNetwork>(widths);
  } else {
    throw std::runtime_error(path + ": unknown network kind " + kind);
  }
  const size_t count = h.at("count").get<size_t>();
  if (count != net->param_count()) {
    throw std::runtime_error(path + ": parameter count mismatch");
  }
  in.read(reinterpret_cast<char*>(net->params().data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<size_t>(in.gcount()) != count * sizeof(double)) {
    throw std::runtime_error(path + ": truncated parameter blob");
  }
  return net;
}

}  // namespace pikan
