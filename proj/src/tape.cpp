#include "pikan/tape.hpp"

#include <algorithm>

namespace pikan {

void Tape::backward(std::span<const std::pair<Value, double>> seeds,
                    std::vector<double>& grad) const {
  adjoint_.assign(nodes_.size(), 0.0);
  for (const auto& [node, weight] : seeds) {
    adjoint_[node.id] += weight;
  }
  for (size_t i = nodes_.size(); i-- > 0;) {
    const double a = adjoint_[i];
    if (a == 0.0) continue;
    const Node& n = nodes_[i];
    const uint32_t* ids = arg_ids_.data() + n.first_arg;
    const double* ps = arg_partials_.data() + n.first_arg;
    for (uint16_t j = 0; j < n.n_args; ++j) {
      adjoint_[ids[j]] += a * ps[j];
    }
  }
  grad.assign(adjoint_.begin(), adjoint_.begin() + static_cast<long>(n_params_));
}

std::vector<double> Tape::replay_values() const {
  std::vector<double> v(nodes_.size(), 0.0);
  ActiveBasis ab;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    const uint32_t* ids = arg_ids_.data() + n.first_arg;
    auto x = [&](int j) { return v[ids[j]]; };
    switch (n.op) {
      case Op::Leaf:
      case Op::Const:
        v[i] = n.value;
        break;
      case Op::Add:
        v[i] = x(0) + x(1);
        break;
      case Op::Sub:
        v[i] = x(0) - x(1);
        break;
      case Op::Mul:
        v[i] = x(0) * x(1);
        break;
      case Op::Div:
        v[i] = x(0) / x(1);
        break;
      case Op::PowInt:
        v[i] = ipow(x(0), static_cast<int>(n.imm0));
        break;
      case Op::Tanh:
        v[i] = std::tanh(x(0));
        break;
      case Op::Sigmoid:
        v[i] = sigmoid_value(x(0));
        break;
      case Op::Silu:
        v[i] = x(0) * sigmoid_value(x(0));
        break;
      case Op::Sin:
        v[i] = std::sin(x(0));
        break;
      case Op::Cos:
        v[i] = std::cos(x(0));
        break;
      case Op::Exp:
        v[i] = std::exp(x(0));
        break;
      case Op::Log:
        v[i] = std::log(x(0));
        break;
      case Op::Square:
        v[i] = x(0) * x(0);
        break;
      case Op::Affine:
        v[i] = n.imm0 * x(0) + n.imm1;
        break;
      case Op::MinConst:
        v[i] = x(0) <= n.imm0 ? x(0) : n.imm0;
        break;
      case Op::Sum: {
        double s = 0.0;
        for (uint16_t j = 0; j < n.n_args; ++j) s += x(j);
        v[i] = s;
        break;
      }
      case Op::Dot: {
        double s = 0.0;
        for (uint16_t j = 0; j + 1 < n.n_args; j += 2) s += x(j) * x(j + 1);
        v[i] = s;
        break;
      }
      case Op::Spline: {
        const SplineAux& aux = spline_aux_[static_cast<size_t>(n.imm0)];
        eval_active_basis(*aux.kv, x(0), aux.deriv, ab);
        double s = 0.0;
        for (uint16_t j = 1; j < n.n_args; ++j) {
          s += x(j) * ab.d[aux.deriv][j - 1];
        }
        v[i] = s;
        break;
      }
    }
  }
  return v;
}

}  // namespace pikan
