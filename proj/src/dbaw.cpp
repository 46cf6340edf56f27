#include "pikan/dbaw.hpp"

#include <cmath>
#include <stdexcept>

namespace pikan {

const char* task_name(Task t) {
  switch (t) {
    case Task::Residual: return "r";
    case Task::Initial: return "ic";
    case Task::Boundary: return "bc";
  }
  return "?";
}

double gamma_bound(long epoch, const DbawState& s) {
  return s.gamma_max * std::exp(-s.alpha * static_cast<double>(epoch)) +
         s.gamma_min;
}

std::array<double, kNumTasks> adaptive_weights(const DbawState& s,
                                               long epoch) {
  const double g = gamma_bound(epoch, s);
  std::array<double, kNumTasks> w{0.0, 0.0, 0.0};
  for (int j = 0; j < kNumTasks; ++j) {
    if (!s.active[static_cast<size_t>(j)]) continue;
    const double sig2 =
        std::exp(2.0 * s.log_sigma[static_cast<size_t>(j)]);
    const double smooth = 1.0 / (sig2 + 1.0 / g + s.epsilon);
    w[static_cast<size_t>(j)] = smooth <= g ? smooth : g;
  }
  return w;
}

SigmaNodes bind_log_sigma(const DbawState& s, uint32_t base) {
  SigmaNodes out;
  uint32_t next = base;
  for (int j = 0; j < kNumTasks; ++j) {
    if (s.active[static_cast<size_t>(j)]) {
      out.nodes[static_cast<size_t>(j)] = Value{next++};
    }
  }
  return out;
}

namespace {

Value require_sigma(const SigmaNodes& sigma, int j) {
  if (!sigma.nodes[static_cast<size_t>(j)].has_value()) {
    throw std::invalid_argument(
        std::string("missing-task: no log sigma entry for task ") +
        task_name(static_cast<Task>(j)));
  }
  return *sigma.nodes[static_cast<size_t>(j)];
}

}  // namespace

Value adaptive_total_loss(Tape& t, const LossBundle& bundle,
                          const SigmaNodes& sigma, const DbawState& s,
                          long epoch) {
  const double g = gamma_bound(epoch, s);
  std::optional<Expr> total;
  for (int j = 0; j < kNumTasks; ++j) {
    if (!bundle.has(static_cast<Task>(j))) continue;
    const Expr ls{&t, require_sigma(sigma, j)};
    const Expr loss{&t, bundle.term(static_cast<Task>(j))};
    const Expr sig2 = exp(2.0 * ls);
    const Expr smooth = 1.0 / (sig2 + (1.0 / g + s.epsilon));
    const Expr lam{&t, t.min_const(smooth.v, g)};
    const Expr term = lam * loss + log(sig2 + 1.0 / g);
    total = total ? *total + term : term;
  }
  if (!total) {
    throw std::invalid_argument("adaptive_total_loss: empty bundle");
  }
  return total->v;
}

Value fixed_total_loss(Tape& t, const LossBundle& bundle,
                       const std::array<double, kNumTasks>& weights) {
  std::optional<Expr> total;
  for (int j = 0; j < kNumTasks; ++j) {
    if (!bundle.has(static_cast<Task>(j))) continue;
    const Expr term =
        weights[static_cast<size_t>(j)] *
        Expr{&t, bundle.term(static_cast<Task>(j))};
    total = total ? *total + term : term;
  }
  if (!total) {
    throw std::invalid_argument("fixed_total_loss: empty bundle");
  }
  return total->v;
}

Value uncertainty_nll_loss(Tape& t, const LossBundle& bundle,
                           const SigmaNodes& sigma) {
  std::optional<Expr> total;
  for (int j = 0; j < kNumTasks; ++j) {
    if (!bundle.has(static_cast<Task>(j))) continue;
    const Expr ls{&t, require_sigma(sigma, j)};
    const Expr loss{&t, bundle.term(static_cast<Task>(j))};
    const Expr sig2 = exp(2.0 * ls);
    const Expr term = loss / (2.0 * sig2) + 0.5 * log(sig2);
    total = total ? *total + term : term;
  }
  if (!total) {
    throw std::invalid_argument("uncertainty_nll_loss: empty bundle");
  }
  return total->v;
}

}  // namespace pikan
