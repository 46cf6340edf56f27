#pragma once

#include <array>
#include <optional>
#include <string>

#include "pikan/tape.hpp"

namespace pikan {

/// Loss tasks of the physics-informed objective. Time-dependent problems
/// use all three; pure boundary-value problems drop Initial.
enum class Task : int { Residual = 0, Initial = 1, Boundary = 2 };
inline constexpr int kNumTasks = 3;

const char* task_name(Task t);  // "r", "ic", "bc"

/// Per-task scalar loss nodes on a tape (means of squares, so each is
/// nonnegative). Absent tasks are disengaged.
struct LossBundle {
  std::array<std::optional<Value>, kNumTasks> terms;

  bool has(Task t) const { return terms[static_cast<size_t>(t)].has_value(); }
  Value term(Task t) const { return *terms[static_cast<size_t>(t)]; }
  void set(Task t, Value v) { terms[static_cast<size_t>(t)] = v; }
};

/// Trainable log-variances plus the decay schedule of the weight bound.
/// log_sigma starts at 0 for every active task.
struct DbawState {
  std::array<double, kNumTasks> log_sigma{0.0, 0.0, 0.0};
  std::array<bool, kNumTasks> active{false, false, false};
  double gamma_max = 100.0;
  double gamma_min = 1.0;
  double alpha = 1e-4;
  double epsilon = 1e-12;

  void activate(Task t) { active[static_cast<size_t>(t)] = true; }
  bool valid() const {
    return gamma_max > gamma_min && gamma_min > 0.0 && alpha > 0.0 &&
           epsilon > 0.0;
  }
};

/// gamma(t) = gamma_max * exp(-alpha t) + gamma_min; strictly decreasing,
/// bounded in (gamma_min, gamma_max + gamma_min].
double gamma_bound(long epoch, const DbawState& s);

/// lambda_j = min(1 / (sigma_j^2 + 1/gamma(t) + eps), gamma(t)) with
/// sigma_j^2 = exp(2 log sigma_j). Always 0 < lambda_j <= gamma(t).
/// Entries for inactive tasks are 0.
std::array<double, kNumTasks> adaptive_weights(const DbawState& s, long epoch);

/// Tape nodes holding the log sigma values, one per active task.
struct SigmaNodes {
  std::array<std::optional<Value>, kNumTasks> nodes;
};

/// Binds the active tasks' log sigma values to parameter leaves already
/// registered on a tape, starting at `base`, in Residual, Initial,
/// Boundary order. The caller must have placed the matching values there
/// (add_params over [theta..., log_sigma...] or a log-sigma-only tape).
SigmaNodes bind_log_sigma(const DbawState& s, uint32_t base);

/// Adaptive objective sum_j [lambda_j L_j + log(sigma_j^2 + 1/gamma(t))].
/// Gradients reach both the network parameters (through L_j) and the
/// log sigma leaves (through lambda's smooth branch and the regularizer);
/// gamma(t) is a constant of the schedule. When the clamp binds, lambda
/// contributes no gradient to log sigma. Throws on a bundle task that has
/// no log sigma entry.
Value adaptive_total_loss(Tape& t, const LossBundle& bundle,
                          const SigmaNodes& sigma, const DbawState& s,
                          long epoch);

/// Fixed-weight objective sum_j w_j L_j (the plain PINN/PIKAN baseline).
Value fixed_total_loss(Tape& t, const LossBundle& bundle,
                       const std::array<double, kNumTasks>& weights);

/// Unclamped uncertainty objective sum_j [L_j/(2 sigma_j^2)
/// + log(sigma_j)] kept for ablation.
Value uncertainty_nll_loss(Tape& t, const LossBundle& bundle,
                           const SigmaNodes& sigma);

}  // namespace pikan
