#pragma once

#include <array>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "pikan/batch_eval.hpp"
#include "pikan/dbaw.hpp"
#include "pikan/network.hpp"
#include "pikan/problems.hpp"

namespace pikan {

/// Bias-corrected Adam over one flat parameter vector.
class AdamState {
 public:
  AdamState(size_t n, double lr)
      : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

  double lr() const { return lr_; }
  long steps() const { return steps_; }

  /// Applies one update in place. Returns false (and leaves params and
  /// moments untouched) if any gradient entry is non-finite.
  bool step(std::span<double> params, std::span<const double> grad);

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

 private:
  double lr_;
  long steps_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

struct WeightingConfig {
  enum class Mode { Fixed, Dbaw };
  Mode mode = Mode::Dbaw;
  std::array<double, kNumTasks> fixed_weights{1.0, 1.0, 1.0};
  double gamma_max = 100.0;
  double gamma_min = 1.0;
  double alpha = 1e-4;
};

struct TrainConfig {
  long epochs = 50000;
  double lr_theta = 1e-3;
  double lr_sigma = 1e-3;
  BatchCounts counts;
  uint64_t seed = 1;
  long eval_every = 100;
  int shards = 64;
  double grad_clip = 0.0;       // global norm; 0 disables
  double smooth_penalty = 0.0;  // KAN spline second-difference penalty
};

struct TrainRow {
  long epoch = 0;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  std::array<double, kNumTasks> lambda{};  // NaN for absent tasks
  std::array<double, kNumTasks> loss{};    // NaN for absent tasks
  double total = 0.0;
  double val_l2 = std::numeric_limits<double>::quiet_NaN();
};

struct TrainRecord {
  std::vector<TrainRow> rows;
  long best_epoch = 0;
  double best_l2 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> best_params;
  double final_l2 = std::numeric_limits<double>::quiet_NaN();
  std::vector<long> flagged_epochs;  // steps rejected for non-finite grads
  DbawState sigma;                   // final state (dbaw mode)
};

/// Raised when the loss itself turns non-finite; carries the epoch.
struct TrainAbort : std::runtime_error {
  long epoch;
  explicit TrainAbort(long e)
      : std::runtime_error("non-finite loss at epoch " + std::to_string(e)),
        epoch(e) {}
};

using RowSink = std::function<void(const TrainRow&)>;

/// One training run: per epoch, a fresh uniform batch, one evaluation of
/// the losses and gradients, and paired Adam updates of theta and (in
/// dbaw mode) the log sigmas from the same evaluation. Validation
/// relative-L2 is computed on the fixed grid every eval_every epochs and
/// at the last epoch; the best snapshot is by lowest validation error.
/// The sink, when set, receives each row as it is produced.
TrainRecord train(const ProblemDef& problem, Approximator& net,
                  const WeightingConfig& weighting, const TrainConfig& config,
                  const EvalGrid* eval_grid, const RowSink& sink = nullptr);

/// ||pred - truth||_2 / ||truth||_2. Throws on length mismatch, empty
/// input, or identically zero truth.
double relative_l2(std::span<const double> pred, std::span<const double> truth);

/// Plain forward evaluation over a grid, parallelized over points.
std::vector<double> eval_on_grid(const Approximator& net, const EvalGrid& grid);

}  // namespace pikan
