#pragma once

#include <array>
#include <vector>

#include "pikan/problems.hpp"

namespace pikan {

/// Per-epoch losses and the theta gradient of the weighted objective
/// sum_j w_j L_j (the weights are the lambdas or the fixed weights; they
/// are constants with respect to theta).
struct EpochEval {
  std::array<double, kNumTasks> loss{0.0, 0.0, 0.0};
  std::array<bool, kNumTasks> has{false, false, false};
  std::vector<double> grad_theta;
};

/// Reference implementation: one tape for the whole batch, one backward
/// pass. Kept serial; the sharded evaluator is validated against it.
EpochEval eval_epoch_single_tape(const ProblemDef& p, const Approximator& net,
                                 const PointBatch& batch,
                                 const std::array<double, kNumTasks>& weights);

/// OpenMP evaluator: collocation points are split into a fixed number of
/// contiguous shards, each recorded and differentiated on its own tape,
/// then reduced in shard order. The shard layout depends only on the
/// shard count, never on the thread count, so results are bit-identical
/// for any number of threads. Workspaces persist across epochs.
class EpochEvaluator {
 public:
  explicit EpochEvaluator(int shards);

  int shards() const { return shards_; }

  EpochEval run(const ProblemDef& p, const Approximator& net,
                const PointBatch& batch,
                const std::array<double, kNumTasks>& weights);

 private:
  int shards_;
  std::vector<Tape> tapes_;  // one per thread
  std::vector<std::vector<double>> shard_grads_;
  std::vector<std::array<double, 4>> shard_sums_;
};

}  // namespace pikan
