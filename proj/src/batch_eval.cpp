#include "pikan/batch_eval.hpp"

#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pikan {

EpochEval eval_epoch_single_tape(const ProblemDef& p, const Approximator& net,
                                 const PointBatch& batch,
                                 const std::array<double, kNumTasks>& weights) {
  Tape t;
  t.add_params(net.params());
  const LossBundle bundle = loss_terms(t, p, net, 0, batch);

  EpochEval out;
  std::vector<std::pair<Value, double>> seeds;
  for (int j = 0; j < kNumTasks; ++j) {
    if (!bundle.has(static_cast<Task>(j))) continue;
    out.has[static_cast<size_t>(j)] = true;
    out.loss[static_cast<size_t>(j)] = t.val(bundle.term(static_cast<Task>(j)));
    seeds.emplace_back(bundle.term(static_cast<Task>(j)),
                       weights[static_cast<size_t>(j)]);
  }
  t.backward(seeds, out.grad_theta);
  return out;
}

namespace {

struct Slice {
  size_t begin;
  size_t end;
};

Slice shard_slice(size_t n, int shards, int s) {
  const size_t b = n * static_cast<size_t>(s) / static_cast<size_t>(shards);
  const size_t e =
      n * (static_cast<size_t>(s) + 1) / static_cast<size_t>(shards);
  return {b, e};
}

}  // namespace

EpochEvaluator::EpochEvaluator(int shards) : shards_(shards) {
  if (shards < 1) {
    throw std::invalid_argument("EpochEvaluator: shards must be >= 1");
  }
  int n_threads = 1;
#ifdef _OPENMP
  n_threads = omp_get_max_threads();
#endif
  tapes_.resize(static_cast<size_t>(n_threads));
  shard_grads_.resize(static_cast<size_t>(shards));
  shard_sums_.resize(static_cast<size_t>(shards));
}

EpochEval EpochEvaluator::run(const ProblemDef& p, const Approximator& net,
                              const PointBatch& batch,
                              const std::array<double, kNumTasks>& weights) {
  if (batch.interior.empty() || batch.boundary.empty() ||
      (p.has_initial && batch.initial.empty())) {
    throw std::invalid_argument("EpochEvaluator: empty batch");
  }
  const double n_r = static_cast<double>(batch.interior.size());
  const double n_bc = static_cast<double>(batch.boundary.size());
  const double n_ic = static_cast<double>(
      batch.initial.empty() ? 1 : batch.initial.size());
  const double w_r = weights[static_cast<size_t>(Task::Residual)];
  const double w_ic = weights[static_cast<size_t>(Task::Initial)];
  const double w_bc = weights[static_cast<size_t>(Task::Boundary)];

#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < shards_; ++s) {
    int tid = 0;
#ifdef _OPENMP
    tid = omp_get_thread_num();
#endif
    Tape& t = tapes_[static_cast<size_t>(tid)];
    t.reset();
    t.add_params(net.params());

    std::vector<Value> sqs;
    std::vector<std::pair<Value, double>> seeds;

    const Slice si = shard_slice(batch.interior.size(), shards_, s);
    sqs.clear();
    for (size_t i = si.begin; i < si.end; ++i) {
      const auto& pt = batch.interior[i];
      const JetNodes u = net.record_jet(t, 0, pt.data());
      const Value r = p.residual_tape(t, u, pt[0], pt[1]);
      sqs.push_back(t.square(r));
    }
    const Value sum_r = t.sum(sqs);
    seeds.emplace_back(sum_r, w_r / n_r);

    const Slice sb = shard_slice(batch.boundary.size(), shards_, s);
    sqs.clear();
    for (size_t i = sb.begin; i < sb.end; ++i) {
      const auto& bp = batch.boundary[i];
      const Value u = net.record_scalar(t, 0, bp.c.data());
      sqs.push_back(t.square(t.affine(u, 1.0, -bp.target)));
    }
    const Value sum_bc = t.sum(sqs);
    seeds.emplace_back(sum_bc, w_bc / n_bc);

    Value sum_icv{0};
    Value sum_icd{0};
    bool has_ic = !batch.initial.empty();
    if (has_ic) {
      const Slice sc = shard_slice(batch.initial.size(), shards_, s);
      sqs.clear();
      std::vector<Value> vel_sqs;
      for (size_t i = sc.begin; i < sc.end; ++i) {
        const auto& ip = batch.initial[i];
        if (p.initial_velocity) {
          const JetNodes u = net.record_jet(t, 0, ip.c.data());
          sqs.push_back(t.square(t.affine(u.v, 1.0, -ip.value_target)));
          vel_sqs.push_back(
              t.square(t.affine(u.dy, 1.0, -ip.velocity_target)));
        } else {
          const Value u = net.record_scalar(t, 0, ip.c.data());
          sqs.push_back(t.square(t.affine(u, 1.0, -ip.value_target)));
        }
      }
      sum_icv = t.sum(sqs);
      sum_icd = t.sum(vel_sqs);
      seeds.emplace_back(sum_icv, w_ic / n_ic);
      seeds.emplace_back(sum_icd, w_ic / n_ic);
    }

    t.backward(seeds, shard_grads_[static_cast<size_t>(s)]);
    shard_sums_[static_cast<size_t>(s)] = {
        t.val(sum_r), t.val(sum_bc),
        has_ic ? t.val(sum_icv) : 0.0,
        has_ic ? t.val(sum_icd) : 0.0};
  }

  // Fixed-order reduction keeps the result independent of scheduling.
  EpochEval out;
  out.grad_theta.assign(net.param_count(), 0.0);
  double tr = 0.0, tbc = 0.0, ticv = 0.0, ticd = 0.0;
  for (int s = 0; s < shards_; ++s) {
    const auto& sums = shard_sums_[static_cast<size_t>(s)];
    tr += sums[0];
    tbc += sums[1];
    ticv += sums[2];
    ticd += sums[3];
    const auto& g = shard_grads_[static_cast<size_t>(s)];
    for (size_t i = 0; i < out.grad_theta.size(); ++i) {
      out.grad_theta[i] += g[i];
    }
  }
  out.has[static_cast<size_t>(Task::Residual)] = true;
  out.loss[static_cast<size_t>(Task::Residual)] = tr / n_r;
  out.has[static_cast<size_t>(Task::Boundary)] = true;
  out.loss[static_cast<size_t>(Task::Boundary)] = tbc / n_bc;
  if (!batch.initial.empty()) {
    out.has[static_cast<size_t>(Task::Initial)] = true;
    out.loss[static_cast<size_t>(Task::Initial)] = ticv / n_ic + ticd / n_ic;
  }
  return out;
}

}  // namespace pikan
