#include "pikan/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pikan {

// ---------------------------------------------------------------------------
// Klein-Gordon

double kg_exact(double x, double t) {
  return x * std::cos(5.0 * M_PI * t) + pow_int(x * t, 3);
}

// f = u_tt - u_xx + u^3 on the manufactured solution. Cross-checked against
// second differences of kg_exact in the test suite.
double kg_forcing(double x, double t) {
  const double c = std::cos(5.0 * M_PI * t);
  const double u = x * c + pow_int(x * t, 3);
  const double u_tt = -25.0 * M_PI * M_PI * x * c + 6.0 * pow_int(x, 3) * t;
  const double u_xx = 6.0 * x * pow_int(t, 3);
  return u_tt - u_xx + pow_int(u, 3);
}

Jet2d kg_exact_jet(double x, double t) {
  const double c = std::cos(5.0 * M_PI * t);
  const double s = std::sin(5.0 * M_PI * t);
  Jet2d j;
  j.v = x * c + pow_int(x * t, 3);
  j.dx = c + 3.0 * x * x * pow_int(t, 3);
  j.dy = -5.0 * M_PI * x * s + 3.0 * pow_int(x, 3) * t * t;
  j.dxx = 6.0 * x * pow_int(t, 3);
  j.dxy = -5.0 * M_PI * s + 9.0 * x * x * t * t;
  j.dyy = -25.0 * M_PI * M_PI * x * c + 6.0 * pow_int(x, 3) * t;
  return j;
}

// ---------------------------------------------------------------------------
// Helmholtz

double helmholtz_exact(double x, double y, double a1, double a2) {
  return std::sin(a1 * M_PI * x) * std::sin(a2 * M_PI * y);
}

double helmholtz_forcing(double x, double y, double k, double a1, double a2) {
  const double a = a1 * M_PI;
  const double b = a2 * M_PI;
  return (k * k - a * a - b * b) * helmholtz_exact(x, y, a1, a2);
}

Jet2d helmholtz_exact_jet(double x, double y, double a1, double a2) {
  const double a = a1 * M_PI;
  const double b = a2 * M_PI;
  const double sx = std::sin(a * x);
  const double cx = std::cos(a * x);
  const double sy = std::sin(b * y);
  const double cy = std::cos(b * y);
  Jet2d j;
  j.v = sx * sy;
  j.dx = a * cx * sy;
  j.dy = b * sx * cy;
  j.dxx = -a * a * sx * sy;
  j.dxy = a * b * cx * cy;
  j.dyy = -b * b * sx * sy;
  return j;
}

// ---------------------------------------------------------------------------
// Gauss-Hermite

Quadrature gauss_hermite(int n) {
  if (n < 1 || n > 512) {
    throw std::invalid_argument("gauss_hermite: node count out of range");
  }
  Quadrature q;
  q.nodes.resize(static_cast<size_t>(n));
  q.weights.resize(static_cast<size_t>(n));
  const double pim4 = 0.751125544464942;  // pi^(-1/4)
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    // Stock initial guesses, then Newton on the orthonormal recurrence
    // (which stays bounded for large n).
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) -
          1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * q.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * q.nodes[1];
    } else {
      z = 2.0 * z - q.nodes[static_cast<size_t>(i) - 2];
    }
    double pp = 1.0;
    for (int iter = 0; iter < 200; ++iter) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 -
             std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-14 * (1.0 + std::abs(z))) break;
    }
    q.nodes[static_cast<size_t>(i)] = z;
    q.nodes[static_cast<size_t>(n - 1 - i)] = -z;
    q.weights[static_cast<size_t>(i)] = 2.0 / (pp * pp);
    q.weights[static_cast<size_t>(n - 1 - i)] = q.weights[static_cast<size_t>(i)];
  }
  return q;
}

// ---------------------------------------------------------------------------
// Burgers reference

BurgersReference::BurgersReference(double nu, int quad_nodes)
    : nu_(nu), quad_(gauss_hermite(quad_nodes)) {
  if (!(nu > 0.0)) {
    throw std::invalid_argument("BurgersReference: nu must be positive");
  }
}

double BurgersReference::eval(double x, double t) const {
  if (t <= 0.0) {
    return -std::sin(M_PI * x);
  }
  // u(x,t) = -int sin(pi y) F(y) e^{-z^2} dz / int F(y) e^{-z^2} dz with
  // y = x - 2 sqrt(nu t) z and log F(y) = -cos(pi y) / (2 pi nu).
  const double s = 2.0 * std::sqrt(nu_ * t);
  const double c = 1.0 / (2.0 * M_PI * nu_);
  const size_t n = quad_.nodes.size();
  double g[512];
  double sn[512];
  double gmax = -HUGE_VAL;
  for (size_t i = 0; i < n; ++i) {
    const double y = x - s * quad_.nodes[i];
    g[i] = -std::cos(M_PI * y) * c;
    sn[i] = std::sin(M_PI * y);
    gmax = std::max(gmax, g[i]);
  }
  double num = 0.0;
  double den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double e = quad_.weights[i] * std::exp(g[i] - gmax);
    num += sn[i] * e;
    den += e;
  }
  return -num / den;
}

// ---------------------------------------------------------------------------
// Problem definitions

namespace {

Jet2e jet_to_expr(Tape& t, const JetNodes& j) {
  return Jet2e{Expr{&t, j.v},   Expr{&t, j.dx},  Expr{&t, j.dy},
               Expr{&t, j.dxx}, Expr{&t, j.dxy}, Expr{&t, j.dyy}};
}

}  // namespace

ProblemDef make_klein_gordon() {
  ProblemDef p;
  p.name = "klein_gordon";
  p.coord_names = {"x", "t"};
  p.lo = {0.0, 0.0};
  p.hi = {1.0, 1.0};
  p.tasks = {Task::Residual, Task::Initial, Task::Boundary};
  p.has_initial = true;
  p.initial_velocity = true;
  p.residual_tape = [](Tape& t, const JetNodes& u, double x, double tt) {
    return kg_residual(jet_to_expr(t, u), x, tt).v;
  };
  p.residual_plain = [](const Jet2d& u, double x, double tt) {
    return kg_residual(u, x, tt);
  };
  p.truth = kg_exact;
  p.exact_jet = kg_exact_jet;
  p.boundary_value = kg_exact;
  p.initial_value = [](double x) { return kg_exact(x, 0.0); };
  p.initial_velocity_value = [](double x) { return kg_exact_jet(x, 0.0).dy; };
  p.edges = {{0, 0.0}, {0, 1.0}};
  p.default_eval_grid = {256, 100};
  return p;
}

ProblemDef make_burgers(double nu, int quad_nodes) {
  ProblemDef p;
  p.name = "burgers";
  p.coord_names = {"x", "t"};
  p.lo = {-1.0, 0.0};
  p.hi = {1.0, 1.0};
  p.tasks = {Task::Residual, Task::Initial, Task::Boundary};
  p.has_initial = true;
  p.initial_velocity = false;
  p.burgers_ref = std::make_shared<BurgersReference>(nu, quad_nodes);
  auto ref = p.burgers_ref;
  p.residual_tape = [nu](Tape& t, const JetNodes& u, double, double) {
    return burgers_residual(jet_to_expr(t, u), nu).v;
  };
  p.residual_plain = [nu](const Jet2d& u, double, double) {
    return burgers_residual(u, nu);
  };
  p.truth = [ref](double x, double t) { return ref->eval(x, t); };
  p.boundary_value = [](double, double) { return 0.0; };
  p.initial_value = [](double x) { return -std::sin(M_PI * x); };
  p.edges = {{0, -1.0}, {0, 1.0}};
  p.default_eval_grid = {256, 100};
  return p;
}

ProblemDef make_helmholtz(double k, double a1, double a2) {
  ProblemDef p;
  p.name = "helmholtz";
  p.coord_names = {"x", "y"};
  p.lo = {-1.0, -1.0};
  p.hi = {1.0, 1.0};
  p.tasks = {Task::Residual, Task::Boundary};
  p.has_initial = false;
  p.residual_tape = [k, a1, a2](Tape& t, const JetNodes& u, double x,
                                double y) {
    return helmholtz_residual(jet_to_expr(t, u), x, y, k, a1, a2).v;
  };
  p.residual_plain = [k, a1, a2](const Jet2d& u, double x, double y) {
    return helmholtz_residual(u, x, y, k, a1, a2);
  };
  p.truth = [a1, a2](double x, double y) {
    return helmholtz_exact(x, y, a1, a2);
  };
  p.exact_jet = [a1, a2](double x, double y) {
    return helmholtz_exact_jet(x, y, a1, a2);
  };
  p.boundary_value = [](double, double) { return 0.0; };
  p.edges = {{0, -1.0}, {0, 1.0}, {1, -1.0}, {1, 1.0}};
  p.default_eval_grid = {256, 256};
  return p;
}

ProblemDef make_problem(const std::string& name) {
  if (name == "klein_gordon") return make_klein_gordon();
  if (name == "burgers") return make_burgers();
  if (name == "helmholtz") return make_helmholtz();
  throw std::invalid_argument("unknown problem: " + name);
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + uniform01(rng) * (hi - lo);
}

}  // namespace

PointBatch sample_batch(const ProblemDef& p, const BatchCounts& counts,
                        std::mt19937_64& rng) {
  PointBatch b;
  b.interior.resize(static_cast<size_t>(counts.interior));
  for (auto& pt : b.interior) {
    pt[0] = uniform_in(rng, p.lo[0], p.hi[0]);
    pt[1] = uniform_in(rng, p.lo[1], p.hi[1]);
  }

  const int n_edges = static_cast<int>(p.edges.size());
  const int per = counts.boundary / n_edges;
  const int rem = counts.boundary % n_edges;
  b.boundary.reserve(static_cast<size_t>(counts.boundary));
  for (int e = 0; e < n_edges; ++e) {
    const auto& edge = p.edges[static_cast<size_t>(e)];
    const int free_coord = 1 - edge.fixed_coord;
    const int n_here = per + (e < rem ? 1 : 0);
    for (int i = 0; i < n_here; ++i) {
      PointBatch::BcPoint bp{};
      bp.c[static_cast<size_t>(edge.fixed_coord)] = edge.fixed_value;
      bp.c[static_cast<size_t>(free_coord)] =
          uniform_in(rng, p.lo[static_cast<size_t>(free_coord)],
                     p.hi[static_cast<size_t>(free_coord)]);
      bp.target = p.boundary_value(bp.c[0], bp.c[1]);
      b.boundary.push_back(bp);
    }
  }

  if (p.has_initial) {
    b.initial.resize(static_cast<size_t>(counts.initial));
    for (auto& ip : b.initial) {
      ip.c[0] = uniform_in(rng, p.lo[0], p.hi[0]);
      ip.c[1] = p.lo[1];
      ip.value_target = p.initial_value(ip.c[0]);
      ip.velocity_target =
          p.initial_velocity ? p.initial_velocity_value(ip.c[0]) : 0.0;
    }
  }
  return b;
}

PointBatch sample_batch(const ProblemDef& p, const BatchCounts& counts,
                        uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_batch(p, counts, rng);
}

// ---------------------------------------------------------------------------
// Losses on one tape

namespace {

// Sum that respects the tape's 16-bit argument counts for large batches.
Value chunked_sum(Tape& t, const std::vector<Value>& xs) {
  constexpr size_t kChunk = 32768;
  if (xs.size() <= kChunk) return t.sum(xs);
  std::vector<Value> partials;
  for (size_t i = 0; i < xs.size(); i += kChunk) {
    const size_t n = std::min(kChunk, xs.size() - i);
    partials.push_back(t.sum({xs.data() + i, n}));
  }
  return t.sum(partials);
}

Value mean_node(Tape& t, const std::vector<Value>& xs) {
  return t.affine(chunked_sum(t, xs), 1.0 / static_cast<double>(xs.size()),
                  0.0);
}

}  // namespace

LossBundle loss_terms(Tape& t, const ProblemDef& p, const Approximator& net,
                      uint32_t base, const PointBatch& batch) {
  if (batch.interior.empty() || batch.boundary.empty() ||
      (p.has_initial && batch.initial.empty())) {
    throw std::invalid_argument("loss_terms: empty batch");
  }

  LossBundle bundle;
  std::vector<Value> sqs;
  sqs.reserve(batch.interior.size());
  for (const auto& pt : batch.interior) {
    const JetNodes u = net.record_jet(t, base, pt.data());
    const Value r = p.residual_tape(t, u, pt[0], pt[1]);
    sqs.push_back(t.square(r));
  }
  bundle.set(Task::Residual, mean_node(t, sqs));

  sqs.clear();
  for (const auto& bp : batch.boundary) {
    const Value u = net.record_scalar(t, base, bp.c.data());
    sqs.push_back(t.square(t.affine(u, 1.0, -bp.target)));
  }
  bundle.set(Task::Boundary, mean_node(t, sqs));

  if (p.has_initial) {
    sqs.clear();
    std::vector<Value> vel_sqs;
    for (const auto& ip : batch.initial) {
      if (p.initial_velocity) {
        const JetNodes u = net.record_jet(t, base, ip.c.data());
        sqs.push_back(t.square(t.affine(u.v, 1.0, -ip.value_target)));
        vel_sqs.push_back(
            t.square(t.affine(u.dy, 1.0, -ip.velocity_target)));
      } else {
        const Value u = net.record_scalar(t, base, ip.c.data());
        sqs.push_back(t.square(t.affine(u, 1.0, -ip.value_target)));
      }
    }
    Value ic = mean_node(t, sqs);
    if (!vel_sqs.empty()) {
      ic = t.add(ic, mean_node(t, vel_sqs));
    }
    bundle.set(Task::Initial, ic);
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// Evaluation grids

EvalGrid make_eval_grid(const ProblemDef& p, int n0, int n1) {
  if (n0 < 2 || n1 < 2) {
    throw std::invalid_argument("make_eval_grid: grid needs >= 2 per axis");
  }
  EvalGrid g;
  g.shape = {n0, n1};
  g.pts.resize(static_cast<size_t>(n0) * static_cast<size_t>(n1));
  g.truth.resize(g.pts.size());
  const double d0 = (p.hi[0] - p.lo[0]) / (n0 - 1);
  const double d1 = (p.hi[1] - p.lo[1]) / (n1 - 1);
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i0 = 0; i0 < n0; ++i0) {
      const size_t idx =
          static_cast<size_t>(i1) * static_cast<size_t>(n0) +
          static_cast<size_t>(i0);
      g.pts[idx] = {p.lo[0] + i0 * d0, p.lo[1] + i1 * d1};
    }
  }
#pragma omp parallel for schedule(static)
  for (long idx = 0; idx < static_cast<long>(g.pts.size()); ++idx) {
    const auto& pt = g.pts[static_cast<size_t>(idx)];
    g.truth[static_cast<size_t>(idx)] = p.truth(pt[0], pt[1]);
  }
  return g;
}

}  // namespace pikan
