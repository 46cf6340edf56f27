#pragma once

#include <array>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "pikan/dbaw.hpp"
#include "pikan/jet.hpp"
#include "pikan/network.hpp"
#include "pikan/tape.hpp"

namespace pikan {

// ---------------------------------------------------------------------------
// Klein-Gordon on [0,1]^2: u_tt - u_xx + u^3 = f with the manufactured
// solution u = x cos(5 pi t) + (x t)^3; f, ICs and BCs derive from it.

double kg_exact(double x, double t);
double kg_forcing(double x, double t);
Jet2d kg_exact_jet(double x, double t);

template <class T>
T kg_residual(const Jet2<T>& u, double x, double t) {
  return u.dyy - u.dxx + pow_int(u.v, 3) - kg_forcing(x, t);
}

// ---------------------------------------------------------------------------
// Viscous Burgers on [-1,1] x [0,1]: u_t + u u_x = nu u_xx with
// u(x,0) = -sin(pi x) and u(+-1,t) = 0.

inline constexpr double kBurgersNuDefault = 0.01 / M_PI;

template <class T>
T burgers_residual(const Jet2<T>& u, double nu) {
  return u.dy + u.v * u.dx - nu * u.dxx;
}

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for integrals of f(z) exp(-z^2) over the real line.
Quadrature gauss_hermite(int n);

/// Cole-Hopf closed form evaluated by Gauss-Hermite quadrature; the ground
/// truth for the Burgers relative-L2 metric. Exponents are max-subtracted
/// so the quotient of integrals never underflows to 0/0.
class BurgersReference {
 public:
  explicit BurgersReference(double nu, int quad_nodes = 128);
  double eval(double x, double t) const;
  double nu() const { return nu_; }

 private:
  double nu_;
  Quadrature quad_;
};

// ---------------------------------------------------------------------------
// Helmholtz on [-1,1]^2: laplacian(u) + k^2 u = q with the exact solution
// u = sin(a1 pi x) sin(a2 pi y) and q = (k^2 - (a1 pi)^2 - (a2 pi)^2) u.

double helmholtz_exact(double x, double y, double a1, double a2);
double helmholtz_forcing(double x, double y, double k, double a1, double a2);
Jet2d helmholtz_exact_jet(double x, double y, double a1, double a2);

template <class T>
T helmholtz_residual(const Jet2<T>& u, double x, double y, double k,
                     double a1, double a2) {
  return u.dxx + u.dyy + (k * k) * u.v - helmholtz_forcing(x, y, k, a1, a2);
}

// ---------------------------------------------------------------------------
// Problem definitions

/// A benchmark PDE: domain, residual operator, ground truth, IC/BC data and
/// the task list its losses contribute. Immutable once built; all callables
/// are pure.
struct ProblemDef {
  std::string name;
  std::array<std::string, 2> coord_names;
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};
  std::vector<Task> tasks;
  bool has_initial = false;
  bool initial_velocity = false;

  std::function<Value(Tape&, const JetNodes&, double, double)> residual_tape;
  std::function<double(const Jet2d&, double, double)> residual_plain;

  std::function<double(double, double)> truth;
  std::function<Jet2d(double, double)> exact_jet;  // null for Burgers

  std::function<double(double, double)> boundary_value;
  std::function<double(double)> initial_value;
  std::function<double(double)> initial_velocity_value;

  struct Edge {
    int fixed_coord;
    double fixed_value;
  };
  std::vector<Edge> edges;

  std::shared_ptr<const BurgersReference> burgers_ref;

  std::array<int, 2> default_eval_grid{256, 100};
};

ProblemDef make_klein_gordon();
ProblemDef make_burgers(double nu = kBurgersNuDefault, int quad_nodes = 128);
ProblemDef make_helmholtz(double k = 1.0, double a1 = 1.0, double a2 = 4.0);
ProblemDef make_problem(const std::string& name);

// ---------------------------------------------------------------------------
// Sampling and losses

struct BatchCounts {
  int interior = 5000;
  int boundary = 400;
  int initial = 400;
};

struct PointBatch {
  struct BcPoint {
    std::array<double, 2> c;
    double target;
  };
  struct IcPoint {
    std::array<double, 2> c;
    double value_target;
    double velocity_target;
  };
  std::vector<std::array<double, 2>> interior;
  std::vector<BcPoint> boundary;
  std::vector<IcPoint> initial;
};

/// Uniform i.i.d. interior points; boundary points share the edges equally
/// (remainders go to the leading edges) and sit on their edge exactly;
/// initial points sit at t = t0. Deterministic given the engine state.
PointBatch sample_batch(const ProblemDef& p, const BatchCounts& counts,
                        std::mt19937_64& rng);
PointBatch sample_batch(const ProblemDef& p, const BatchCounts& counts,
                        uint64_t seed);

/// Records the per-task mean-squared losses for the whole batch on one
/// tape. The network's parameters must already be registered at `base`.
/// The initial loss adds the velocity mismatch term when the problem
/// specifies one. Throws on an empty batch for a required task.
LossBundle loss_terms(Tape& t, const ProblemDef& p, const Approximator& net,
                      uint32_t base, const PointBatch& batch);

// ---------------------------------------------------------------------------
// Evaluation grids

struct EvalGrid {
  std::array<int, 2> shape{};
  std::vector<std::array<double, 2>> pts;  // first coordinate varies fastest
  std::vector<double> truth;
};

/// Uniform grid over the problem domain including the endpoints, with the
/// ground truth evaluated at every node.
EvalGrid make_eval_grid(const ProblemDef& p, int n0, int n1);

}  // namespace pikan
