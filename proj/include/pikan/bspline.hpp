#pragma once

#include <vector>

namespace pikan {

/// Uniform extended knot sequence on [domain_min, domain_max] carrying
/// G + degree B-spline basis functions of the given polynomial degree.
/// The grid is extended by `degree` equally spaced ghost knots on each
/// side, so interior basis functions are translates of one another.
struct KnotVector {
  double domain_min = -1.0;
  double domain_max = 1.0;
  int grid_size = 1;  // number of interior intervals G
  int degree = 0;     // polynomial degree k ("order" in grid configs)
  std::vector<double> knots;

  int num_basis() const { return grid_size + degree; }
  double spacing() const { return (domain_max - domain_min) / grid_size; }
};

// Largest supported degree; evaluation uses fixed-size stack workspaces.
inline constexpr int kMaxSplineDegree = 16;

/// Builds the extended uniform knot vector. Throws std::invalid_argument
/// on domain_min >= domain_max or G < 1 or k < 0.
KnotVector make_knots(double domain_min, double domain_max, int grid_size,
                      int degree);

/// Dense basis values B_i(x), i = 0..G+k-1, by the Cox-de Boor recursion.
/// x outside the domain is clamped to the nearest boundary.
std::vector<double> basis_values(const KnotVector& kv, double x);

/// Dense analytic derivatives d^m/dx^m B_i(x). Throws std::invalid_argument
/// if deriv_order > degree or deriv_order < 0.
std::vector<double> basis_derivatives(const KnotVector& kv, double x,
                                      int deriv_order);

/// Active-window evaluation used on hot paths: at any x exactly degree+1
/// basis functions are nonzero, with indices first..first+degree.
/// Rows 0..max_deriv of d hold the m-th derivatives of those functions;
/// rows above the degree are zero (the analytic derivative vanishes a.e.).
struct ActiveBasis {
  int first = 0;
  int count = 0;  // degree + 1
  // d[m][j] = m-th derivative of basis function first+j at x.
  double d[4][kMaxSplineDegree + 1] = {};
};

/// max_deriv must be in [0, 3].
void eval_active_basis(const KnotVector& kv, double x, int max_deriv,
                       ActiveBasis& out);

}  // namespace pikan
