#include "pikan/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pikan {

KnotVector make_knots(double domain_min, double domain_max, int grid_size,
                      int degree) {
  if (!(domain_min < domain_max)) {
    throw std::invalid_argument("make_knots: invalid domain (min >= max)");
  }
  if (grid_size < 1 || degree < 0) {
    throw std::invalid_argument("make_knots: invalid size (G < 1 or k < 0)");
  }
  if (degree > kMaxSplineDegree) {
    throw std::invalid_argument("make_knots: invalid size (k > " +
                                std::to_string(kMaxSplineDegree) + ")");
  }
  KnotVector kv;
  kv.domain_min = domain_min;
  kv.domain_max = domain_max;
  kv.grid_size = grid_size;
  kv.degree = degree;
  const double h = (domain_max - domain_min) / grid_size;
  kv.knots.resize(static_cast<size_t>(grid_size + 2 * degree) + 1);
  for (int j = 0; j < static_cast<int>(kv.knots.size()); ++j) {
    kv.knots[static_cast<size_t>(j)] = domain_min + (j - degree) * h;
  }
  return kv;
}

namespace {

// Knot span m with t_m <= x < t_{m+1}, restricted to the covered interval
// [t_k, t_{G+k}]. The top interval is treated as closed so x = domain_max
// lands in span G+k-1.
inline int find_span(const KnotVector& kv, double x) {
  const double h = kv.spacing();
  int cell = static_cast<int>((x - kv.domain_min) / h);
  cell = std::clamp(cell, 0, kv.grid_size - 1);
  return cell + kv.degree;
}

}  // namespace

void eval_active_basis(const KnotVector& kv, double x, int max_deriv,
                       ActiveBasis& out) {
  const int p = kv.degree;
  const double* U = kv.knots.data();
  x = std::clamp(x, kv.domain_min, kv.domain_max);
  const int span = find_span(kv, x);

  out.first = span - p;
  out.count = p + 1;
  for (int m = 0; m <= max_deriv; ++m) {
    std::fill(out.d[m], out.d[m] + p + 1, 0.0);
  }

  // Cox-de Boor triangle; ndu keeps both the basis values and the knot
  // differences needed for the derivative recurrences (NURBS book A2.3).
  double ndu[kMaxSplineDegree + 1][kMaxSplineDegree + 1];
  double left[kMaxSplineDegree + 1];
  double right[kMaxSplineDegree + 1];
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - U[span + 1 - j];
    right[j] = U[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= p; ++j) {
    out.d[0][j] = ndu[j][p];
  }
  const int n = std::min(max_deriv, p);
  if (n == 0) return;

  double a[2][kMaxSplineDegree + 1];
  for (int r = 0; r <= p; ++r) {
    int s1 = 0;
    int s2 = 1;
    a[0][0] = 1.0;
    for (int m = 1; m <= n; ++m) {
      double dv = 0.0;
      const int rm = r - m;
      const int pm = p - m;
      if (r >= m) {
        a[s2][0] = a[s1][0] / ndu[pm + 1][rm];
        dv = a[s2][0] * ndu[rm][pm];
      }
      const int j1 = (rm >= -1) ? 1 : -rm;
      const int j2 = (r - 1 <= pm) ? m - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pm + 1][rm + j];
        dv += a[s2][j] * ndu[rm + j][pm];
      }
      if (r <= pm) {
        a[s2][m] = -a[s1][m - 1] / ndu[pm + 1][r];
        dv += a[s2][m] * ndu[r][pm];
      }
      out.d[m][r] = dv;
      std::swap(s1, s2);
    }
  }
  double factor = static_cast<double>(p);
  for (int m = 1; m <= n; ++m) {
    for (int j = 0; j <= p; ++j) {
      out.d[m][j] *= factor;
    }
    factor *= static_cast<double>(p - m);
  }
}

std::vector<double> basis_values(const KnotVector& kv, double x) {
  ActiveBasis ab;
  eval_active_basis(kv, x, 0, ab);
  std::vector<double> dense(static_cast<size_t>(kv.num_basis()), 0.0);
  for (int j = 0; j < ab.count; ++j) {
    dense[static_cast<size_t>(ab.first + j)] = ab.d[0][j];
  }
  return dense;
}

std::vector<double> basis_derivatives(const KnotVector& kv, double x,
                                      int deriv_order) {
  if (deriv_order < 0 || deriv_order > kv.degree) {
    throw std::invalid_argument(
        "basis_derivatives: derivative order exceeds degree");
  }
  if (deriv_order > 3) {
    throw std::invalid_argument(
        "basis_derivatives: derivative order above 3 is not supported");
  }
  ActiveBasis ab;
  eval_active_basis(kv, x, deriv_order, ab);
  std::vector<double> dense(static_cast<size_t>(kv.num_basis()), 0.0);
  for (int j = 0; j < ab.count; ++j) {
    dense[static_cast<size_t>(ab.first + j)] = ab.d[deriv_order][j];
  }
  return dense;
}

}  // namespace pikan
