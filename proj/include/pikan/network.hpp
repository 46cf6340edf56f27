#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pikan/bspline.hpp"
#include "pikan/tape.hpp"

namespace pikan {

// Widths are capped so evaluation workspaces can live on the stack.
inline constexpr int kMaxWidth = 256;

/// Jet of tape nodes produced by a network forward pass: the output value
/// and its first/second partials with respect to the two raw inputs.
struct JetNodes {
  Value v, dx, dy, dxx, dxy, dyy;
};

/// Common surface of the two approximators u_theta. Parameters live in one
/// flat fp64 vector whose layout is fixed by the concrete class; networks
/// are read-only during forward evaluation and may be shared across
/// threads, with mutation confined to the optimizer step.
class Approximator {
 public:
  virtual ~Approximator() = default;

  virtual std::string kind() const = 0;
  virtual const std::vector<int>& widths() const = 0;

  size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  virtual void init_params(uint64_t seed) = 0;
  uint64_t init_seed() const { return init_seed_; }

  /// Plain fp64 forward evaluation (no tape). Thread-safe.
  virtual double eval(const double x[2]) const = 0;

  /// Scalar forward on a tape whose leading leaves are this network's
  /// parameters starting at `base`. Bit-identical to eval() and to the
  /// v component of record_jet().
  virtual Value record_scalar(Tape& t, uint32_t base,
                              const double x[2]) const = 0;

  /// Second-order jet forward on a tape; every component is a node, so
  /// residuals built from the jet are parameter-differentiable.
  virtual JetNodes record_jet(Tape& t, uint32_t base,
                              const double x[2]) const = 0;

  /// Flat little-endian fp64 blob with a one-line JSON header.
  void save(const std::string& path) const;

 protected:
  virtual std::string header_json() const = 0;

  std::vector<double> params_;
  uint64_t init_seed_ = 0;
};

/// Kolmogorov-Arnold network: every edge carries a learnable univariate
/// function w_b * SiLU(x) + sum_k c_k B_k(x) on a shared uniform B-spline
/// grid over [-1, 1]; units sum their incoming edges plus a residual
/// branch W * SiLU(x) and apply tanh, except for the linear output layer.
/// Inputs are mapped affinely from the problem domain into [-1, 1].
class KanNetwork : public Approximator {
 public:
  KanNetwork(std::vector<int> widths, int grid_size, int degree,
             std::array<double, 2> in_lo = {-1.0, -1.0},
             std::array<double, 2> in_hi = {1.0, 1.0});

  std::string kind() const override { return "kan"; }
  const std::vector<int>& widths() const override { return widths_; }
  const KnotVector& knots() const { return *knots_; }
  int grid_size() const { return knots_->grid_size; }
  int degree() const { return knots_->degree; }
  int num_layers() const { return static_cast<int>(widths_.size()) - 1; }

  void init_params(uint64_t seed) override;
  double eval(const double x[2]) const override;
  Value record_scalar(Tape& t, uint32_t base,
                      const double x[2]) const override;
  JetNodes record_jet(Tape& t, uint32_t base,
                      const double x[2]) const override;

  // Flat-layout indices. Per layer: all edge spline coefficients, then all
  // basis weights, then the residual matrix; edges are (out * n_in + in).
  size_t layer_base(int l) const { return layer_base_[static_cast<size_t>(l)]; }
  size_t coeff_index(int l, int out, int in, int m) const;
  size_t basis_weight_index(int l, int out, int in) const;
  size_t residual_index(int l, int out, int in) const;

  const std::array<double, 2>& input_scale() const { return map_a_; }
  const std::array<double, 2>& input_shift() const { return map_b_; }

  /// Optional regularizer: sum over edges of squared second differences of
  /// the spline coefficients. Adds coeff * d(penalty)/d(params) into grad
  /// (which must have param_count entries) and returns coeff * penalty.
  double smoothness_penalty(double coeff, std::span<double> grad) const;

  static size_t expected_param_count(const std::vector<int>& widths,
                                     int grid_size, int degree);

 protected:
  std::string header_json() const override;

 private:
  std::vector<int> widths_;
  std::shared_ptr<const KnotVector> knots_;
  std::vector<size_t> layer_base_;
  std::array<double, 2> in_lo_, in_hi_;
  std::array<double, 2> map_a_, map_b_;
};

/// Dense baseline with tanh hidden activations and a linear output layer.
class MlpNetwork : public Approximator {
 public:
  explicit MlpNetwork(std::vector<int> widths);

  std::string kind() const override { return "mlp"; }
  const std::vector<int>& widths() const override { return widths_; }
  int num_layers() const { return static_cast<int>(widths_.size()) - 1; }

  void init_params(uint64_t seed) override;
  double eval(const double x[2]) const override;
  Value record_scalar(Tape& t, uint32_t base,
                      const double x[2]) const override;
  JetNodes record_jet(Tape& t, uint32_t base,
                      const double x[2]) const override;

  size_t weight_index(int l, int out, int in) const;
  size_t bias_index(int l, int out) const;

  static size_t expected_param_count(const std::vector<int>& widths);

 protected:
  std::string header_json() const override;

 private:
  std::vector<int> widths_;
  std::vector<size_t> layer_base_;
};

/// Reconstructs a network from a file written by Approximator::save();
/// the round trip is bit-exact.
std::unique_ptr<Approximator> load_network(const std::string& path);

}  // namespace pikan
