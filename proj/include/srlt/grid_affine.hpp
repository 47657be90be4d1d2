#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "srlt/group.hpp"
#include "srlt/weighted_support.hpp"

namespace srlt {

/// Finitely supported law on the affine group.
using AffineLaw = std::vector<std::pair<AffineElement, double>>;

double total_mass(const AffineLaw& v);

/// Function sampled on the nodes of a GridAffineSpec, with a log-scale ledger.
///
/// Node (i, j) is log2 a = i * log2_step, b = j * b_step, for |i| <= K and |j| <= M.
class GridFunction {
 public:
  explicit GridFunction(const GridAffineSpec& spec);

  static GridFunction sample(const GridAffineSpec& spec, const std::function<double(const AffineElement&)>& fn);

  const GridAffineSpec& spec() const noexcept { return spec_; }
  int levels() const noexcept { return K_; }
  int b_nodes() const noexcept { return M_; }
  AffineElement node(int i, int j) const;

  double& at(int i, int j) { return data_[index(i, j)]; }
  double at(int i, int j) const { return data_[index(i, j)]; }
  const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i + K_) * stride_; }
  double* row(int i) { return data_.data() + static_cast<std::size_t>(i + K_) * stride_; }

  /// Bilinear interpolation of the stored mantissas; 0 outside the window.
  double interpolate(const AffineElement& x) const;
  LogScaled value(const AffineElement& x) const { return {interpolate(x), log_scale_}; }

  double log_scale() const noexcept { return log_scale_; }
  void set_log_scale(double s) { log_scale_ = s; }
  double max_abs() const;
  void renormalize();
  /// Sum of mantissa * weight(node) over all nodes.
  double weighted_sum(const std::function<double(int, int)>& weight) const;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i + K_) * stride_ + static_cast<std::size_t>(j + M_);
  }

  GridAffineSpec spec_;
  int K_;
  int M_;
  std::size_t stride_;
  std::vector<double> data_;
  double log_scale_ = 0.0;
};

struct GridStep {
  GridFunction result;
  /// Fraction of nu_c-mass lost through the window boundary in this step, where
  /// nu_c = a^{-c} * (right Haar) satisfies nu_c P = (sum_y a_y^c v(y)) nu_c on the whole group.
  double absorbed_fraction = 0.0;
};

/// Pf(x) = sum_y f(x y) v({y}) on grid nodes, bilinear interpolation of f at off-grid products,
/// zero outside the window. `nu_exponent` selects the invariant weighting used for the
/// absorbed-mass audit.
GridStep apply_P_grid(const GroupSpace& space, const GridFunction& f, const AffineLaw& v, double nu_exponent = 0.0);

/// Smooth bump exp(-1/(1-rho^2)) in (log2 a, b) coordinates, rho^2 = (ds/ws)^2 + (db/wb)^2.
struct AffineBump {
  double center_log2a = 0.0;
  double center_b = 0.0;
  double half_width_log2a = 1.0;
  double half_width_b = 1.0;
  double height = 1.0;

  double operator()(const AffineElement& x) const;
};

/// Right-Haar integral of g by the grid's node quadrature.
double haar_integral(const GroupSpace& space, const std::function<double(const AffineElement&)>& g);

/// pi(g_x) / pi(g) with g_x(u) = g(x u): the modular function by quadrature.
double modular_by_quadrature(const GroupSpace& space, const AffineElement& x, const AffineBump& g);

/// |pi(g(. y)) - pi(g)| / pi(g): right-invariance defect of the quadrature.
double right_translation_defect(const GroupSpace& space, const AffineElement& y, const AffineBump& g);

}  // namespace srlt
