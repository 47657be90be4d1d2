#include "srlt/grid_affine.hpp"

#include <algorithm>
#include <cmath>

#include "srlt/errors.hpp"

namespace srlt {

double total_mass(const AffineLaw& v) {
  double s = 0.0;
  for (const auto& [y, w] : v) s += w;
  return s;
}

GridFunction::GridFunction(const GridAffineSpec& spec)
    : spec_(spec),
      K_(spec.levels_per_side),
      M_(spec.b_nodes_per_side()),
      stride_(static_cast<std::size_t>(2 * M_ + 1)),
      data_(static_cast<std::size_t>(2 * K_ + 1) * stride_, 0.0) {
  spec.validate();
}

GridFunction GridFunction::sample(const GridAffineSpec& spec, const std::function<double(const AffineElement&)>& fn) {
  GridFunction g(spec);
  for (int i = -g.K_; i <= g.K_; ++i)
    for (int j = -g.M_; j <= g.M_; ++j) g.at(i, j) = fn(g.node(i, j));
  return g;
}

AffineElement GridFunction::node(int i, int j) const {
  return AffineElement::from_grid(i * spec_.log2_step, j * spec_.b_step);
}

double GridFunction::interpolate(const AffineElement& x) const {
  if (!(x.a > 0.0)) return 0.0;
  const double u = std::log2(x.a) / spec_.log2_step;
  const double w = x.b / spec_.b_step;
  const double fu = std::floor(u);
  const double fw = std::floor(w);
  const double tu = u - fu;
  const double tw = w - fw;
  const auto i0 = static_cast<long long>(fu);
  const auto j0 = static_cast<long long>(fw);
  double acc = 0.0;
  for (int di = 0; di <= 1; ++di) {
    const double wu = di ? tu : 1.0 - tu;
    if (wu == 0.0) continue;
    const long long i = i0 + di;
    if (i < -K_ || i > K_) continue;
    for (int dj = 0; dj <= 1; ++dj) {
      const double ww = dj ? tw : 1.0 - tw;
      if (ww == 0.0) continue;
      const long long j = j0 + dj;
      if (j < -M_ || j > M_) continue;
      acc += wu * ww * at(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return acc;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

void GridFunction::renormalize() {
  const double m = max_abs();
  if (m == 0.0 || m == 1.0) return;
  for (double& v : data_) v /= m;
  log_scale_ += std::log(m);
}

double GridFunction::weighted_sum(const std::function<double(int, int)>& weight) const {
  double s = 0.0;
  for (int i = -K_; i <= K_; ++i)
    for (int j = -M_; j <= M_; ++j) s += at(i, j) * weight(i, j);
  return s;
}

namespace {

// out_row[j] += w * src_row(j + shift) with linear interpolation, zero outside [-M, M].
void add_shifted_row(double* out, const double* src, int M, double shift, double w) {
  const double fs = std::floor(shift);
  const double t = shift - fs;
  const long long k = static_cast<long long>(fs);
  const int n = 2 * M + 1;
  for (int j = 0; j < n; ++j) {
    const long long p = j + k;
    double v = 0.0;
    if (p >= 0 && p < n) v += (1.0 - t) * src[p];
    if (t != 0.0 && p + 1 >= 0 && p + 1 < n) v += t * src[p + 1];
    out[j] += w * v;
  }
}

double nu_mass(const GridFunction& f, double c) {
  const double ds = f.spec().log2_step;
  double s = 0.0;
  for (int i = -f.levels(); i <= f.levels(); ++i) {
    const double* r = f.row(i);
    double rs = 0.0;
    for (int j = 0; j < 2 * f.b_nodes() + 1; ++j) rs += r[j];
    s += rs * std::exp2(-c * i * ds);
  }
  return s;
}

}  // namespace

GridStep apply_P_grid(const GroupSpace& space, const GridFunction& f, const AffineLaw& v, double nu_exponent) {
  const auto& spec = space.grid();
  GridFunction out(spec);
  const int K = spec.levels_per_side;
  const int M = spec.b_nodes_per_side();
  const double ds = spec.log2_step;
  const double h = spec.b_step;
  double laplace = 0.0;
  for (const auto& [y, wy] : v) {
    if (!(y.a > 0.0)) throw GroupMismatch("affine law atom with a <= 0");
    laplace += wy * std::pow(y.a, nu_exponent);
    const double di = std::log2(y.a) / ds;
    const double fi = std::floor(di + 1e-12);
    double ti = di - fi;
    if (ti < 1e-12) ti = 0.0;
    const auto ki = static_cast<int>(fi);
    for (int i = -K; i <= K; ++i) {
      // x y = (a_x a_y, b_x + a_x b_y): b shifts by a_x b_y / h nodes in row i + log2(a_y)/ds.
      const double shift = std::exp2(i * ds) * y.b / h;
      for (int d = 0; d <= 1; ++d) {
        const double wrow = d ? ti : 1.0 - ti;
        if (wrow == 0.0) continue;
        const int src = i + ki + d;
        if (src < -K || src > K) continue;
        add_shifted_row(out.row(i), f.row(src), M, shift, wy * wrow);
      }
    }
  }
  out.set_log_scale(f.log_scale());
  GridStep step{std::move(out), 0.0};
  const double before = nu_mass(f, nu_exponent);
  if (before != 0.0) step.absorbed_fraction = 1.0 - nu_mass(step.result, nu_exponent) / (laplace * before);
  return step;
}

double AffineBump::operator()(const AffineElement& x) const {
  if (!(x.a > 0.0)) return 0.0;
  const double us = (std::log2(x.a) - center_log2a) / half_width_log2a;
  const double ub = (x.b - center_b) / half_width_b;
  const double r2 = us * us + ub * ub;
  if (r2 >= 1.0) return 0.0;
  return height * std::exp(1.0 - 1.0 / (1.0 - r2));
}

double haar_integral(const GroupSpace& space, const std::function<double(const AffineElement&)>& g) {
  const auto& spec = space.grid();
  const int K = spec.levels_per_side;
  const int M = spec.b_nodes_per_side();
  double s = 0.0;
  for (int i = -K; i <= K; ++i) {
    double rs = 0.0;
    for (int j = -M; j <= M; ++j) rs += g(AffineElement::from_grid(i * spec.log2_step, j * spec.b_step));
    s += rs;
  }
  return s * spec.cell_mass();
}

double modular_by_quadrature(const GroupSpace& space, const AffineElement& x, const AffineBump& g) {
  const double base = haar_integral(space, g);
  if (base == 0.0) throw PreconditionViolation("modular_by_quadrature: bump has zero integral on the grid");
  const double moved = haar_integral(space, [&](const AffineElement& u) { return g(space.mul(x, u)); });
  return moved / base;
}

double right_translation_defect(const GroupSpace& space, const AffineElement& y, const AffineBump& g) {
  const double base = haar_integral(space, g);
  const double moved = haar_integral(space, [&](const AffineElement& u) { return g(space.mul(u, y)); });
  return std::abs(moved - base) / base;
}

}  // namespace srlt
