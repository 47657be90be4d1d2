#include "srlt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <fmt/format.h>

#include "srlt/errors.hpp"
#include "srlt/measure_ops.hpp"

namespace srlt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio_or_nan(const LogScaled& a, const LogScaled& b) { return b.is_zero() ? kNaN : ratio(a, b); }

bool is_exceptional(double r, double target, double eps, EpsilonMode mode) {
  if (!std::isfinite(r)) return true;
  const double err = std::abs(r - target);
  if (mode == EpsilonMode::absolute) return err > eps;
  return err > eps * std::abs(target);
}

RatioSeries make_series(std::string label, double target, std::string note) {
  RatioSeries s;
  s.label = std::move(label);
  s.target = target;
  s.target_note = std::move(note);
  return s;
}

void require_nonzero(double value, const char* what) {
  if (value == 0.0 || !std::isfinite(value))
    throw PreconditionViolation(fmt::format("{} is zero; the ratio limit has no finite target", what));
}

}  // namespace

std::string_view to_string(EpsilonMode m) { return m == EpsilonMode::relative ? "relative" : "absolute"; }

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    default:
      return "not-judged";
  }
}

std::string_view to_string(WitnessKind k) {
  return k == WitnessKind::condition_a ? "condition-A" : "small-domination";
}

DensityProfile exceptional_density(std::span<const double> values, std::size_t n_first, double target, double eps,
                                   EpsilonMode mode) {
  if (n_first == 0) throw PreconditionViolation("exceptional_density: indices start at n = 1");
  DensityProfile p;
  p.density.reserve(values.size());
  p.flags.reserve(values.size());
  std::size_t q = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const std::size_t n = n_first + k;
    const bool ex = is_exceptional(values[k], target, eps, mode);
    if (ex) {
      ++q;
      p.exceptional.push_back(n);
    }
    p.flags.push_back(ex);
    p.density.push_back(static_cast<double>(q) / static_cast<double>(n));
  }
  return p;
}

std::vector<double> index_set_density(std::span<const std::size_t> sorted_indices, std::size_t limit) {
  std::vector<double> d;
  d.reserve(limit);
  std::size_t q = 0;
  auto it = sorted_indices.begin();
  for (std::size_t n = 1; n <= limit; ++n) {
    while (it != sorted_indices.end() && *it <= n) {
      if (*it >= 1) ++q;
      ++it;
    }
    d.push_back(static_cast<double>(q) / static_cast<double>(n));
  }
  return d;
}

void RatioSeries::evaluate() { profile = exceptional_density(values, n_first, target, epsilon, mode); }

double RatioSeries::max_abs_error(std::size_t from, std::size_t to) const {
  if (to == 0 || to > n_last()) to = n_last();
  double worst = 0.0;
  for (std::size_t n = std::max(from, n_first); n <= to; ++n) {
    const double r = at(n);
    if (!std::isfinite(r)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(r - target));
  }
  return worst;
}

double RatioSeries::tail_min(std::size_t from) const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t n = std::max(from, n_first); n <= n_last(); ++n)
    if (std::isfinite(at(n))) m = std::min(m, at(n));
  return m;
}

void RatioSeries::judge(std::size_t from, double tol) {
  const double err = max_abs_error(from);
  verdict = err <= tol ? Verdict::pass : Verdict::fail;
  verdict_note = fmt::format("max |r_n - L| over n >= {} is {:.3e} (tolerance {:.1e})", from, err, tol);
}

double tail_mean(const RatioSeries& s, std::size_t count) {
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t k = s.values.size(); k-- > 0 && used < count;) {
    if (!std::isfinite(s.values[k])) continue;
    sum += s.values[k];
    ++used;
  }
  return used ? sum / static_cast<double>(used) : kNaN;
}

double nu_of(const ExponentialSpec& phi, const WeightedSupport& f) {
  double s = 0.0;
  for (const auto& [u, w] : f.sorted_atoms()) s += w * std::exp(-phi.log_phi(u)) * phi.space().haar_weight(u);
  return s * std::exp(f.log_scale());
}

double pi_of(const GroupSpace& space, const WeightedSupport& f) {
  double s = 0.0;
  for (const auto& [u, w] : f.sorted_atoms()) s += w * space.haar_weight(u);
  return s * std::exp(f.log_scale());
}

RatioSeries ratio_pointwise(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& g,
                            const Element& x, const Element& y, const WeightedSupport& v, std::size_t n_max,
                            const ExponentialSpec& phi) {
  const double nu_g = nu_of(phi, g);
  require_nonzero(nu_g, "nu(g)");
  const double target = nu_of(phi, f) * phi.phi(x) / (nu_g * phi.phi(y));
  auto s = make_series("P^n f(x) / P^n g(y)", target, "nu(f) phi(x) / (nu(g) phi(y)), nu = phi^{-1} pi");
  PowerIterator pf(space, f, v);
  PowerIterator pg(space, g, v);
  s.values.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    pf.advance();
    pg.advance();
    s.values.push_back(ratio_or_nan(pf.at(x), pg.at(y)));
  }
  s.evaluate();
  return s;
}

RatioSeries ratio_shift(const GroupSpace& space, const WeightedSupport& g, const Element& y, std::size_t m,
                        const WeightedSupport& v, std::size_t n_max, double R) {
  if (m < 1) throw PreconditionViolation("ratio_shift: m must be >= 1");
  auto s = make_series(fmt::format("P^(n+{}) g(y) / P^n g(y)", m), std::pow(R, -static_cast<double>(m)),
                       fmt::format("R^-{}", m));
  PowerIterator pg(space, g, v);
  std::deque<LogScaled> hist;
  s.values.reserve(n_max);
  for (std::size_t k = 1; k <= n_max + m; ++k) {
    pg.advance();
    hist.push_back(pg.at(y));
    if (hist.size() > m) {
      s.values.push_back(ratio_or_nan(hist.back(), hist.front()));
      hist.pop_front();
    }
  }
  s.evaluate();
  return s;
}

RatioSeries ratio_integrated(const GroupSpace& space, const WeightedSupport& kappa, const WeightedSupport& mu,
                             const WeightedSupport& f, const WeightedSupport& g, const WeightedSupport& v,
                             std::size_t n_max, const ExponentialSpec& phi) {
  const double nu_g = nu_of(phi, g);
  require_nonzero(nu_g, "nu(g)");
  const double mu_phi = laplace(mu, phi);
  require_nonzero(mu_phi, "mu(phi)");
  const double target = laplace(kappa, phi) * nu_of(phi, f) / (mu_phi * nu_g);
  auto s = make_series("kappa(P^n f) / mu(P^n g)", target, "kappa(phi) nu(f) / (mu(phi) nu(g))");
  PowerIterator pf(space, f, v);
  PowerIterator pg(space, g, v);
  s.values.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    pf.advance();
    pg.advance();
    s.values.push_back(ratio_or_nan(pf.integrate(kappa), pg.integrate(mu)));
  }
  s.evaluate();
  return s;
}

RatioSeries ratio_integrated_shift(const GroupSpace& space, const WeightedSupport& kappa, const WeightedSupport& mu,
                                   const WeightedSupport& g, std::size_t m, const WeightedSupport& v,
                                   std::size_t n_max, double R, const ExponentialSpec& phi) {
  if (m < 1) throw PreconditionViolation("ratio_integrated_shift: m must be >= 1");
  const double mu_phi = laplace(mu, phi);
  require_nonzero(mu_phi, "mu(phi)");
  const double target = laplace(kappa, phi) / (mu_phi * std::pow(R, static_cast<double>(m)));
  auto s = make_series(fmt::format("kappa(P^(n+{}) g) / mu(P^n g)", m), target,
                       fmt::format("kappa(phi) / (mu(phi) R^{})", m));
  PowerIterator pg(space, g, v);
  std::deque<LogScaled> num, den;
  s.values.reserve(n_max);
  for (std::size_t k = 1; k <= n_max + m; ++k) {
    pg.advance();
    num.push_back(pg.integrate(kappa));
    den.push_back(pg.integrate(mu));
    if (num.size() > m) {
      s.values.push_back(ratio_or_nan(num.back(), den.front()));
      num.pop_front();
      den.pop_front();
    }
  }
  s.evaluate();
  return s;
}

RatioSeries ratio_twisted(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& g,
                          const Element& x, const Element& y, const WeightedSupport& twisted_law, std::size_t n_max) {
  const double pi_g = pi_of(space, g);
  require_nonzero(pi_g, "pi(g)");
  auto s = make_series("P~^n f(x) / P~^n g(y)", pi_of(space, f) / pi_g, "pi(f) / pi(g)");
  PowerIterator pf(space, f, twisted_law);
  PowerIterator pg(space, g, twisted_law);
  s.values.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    pf.advance();
    pg.advance();
    s.values.push_back(ratio_or_nan(pf.at(x), pg.at(y)));
  }
  s.evaluate();
  return s;
}

WeightedSupport left_translate(const GroupSpace& space, const WeightedSupport& g, const Element& z) {
  const Element zinv = space.inv(z);
  WeightedSupport out(g.role());
  out.reserve(g.size());
  for (const auto& [w, gw] : g.sorted_atoms()) out.add(space.mul(zinv, w), gw);
  out.set_log_scale(g.log_scale());
  return out;
}

TranslationCheck ratio_translation(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& g,
                                   const Element& x, const Element& y, const WeightedSupport& v, std::size_t n_max,
                                   const ExponentialSpec& phi) {
  TranslationCheck c;
  c.z = space.mul(y, space.inv(x));
  const WeightedSupport gz = left_translate(space, g, c.z);
  PowerIterator pz(space, gz, v);
  PowerIterator pg(space, g, v);
  for (std::size_t n = 1; n <= n_max; ++n) {
    pz.advance();
    pg.advance();
    const LogScaled a = pz.at(x);
    const LogScaled b = pg.at(y);
    if (a.is_zero() && b.is_zero()) continue;
    if (a.is_zero() || b.is_zero()) {
      c.max_relative_gap = std::numeric_limits<double>::infinity();
      continue;
    }
    c.max_relative_gap = std::max(c.max_relative_gap, std::abs(ratio(a, b) - 1.0));
  }
  c.nu_gz = nu_of(phi, gz);
  c.nu_g = nu_of(phi, g);
  c.phi_z = phi.phi(c.z);
  const double expected = c.phi_z * c.nu_g;
  c.nu_identity_residual = expected != 0.0 ? std::abs(c.nu_gz - expected) / std::abs(expected) : std::abs(c.nu_gz);
  const double nu_f = nu_of(phi, f);
  c.target_pointwise = nu_f * phi.phi(x) / (c.nu_g * phi.phi(y));
  c.target_translated = nu_f / c.nu_gz;
  return c;
}

double nu_invariance_residual(const GroupSpace& space, const WeightedSupport& v, double R, const ExponentialSpec& phi,
                              std::span<const Element> window) {
  const WeightedSupport nu = build_nu(phi, window);
  const auto law = v.sorted_atoms();
  const double scale = std::exp(v.log_scale());
  double worst = 0.0;
  for (const auto& x : window) {
    double s = 0.0;
    bool interior = true;
    for (const auto& [y, w] : law) {
      const Element u = space.mul(x, space.inv(y));
      if (!nu.atoms().count(u)) {
        interior = false;
        break;
      }
      s += nu.mantissa(u) * w * scale;
    }
    if (!interior) continue;
    const double target = nu.mantissa(x);
    worst = std::max(worst, std::abs(R * s - target) / target);
  }
  return worst;
}

ConditionWitness check_condition_A(const GroupSpace& space, const WeightedSupport& v, const WeightedSupport& f,
                                   std::size_t j_max) {
  ConditionWitness w;
  w.kind = WitnessKind::condition_a;
  if (!f.nonnegative()) throw PreconditionViolation("check_condition_A: f must be nonnegative");
  WeightedSupport vj = v.flattened();
  const auto atoms = f.flattened().sorted_atoms();
  for (std::size_t j = 1; j <= j_max; ++j) {
    if (j > 1) vj = convolve(space, vj, v.flattened());
    double gamma = std::numeric_limits<double>::infinity();
    for (const auto& [x, fx] : atoms) {
      if (fx <= 0.0) continue;
      gamma = std::min(gamma, vj.mantissa(x) / (fx * space.haar_weight(x)));
    }
    if (!std::isfinite(gamma)) throw PreconditionViolation("check_condition_A: f has no positive atom");
    if (gamma > 0.0) {
      w.found = true;
      w.power = j;
      w.coefficient = gamma;
      double margin = std::numeric_limits<double>::infinity();
      for (const auto& [x, fx] : atoms) margin = std::min(margin, vj.mantissa(x) - gamma * fx * space.haar_weight(x));
      w.margin = margin;
      return w;
    }
  }
  return w;
}

ConditionWitness check_small_domination(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& g,
                                        const WeightedSupport& v, std::size_t m_max) {
  ConditionWitness w;
  w.kind = WitnessKind::small_domination;
  if (!f.nonnegative() || !g.nonnegative()) throw PreconditionViolation("check_small_domination: f, g must be >= 0");
  const auto atoms = f.flattened().sorted_atoms();
  WeightedSupport pm = g.flattened();
  for (std::size_t m = 1; m <= m_max; ++m) {
    pm = apply_P(space, pm, v.flattened());
    double a = 0.0;
    bool covers = true;
    for (const auto& [x, fx] : atoms) {
      if (fx <= 0.0) continue;
      const double p = pm.mantissa(x) * std::exp(pm.log_scale());
      if (p <= 0.0) {
        covers = false;
        break;
      }
      a = std::max(a, fx / p);
    }
    if (!covers) continue;
    w.found = true;
    w.power = m;
    w.coefficient = a;
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& [x, fx] : atoms) margin = std::min(margin, a * pm.mantissa(x) * std::exp(pm.log_scale()) - fx);
    w.margin = atoms.empty() ? 0.0 : margin;
    return w;
  }
  return w;
}

ModularRatioReport modular_ratio(const GroupSpace& space, const AffineLaw& v, const ModularRatioOptions& opts) {
  if (space.is_discrete()) throw GroupMismatch("modular_ratio runs on the affine grid");
  if (opts.n_max < 1) throw PreconditionViolation("modular_ratio: n_max must be >= 1");
  const auto& spec = space.grid();
  ModularRatioReport rep;
  rep.r = modular_r_value(space, v);
  const AffineElement e = space.affine_identity();
  const std::size_t P = opts.points.size();
  for (const auto& x : opts.points) {
    if (!spec.contains(x)) throw OutsideWindow("modular_ratio: test point outside the grid window");
    rep.delta_oracle.push_back(modular_by_quadrature(space, x, opts.g));
    rep.delta_closed_form.push_back(space.modular(x));
  }
  const double pi_g = haar_integral(space, opts.g);
  if (pi_g == 0.0) throw PreconditionViolation("modular_ratio: pi(g) is zero on the grid");
  const double pi_f = haar_integral(space, opts.f);

  GridFunction cg = GridFunction::sample(spec, opts.g);
  GridFunction cf = GridFunction::sample(spec, opts.f);
  std::vector<LogScaled> ge, fe;
  std::vector<std::vector<LogScaled>> gx(P);
  double survive = 1.0;
  for (std::size_t n = 1; n <= opts.n_max + 1; ++n) {
    auto sg = apply_P_grid(space, cg, v, opts.audit_exponent);
    auto sf = apply_P_grid(space, cf, v, opts.audit_exponent);
    cg = std::move(sg.result);
    cf = std::move(sf.result);
    cg.renormalize();
    cf.renormalize();
    survive *= 1.0 - std::max(0.0, sg.absorbed_fraction);
    rep.absorbed.push_back(1.0 - survive);
    ge.push_back(cg.value(e));
    fe.push_back(cf.value(e));
    for (std::size_t p = 0; p < P; ++p) gx[p].push_back(cg.value(opts.points[p]));
  }
  rep.truncation_mass = rep.absorbed[opts.n_max - 1];

  auto finish = [&](RatioSeries& s) {
    s.epsilon = opts.epsilon;
    s.mode = EpsilonMode::absolute;
    s.truncation_mass = rep.truncation_mass;
    s.evaluate();
  };
  for (std::size_t p = 0; p < P; ++p) {
    const auto& x = opts.points[p];
    const std::string tag = fmt::format("x=({:g},{:g})", x.a, x.b);
    auto a = make_series("P^n g(x) / P^n g(e) " + tag, rep.delta_oracle[p], "Delta(x) by quadrature pi(g_x)/pi(g)");
    auto b = make_series("P^(n+1) g(x) / P^n g(e) " + tag, rep.delta_oracle[p] / rep.r,
                         "Delta(x) / r, r = [int Delta dv]^-1");
    auto bs = make_series("P^(n+1) g(x) / P^n g(x) " + tag, 1.0 / rep.r, "1 / r");
    for (std::size_t k = 0; k < opts.n_max; ++k) {
      a.values.push_back(ratio_or_nan(gx[p][k], ge[k]));
      b.values.push_back(ratio_or_nan(gx[p][k + 1], ge[k]));
      bs.values.push_back(ratio_or_nan(gx[p][k + 1], gx[p][k]));
    }
    finish(a);
    finish(b);
    finish(bs);
    rep.series_b_estimate.push_back(tail_mean(b, std::max<std::size_t>(1, opts.n_max / 10)));
    if (!rep.witness && rep.series_b_estimate.back() < 1.0) rep.witness = p;
    rep.series_a.push_back(std::move(a));
    rep.series_b.push_back(std::move(b));
    rep.series_b_same_point.push_back(std::move(bs));
  }
  rep.haar_ratio = make_series("P^n f(e) / P^n g(e)", pi_f / pi_g, "pi(f) / pi(g) by quadrature");
  for (std::size_t k = 0; k < opts.n_max; ++k) rep.haar_ratio.values.push_back(ratio_or_nan(fe[k], ge[k]));
  finish(rep.haar_ratio);
  return rep;
}

}  // namespace srlt
