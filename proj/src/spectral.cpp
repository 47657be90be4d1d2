#include "srlt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "srlt/errors.hpp"
#include "srlt/measure_ops.hpp"

namespace srlt {

ExponentialSpec::ExponentialSpec(GroupSpace space, std::vector<double> t) : space_(std::move(space)), t_(std::move(t)) {
  if (static_cast<int>(t_.size()) != space_.exponent_dim())
    throw GroupMismatch(fmt::format("{} exponentials take {} parameters, got {}", space_.name(), space_.exponent_dim(),
                                    t_.size()));
  for (double v : t_)
    if (!std::isfinite(v)) throw PreconditionViolation("exponential parameter is not finite");
}

ExponentialSpec ExponentialSpec::trivial(const GroupSpace& space) {
  return ExponentialSpec(space, std::vector<double>(static_cast<std::size_t>(space.exponent_dim()), 0.0));
}

ExponentialSpec ExponentialSpec::from_generator_values(const GroupSpace& space, std::span<const double> a) {
  if (space.kind() != GroupKind::free_group) throw GroupMismatch("generator values apply to free groups");
  std::vector<double> t;
  for (double ai : a) {
    if (!(ai > 0.0)) throw PreconditionViolation("exponential generator values must be positive");
    t.push_back(std::log(ai));
  }
  return ExponentialSpec(space, std::move(t));
}

double ExponentialSpec::log_phi(const Element& x) const {
  const auto ab = space_.abelianize(x);
  double s = 0.0;
  for (std::size_t i = 0; i < ab.size(); ++i) s += t_[i] * static_cast<double>(ab[i]);
  return s;
}

double ExponentialSpec::phi(const Element& x) const { return std::exp(log_phi(x)); }

double ExponentialSpec::log_phi(const AffineElement& x) const {
  if (space_.is_discrete()) throw GroupMismatch("affine element used with a discrete exponential");
  return t_[0] * std::log(x.a);
}

double ExponentialSpec::phi(const AffineElement& x) const { return std::exp(log_phi(x)); }

ExponentialSpec ExponentialSpec::midpoint(const ExponentialSpec& p, const ExponentialSpec& q) {
  if (!(p.space_ == q.space_)) throw GroupMismatch("midpoint of exponentials on different spaces");
  std::vector<double> t(p.t_.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.5 * (p.t_[i] + q.t_[i]);
  return ExponentialSpec(p.space_, std::move(t));
}

std::string_view to_string(SpectralMethod m) { return m == SpectralMethod::laplace_min ? "laplace-min" : "log-fit"; }

namespace {

constexpr double kLogDomainThreshold = 300.0;

template <class Atoms, class LogPhi>
double laplace_impl(const Atoms& atoms, LogPhi&& log_phi) {
  double max_abs = 0.0;
  std::vector<std::pair<double, double>> terms;  // (log phi, weight)
  for (const auto& [x, w] : atoms) {
    const double l = log_phi(x);
    max_abs = std::max(max_abs, std::abs(l));
    terms.emplace_back(l, w);
  }
  std::sort(terms.begin(), terms.end());
  if (max_abs <= kLogDomainThreshold) {
    double s = 0.0;
    for (const auto& [l, w] : terms) s += w * std::exp(l);
    return s;
  }
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& [l, w] : terms)
    if (w != 0.0) m = std::max(m, l);
  double s = 0.0;
  for (const auto& [l, w] : terms) s += w * std::exp(l - m);
  return s * std::exp(m);
}

/// Points of the pushforward of v to the exponential parameter space, with weights.
struct Pushforward {
  int dim = 0;
  std::vector<Eigen::VectorXd> points;
  std::vector<double> weights;
};

Pushforward push_discrete(const GroupSpace& space, const WeightedSupport& v) {
  std::map<std::vector<Coord>, double> agg;
  for (const auto& [x, w] : v) {
    if (w < 0.0) throw PreconditionViolation("fit_exponential: law has a negative atom");
    if (w > 0.0) agg[space.abelianize(x)] += w * std::exp(v.log_scale());
  }
  Pushforward p;
  p.dim = space.exponent_dim();
  for (const auto& [k, w] : agg) {
    Eigen::VectorXd pt(p.dim);
    for (int i = 0; i < p.dim; ++i) pt[i] = static_cast<double>(k[static_cast<std::size_t>(i)]);
    p.points.push_back(std::move(pt));
    p.weights.push_back(w);
  }
  return p;
}

Pushforward push_affine(const AffineLaw& v) {
  std::map<double, double> agg;
  for (const auto& [y, w] : v) {
    if (w < 0.0) throw PreconditionViolation("fit_exponential: law has a negative atom");
    if (!(y.a > 0.0)) throw GroupMismatch("affine law atom with a <= 0");
    if (w > 0.0) agg[std::log(y.a)] += w;
  }
  Pushforward p;
  p.dim = 1;
  for (const auto& [k, w] : agg) {
    Eigen::VectorXd pt(1);
    pt[0] = k;
    p.points.push_back(std::move(pt));
    p.weights.push_back(w);
  }
  return p;
}

/// F(t) = log sum w_i exp(t . p_i) with gradient and Hessian of F.
struct LogLaplace {
  const Pushforward& p;

  double value(const Eigen::VectorXd& t, Eigen::VectorXd* grad = nullptr, Eigen::MatrixXd* hess = nullptr) const {
    const std::size_t n = p.points.size();
    std::vector<double> e(n);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      e[i] = t.dot(p.points[i]) + std::log(p.weights[i]);
      m = std::max(m, e[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e[i] = std::exp(e[i] - m);
      z += e[i];
    }
    if (grad || hess) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(p.dim);
      for (std::size_t i = 0; i < n; ++i) mean += (e[i] / z) * p.points[i];
      if (grad) *grad = mean;
      if (hess) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p.dim, p.dim);
        for (std::size_t i = 0; i < n; ++i) {
          const Eigen::VectorXd d = p.points[i] - mean;
          h += (e[i] / z) * d * d.transpose();
        }
        *hess = h;
      }
    }
    return m + std::log(z);
  }
};

constexpr double kDivergenceBound = 1e4;

SpectralResult minimize_laplace(const GroupSpace& space, const Pushforward& p, const FitOptions& opts) {
  SpectralResult res;
  res.method = SpectralMethod::laplace_min;
  double mass = 0.0;
  for (double w : p.weights) mass += w;
  if (p.dim == 0) {
    res.phi = ExponentialSpec::trivial(space);
    res.laplace_value = mass;
    res.R = 1.0 / mass;
    return res;
  }
  if (p.points.empty()) throw PreconditionViolation("fit_exponential: empty law");

  const LogLaplace F{p};
  Eigen::VectorXd t = Eigen::VectorXd::Zero(p.dim);
  {
    Eigen::MatrixXd h;
    F.value(t, nullptr, &h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const double top = es.eigenvalues().maxCoeff();
    if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, top))
      throw PreconditionViolation("fit_exponential: law does not span the exponential parameter directions");
  }

  auto grad_norm_L = [&](const Eigen::VectorXd& tt, double* fval = nullptr) {
    Eigen::VectorXd g;
    const double fv = F.value(tt, &g);
    if (fval) *fval = fv;
    return std::exp(fv) * g.lpNorm<Eigen::Infinity>();
  };

  std::size_t it = 0;
  if (p.dim == 1) {
    // Safeguarded Newton on F'(t) = 0 inside a sign-change bracket, bisection fallback.
    auto deriv = [&](double x) {
      Eigen::VectorXd tt(1), g;
      tt[0] = x;
      F.value(tt, &g);
      return g[0];
    };
    double lo = 0.0, hi = 0.0;
    const double d0 = deriv(0.0);
    if (d0 == 0.0) {
      lo = hi = 0.0;
    } else {
      double step = 1.0;
      double far = 0.0;
      while (true) {
        far = d0 > 0.0 ? -step : step;
        if (deriv(far) * d0 < 0.0) break;
        step *= 2.0;
        if (step > kDivergenceBound)
          throw NoInteriorMinimum("fit_exponential: Laplace transform decreases without bound (law drifts into a "
                                  "half-space)");
      }
      lo = std::min(0.0, far);
      hi = std::max(0.0, far);
    }
    double x = 0.5 * (lo + hi);
    if (lo == hi) x = lo;
    for (; it < opts.max_iterations; ++it) {
      Eigen::VectorXd tt(1), g;
      Eigen::MatrixXd h;
      tt[0] = x;
      const double fv = F.value(tt, &g, &h);
      if (std::exp(fv) * std::abs(g[0]) <= opts.gradient_tolerance) break;
      if (g[0] > 0.0)
        hi = x;
      else
        lo = x;
      double nx = h(0, 0) > 0.0 ? x - g[0] / h(0, 0) : 0.5 * (lo + hi);
      if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
      if (nx == x) break;
      x = nx;
    }
    t[0] = x;
  } else {
    for (; it < opts.max_iterations; ++it) {
      Eigen::VectorXd g;
      Eigen::MatrixXd h;
      const double fv = F.value(t, &g, &h);
      if (std::exp(fv) * g.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance) break;
      Eigen::VectorXd dir = h.ldlt().solve(-g);
      if (!dir.allFinite() || dir.dot(g) >= 0.0) dir = -g;
      double alpha = 1.0;
      Eigen::VectorXd nt = t + dir;
      while (F.value(nt) > fv + 1e-4 * alpha * g.dot(dir) && alpha > 1e-12) {
        alpha *= 0.5;
        nt = t + alpha * dir;
      }
      if (nt.norm() > kDivergenceBound)
        throw NoInteriorMinimum("fit_exponential: minimizer escapes to infinity (law drifts into a half-space)");
      if ((nt - t).lpNorm<Eigen::Infinity>() == 0.0) break;
      t = nt;
    }
  }
  double fv = 0.0;
  res.residual = grad_norm_L(t, &fv);
  res.iterations = it;
  res.laplace_value = std::exp(fv);
  res.R = 1.0 / res.laplace_value;
  if (res.residual > opts.gradient_tolerance) {
    if (t.norm() > 0.5 * kDivergenceBound)
      throw NoInteriorMinimum("fit_exponential: minimizer escapes to infinity");
    throw Error(fmt::format("fit_exponential: gradient {:.3e} above tolerance after {} iterations", res.residual, it));
  }
  {
    // a small gradient of L with a large gradient of log L means L is collapsing to 0 along a ray
    Eigen::VectorXd g;
    F.value(t, &g);
    if (g.lpNorm<Eigen::Infinity>() > 1e-6)
      throw NoInteriorMinimum("fit_exponential: Laplace transform decreases towards 0 (law drifts into a half-space)");
  }
  res.phi = ExponentialSpec(space, std::vector<double>(t.data(), t.data() + t.size()));
  return res;
}

}  // namespace

double laplace(const WeightedSupport& v, const ExponentialSpec& phi) {
  return laplace_impl(v.sorted_atoms(), [&](const Element& x) { return phi.log_phi(x); }) * std::exp(v.log_scale());
}

double laplace(const AffineLaw& v, const ExponentialSpec& phi) {
  return laplace_impl(v, [&](const AffineElement& x) { return phi.log_phi(x); });
}

SpectralResult fit_exponential(const GroupSpace& space, const WeightedSupport& v, const FitOptions& opts) {
  return minimize_laplace(space, push_discrete(space, v), opts);
}

SpectralResult fit_exponential(const GroupSpace& space, const AffineLaw& v, const FitOptions& opts) {
  if (space.is_discrete()) throw GroupMismatch("affine law on a discrete group");
  auto res = minimize_laplace(space, push_affine(v), opts);
  res.r_value = modular_r_value(space, v);
  return res;
}

SpectralResult estimate_R_logfit_from_logs(std::span<const double> log_return_probs, IndexRange window) {
  if (window.last < window.first || window.size() < 10)
    throw PreconditionViolation("estimate_R_logfit: window must hold at least 10 points");
  if (window.last >= log_return_probs.size()) throw PreconditionViolation("estimate_R_logfit: window past data");
  if (window.first == 0) throw PreconditionViolation("estimate_R_logfit: window must start at n >= 1");
  const auto rows = static_cast<Eigen::Index>(window.size());
  const double scale = static_cast<double>(window.last);
  Eigen::MatrixXd A(rows, 3);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t n = window.first + static_cast<std::size_t>(r);
    const double l = log_return_probs[n];
    if (!std::isfinite(l)) throw PreconditionViolation(fmt::format("estimate_R_logfit: zero entry at n = {}", n));
    A(r, 0) = static_cast<double>(n) / scale;
    A(r, 1) = std::log(static_cast<double>(n));
    A(r, 2) = 1.0;
    y[r] = l;
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = A * coef - y;
  SpectralResult res;
  res.method = SpectralMethod::log_fit;
  const double slope = coef[0] / scale;
  res.R = std::exp(-slope);
  res.laplace_value = std::nan("");
  res.residual = std::sqrt(resid.squaredNorm() / static_cast<double>(rows));
  res.log_n_coefficient = coef[1];
  res.intercept = coef[2];
  return res;
}

SpectralResult estimate_R_logfit(std::span<const double> return_probs, IndexRange window) {
  std::vector<double> logs(return_probs.size());
  for (std::size_t n = 0; n < return_probs.size(); ++n) {
    const double p = return_probs[n];
    if (n >= window.first && n <= window.last && !(p > 0.0))
      throw PreconditionViolation(fmt::format("estimate_R_logfit: zero entry at n = {}", n));
    logs[n] = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  }
  return estimate_R_logfit_from_logs(logs, window);
}

WeightedSupport build_nu(const ExponentialSpec& phi, std::span<const Element> window) {
  WeightedSupport nu(Role::measure);
  nu.reserve(window.size());
  for (const auto& x : window) nu.add(x, std::exp(-phi.log_phi(x)) * phi.space().haar_weight(x));
  return nu;
}

WeightedSupport twist(const WeightedSupport& v, double R, const ExponentialSpec& phi) {
  WeightedSupport out = v.transformed([&](const Element& x) { return R * phi.phi(x); });
  const double m = out.mass();
  if (std::abs(m - 1.0) > 1e-6)
    throw InconsistentTwist(fmt::format("twisted law has mass {:.12g}; (R, phi) are inconsistent", m));
  return out;
}

AffineLaw twist(const AffineLaw& v, double R, const ExponentialSpec& phi) {
  AffineLaw out;
  out.reserve(v.size());
  for (const auto& [y, w] : v) out.emplace_back(y, R * phi.phi(y) * w);
  const double m = total_mass(out);
  if (std::abs(m - 1.0) > 1e-6)
    throw InconsistentTwist(fmt::format("twisted law has mass {:.12g}; (R, phi) are inconsistent", m));
  return out;
}

double verify_similarity(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& v, double R,
                         const ExponentialSpec& phi, std::size_t n, SimilarityFactor factor) {
  if (n < 1 || n > 20) throw PreconditionViolation("verify_similarity: n must be in [1, 20]");
  const WeightedSupport vt = v.transformed([&](const Element& x) { return R * phi.phi(x); });
  PowerIterator twisted(space, f, vt);
  PowerIterator plain(space, f.transformed([&](const Element& x) { return phi.phi(x); }), v);
  double worst = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    twisted.advance();
    plain.advance();
    const double log_factor = (factor == SimilarityFactor::power_n ? static_cast<double>(k) : 1.0) * std::log(R);
    const auto& lhs = twisted.current();
    const auto& rhs = plain.current();
    auto compare = [&](const Element& x) {
      const double a = lhs.mantissa(x);
      const double b = rhs.mantissa(x) * std::exp(rhs.log_scale() + log_factor - phi.log_phi(x) - lhs.log_scale());
      const double scale = std::max(std::abs(a), std::abs(b));
      if (scale > 0.0) worst = std::max(worst, std::abs(a - b) / scale);
    };
    for (const auto& [x, w] : lhs) compare(x);
    for (const auto& [x, w] : rhs)
      if (!lhs.atoms().count(x)) compare(x);
  }
  return worst;
}

double modular_r_value(const GroupSpace& space, const AffineLaw& v) {
  double s = 0.0;
  for (const auto& [y, w] : v) s += w * space.modular(y);
  return 1.0 / s;
}

}  // namespace srlt
