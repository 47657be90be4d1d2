#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srlt/grid_affine.hpp"
#include "srlt/group.hpp"
#include "srlt/weighted_support.hpp"

namespace srlt {

/// Positive homomorphism phi: E -> (0, inf).
///
/// Exponentials kill commutators, so every one factors through the abelianization and is
/// determined by a log-parameter vector t:
///   Z^d           phi(x) = exp(t . x)
///   F_k           phi(g_i) = exp(t_i), i.e. a_i = exp(t_i)
///   H3(Z)         phi(a, b, c) = exp(t_1 a + t_2 b)
///   Z/mZ          phi = 1 (no parameters)
///   affine group  phi(a, b) = a^c, t = {c}
class ExponentialSpec {
 public:
  ExponentialSpec(GroupSpace space, std::vector<double> t);
  static ExponentialSpec trivial(const GroupSpace& space);
  /// F_k from generator values a_i > 0.
  static ExponentialSpec from_generator_values(const GroupSpace& space, std::span<const double> a);

  const GroupSpace& space() const noexcept { return space_; }
  const std::vector<double>& parameters() const noexcept { return t_; }

  double log_phi(const Element& x) const;
  double phi(const Element& x) const;
  double log_phi(const AffineElement& x) const;
  double phi(const AffineElement& x) const;

  /// Midpoint (t1 + t2) / 2 of two specs on the same space.
  static ExponentialSpec midpoint(const ExponentialSpec& p, const ExponentialSpec& q);

 private:
  GroupSpace space_;
  std::vector<double> t_;
};

enum class SpectralMethod { laplace_min, log_fit };
std::string_view to_string(SpectralMethod m);

struct SpectralResult {
  double R = 1.0;
  SpectralMethod method = SpectralMethod::laplace_min;
  std::optional<ExponentialSpec> phi;
  /// Laplace value of the law at phi (laplace-min), NaN for log-fit.
  double laplace_value = 0.0;
  /// Gradient infinity-norm at the minimizer (laplace-min) or RMS residual (log-fit).
  double residual = 0.0;
  /// r = [integral of the modular function dv]^{-1}, on non-unimodular groups.
  std::optional<double> r_value;
  std::size_t iterations = 0;
  /// log-fit only: coefficient of log n and the intercept.
  double log_n_coefficient = 0.0;
  double intercept = 0.0;
};

/// Integral of phi against v. Evaluated through log-sum-exp when some |log phi| exceeds 300.
double laplace(const WeightedSupport& v, const ExponentialSpec& phi);
double laplace(const AffineLaw& v, const ExponentialSpec& phi);

struct FitOptions {
  double gradient_tolerance = 1e-10;
  std::size_t max_iterations = 200;
};

/// Minimizes t -> integral of phi_t dv over the exponential parameter space. Returns the
/// candidate 1/R as the minimum value. Throws NoInteriorMinimum when the infimum is not attained
/// and PreconditionViolation when the law does not span the parameter directions.
SpectralResult fit_exponential(const GroupSpace& space, const WeightedSupport& v, const FitOptions& opts = {});
SpectralResult fit_exponential(const GroupSpace& space, const AffineLaw& v, const FitOptions& opts = {});

/// Inclusive index range [first, last].
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const { return last >= first ? last - first + 1 : 0; }
};

/// Least-squares fit of log v^n(e) = slope n + beta log n + gamma over the window; R = exp(-slope).
/// `log_return_probs[n]` is log v^n(e).
SpectralResult estimate_R_logfit_from_logs(std::span<const double> log_return_probs, IndexRange window);
/// Same, from the probabilities themselves; zero entries in the window are an error.
SpectralResult estimate_R_logfit(std::span<const double> return_probs, IndexRange window);

/// nu({x}) = phi(x)^{-1} * haar_weight(x) on the window.
WeightedSupport build_nu(const ExponentialSpec& phi, std::span<const Element> window);

/// Twisted law R * phi * v. Throws InconsistentTwist when its mass is off by more than 1e-6.
WeightedSupport twist(const WeightedSupport& v, double R, const ExponentialSpec& phi);
AffineLaw twist(const AffineLaw& v, double R, const ExponentialSpec& phi);

enum class SimilarityFactor {
  power_n,  ///< R^n (the identity obtained by composing n single steps)
  literal   ///< the single factor R at every n
};

/// Max over k = 1..n and over atoms of the relative discrepancy between P~^k f and
/// factor * phi^{-1} P^k(f phi), where P~ is the walk with law R phi v.
double verify_similarity(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& v, double R,
                         const ExponentialSpec& phi, std::size_t n,
                         SimilarityFactor factor = SimilarityFactor::power_n);

/// r = [sum_y Delta(y) v(y)]^{-1} with Delta the closed-form modular function.
double modular_r_value(const GroupSpace& space, const AffineLaw& v);

}  // namespace srlt
