#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srlt/grid_affine.hpp"
#include "srlt/group.hpp"
#include "srlt/spectral.hpp"
#include "srlt/weighted_support.hpp"

namespace srlt {

enum class EpsilonMode { relative, absolute };
std::string_view to_string(EpsilonMode m);

enum class Verdict { not_judged, pass, fail };
std::string_view to_string(Verdict v);

/// Exceptional set N_eps = {n : |r_n - L| > eps} and its density profile d_n = q_n(N_eps) / n.
/// Undefined ratios (NaN) count as exceptional.
struct DensityProfile {
  std::vector<std::size_t> exceptional;
  /// density[k] = d_n at n = n_first + k.
  std::vector<double> density;
  std::vector<bool> flags;
};

/// `values[k]` is r_n at n = n_first + k. Indices below n_first are not counted.
DensityProfile exceptional_density(std::span<const double> values, std::size_t n_first, double target, double eps,
                                   EpsilonMode mode = EpsilonMode::relative);

/// Density profile of an explicit index set: d_n = #{k in set : k <= n} / n for n = 1..limit.
std::vector<double> index_set_density(std::span<const std::size_t> sorted_indices, std::size_t limit);

struct RatioSeries {
  std::string id;
  std::string label;
  std::size_t n_first = 1;
  std::vector<double> values;
  double target = 0.0;
  std::string target_note;
  double epsilon = 1e-2;
  EpsilonMode mode = EpsilonMode::relative;
  DensityProfile profile;
  Verdict verdict = Verdict::not_judged;
  std::string verdict_note;
  /// Cumulative absorbed fraction of the invariant weighting (grid runs only).
  std::optional<double> truncation_mass;

  std::size_t n_last() const { return n_first + values.size() - 1; }
  double at(std::size_t n) const { return values.at(n - n_first); }
  /// Recomputes the exceptional set and the density profile from values, target and epsilon.
  void evaluate();
  /// max |r_n - target| over n in [from, to] (to = 0 means n_last); NaN entries give +inf.
  double max_abs_error(std::size_t from, std::size_t to = 0) const;
  /// min r_n over n in [from, n_last].
  double tail_min(std::size_t from) const;
  /// Final density d_{n_last}.
  double final_density() const { return profile.density.empty() ? 0.0 : profile.density.back(); }
  /// Passes when |r_n - target| <= tol for all n >= from.
  void judge(std::size_t from, double tol);
};

/// nu(f) = sum f(u) phi(u)^{-1} haar_weight(u).
double nu_of(const ExponentialSpec& phi, const WeightedSupport& f);
/// pi(f) = sum f(u) haar_weight(u).
double pi_of(const GroupSpace& space, const WeightedSupport& f);

/// r_n = P^n f(x) / P^n g(y); target nu(f) phi(x) / (nu(g) phi(y)).
RatioSeries ratio_pointwise(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& g,
                            const Element& x, const Element& y, const WeightedSupport& v, std::size_t n_max,
                            const ExponentialSpec& phi);

/// r_n = P^{n+m} g(y) / P^n g(y); target R^{-m}.
RatioSeries ratio_shift(const GroupSpace& space, const WeightedSupport& g, const Element& y, std::size_t m,
                        const WeightedSupport& v, std::size_t n_max, double R);

/// r_n = kappa(P^n f) / mu(P^n g); target kappa(phi) nu(f) / (mu(phi) nu(g)).
RatioSeries ratio_integrated(const GroupSpace& space, const WeightedSupport& kappa, const WeightedSupport& mu,
                             const WeightedSupport& f, const WeightedSupport& g, const WeightedSupport& v,
                             std::size_t n_max, const ExponentialSpec& phi);

/// r_n = kappa(P^{n+m} g) / mu(P^n g); target kappa(phi) / (mu(phi) R^m), which is R^{-m} when kappa = mu.
RatioSeries ratio_integrated_shift(const GroupSpace& space, const WeightedSupport& kappa, const WeightedSupport& mu,
                                   const WeightedSupport& g, std::size_t m, const WeightedSupport& v,
                                   std::size_t n_max, double R, const ExponentialSpec& phi);

/// r_n = P~^n f(x) / P~^n g(y) for the twisted law; target pi(f) / pi(g).
RatioSeries ratio_twisted(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& g,
                          const Element& x, const Element& y, const WeightedSupport& twisted_law, std::size_t n_max);

struct TranslationCheck {
  Element z;
  /// max over n <= n_max of |P^n g_z(x) - P^n g(y)| / |P^n g(y)|.
  double max_relative_gap = 0.0;
  double nu_gz = 0.0;
  double nu_g = 0.0;
  double phi_z = 0.0;
  /// |nu(g_z) - phi(z) nu(g)| / |phi(z) nu(g)|.
  double nu_identity_residual = 0.0;
  double target_pointwise = 0.0;
  double target_translated = 0.0;
};

/// g_z(u) = g(z u).
WeightedSupport left_translate(const GroupSpace& space, const WeightedSupport& g, const Element& z);

/// With z = y x^{-1}: compares P^n g_z(x) with P^n g(y), nu(g_z) with phi(z) nu(g), and the
/// pointwise target for (f, g, x, y) with the translated form phi(x) nu(f) / (phi(y) nu(g)).
TranslationCheck ratio_translation(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& g,
                                   const Element& x, const Element& y, const WeightedSupport& v, std::size_t n_max,
                                   const ExponentialSpec& phi);

/// max_x |R (nu P)(x) - nu(x)| over window elements whose full preimage lies in the window.
double nu_invariance_residual(const GroupSpace& space, const WeightedSupport& v, double R, const ExponentialSpec& phi,
                              std::span<const Element> window);

enum class WitnessKind { condition_a, small_domination };
std::string_view to_string(WitnessKind k);

struct ConditionWitness {
  WitnessKind kind = WitnessKind::condition_a;
  bool found = false;
  /// j for Condition A, m for small domination.
  std::size_t power = 0;
  /// gamma for Condition A, a for small domination.
  double coefficient = 0.0;
  /// min over the checked atoms of the inequality slack (>= 0 when found).
  double margin = 0.0;
};

/// Smallest j <= j_max with v^j({x}) >= gamma f(x) haar_weight(x) on supp f for some gamma > 0,
/// together with the largest such gamma.
ConditionWitness check_condition_A(const GroupSpace& space, const WeightedSupport& v, const WeightedSupport& f,
                                   std::size_t j_max);

/// Smallest m in [1, m_max] with supp(P^m g) covering supp f, and the minimal a with a P^m g >= f.
ConditionWitness check_small_domination(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& g,
                                        const WeightedSupport& v, std::size_t m_max);

struct ModularRatioOptions {
  std::size_t n_max = 400;
  std::vector<AffineElement> points;
  AffineBump g;
  /// Numerator bump for the P^n f(e) / P^n g(e) check.
  AffineBump f;
  /// Exponent c of the audit weighting a^{-c} (Haar); normally the fitted exponent.
  double audit_exponent = 0.0;
  double truncation_bound = 1e-3;
  double epsilon = 5e-2;
};

struct ModularRatioReport {
  double r = 1.0;
  std::vector<double> delta_oracle;
  std::vector<double> delta_closed_form;
  /// P^n g(x) / P^n g(e), target Delta(x).
  std::vector<RatioSeries> series_a;
  /// P^{n+1} g(x) / P^n g(e), target Delta(x) / r.
  std::vector<RatioSeries> series_b;
  /// P^{n+1} g(x) / P^n g(x), target 1 / r.
  std::vector<RatioSeries> series_b_same_point;
  /// P^n f(e) / P^n g(e), target pi(f) / pi(g).
  RatioSeries haar_ratio;
  /// cumulative absorbed fraction after each step.
  std::vector<double> absorbed;
  double truncation_mass = 0.0;
  /// Tail-average limit estimates for series B, one per point.
  std::vector<double> series_b_estimate;
  /// Index of a point whose series-B estimate is below one.
  std::optional<std::size_t> witness;
};

/// Runs the grid walk on the affine group from g and records the series above. The absorbed
/// mass is reported; callers compare it with `truncation_bound`.
ModularRatioReport modular_ratio(const GroupSpace& space, const AffineLaw& v, const ModularRatioOptions& opts);

/// Mean of the last `count` defined values of a series (a tail limit estimate).
double tail_mean(const RatioSeries& s, std::size_t count);

}  // namespace srlt
