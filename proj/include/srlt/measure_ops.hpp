#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "srlt/group.hpp"
#include "srlt/weighted_support.hpp"

namespace srlt {

/// (mu * nu)(z) = sum over x y = z of mu(x) nu(y). Log scales add.
/// Throws BudgetExceeded when the product support outgrows the space's budget.
WeightedSupport convolve(const GroupSpace& space, const WeightedSupport& mu, const WeightedSupport& nu);

/// Transition operator of the walk with law v: Pf(x) = sum_y f(x y) v({y}).
WeightedSupport apply_P(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& v);

/// Steps f, Pf, P^2 f, ... without underflow.
///
/// Each atom carries its own binary exponent, so values far below the largest atom (for example
/// v^n(e) under a strongly drifting law) keep full relative precision. `current()` materializes the
/// power as a WeightedSupport with the largest |atom| at 1 and the scale in the log-scale ledger.
class PowerIterator {
 public:
  PowerIterator(const GroupSpace& space, const WeightedSupport& f, WeightedSupport law);

  /// Current power index n (P^n f is held).
  std::size_t step() const noexcept { return n_; }
  const WeightedSupport& current() const;
  LogScaled at(const Element& x) const;
  /// kappa(P^n f).
  LogScaled integrate(const WeightedSupport& kappa) const;
  std::size_t size() const noexcept { return cells_.size(); }
  /// Applies P once. Throws BudgetExceeded tagged with the failing step.
  void advance();

 private:
  struct Cell {
    double m = 0.0;
    std::int64_t e = 0;
  };
  using CellMap = std::unordered_map<Element, Cell, ElementHash>;

  const GroupSpace* space_;
  WeightedSupport law_;
  std::vector<std::pair<Element, double>> inverse_law_;
  CellMap cells_;
  /// Represented value of an atom: m * 2^e * exp(offset_).
  double offset_ = 0.0;
  std::size_t n_ = 0;
  mutable std::optional<WeightedSupport> materialized_;
};

/// P^1 f, ..., P^n f (renormalized). Prefer PowerIterator for long runs; this keeps every power.
std::vector<WeightedSupport> iterate_P(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& v,
                                       std::size_t n);

/// kappa(f) = sum_x kappa({x}) f(x).
double integrate(const WeightedSupport& kappa, const WeightedSupport& f);
LogScaled integrate_scaled(const WeightedSupport& kappa, const WeightedSupport& f);

/// log v^n(e) for n = 0..n_max, by renormalized iteration of P on the indicator of e.
std::vector<double> log_return_probabilities(const GroupSpace& space, const WeightedSupport& v, std::size_t n_max);

/// Exact P(X_n = e), n = 0..n_max, for the lazy simple random walk on F_k, computed on the
/// word-length chain. The law holds `laziness` at e and spreads the rest over the 2k generators.
std::vector<double> radial_return_probabilities(int rank, double laziness, std::size_t n_max);
/// Same, as natural logarithms (renormalized internally, no underflow).
std::vector<double> radial_log_return_probabilities(int rank, double laziness, std::size_t n_max);

/// Lazy simple random walk law on F_k as atoms.
WeightedSupport lazy_free_group_law(const GroupSpace& space, double laziness);

}  // namespace srlt
