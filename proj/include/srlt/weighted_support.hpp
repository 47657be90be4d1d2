#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "srlt/group.hpp"

namespace srlt {

enum class Role { measure, function };

/// A real number stored as mantissa * exp(exponent), so that quantities far below the
/// double range still divide correctly.
struct LogScaled {
  double mantissa = 0.0;
  double exponent = 0.0;

  double value() const { return mantissa * std::exp(exponent); }
  bool is_zero() const { return mantissa == 0.0; }
  /// log |value|; -inf for zero.
  double log_abs() const { return std::log(std::abs(mantissa)) + exponent; }
};

/// a / b, computed without forming either operand.
double ratio(const LogScaled& a, const LogScaled& b);

/// Finite collection of (element, weight) atoms on a discrete group.
///
/// As a measure the weights are atom masses (Haar weight already folded in); as a function
/// they are pointwise values. The represented quantity is weight * exp(log_scale); the log
/// scale absorbs renormalizations so that long operator powers never underflow.
class WeightedSupport {
 public:
  using Map = std::unordered_map<Element, double, ElementHash>;

  explicit WeightedSupport(Role role = Role::function) : role_(role) {}
  WeightedSupport(Role role, std::initializer_list<std::pair<Element, double>> atoms);

  static WeightedSupport dirac(const Element& x, double weight = 1.0, Role role = Role::measure);
  static WeightedSupport indicator(std::span<const Element> set);

  Role role() const noexcept { return role_; }
  double log_scale() const noexcept { return log_scale_; }
  const Map& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  auto begin() const { return atoms_.begin(); }
  auto end() const { return atoms_.end(); }

  /// Stored weight at x, before applying the log scale (0 off the support).
  double mantissa(const Element& x) const;
  double value(const Element& x) const { return mantissa(x) * std::exp(log_scale_); }
  LogScaled scaled_value(const Element& x) const { return {mantissa(x), log_scale_}; }

  double total_mantissa() const;
  /// Sum of weights times exp(log_scale).
  double mass() const { return total_mantissa() * std::exp(log_scale_); }
  LogScaled scaled_mass() const { return {total_mantissa(), log_scale_}; }
  bool nonnegative() const;
  double max_abs_mantissa() const;

  /// Atoms in canonical element order (deterministic output).
  std::vector<std::pair<Element, double>> sorted_atoms() const;
  std::vector<Element> support() const;

  void add(const Element& x, double weight);
  void set_log_scale(double s) { log_scale_ = s; }
  void reserve(std::size_t n) { atoms_.reserve(n); }

  WeightedSupport scaled(double c) const;
  WeightedSupport with_role(Role role) const;
  /// Largest |weight| becomes 1; the factor moves into the log scale.
  WeightedSupport renormalized() const;
  /// Same represented values with log scale 0.
  WeightedSupport flattened() const;

  /// Multiplies each atom weight by fn(element).
  template <class Fn>
  WeightedSupport transformed(Fn&& fn) const {
    WeightedSupport out(role_);
    out.log_scale_ = log_scale_;
    out.atoms_.reserve(atoms_.size());
    for (const auto& [x, w] : atoms_) out.atoms_.emplace(x, w * fn(x));
    return out;
  }

  /// All atoms canonical in `space` and within its support budget.
  void validate(const GroupSpace& space) const;

 private:
  Role role_;
  Map atoms_;
  double log_scale_ = 0.0;
};

/// Pointwise linear combination a*f + b*g of two functions (result log scale 0).
WeightedSupport linear_combination(double a, const WeightedSupport& f, double b, const WeightedSupport& g);

/// Maximum atomwise |x - y| over the union of supports, on represented values.
double max_abs_difference(const WeightedSupport& x, const WeightedSupport& y);

}  // namespace srlt
