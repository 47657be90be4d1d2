#include "srlt/weighted_support.hpp"

#include <algorithm>

#include "srlt/errors.hpp"

namespace srlt {

double ratio(const LogScaled& a, const LogScaled& b) {
  if (b.mantissa == 0.0) return a.mantissa == 0.0 ? std::nan("") : std::copysign(INFINITY, a.mantissa);
  return a.mantissa / b.mantissa * std::exp(a.exponent - b.exponent);
}

WeightedSupport::WeightedSupport(Role role, std::initializer_list<std::pair<Element, double>> atoms)
    : role_(role) {
  for (const auto& [x, w] : atoms) add(x, w);
}

WeightedSupport WeightedSupport::dirac(const Element& x, double weight, Role role) {
  WeightedSupport s(role);
  s.add(x, weight);
  return s;
}

WeightedSupport WeightedSupport::indicator(std::span<const Element> set) {
  WeightedSupport s(Role::function);
  for (const auto& x : set) s.atoms_[x] = 1.0;
  return s;
}

double WeightedSupport::mantissa(const Element& x) const {
  auto it = atoms_.find(x);
  return it == atoms_.end() ? 0.0 : it->second;
}

double WeightedSupport::total_mantissa() const {
  // Sorted summation keeps the result independent of hash-table layout.
  std::vector<double> w;
  w.reserve(atoms_.size());
  for (const auto& [x, v] : atoms_) w.push_back(v);
  std::sort(w.begin(), w.end());
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

bool WeightedSupport::nonnegative() const {
  return std::all_of(atoms_.begin(), atoms_.end(), [](const auto& a) { return a.second >= 0.0; });
}

double WeightedSupport::max_abs_mantissa() const {
  double m = 0.0;
  for (const auto& [x, w] : atoms_) m = std::max(m, std::abs(w));
  return m;
}

std::vector<std::pair<Element, double>> WeightedSupport::sorted_atoms() const {
  std::vector<std::pair<Element, double>> out(atoms_.begin(), atoms_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::vector<Element> WeightedSupport::support() const {
  std::vector<Element> out;
  out.reserve(atoms_.size());
  for (const auto& [x, w] : atoms_) out.push_back(x);
  std::sort(out.begin(), out.end());
  return out;
}

void WeightedSupport::add(const Element& x, double weight) { atoms_[x] += weight; }

WeightedSupport WeightedSupport::scaled(double c) const {
  return transformed([c](const Element&) { return c; });
}

WeightedSupport WeightedSupport::with_role(Role role) const {
  WeightedSupport out = *this;
  out.role_ = role;
  return out;
}

WeightedSupport WeightedSupport::renormalized() const {
  const double m = max_abs_mantissa();
  if (m == 0.0 || m == 1.0) return *this;
  WeightedSupport out = scaled(1.0 / m);
  out.log_scale_ = log_scale_ + std::log(m);
  return out;
}

WeightedSupport WeightedSupport::flattened() const {
  if (log_scale_ == 0.0) return *this;
  WeightedSupport out = scaled(std::exp(log_scale_));
  out.log_scale_ = 0.0;
  return out;
}

void WeightedSupport::validate(const GroupSpace& space) const {
  if (atoms_.size() > space.support_budget()) throw BudgetExceeded(atoms_.size(), space.support_budget());
  for (const auto& [x, w] : atoms_) space.validate(x);
}

WeightedSupport linear_combination(double a, const WeightedSupport& f, double b, const WeightedSupport& g) {
  WeightedSupport out(f.role());
  const double sf = a * std::exp(f.log_scale());
  const double sg = b * std::exp(g.log_scale());
  out.reserve(f.size() + g.size());
  for (const auto& [x, w] : f) out.add(x, sf * w);
  for (const auto& [x, w] : g) out.add(x, sg * w);
  return out;
}

double max_abs_difference(const WeightedSupport& x, const WeightedSupport& y) {
  double m = 0.0;
  for (const auto& [e, w] : x) m = std::max(m, std::abs(x.value(e) - y.value(e)));
  for (const auto& [e, w] : y)
    if (!x.atoms().count(e)) m = std::max(m, std::abs(y.value(e)));
  return m;
}

}  // namespace srlt
