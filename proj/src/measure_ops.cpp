#include "srlt/measure_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "srlt/errors.hpp"

namespace srlt {

namespace {

void check_budget(const GroupSpace& space, const WeightedSupport::Map& m, std::size_t step = 0) {
  if (m.size() > space.support_budget()) throw BudgetExceeded(m.size(), space.support_budget(), step);
}

void require_discrete(const GroupSpace& space, const char* op) {
  if (!space.is_discrete())
    throw GroupMismatch(std::string(op) + ": grid-lie groups use the quadrature path (apply_P_grid)");
}

}  // namespace

WeightedSupport convolve(const GroupSpace& space, const WeightedSupport& mu, const WeightedSupport& nu) {
  require_discrete(space, "convolve");
  WeightedSupport out(Role::measure);
  out.set_log_scale(mu.log_scale() + nu.log_scale());
  WeightedSupport::Map acc;
  acc.reserve(std::min(mu.size() * nu.size(), space.support_budget() + 1));
  for (const auto& [x, wx] : mu) {
    for (const auto& [y, wy] : nu) {
      acc[space.mul(x, y)] += wx * wy;
    }
    check_budget(space, acc);
  }
  out.reserve(acc.size());
  for (auto& [z, w] : acc) out.add(z, w);
  return out;
}

namespace {

WeightedSupport apply_with_inverse(const GroupSpace& space, const WeightedSupport& f,
                                   const std::vector<std::pair<Element, double>>& inverse_law, double law_scale) {
  WeightedSupport::Map acc;
  acc.reserve(std::min(f.size() * inverse_law.size(), space.support_budget() + 1));
  // Pf(x) = sum_y f(x y) v(y): each atom z of f feeds x = z y^{-1}.
  for (const auto& [z, fz] : f) {
    for (const auto& [yinv, vy] : inverse_law) acc[space.mul(z, yinv)] += fz * vy;
    check_budget(space, acc);
  }
  WeightedSupport out(Role::function);
  out.reserve(acc.size());
  for (auto& [x, w] : acc) out.add(x, w);
  out.set_log_scale(f.log_scale() + law_scale);
  return out;
}

std::vector<std::pair<Element, double>> invert_law(const GroupSpace& space, const WeightedSupport& v) {
  std::vector<std::pair<Element, double>> inv;
  inv.reserve(v.size());
  for (const auto& [y, w] : v.sorted_atoms()) inv.emplace_back(space.inv(y), w);
  return inv;
}

}  // namespace

WeightedSupport apply_P(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& v) {
  require_discrete(space, "apply_P");
  return apply_with_inverse(space, f, invert_law(space, v), v.log_scale());
}

PowerIterator::PowerIterator(const GroupSpace& space, const WeightedSupport& f, WeightedSupport law)
    : space_(&space), law_(std::move(law)), offset_(f.log_scale()) {
  require_discrete(space, "iterate_P");
  inverse_law_ = invert_law(space, law_);
  cells_.reserve(f.size());
  for (const auto& [x, w] : f) {
    if (w == 0.0) continue;
    int ex = 0;
    const double m = std::frexp(w, &ex);
    cells_.emplace(x, Cell{m, ex});
  }
}

void PowerIterator::advance() {
  ++n_;
  CellMap acc;
  acc.reserve(std::min(cells_.size() * inverse_law_.size(), space_->support_budget() + 1));
  // Pf(x) = sum_y f(x y) v(y): each atom z of f feeds x = z y^{-1}.
  for (const auto& [z, c] : cells_) {
    for (const auto& [yinv, vy] : inverse_law_) {
      const double m = c.m * vy;
      if (m == 0.0) continue;
      auto [it, fresh] = acc.try_emplace(space_->mul(z, yinv), Cell{m, c.e});
      if (fresh) continue;
      Cell& a = it->second;
      if (c.e > a.e) {
        a.m = std::ldexp(a.m, static_cast<int>(std::max<std::int64_t>(a.e - c.e, -2000))) + m;
        a.e = c.e;
      } else {
        a.m += std::ldexp(m, static_cast<int>(std::max<std::int64_t>(c.e - a.e, -2000)));
      }
    }
    if (acc.size() > space_->support_budget()) throw BudgetExceeded(acc.size(), space_->support_budget(), n_);
  }
  for (auto it = acc.begin(); it != acc.end();) {
    if (it->second.m == 0.0) {
      it = acc.erase(it);
      continue;
    }
    int ex = 0;
    it->second.m = std::frexp(it->second.m, &ex);
    it->second.e += ex;
    ++it;
  }
  cells_ = std::move(acc);
  offset_ += law_.log_scale();
  materialized_.reset();
}

LogScaled PowerIterator::at(const Element& x) const {
  const auto it = cells_.find(x);
  if (it == cells_.end()) return {0.0, 0.0};
  return {it->second.m, static_cast<double>(it->second.e) * std::log(2.0) + offset_};
}

LogScaled PowerIterator::integrate(const WeightedSupport& kappa) const {
  std::vector<std::pair<const Cell*, double>> hits;
  std::int64_t emax = std::numeric_limits<std::int64_t>::min();
  for (const auto& [x, w] : kappa.sorted_atoms()) {
    const auto it = cells_.find(x);
    if (it == cells_.end() || w == 0.0) continue;
    hits.emplace_back(&it->second, w);
    emax = std::max(emax, it->second.e);
  }
  if (hits.empty()) return {0.0, 0.0};
  double s = 0.0;
  for (const auto& [c, w] : hits) s += std::ldexp(c->m * w, static_cast<int>(std::max<std::int64_t>(c->e - emax, -2000)));
  return {s, static_cast<double>(emax) * std::log(2.0) + offset_ + kappa.log_scale()};
}

const WeightedSupport& PowerIterator::current() const {
  if (materialized_) return *materialized_;
  WeightedSupport out(Role::function);
  std::int64_t emax = std::numeric_limits<std::int64_t>::min();
  for (const auto& [x, c] : cells_) emax = std::max(emax, c.e);
  double mmax = 0.0;
  for (const auto& [x, c] : cells_)
    if (c.e == emax) mmax = std::max(mmax, std::abs(c.m));
  if (cells_.empty()) emax = 0;
  out.reserve(cells_.size());
  for (const auto& [x, c] : cells_) {
    const double w = std::ldexp(c.m / (mmax > 0.0 ? mmax : 1.0), static_cast<int>(std::max<std::int64_t>(c.e - emax, -2000)));
    out.add(x, w);
  }
  out.set_log_scale(static_cast<double>(emax) * std::log(2.0) + (mmax > 0.0 ? std::log(mmax) : 0.0) + offset_);
  materialized_ = std::move(out);
  return *materialized_;
}

std::vector<WeightedSupport> iterate_P(const GroupSpace& space, const WeightedSupport& f, const WeightedSupport& v,
                                       std::size_t n) {
  if (n < 1) throw PreconditionViolation("iterate_P: n must be >= 1");
  PowerIterator it(space, f, v);
  std::vector<WeightedSupport> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    it.advance();
    out.push_back(it.current());
  }
  return out;
}

LogScaled integrate_scaled(const WeightedSupport& kappa, const WeightedSupport& f) {
  const WeightedSupport& small = kappa.size() <= f.size() ? kappa : f;
  const WeightedSupport& large = kappa.size() <= f.size() ? f : kappa;
  double s = 0.0;
  for (const auto& [x, w] : small.sorted_atoms()) s += w * large.mantissa(x);
  return {s, kappa.log_scale() + f.log_scale()};
}

double integrate(const WeightedSupport& kappa, const WeightedSupport& f) { return integrate_scaled(kappa, f).value(); }

std::vector<double> log_return_probabilities(const GroupSpace& space, const WeightedSupport& v, std::size_t n_max) {
  const Element e = space.identity();
  PowerIterator it(space, WeightedSupport::dirac(e, 1.0, Role::function), v);
  std::vector<double> out;
  out.reserve(n_max + 1);
  out.push_back(0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    it.advance();
    out.push_back(it.at(e).log_abs());
  }
  return out;
}

std::vector<double> radial_log_return_probabilities(int rank, double laziness, std::size_t n_max) {
  if (rank < 1) throw PreconditionViolation("radial chain: rank must be >= 1");
  if (!(laziness >= 0.0 && laziness < 1.0)) throw PreconditionViolation("radial chain: laziness must be in [0, 1)");
  const double move = 1.0 - laziness;
  const double up = move * (2.0 * rank - 1.0) / (2.0 * rank);
  const double down = move / (2.0 * rank);
  // dist[l] = P(|X_n| = l) * exp(-log_scale)
  std::vector<double> dist(n_max + 2, 0.0), next(n_max + 2, 0.0);
  dist[0] = 1.0;
  double log_scale = 0.0;
  std::vector<double> out;
  out.reserve(n_max + 1);
  out.push_back(0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::fill(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(n + 1), 0.0);
    next[0] += laziness * dist[0];
    next[1] += move * dist[0];
    for (std::size_t l = 1; l < n; ++l) {
      next[l] += laziness * dist[l];
      next[l + 1] += up * dist[l];
      next[l - 1] += down * dist[l];
    }
    double m = *std::max_element(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(n + 1));
    for (std::size_t l = 0; l <= n; ++l) next[l] /= m;
    log_scale += std::log(m);
    std::swap(dist, next);
    out.push_back(std::log(dist[0]) + log_scale);
  }
  return out;
}

std::vector<double> radial_return_probabilities(int rank, double laziness, std::size_t n_max) {
  auto logs = radial_log_return_probabilities(rank, laziness, n_max);
  std::vector<double> out(logs.size());
  std::transform(logs.begin(), logs.end(), out.begin(), [](double l) { return std::exp(l); });
  return out;
}

WeightedSupport lazy_free_group_law(const GroupSpace& space, double laziness) {
  if (space.kind() != GroupKind::free_group) throw GroupMismatch("lazy_free_group_law: free group required");
  const auto k = space.parameter();
  WeightedSupport v(Role::measure);
  v.add(space.identity(), laziness);
  for (Coord i = 1; i <= k; ++i) {
    v.add(Element{i}, (1.0 - laziness) / (2.0 * static_cast<double>(k)));
    v.add(Element{-i}, (1.0 - laziness) / (2.0 * static_cast<double>(k)));
  }
  return v;
}

}  // namespace srlt
