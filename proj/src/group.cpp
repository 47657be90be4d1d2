#include "srlt/group.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "srlt/errors.hpp"

namespace srlt {

std::strong_ordering Element::operator<=>(const Element& o) const {
  return std::lexicographical_compare_three_way(c.begin(), c.end(), o.c.begin(), o.c.end());
}

std::size_t ElementHash::operator()(const Element& x) const noexcept {
  std::uint64_t h = 0x9E3779B97F4A7C15ull ^ x.c.size();
  for (Coord v : x.c) {
    std::uint64_t k = static_cast<std::uint64_t>(v);
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdull;
    k ^= k >> 33;
    h ^= k + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

double AffineElement::log2a() const { return std::log2(a); }

AffineElement AffineElement::from_grid(double log2a, double b) { return {std::exp2(log2a), b}; }

int GridAffineSpec::b_nodes_per_side() const { return static_cast<int>(std::llround(b_bound / b_step)); }

bool GridAffineSpec::contains(const AffineElement& x) const {
  if (!(x.a > 0.0)) return false;
  const double slack = 1e-9;
  return std::abs(x.log2a()) <= log2a_bound() + slack * log2_step &&
         std::abs(x.b) <= b_nodes_per_side() * b_step + slack * b_step;
}

double GridAffineSpec::cell_mass() const { return std::numbers::ln2 * log2_step * b_step; }

void GridAffineSpec::validate() const {
  if (levels_per_side < 1) throw GroupMismatch("grid: levels_per_side must be >= 1");
  if (!(log2_step > 0.0)) throw GroupMismatch("grid: log2_step must be positive");
  if (!(b_step > 0.0)) throw GroupMismatch("grid: b_step must be positive");
  if (!(b_bound >= b_step)) throw GroupMismatch("grid: b_bound must be at least one b_step");
}

std::string_view to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::integer_lattice: return "integer_lattice";
    case GroupKind::free_group: return "free_group";
    case GroupKind::heisenberg: return "heisenberg";
    case GroupKind::cyclic: return "cyclic";
    case GroupKind::grid_affine: return "grid_affine";
  }
  return "unknown";
}

std::optional<GroupKind> group_kind_from_string(std::string_view name) {
  for (auto k : {GroupKind::integer_lattice, GroupKind::free_group, GroupKind::heisenberg, GroupKind::cyclic,
                 GroupKind::grid_affine})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

GroupSpace GroupSpace::integer_lattice(int dimension, std::size_t budget) {
  if (dimension < 1) throw GroupMismatch("integer lattice dimension must be >= 1");
  return GroupSpace(GroupKind::integer_lattice, dimension, budget);
}

GroupSpace GroupSpace::free_group(int rank, std::size_t budget) {
  if (rank < 1 || rank > 26) throw GroupMismatch("free group rank must be in [1, 26]");
  return GroupSpace(GroupKind::free_group, rank, budget);
}

GroupSpace GroupSpace::heisenberg(std::size_t budget) { return GroupSpace(GroupKind::heisenberg, 3, budget); }

GroupSpace GroupSpace::cyclic(Coord modulus, std::size_t budget) {
  if (modulus < 1) throw GroupMismatch("cyclic modulus must be >= 1");
  return GroupSpace(GroupKind::cyclic, modulus, budget);
}

GroupSpace GroupSpace::grid_affine(GridAffineSpec spec, std::size_t budget) {
  spec.validate();
  GroupSpace g(GroupKind::grid_affine, 2, budget);
  g.grid_ = spec;
  return g;
}

const GridAffineSpec& GroupSpace::grid() const {
  require_affine();
  return *grid_;
}

std::string GroupSpace::name() const {
  switch (kind_) {
    case GroupKind::integer_lattice: return param_ == 1 ? "Z" : fmt::format("Z^{}", param_);
    case GroupKind::free_group: return fmt::format("F_{}", param_);
    case GroupKind::heisenberg: return "H3(Z)";
    case GroupKind::cyclic: return fmt::format("Z/{}Z", param_);
    case GroupKind::grid_affine:
      return fmt::format("Aff(K={},ds={},h={},B={})", grid_->levels_per_side, grid_->log2_step, grid_->b_step,
                         grid_->b_bound);
  }
  return "?";
}

bool GroupSpace::operator==(const GroupSpace& o) const {
  if (kind_ != o.kind_ || param_ != o.param_) return false;
  if (kind_ != GroupKind::grid_affine) return true;
  const auto& a = *grid_;
  const auto& b = *o.grid_;
  return a.levels_per_side == b.levels_per_side && a.log2_step == b.log2_step && a.b_step == b.b_step &&
         a.b_bound == b.b_bound;
}

void GroupSpace::require_discrete() const {
  if (!is_discrete()) throw GroupMismatch(fmt::format("{}: discrete element used on a grid-lie group", name()));
}

void GroupSpace::require_affine() const {
  if (is_discrete()) throw GroupMismatch(fmt::format("{}: affine element used on a discrete group", name()));
}

bool GroupSpace::is_valid(const Element& x) const {
  switch (kind_) {
    case GroupKind::integer_lattice: return static_cast<Coord>(x.c.size()) == param_;
    case GroupKind::heisenberg: return x.c.size() == 3;
    case GroupKind::cyclic: return x.c.size() == 1 && x.c[0] >= 0 && x.c[0] < param_;
    case GroupKind::free_group:
      for (std::size_t i = 0; i < x.c.size(); ++i) {
        const Coord l = x.c[i];
        if (l == 0 || std::abs(l) > param_) return false;
        if (i > 0 && x.c[i - 1] == -l) return false;
      }
      return true;
    case GroupKind::grid_affine: return false;
  }
  return false;
}

void GroupSpace::validate(const Element& x) const {
  require_discrete();
  if (!is_valid(x)) throw GroupMismatch(fmt::format("{}: not a canonical element of {}", format(x), name()));
}

Element GroupSpace::identity() const {
  require_discrete();
  switch (kind_) {
    case GroupKind::integer_lattice: return Element(Coords(static_cast<std::size_t>(param_), 0));
    case GroupKind::heisenberg: return Element{0, 0, 0};
    case GroupKind::cyclic: return Element{0};
    default: return Element{};
  }
}

namespace {

Coord mod(Coord v, Coord m) {
  Coord r = v % m;
  return r < 0 ? r + m : r;
}

}  // namespace

Element GroupSpace::mul(const Element& x, const Element& y) const {
  require_discrete();
  switch (kind_) {
    case GroupKind::integer_lattice: {
      if (x.c.size() != y.c.size() || static_cast<Coord>(x.c.size()) != param_)
        throw GroupMismatch(fmt::format("{}: dimension mismatch", name()));
      Element z = x;
      for (std::size_t i = 0; i < z.c.size(); ++i) z.c[i] += y.c[i];
      return z;
    }
    case GroupKind::heisenberg: {
      if (x.c.size() != 3 || y.c.size() != 3) throw GroupMismatch("H3(Z): elements have three coordinates");
      return Element{x.c[0] + y.c[0], x.c[1] + y.c[1], x.c[2] + y.c[2] + x.c[0] * y.c[1]};
    }
    case GroupKind::cyclic: {
      if (x.c.size() != 1 || y.c.size() != 1) throw GroupMismatch(fmt::format("{}: scalar elements", name()));
      return Element{mod(x.c[0] + y.c[0], param_)};
    }
    case GroupKind::free_group: {
      // Cancel the longest suffix of x against the prefix of y.
      std::size_t i = x.c.size();
      std::size_t j = 0;
      while (i > 0 && j < y.c.size() && x.c[i - 1] == -y.c[j]) {
        --i;
        ++j;
      }
      Element z;
      z.c.reserve(i + y.c.size() - j);
      z.c.insert(z.c.end(), x.c.begin(), x.c.begin() + static_cast<std::ptrdiff_t>(i));
      z.c.insert(z.c.end(), y.c.begin() + static_cast<std::ptrdiff_t>(j), y.c.end());
      return z;
    }
    case GroupKind::grid_affine: break;
  }
  throw GroupMismatch("unreachable");
}

Element GroupSpace::inv(const Element& x) const {
  require_discrete();
  switch (kind_) {
    case GroupKind::integer_lattice: {
      Element z = x;
      for (auto& v : z.c) v = -v;
      return z;
    }
    case GroupKind::heisenberg: return Element{-x.c[0], -x.c[1], -x.c[2] + x.c[0] * x.c[1]};
    case GroupKind::cyclic: return Element{mod(-x.c[0], param_)};
    case GroupKind::free_group: {
      Element z;
      z.c.reserve(x.c.size());
      for (auto it = x.c.rbegin(); it != x.c.rend(); ++it) z.c.push_back(-*it);
      return z;
    }
    case GroupKind::grid_affine: break;
  }
  throw GroupMismatch("unreachable");
}

double GroupSpace::haar_weight(const Element& x) const {
  validate(x);
  return 1.0;
}

double GroupSpace::modular(const Element& x) const {
  validate(x);
  return 1.0;
}

AffineElement GroupSpace::affine_identity() const {
  require_affine();
  return {1.0, 0.0};
}

AffineElement GroupSpace::mul(const AffineElement& x, const AffineElement& y) const {
  require_affine();
  return {x.a * y.a, x.a * y.b + x.b};
}

AffineElement GroupSpace::inv(const AffineElement& x) const {
  require_affine();
  return {1.0 / x.a, -x.b / x.a};
}

double GroupSpace::haar_weight(const AffineElement& x) const {
  require_affine();
  if (!grid_->contains(x))
    throw OutsideWindow(fmt::format("({}, {}) lies outside the grid window of {}", x.a, x.b, name()));
  return grid_->cell_mass();
}

double GroupSpace::modular(const AffineElement& x) const {
  require_affine();
  return 1.0 / x.a;
}

std::vector<Coord> GroupSpace::abelianize(const Element& x) const {
  validate(x);
  switch (kind_) {
    case GroupKind::integer_lattice: return {x.c.begin(), x.c.end()};
    case GroupKind::heisenberg: return {x.c[0], x.c[1]};
    case GroupKind::cyclic: return {};
    case GroupKind::free_group: {
      std::vector<Coord> e(static_cast<std::size_t>(param_), 0);
      for (Coord l : x.c) e[static_cast<std::size_t>(std::abs(l) - 1)] += l > 0 ? 1 : -1;
      return e;
    }
    case GroupKind::grid_affine: break;
  }
  return {};
}

int GroupSpace::exponent_dim() const {
  switch (kind_) {
    case GroupKind::integer_lattice: return static_cast<int>(param_);
    case GroupKind::heisenberg: return 2;
    case GroupKind::cyclic: return 0;
    case GroupKind::free_group: return static_cast<int>(param_);
    case GroupKind::grid_affine: return 1;
  }
  return 0;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

Coords parse_tuple(std::string_view s) {
  s = trim(s);
  if (!s.empty() && (s.front() == '(' || s.front() == '[')) {
    if (s.size() < 2 || (s.back() != ')' && s.back() != ']')) throw GroupMismatch("unterminated tuple");
    s = s.substr(1, s.size() - 2);
  }
  Coords out;
  while (true) {
    auto comma = s.find(',');
    auto tok = trim(s.substr(0, comma));
    if (tok.empty()) throw GroupMismatch("empty coordinate");
    std::size_t used = 0;
    const std::string t(tok);
    Coord v = 0;
    try {
      v = std::stoll(t, &used);
    } catch (const std::exception&) {
      throw GroupMismatch("bad coordinate '" + t + "'");
    }
    if (used != t.size()) throw GroupMismatch("bad coordinate '" + t + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

Element GroupSpace::parse(std::string_view text) const {
  require_discrete();
  text = trim(text);
  Element x;
  if (kind_ == GroupKind::free_group) {
    if (text == "e" || text.empty()) return x;
    std::size_t i = 0;
    while (i < text.size()) {
      const char ch = text[i];
      if (!std::isalpha(static_cast<unsigned char>(ch))) throw GroupMismatch(fmt::format("bad word '{}'", text));
      Coord letter = std::islower(static_cast<unsigned char>(ch)) ? (ch - 'a' + 1) : -(ch - 'A' + 1);
      ++i;
      if (text.substr(i, 3) == "^-1") {
        letter = -letter;
        i += 3;
      } else if (text.substr(i, 5) == "⁻¹") {  // superscript minus one
        letter = -letter;
        i += 5;
      }
      if (std::abs(letter) > param_) throw GroupMismatch(fmt::format("letter '{}' exceeds rank {}", ch, param_));
      x = mul(x, Element{letter});
    }
    return x;
  }
  x.c = parse_tuple(text);
  if (kind_ == GroupKind::cyclic && x.c.size() == 1) x.c[0] = mod(x.c[0], param_);
  validate(x);
  return x;
}

std::string GroupSpace::format(const Element& x) const {
  if (kind_ == GroupKind::free_group) {
    if (x.c.empty()) return "e";
    std::string s;
    for (Coord l : x.c) {
      s += static_cast<char>('a' + std::abs(l) - 1);
      if (l < 0) s += "^-1";
    }
    return s;
  }
  if (x.c.size() == 1) return std::to_string(x.c[0]);
  std::string s = "(";
  for (std::size_t i = 0; i < x.c.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(x.c[i]);
  }
  return s + ")";
}

}  // namespace srlt
