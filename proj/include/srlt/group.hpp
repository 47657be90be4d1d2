#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace srlt {

using Coord = std::int64_t;
using Coords = boost::container::small_vector<Coord, 3>;

/// Canonical element of a discrete group.
///
/// The encoding depends on the group kind:
///   integer lattice Z^d   d coordinates
///   Heisenberg H3(Z)      (a, b, c) with (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')
///   cyclic Z/mZ           one coordinate in [0, m)
///   free group F_k        fully reduced word; letter +i / -i is generator i (1-based) or its inverse
struct Element {
  Coords c;

  Element() = default;
  Element(std::initializer_list<Coord> coords) : c(coords) {}
  explicit Element(Coords coords) : c(std::move(coords)) {}

  bool operator==(const Element& o) const { return c == o.c; }
  std::strong_ordering operator<=>(const Element& o) const;
};

struct ElementHash {
  std::size_t operator()(const Element& x) const noexcept;
};

/// Point of the affine group {x -> a x + b : a > 0}, stored as (a, b).
/// Composition (a1,b1)(a2,b2) = (a1 a2, a1 b2 + b1).
struct AffineElement {
  double a = 1.0;
  double b = 0.0;

  double log2a() const;
  static AffineElement from_grid(double log2a, double b);
  bool operator==(const AffineElement&) const = default;
};

/// Quadrature grid for the affine group in (log2 a, b) coordinates.
///
/// Nodes are log2 a = i * log2_step for |i| <= levels_per_side and b = j * b_step for
/// |b| <= b_bound. Anything outside the window is absorbed.
struct GridAffineSpec {
  int levels_per_side = 8;
  double log2_step = 1.0;
  double b_step = 0.05;
  double b_bound = 20.0;

  int b_nodes_per_side() const;
  double log2a_bound() const { return levels_per_side * log2_step; }
  bool contains(const AffineElement& x) const;
  /// Exact right-Haar mass of one grid cell: ln 2 * log2_step * b_step.
  double cell_mass() const;
  void validate() const;
};

enum class GroupKind { integer_lattice, free_group, heisenberg, cyclic, grid_affine };

std::string_view to_string(GroupKind kind);
std::optional<GroupKind> group_kind_from_string(std::string_view name);

inline constexpr std::size_t kDefaultSupportBudget = 5'000'000;

/// An explicit group together with its Haar weights and modular function.
///
/// Discrete kinds use counting measure (haar_weight = 1, modular = 1). The grid-lie kind
/// (affine group) works on AffineElement values; calling the discrete overloads on it, or the
/// affine overloads on a discrete group, raises GroupMismatch.
class GroupSpace {
 public:
  static GroupSpace integer_lattice(int dimension, std::size_t budget = kDefaultSupportBudget);
  static GroupSpace free_group(int rank, std::size_t budget = kDefaultSupportBudget);
  static GroupSpace heisenberg(std::size_t budget = kDefaultSupportBudget);
  static GroupSpace cyclic(Coord modulus, std::size_t budget = kDefaultSupportBudget);
  static GroupSpace grid_affine(GridAffineSpec spec, std::size_t budget = kDefaultSupportBudget);

  GroupKind kind() const noexcept { return kind_; }
  bool is_discrete() const noexcept { return kind_ != GroupKind::grid_affine; }
  /// Dimension for Z^d, rank for F_k, modulus for Z/mZ, 3 for H3, 2 for the affine group.
  Coord parameter() const noexcept { return param_; }
  std::size_t support_budget() const noexcept { return budget_; }
  const GridAffineSpec& grid() const;
  std::string name() const;

  Element identity() const;
  Element mul(const Element& x, const Element& y) const;
  Element inv(const Element& x) const;
  double haar_weight(const Element& x) const;
  double modular(const Element& x) const;

  AffineElement affine_identity() const;
  AffineElement mul(const AffineElement& x, const AffineElement& y) const;
  AffineElement inv(const AffineElement& x) const;
  double haar_weight(const AffineElement& x) const;
  /// Closed form 1/a under the composition convention above.
  double modular(const AffineElement& x) const;

  /// Throws GroupMismatch unless x is a canonical element of this space.
  void validate(const Element& x) const;
  bool is_valid(const Element& x) const;

  /// Image in the abelianization lattice Z^r; exponentials factor through it.
  std::vector<Coord> abelianize(const Element& x) const;
  /// r, the rank of the exponential parameter space (0 for finite groups).
  int exponent_dim() const;

  /// Parses the textual codec: "3", "(1,-2)", "(1,0,5)", "abA", "b^-1a", "e".
  Element parse(std::string_view text) const;
  std::string format(const Element& x) const;

  bool operator==(const GroupSpace& o) const;

 private:
  GroupSpace(GroupKind kind, Coord param, std::size_t budget) : kind_(kind), param_(param), budget_(budget) {}
  void require_discrete() const;
  void require_affine() const;

  GroupKind kind_;
  Coord param_;
  std::size_t budget_;
  std::optional<GridAffineSpec> grid_;
};

}  // namespace srlt
