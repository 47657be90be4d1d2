#pragma once

#include <cmath>
#include <random>

#include "srlt/group.hpp"
#include "srlt/weighted_support.hpp"

namespace fixtures {

inline constexpr double kQ = 0.2;
inline constexpr double kS = 0.2;
inline constexpr double kP = 0.6;

inline srlt::WeightedSupport biased_law() {
  return srlt::WeightedSupport(srlt::Role::measure, {{srlt::Element{-1}, kQ}, {srlt::Element{0}, kS}, {srlt::Element{1}, kP}});
}

inline srlt::WeightedSupport point(srlt::Coord k, double w = 1.0) {
  return srlt::WeightedSupport(srlt::Role::function, {{srlt::Element{k}, w}});
}

// Closed forms for the biased walk.
inline double t_star() { return 0.5 * std::log(kQ / kP); }
inline double inv_R() { return kS + 2.0 * std::sqrt(kP * kQ); }
inline double phi1() { return std::sqrt(kQ / kP); }

inline srlt::Element random_element(const srlt::GroupSpace& space, std::mt19937_64& rng) {
  using srlt::Coord;
  switch (space.kind()) {
    case srlt::GroupKind::integer_lattice: {
      std::uniform_int_distribution<Coord> d(-50, 50);
      srlt::Coords c;
      for (Coord i = 0; i < space.parameter(); ++i) c.push_back(d(rng));
      return srlt::Element(c);
    }
    case srlt::GroupKind::heisenberg: {
      std::uniform_int_distribution<Coord> d(-20, 20);
      return srlt::Element{d(rng), d(rng), d(rng)};
    }
    case srlt::GroupKind::cyclic: {
      std::uniform_int_distribution<Coord> d(0, space.parameter() - 1);
      return srlt::Element{d(rng)};
    }
    default: {
      std::uniform_int_distribution<int> len(0, 8);
      std::uniform_int_distribution<Coord> gen(1, space.parameter());
      std::bernoulli_distribution sign(0.5);
      srlt::Element x = space.identity();
      for (int k = len(rng); k > 0; --k) {
        const Coord g = gen(rng);
        x = space.mul(x, srlt::Element{sign(rng) ? g : -g});
      }
      return x;
    }
  }
}

}  // namespace fixtures
