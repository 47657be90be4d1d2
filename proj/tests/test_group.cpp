#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "srlt/errors.hpp"
#include "srlt/grid_affine.hpp"
#include "srlt/group.hpp"

using namespace srlt;

namespace {

std::vector<GroupSpace> discrete_zoo() {
  return {GroupSpace::integer_lattice(1), GroupSpace::integer_lattice(3), GroupSpace::free_group(2),
          GroupSpace::free_group(3), GroupSpace::heisenberg(), GroupSpace::cyclic(7)};
}

GroupSpace affine_space() {
  GridAffineSpec spec;
  spec.levels_per_side = 24;
  spec.log2_step = 0.25;
  spec.b_step = 0.02;
  spec.b_bound = 12.0;
  return GroupSpace::grid_affine(spec);
}

}  // namespace

TEST_CASE("integer lattice arithmetic") {
  const auto z = GroupSpace::integer_lattice(1);
  CHECK(z.mul(Element{2}, Element{3}) == Element{5});
  CHECK(z.inv(Element{5}) == Element{-5});
  CHECK(z.haar_weight(Element{7}) == 1.0);
  CHECK(z.modular(Element{7}) == 1.0);
  CHECK(z.parse("-4") == Element{-4});
  const auto z2 = GroupSpace::integer_lattice(2);
  CHECK(z2.parse("(1,-2)") == Element{1, -2});
  CHECK_THROWS_AS(z2.mul(Element{1}, Element{1, 2}), GroupMismatch);
}

TEST_CASE("free group words reduce") {
  const auto f2 = GroupSpace::free_group(2);
  CHECK(f2.mul(f2.parse("ab"), f2.parse("b^-1")) == f2.parse("a"));
  CHECK(f2.format(f2.inv(f2.parse("ab"))) == "b^-1a^-1");
  CHECK(f2.parse("b⁻¹a⁻¹") == f2.inv(f2.parse("ab")));
  CHECK(f2.parse("aA") == f2.identity());
  CHECK(f2.format(f2.identity()) == "e");
  CHECK_THROWS_AS(f2.validate(Element{1, -1}), GroupMismatch);
  CHECK_THROWS_AS(f2.parse("c"), GroupMismatch);
}

TEST_CASE("heisenberg and cyclic arithmetic") {
  const auto h = GroupSpace::heisenberg();
  CHECK(h.mul(Element{1, 0, 0}, Element{0, 1, 0}) == Element{1, 1, 1});
  CHECK(h.mul(Element{0, 1, 0}, Element{1, 0, 0}) == Element{1, 1, 0});
  const auto c = GroupSpace::cyclic(5);
  CHECK(c.mul(Element{3}, Element{4}) == Element{2});
  CHECK(c.inv(Element{2}) == Element{3});
  CHECK(c.exponent_dim() == 0);
}

TEST_CASE("group axioms on random triples") {
  std::mt19937_64 rng(20261018);
  for (const auto& g : discrete_zoo()) {
    CAPTURE(g.name());
    for (int k = 0; k < 1000; ++k) {
      const auto x = fixtures::random_element(g, rng);
      const auto y = fixtures::random_element(g, rng);
      const auto z = fixtures::random_element(g, rng);
      REQUIRE(g.mul(g.mul(x, y), z) == g.mul(x, g.mul(y, z)));
      REQUIRE(g.mul(x, g.inv(x)) == g.identity());
      REQUIRE(g.mul(g.inv(x), x) == g.identity());
      REQUIRE(g.parse(g.format(x)) == x);
      REQUIRE(g.is_valid(g.mul(x, y)));
      REQUIRE(g.haar_weight(x) == 1.0);
      REQUIRE(g.modular(x) == 1.0);
    }
  }
}

TEST_CASE("abelianization is a homomorphism") {
  std::mt19937_64 rng(7);
  for (const auto& g : discrete_zoo()) {
    for (int k = 0; k < 200; ++k) {
      const auto x = fixtures::random_element(g, rng);
      const auto y = fixtures::random_element(g, rng);
      const auto ax = g.abelianize(x);
      const auto ay = g.abelianize(y);
      auto axy = g.abelianize(g.mul(x, y));
      for (std::size_t i = 0; i < axy.size(); ++i) REQUIRE(axy[i] == ax[i] + ay[i]);
    }
  }
}

TEST_CASE("affine composition and inverse") {
  const auto g = affine_space();
  const auto p = g.mul(AffineElement{2, 1}, AffineElement{3, 4});
  CHECK(p.a == 6.0);
  CHECK(p.b == 9.0);
  const auto i = g.inv(AffineElement{2, 1});
  CHECK(i.a == 0.5);
  CHECK(i.b == -0.5);
  const auto e = g.mul(AffineElement{2, 1}, i);
  CHECK(e.a == doctest::Approx(1.0));
  CHECK(e.b == doctest::Approx(0.0));
  CHECK(g.modular(AffineElement{2, 0}) == 0.5);
  CHECK(g.modular(AffineElement{2, 7}) == 0.5);
  CHECK_THROWS_AS(g.mul(Element{1}, Element{2}), GroupMismatch);
  CHECK_THROWS_AS(GroupSpace::integer_lattice(1).mul(AffineElement{}, AffineElement{}), GroupMismatch);
}

TEST_CASE("affine haar weight is the cell mass") {
  const auto g = affine_space();
  const double cell = std::log(2.0) * 0.25 * 0.02;
  CHECK(g.haar_weight(AffineElement{2, 0.5}) == doctest::Approx(cell).epsilon(1e-14));
  CHECK_THROWS_AS(g.haar_weight(AffineElement{1e9, 0}), OutsideWindow);
}

TEST_CASE("closed-form modular function is an exponential") {
  const auto g = affine_space();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> s(-3, 3), b(-5, 5);
  for (int k = 0; k < 100; ++k) {
    const auto x = AffineElement::from_grid(s(rng), b(rng));
    const auto y = AffineElement::from_grid(s(rng), b(rng));
    REQUIRE(std::abs(g.modular(g.mul(x, y)) - g.modular(x) * g.modular(y)) <= 1e-12 * g.modular(g.mul(x, y)));
    REQUIRE(g.modular(x) * g.modular(g.inv(x)) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("quadrature oracle for the modular function") {
  const auto g = affine_space();
  const AffineBump bump{0.0, 0.0, 0.5, 0.5, 1.0};
  // pi(g_x) / pi(g) at x = (2, 0)
  CHECK(modular_by_quadrature(g, AffineElement{2, 0}, bump) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(modular_by_quadrature(g, AffineElement{0.5, 0}, bump) == doctest::Approx(2.0).epsilon(0.02));
  CHECK(modular_by_quadrature(g, AffineElement{1, 0.3}, bump) == doctest::Approx(1.0).epsilon(1e-3));
  // oracle against closed form, and the exponential law within quadrature tolerance
  const AffineElement x{2, 0.4}, y{std::exp2(-0.5), -0.2};
  const double dx = modular_by_quadrature(g, x, bump);
  const double dy = modular_by_quadrature(g, y, bump);
  const double dxy = modular_by_quadrature(g, g.mul(x, y), bump);
  CHECK(dx == doctest::Approx(g.modular(x)).epsilon(0.02));
  CHECK(dxy == doctest::Approx(dx * dy).epsilon(0.02));
}

TEST_CASE("quadrature is right invariant") {
  const auto g = affine_space();
  const AffineBump bump{0.0, 0.0, 0.5, 0.5, 1.0};
  for (const auto& y : {AffineElement{2, 0}, AffineElement{0.5, 1.0}, AffineElement{std::exp2(0.75), -0.7},
                        AffineElement{1, 0.33}})
    CHECK(right_translation_defect(g, y, bump) <= 1e-2);
}
