#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "srlt/errors.hpp"
#include "srlt/measure_ops.hpp"

using namespace srlt;

namespace {

WeightedSupport power(const GroupSpace& g, const WeightedSupport& v, int n) {
  WeightedSupport out = WeightedSupport::dirac(g.identity());
  for (int k = 0; k < n; ++k) out = convolve(g, out, v);
  return out;
}

WeightedSupport random_measure(const GroupSpace& g, std::mt19937_64& rng, int atoms) {
  std::uniform_real_distribution<double> w(0.1, 1.0);
  WeightedSupport m(Role::measure);
  for (int k = 0; k < atoms; ++k) m.add(fixtures::random_element(g, rng), w(rng));
  return m;
}

}  // namespace

TEST_CASE("convolution examples") {
  const auto z = GroupSpace::integer_lattice(1);
  const auto v = fixtures::biased_law();
  const auto vv = convolve(z, v, v);
  CHECK(vv.value(Element{0}) == doctest::Approx(2 * 0.6 * 0.2 + 0.2 * 0.2).epsilon(1e-15));
  CHECK(max_abs_difference(convolve(z, WeightedSupport::dirac(Element{0}), v), v) == 0.0);
  CHECK(vv.mass() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(convolve(GroupSpace::grid_affine({}), v, v), GroupMismatch);
}

TEST_CASE("convolution is associative and multiplies mass") {
  std::mt19937_64 rng(11);
  for (const auto& g : {GroupSpace::integer_lattice(2), GroupSpace::free_group(2), GroupSpace::heisenberg()}) {
    for (int k = 0; k < 20; ++k) {
      const auto a = random_measure(g, rng, 4), b = random_measure(g, rng, 4), c = random_measure(g, rng, 4);
      const auto left = convolve(g, convolve(g, a, b), c);
      const auto right = convolve(g, a, convolve(g, b, c));
      REQUIRE(max_abs_difference(left, right) <= 1e-12);
      REQUIRE(convolve(g, a, b).mass() == doctest::Approx(a.mass() * b.mass()).epsilon(1e-13));
    }
  }
}

TEST_CASE("apply_P examples") {
  const auto z = GroupSpace::integer_lattice(1);
  const auto v = fixtures::biased_law();
  const auto pf = apply_P(z, fixtures::point(0), v);
  CHECK(pf.value(Element{0}) == doctest::Approx(0.2).epsilon(1e-15));
  // Pf(x) = sum_y f(x + y) v(y): mass at 0 is reached from x = -1 with y = +1
  CHECK(pf.value(Element{-1}) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(pf.value(Element{1}) == doctest::Approx(0.2).epsilon(1e-15));
  // f = 1 on a window: Pf = 1 wherever the whole step set stays inside
  WeightedSupport ones(Role::function);
  for (Coord k = -10; k <= 10; ++k) ones.add(Element{k}, 1.0);
  const auto p1 = apply_P(z, ones, v);
  for (Coord k = -9; k <= 9; ++k) CHECK(p1.value(Element{k}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("apply_P is linear and positive") {
  std::mt19937_64 rng(5);
  const auto g = GroupSpace::free_group(2);
  const auto v = lazy_free_group_law(g, 0.5);
  for (int k = 0; k < 20; ++k) {
    const auto f = random_measure(g, rng, 6).with_role(Role::function);
    const auto h = random_measure(g, rng, 6).with_role(Role::function);
    const auto lhs = apply_P(g, linear_combination(2.5, f, -1.5, h), v);
    const auto rhs = linear_combination(2.5, apply_P(g, f, v), -1.5, apply_P(g, h, v));
    REQUIRE(max_abs_difference(lhs, rhs) <= 1e-14);
    REQUIRE(apply_P(g, f, v).nonnegative());
  }
}

TEST_CASE("iterated P matches integration against convolution powers") {
  std::mt19937_64 rng(17);
  for (const auto& g : {GroupSpace::integer_lattice(2), GroupSpace::free_group(2), GroupSpace::heisenberg()}) {
    auto v = random_measure(g, rng, 3);
    v = v.scaled(1.0 / v.mass());
    const auto f = random_measure(g, rng, 3).with_role(Role::function);
    // free words and Heisenberg products branch 3^n ways; keep the direct double sum small there
    const int n_max = g.kind() == GroupKind::integer_lattice ? 12 : 7;
    const auto powers = iterate_P(g, f, v, static_cast<std::size_t>(n_max));
    for (int n : {1, 2, 5, n_max}) {
      const auto vn = power(g, v, n);
      const auto& pn = powers[static_cast<std::size_t>(n - 1)];
      double worst = 0.0;
      for (const auto& [x, w] : pn) {
        double direct = 0.0;
        for (const auto& [y, m] : vn) direct += f.value(g.mul(x, y)) * m * std::exp(vn.log_scale());
        const double got = pn.value(x);
        if (direct != 0.0) worst = std::max(worst, std::abs(got - direct) / std::abs(direct));
      }
      CAPTURE(g.name());
      CAPTURE(n);
      REQUIRE(worst <= 1e-10);
    }
  }
}

TEST_CASE("iterate_P: first power, support growth, renormalized ratios") {
  const auto z = GroupSpace::integer_lattice(1);
  const auto v = fixtures::biased_law();
  const auto f = fixtures::point(0);
  CHECK(max_abs_difference(iterate_P(z, f, v, 1)[0], apply_P(z, f, v)) == 0.0);
  CHECK_THROWS_AS(iterate_P(z, f, v, 0), PreconditionViolation);
  PowerIterator it(z, f, v);
  WeightedSupport raw = f;
  std::size_t prev = 1;
  for (int n = 1; n <= 30; ++n) {
    it.advance();
    raw = apply_P(z, raw, v);
    REQUIRE(it.current().size() <= prev + 2);
    prev = it.current().size();
    const double r_scaled = ratio(it.at(Element{3}), it.at(Element{0}));
    const double r_raw = raw.value(Element{3}) / raw.value(Element{0});
    if (n >= 3) REQUIRE(r_scaled == doctest::Approx(r_raw).epsilon(1e-13));
    REQUIRE(it.current().max_abs_mantissa() == doctest::Approx(1.0));
  }
}

TEST_CASE("renormalized iteration survives far below the double range") {
  const auto z = GroupSpace::integer_lattice(1);
  const double q = 0.001, s = 0.001, p = 0.998;
  const WeightedSupport v(Role::measure, {{Element{-1}, q}, {Element{0}, s}, {Element{1}, p}});
  const auto logs = log_return_probabilities(z, v, 2000);
  CHECK(logs[2000] < -5000.0);
  for (int n : {1, 2, 7, 100, 400, 2000}) CHECK(logs[static_cast<std::size_t>(n)] ==
                                          doctest::Approx(oracles::log_return_multinomial(n, q, s, p)).epsilon(1e-11));
}

TEST_CASE("budget overflow is an error, tagged with the step") {
  const auto small = GroupSpace::integer_lattice(1, 8);
  PowerIterator it(small, fixtures::point(0), fixtures::biased_law());
  std::size_t failed = 0;
  try {
    for (int n = 0; n < 10; ++n) it.advance();
  } catch (const BudgetExceeded& e) {
    failed = e.step();
    CHECK(e.required() > e.budget());
  }
  CHECK(failed == 4);
}

TEST_CASE("integrate") {
  const auto z = GroupSpace::integer_lattice(1);
  WeightedSupport f(Role::function, {{Element{0}, 3.0}, {Element{4}, -2.0}});
  CHECK(integrate(WeightedSupport::dirac(Element{4}), f) == -2.0);
  WeightedSupport ind = WeightedSupport::indicator(std::vector<Element>{Element{1}, Element{2}, Element{5}});
  WeightedSupport counting(Role::measure);
  for (Coord k = -10; k <= 10; ++k) counting.add(Element{k}, z.haar_weight(Element{k}));
  CHECK(integrate(counting, ind) == 3.0);
  WeightedSupport kappa(Role::measure, {{Element{0}, 0.5}, {Element{1}, 0.5}});
  WeightedSupport phi(Role::function, {{Element{0}, 1.0}, {Element{1}, std::pow(1.0 / 3.0, 0.5)}});
  CHECK(integrate(kappa, phi) == doctest::Approx(0.7886751).epsilon(1e-7));
}

TEST_CASE("radial chain") {
  const auto r = radial_return_probabilities(2, 0.5, 8);
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 0.5);
  CHECK(r[2] == doctest::Approx(0.3125).epsilon(1e-15));
  const auto f2 = GroupSpace::free_group(2);
  const auto v = lazy_free_group_law(f2, 0.5);
  WeightedSupport vn = WeightedSupport::dirac(f2.identity());
  for (int n = 1; n <= 8; ++n) {
    vn = convolve(f2, vn, v);
    REQUIRE(std::abs(vn.value(f2.identity()) - r[static_cast<std::size_t>(n)]) <= 1e-12);
  }
  for (int k : {1, 3}) {
    const auto fk = GroupSpace::free_group(k);
    const auto w = lazy_free_group_law(fk, 0.25);
    const auto rk = radial_return_probabilities(k, 0.25, 6);
    const auto dense = log_return_probabilities(fk, w, 6);
    for (int n = 1; n <= 6; ++n)
      REQUIRE(std::exp(dense[static_cast<std::size_t>(n)]) == doctest::Approx(rk[static_cast<std::size_t>(n)]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(radial_return_probabilities(2, 1.0, 3), PreconditionViolation);
}
