#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "srlt/errors.hpp"
#include "srlt/harness.hpp"
#include "srlt/measure_ops.hpp"
#include "srlt/spectral.hpp"

using namespace srlt;

TEST_CASE("index-set densities") {
  std::vector<std::size_t> squares, evens;
  for (std::size_t k = 1; k * k <= 10000; ++k) squares.push_back(k * k);
  for (std::size_t k = 2; k <= 10000; k += 2) evens.push_back(k);
  const auto ds = index_set_density(squares, 10000);
  CHECK(ds.back() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(ds[99] == doctest::Approx(0.1).epsilon(1e-12));
  const auto de = index_set_density(evens, 10000);
  CHECK(de.back() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(de[0] == 0.0);
  for (std::size_t n = 2; n <= 10000; n += 2) REQUIRE(de[n - 1] == 0.5);
}

TEST_CASE("exceptional density: constants, NaN, modes") {
  const std::vector<double> flat(500, 2.0);
  auto p = exceptional_density(flat, 1, 2.0, 1e-9);
  CHECK(p.exceptional.empty());
  CHECK(p.density.back() == 0.0);

  std::vector<double> with_nan(10, 1.0);
  with_nan[3] = std::numeric_limits<double>::quiet_NaN();
  p = exceptional_density(with_nan, 1, 1.0, 0.1);
  REQUIRE(p.exceptional.size() == 1);
  CHECK(p.exceptional[0] == 4);
  CHECK(p.density.back() == doctest::Approx(0.1));

  const std::vector<double> near{10.05};
  CHECK(exceptional_density(near, 1, 10.0, 1e-2, EpsilonMode::relative).exceptional.empty());
  CHECK(exceptional_density(near, 1, 10.0, 1e-2, EpsilonMode::absolute).exceptional.size() == 1);
  CHECK_THROWS_AS(exceptional_density(near, 0, 10.0, 1e-2), PreconditionViolation);
}

TEST_CASE("density profile agrees with recounting each prefix") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> vals(400);
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = 1.0 + noise(rng) / static_cast<double>(k + 1);
  const std::size_t n_first = 5;
  const auto p = exceptional_density(vals, n_first, 1.0, 0.02, EpsilonMode::absolute);
  for (std::size_t k = 0; k < vals.size(); k += 37) {
    std::size_t q = 0;
    for (std::size_t i = 0; i <= k; ++i) q += std::abs(vals[i] - 1.0) > 0.02;
    REQUIRE(p.density[k] == doctest::Approx(static_cast<double>(q) / static_cast<double>(n_first + k)));
  }
}

TEST_CASE("ratio series bookkeeping") {
  RatioSeries s;
  s.n_first = 3;
  s.values = {1.5, 1.2, 1.01, 1.001};
  s.target = 1.0;
  s.epsilon = 0.05;
  s.evaluate();
  CHECK(s.n_last() == 6);
  CHECK(s.at(5) == 1.01);
  CHECK(s.max_abs_error(5) == doctest::Approx(0.01));
  CHECK(s.tail_min(4) == 1.001);
  CHECK(s.final_density() == doctest::Approx(2.0 / 6.0));
  s.judge(5, 0.02);
  CHECK(s.verdict == Verdict::pass);
  s.judge(4, 0.02);
  CHECK(s.verdict == Verdict::fail);
  CHECK(tail_mean(s, 2) == doctest::Approx(1.0055));
}

TEST_CASE("pointwise ratio: identity and scaling") {
  const auto z = GroupSpace::integer_lattice(1);
  const auto v = fixtures::biased_law();
  const auto fit = fit_exponential(z, v);
  const auto f = fixtures::point(2, 1.0);
  const auto same = ratio_pointwise(z, f, f, Element{1}, Element{1}, v, 60, *fit.phi);
  CHECK(same.target == 1.0);
  for (double r : same.values) REQUIRE(r == 1.0);

  const auto g = fixtures::point(0);
  const auto base = ratio_pointwise(z, f, g, Element{0}, Element{1}, v, 60, *fit.phi);
  auto f3 = fixtures::point(2, 3.0);
  const auto scaled = ratio_pointwise(z, f3, g, Element{0}, Element{1}, v, 60, *fit.phi);
  CHECK(scaled.target == doctest::Approx(3.0 * base.target).epsilon(1e-14));
  for (std::size_t k = 0; k < base.values.size(); ++k)
    if (std::isfinite(base.values[k])) REQUIRE(scaled.values[k] == doctest::Approx(3.0 * base.values[k]).epsilon(1e-13));
}

TEST_CASE("targets are consistent with the closed forms") {
  const auto z = GroupSpace::integer_lattice(1);
  const auto v = fixtures::biased_law();
  const auto fit = fit_exponential(z, v);
  const auto g = fixtures::point(0);
  // point masses: nu(delta_k) = phi(k)^{-1}
  CHECK(nu_of(*fit.phi, fixtures::point(3)) == doctest::Approx(std::pow(fixtures::phi1(), -3)).epsilon(1e-12));
  const auto pw = ratio_pointwise(z, g, g, Element{0}, Element{3}, v, 10, *fit.phi);
  CHECK(pw.target == doctest::Approx(std::pow(fixtures::phi1(), -3)).epsilon(1e-12));
  for (std::size_t m : {1, 2}) {
    const auto sh = ratio_shift(z, g, Element{0}, m, v, 10, fit.R);
    CHECK(sh.target == doctest::Approx(std::pow(fixtures::inv_R(), static_cast<double>(m))).epsilon(1e-12));
  }
  const WeightedSupport kappa(Role::measure, {{Element{0}, 0.5}, {Element{1}, 0.5}});
  const auto is = ratio_integrated_shift(z, kappa, kappa, g, 1, v, 10, fit.R, *fit.phi);
  CHECK(is.target == doctest::Approx(0.8928203).epsilon(1e-7));
  const auto tw = ratio_twisted(z, fixtures::point(1), g, Element{0}, Element{0},
                                twist(v, fit.R, *fit.phi), 10);
  CHECK(tw.target == 1.0);
}

TEST_CASE("twisted ratio equals a rescaled weighted pointwise ratio") {
  const auto z = GroupSpace::integer_lattice(1);
  const auto v = fixtures::biased_law();
  const auto fit = fit_exponential(z, v);
  const auto& phi = *fit.phi;
  const auto f = WeightedSupport(Role::function, {{Element{0}, 1.0}, {Element{2}, 2.0}});
  const auto g = fixtures::point(1);
  auto weigh = [&](const WeightedSupport& h) {
    WeightedSupport out(Role::function);
    for (const auto& [u, w] : h.flattened().sorted_atoms()) out.add(u, w * phi.phi(u));
    return out;
  };
  const Element x{1}, y{-2};
  const auto tw = ratio_twisted(z, f, g, x, y, twist(v, fit.R, phi), 80);
  const auto pw = ratio_pointwise(z, weigh(f), weigh(g), x, y, v, 80, phi);
  const double c = phi.phi(y) / phi.phi(x);
  for (std::size_t k = 0; k < tw.values.size(); ++k)
    if (std::isfinite(pw.values[k])) REQUIRE(tw.values[k] == doctest::Approx(c * pw.values[k]).epsilon(1e-10));
}

TEST_CASE("translation and invariance of nu") {
  const auto z = GroupSpace::integer_lattice(1);
  const auto v = fixtures::biased_law();
  const auto fit = fit_exponential(z, v);
  const auto f = fixtures::point(0);
  const auto g = WeightedSupport(Role::function, {{Element{0}, 1.0}, {Element{1}, 1.0}});
  const auto t = ratio_translation(z, f, g, Element{1}, Element{4}, v, 100, *fit.phi);
  CHECK(t.z == Element{3});
  CHECK(t.max_relative_gap <= 1e-12);
  CHECK(t.nu_identity_residual <= 1e-12);
  CHECK(t.phi_z == doctest::Approx(0.19245).epsilon(1e-5));
  CHECK(t.target_pointwise == doctest::Approx(t.target_translated).epsilon(1e-12));

  std::vector<Element> window;
  for (Coord k = -10; k <= 10; ++k) window.push_back(Element{k});
  CHECK(nu_invariance_residual(z, v, fit.R, *fit.phi, window) <= 1e-12);
  // the wrong R breaks invariance
  CHECK(nu_invariance_residual(z, v, 1.0, *fit.phi, window) > 1e-2);

  const auto f2 = GroupSpace::free_group(2);
  const auto h = WeightedSupport(Role::function, {{f2.parse("a"), 1.0}, {f2.parse("ab"), 0.5}});
  const auto tf = ratio_translation(f2, h, h, f2.parse("b"), f2.parse("a^-1"), lazy_free_group_law(f2, 0.5), 12,
                                    ExponentialSpec::trivial(f2));
  CHECK(tf.max_relative_gap <= 1e-12);
}

TEST_CASE("condition A witnesses") {
  const auto z = GroupSpace::integer_lattice(1);
  const auto v = fixtures::biased_law();
  const auto f = WeightedSupport(Role::function, {{Element{-1}, 1.0}, {Element{0}, 1.0}, {Element{1}, 1.0}});
  auto w = check_condition_A(z, v, f, 10);
  CHECK(w.found);
  CHECK(w.power == 1);
  CHECK(w.coefficient == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(w.margin >= 0.0);
  w = check_condition_A(z, v, fixtures::point(5), 10);
  CHECK(w.power == 5);
  CHECK(w.coefficient == doctest::Approx(std::pow(0.6, 5)).epsilon(1e-12));
  w = check_condition_A(z, v, fixtures::point(5), 4);
  CHECK_FALSE(w.found);
}

TEST_CASE("small domination witnesses") {
  const auto z = GroupSpace::integer_lattice(1);
  const auto v = fixtures::biased_law();
  auto w = check_small_domination(z, WeightedSupport(Role::function), fixtures::point(0), v, 5);
  CHECK(w.found);
  CHECK(w.power == 1);
  CHECK(w.coefficient == 0.0);
  // P g(x) = sum_u g(x u) v(u): P 1_0 (1) = v(-1)
  w = check_small_domination(z, fixtures::point(1), fixtures::point(0), v, 5);
  CHECK(w.power == 1);
  CHECK(w.coefficient == doctest::Approx(1.0 / 0.2).epsilon(1e-12));
  w = check_small_domination(z, fixtures::point(2), fixtures::point(0), v, 5);
  CHECK(w.power == 2);
  CHECK(w.coefficient == doctest::Approx(1.0 / (0.2 * 0.2)).epsilon(1e-12));
  CHECK(w.margin >= -1e-12);
  const WeightedSupport right_only(Role::measure, {{Element{1}, 1.0}});
  CHECK_FALSE(check_small_domination(z, fixtures::point(1), fixtures::point(0), right_only, 5).found);
}
