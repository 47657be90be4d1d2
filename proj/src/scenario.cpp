#include "srlt/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "srlt/errors.hpp"
#include "srlt/measure_ops.hpp"

namespace srlt {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Theorem t) {
  switch (t) {
    case Theorem::t1:
      return "T1";
    case Theorem::t2:
      return "T2";
    case Theorem::t3:
      return "T3";
    case Theorem::twisted:
      return "twisted";
    case Theorem::checks:
      return "checks";
    default:
      return "spectral";
  }
}

namespace {

Theorem theorem_from_string(const std::string& s) {
  for (auto t : {Theorem::t1, Theorem::t2, Theorem::t3, Theorem::twisted, Theorem::checks, Theorem::spectral})
    if (s == to_string(t)) return t;
  throw ConfigError(fmt::format("theorem: unknown selector '{}' (T1, T2, T3, twisted, checks, spectral)", s));
}

template <class T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", key, e.what()));
  }
}

template <class T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(fmt::format("missing field '{}'", key));
  return field<T>(j, key, T{});
}

GroupSpace parse_group(const json& g, std::size_t budget) {
  const auto kind_name = required<std::string>(g, "kind");
  const auto kind = group_kind_from_string(kind_name);
  if (!kind) throw ConfigError(fmt::format("group.kind: unknown kind '{}'", kind_name));
  try {
    switch (*kind) {
      case GroupKind::integer_lattice:
        return GroupSpace::integer_lattice(field<int>(g, "dimension", 1), budget);
      case GroupKind::free_group:
        return GroupSpace::free_group(required<int>(g, "rank"), budget);
      case GroupKind::heisenberg:
        return GroupSpace::heisenberg(budget);
      case GroupKind::cyclic:
        return GroupSpace::cyclic(required<Coord>(g, "modulus"), budget);
      case GroupKind::grid_affine: {
        GridAffineSpec spec;
        spec.levels_per_side = field<int>(g, "levels_per_side", spec.levels_per_side);
        spec.log2_step = field<double>(g, "log2_step", spec.log2_step);
        spec.b_step = field<double>(g, "b_step", spec.b_step);
        spec.b_bound = field<double>(g, "b_bound", spec.b_bound);
        return GroupSpace::grid_affine(spec, budget);
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(fmt::format("group: {}", e.what()));
  }
  throw ConfigError("group: unreachable");
}

Element parse_element(const GroupSpace& space, const json& j, const char* what) {
  try {
    if (j.is_number_integer()) return space.parse(std::to_string(j.get<long long>()));
    return space.parse(j.get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", what, e.what()));
  } catch (const Error& e) {
    throw ConfigError(fmt::format("{}: {}", what, e.what()));
  }
}

WeightedSupport parse_atoms(const GroupSpace& space, const json& j, const char* what, Role role) {
  WeightedSupport out(role);
  if (!j.is_array()) throw ConfigError(fmt::format("{}: expected an array of {{\"at\", \"w\"}} atoms", what));
  for (const auto& atom : j) {
    if (!atom.is_object() || !atom.contains("at") || !atom.contains("w"))
      throw ConfigError(fmt::format("{}: every atom needs \"at\" and \"w\"", what));
    const double w = field<double>(atom, "w", 0.0);
    if (!std::isfinite(w)) throw ConfigError(fmt::format("{}: weight is not finite", what));
    out.add(parse_element(space, atom.at("at"), what), w);
  }
  return out;
}

AffineElement parse_affine_point(const json& j, const char* what) {
  if (j.is_array() && j.size() == 2) return AffineElement{j[0].get<double>(), j[1].get<double>()};
  if (j.is_object()) {
    if (j.contains("log2a")) return AffineElement::from_grid(j.at("log2a").get<double>(), field<double>(j, "b", 0.0));
    return AffineElement{required<double>(j, "a"), field<double>(j, "b", 0.0)};
  }
  throw ConfigError(fmt::format("{}: expected [a, b] or {{\"a\"|\"log2a\", \"b\"}}", what));
}

AffineBump parse_bump(const json& j) {
  AffineBump b;
  b.center_log2a = field<double>(j, "center_log2a", 0.0);
  b.center_b = field<double>(j, "center_b", 0.0);
  b.half_width_log2a = field<double>(j, "half_width_log2a", 1.0);
  b.half_width_b = field<double>(j, "half_width_b", 1.0);
  b.height = field<double>(j, "height", 1.0);
  if (!(b.half_width_log2a > 0.0) || !(b.half_width_b > 0.0)) throw ConfigError("bump: widths must be positive");
  return b;
}

void check_law_mass(double mass) {
  if (std::abs(mass - 1.0) > 1e-9)
    throw ConfigError(fmt::format("law: total mass {:.12g} is not 1 (tolerance 1e-9)", mass));
}

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

ojson noted(double value, std::string note) {
  ojson o;
  o["value"] = std::isfinite(value) ? ojson(value) : ojson(nullptr);
  o["note"] = std::move(note);
  return o;
}

ojson series_summary(const RatioSeries& s) {
  ojson o;
  o["id"] = s.id;
  o["label"] = s.label;
  o["n_range"] = ojson::array({s.n_first, s.n_last()});
  o["target"] = noted(s.target, s.target_note);
  o["last_value"] = noted(s.values.empty() ? NAN : s.values.back(), "r_n at the last n");
  o["epsilon"] = noted(s.epsilon, fmt::format("{} tolerance defining the exceptional set", to_string(s.mode)));
  o["exceptional_count"] = s.profile.exceptional.size();
  o["density_tail"] = noted(s.final_density(), "q_n(N_eps) / n at the last n");
  if (s.truncation_mass)
    o["truncation_mass"] = noted(*s.truncation_mass, "cumulative absorbed fraction of the invariant weighting");
  o["verdict"] = std::string(to_string(s.verdict));
  o["verdict_note"] = s.verdict_note;
  return o;
}

std::vector<double> log_returns_for(const ScenarioConfig& cfg, const WeightedSupport& law, std::size_t n_max) {
  if (cfg.returns == ReturnSource::radial) {
    if (cfg.space->kind() != GroupKind::free_group || !cfg.lazy_simple)
      throw ConfigError("returns: the radial chain needs a free group with the lazy_simple law");
    return radial_log_return_probabilities(static_cast<int>(cfg.space->parameter()), *cfg.lazy_simple, n_max);
  }
  return log_return_probabilities(*cfg.space, law, n_max);
}

ojson spectral_json(const SpectralResult& r) {
  ojson o;
  o["method"] = std::string(to_string(r.method));
  o["R"] = noted(r.R, r.method == SpectralMethod::laplace_min ? "1 / min_t integral of phi_t dv"
                                                               : "exp(-slope) of log v^n(e) ~ slope n + beta log n + c");
  if (r.method == SpectralMethod::laplace_min) {
    o["laplace_value"] = noted(r.laplace_value, "integral of phi dv at the minimizer");
    o["gradient_norm"] = noted(r.residual, "infinity-norm of the gradient at the minimizer");
    o["iterations"] = r.iterations;
    if (r.phi) o["phi_parameters"] = r.phi->parameters();
  } else {
    o["rms_residual"] = noted(r.residual, "RMS residual of the least-squares fit");
    o["log_n_coefficient"] = noted(r.log_n_coefficient, "fitted beta");
  }
  if (r.r_value) o["r"] = noted(*r.r_value, "[integral of Delta dv]^-1, closed-form Delta = 1/a");
  return o;
}

struct Spectrum {
  SpectralResult fit;
  double R = 1.0;
  std::string R_note;
};

Spectrum discrete_spectrum(const ScenarioConfig& cfg) {
  Spectrum s;
  s.fit = fit_exponential(*cfg.space, cfg.law);
  s.R = s.fit.R;
  s.R_note = "Laplace minimum";
  if (cfg.condition_b != "yes") {
    const auto logs = log_returns_for(cfg, cfg.law, cfg.logfit_window.last);
    s.R = estimate_R_logfit_from_logs(logs, cfg.logfit_window).R;
    s.R_note = "log-fit (Laplace minimum is only an upper bound on 1/R here)";
  }
  return s;
}

void judge_all(ScenarioReport& rep, const ScenarioConfig& cfg, std::vector<RatioSeries>& judged) {
  for (auto& s : judged) {
    const auto it = cfg.series_tolerance.find(s.id);
    s.judge(cfg.judge_from, it != cfg.series_tolerance.end() ? it->second : cfg.tolerance);
    if (cfg.max_density && s.final_density() > *cfg.max_density) {
      s.verdict = Verdict::fail;
      s.verdict_note += fmt::format("; density {:.4g} above {:.4g}", s.final_density(), *cfg.max_density);
    }
    rep.series.push_back(std::move(s));
  }
}

void run_t1(const ScenarioConfig& cfg, ScenarioReport& rep) {
  const auto sp = discrete_spectrum(cfg);
  rep.summary["spectral"] = spectral_json(sp.fit);
  rep.summary["R_used"] = noted(sp.R, sp.R_note);
  std::vector<RatioSeries> out;
  auto p = ratio_pointwise(*cfg.space, cfg.f, cfg.g, cfg.x, cfg.y, cfg.law, cfg.n_max, *sp.fit.phi);
  p.id = "pointwise";
  out.push_back(std::move(p));
  for (auto m : cfg.m) {
    auto s = ratio_shift(*cfg.space, cfg.g, cfg.y, m, cfg.law, cfg.n_max, sp.R);
    s.id = fmt::format("shift-m{}", m);
    out.push_back(std::move(s));
  }
  for (auto& s : out) {
    s.epsilon = cfg.epsilon;
    s.mode = cfg.mode;
    s.evaluate();
  }
  judge_all(rep, cfg, out);
}

void run_t2(const ScenarioConfig& cfg, ScenarioReport& rep) {
  const auto sp = discrete_spectrum(cfg);
  rep.summary["spectral"] = spectral_json(sp.fit);
  rep.summary["R_used"] = noted(sp.R, sp.R_note);
  std::vector<RatioSeries> out;
  auto s = ratio_integrated(*cfg.space, cfg.kappa, cfg.mu, cfg.f, cfg.g, cfg.law, cfg.n_max, *sp.fit.phi);
  s.id = "integrated";
  const double liminf = s.tail_min(cfg.judge_from);
  rep.summary["liminf_check"] = {
      {"tail_min", noted(liminf, fmt::format("min r_n over n >= {}", cfg.judge_from))},
      {"holds", liminf >= s.target - cfg.tolerance}};
  out.push_back(std::move(s));
  for (auto m : cfg.m) {
    const bool own = !cfg.shift_measure.empty();
    auto t = ratio_integrated_shift(*cfg.space, own ? cfg.shift_measure : cfg.kappa, own ? cfg.shift_measure : cfg.mu,
                                    cfg.g, m, cfg.law, cfg.n_max, sp.R, *sp.fit.phi);
    t.id = fmt::format("integrated-shift-m{}", m);
    out.push_back(std::move(t));
  }
  for (auto& x : out) {
    x.epsilon = cfg.epsilon;
    x.mode = cfg.mode;
    x.evaluate();
  }
  judge_all(rep, cfg, out);
  if (!rep.summary["liminf_check"]["holds"].get<bool>()) rep.verdict = Verdict::fail;
}

void run_twisted(const ScenarioConfig& cfg, ScenarioReport& rep) {
  const auto sp = discrete_spectrum(cfg);
  const auto& phi = *sp.fit.phi;
  rep.summary["spectral"] = spectral_json(sp.fit);
  const auto vt = twist(cfg.law, sp.R, phi);
  const double sim = verify_similarity(*cfg.space, cfg.f, cfg.law, sp.R, phi, cfg.similarity_n);
  const double sim_literal =
      verify_similarity(*cfg.space, cfg.f, cfg.law, sp.R, phi, std::min<std::size_t>(2, cfg.similarity_n),
                        SimilarityFactor::literal);
  const auto logs = log_returns_for(cfg, vt, cfg.logfit_window.last);
  const auto rt = estimate_R_logfit_from_logs(logs, cfg.logfit_window);
  rep.summary["twisted_mass"] = noted(vt.mass(), "R * integral of phi dv");
  rep.summary["similarity_residual"] =
      noted(sim, fmt::format("max relative gap, factor R^n, n <= {}", cfg.similarity_n));
  rep.summary["similarity_residual_single_R"] = noted(sim_literal, "same with the single factor R, n <= 2");
  rep.summary["twisted_R_logfit"] = spectral_json(rt);
  std::vector<RatioSeries> out;
  auto s = ratio_twisted(*cfg.space, cfg.f, cfg.g, cfg.x, cfg.y, vt, cfg.n_max);
  s.id = "twisted";
  out.push_back(std::move(s));
  for (auto m : cfg.m) {
    auto t = ratio_shift(*cfg.space, cfg.g, cfg.y, m, vt, cfg.n_max, 1.0);
    t.id = fmt::format("twisted-shift-m{}", m);
    t.target_note = "1 (pi is invariant for the twisted walk)";
    out.push_back(std::move(t));
  }
  for (auto& x : out) {
    x.epsilon = cfg.epsilon;
    x.mode = cfg.mode;
    x.evaluate();
  }
  judge_all(rep, cfg, out);
  const bool ok = sim <= 1e-10 && std::abs(vt.mass() - 1.0) <= 1e-9 && std::abs(rt.R - 1.0) <= cfg.tolerance;
  rep.summary["twisted_checks_pass"] = ok;
  if (!ok) rep.verdict = Verdict::fail;
}

ojson witness_json(const ConditionWitness& w) {
  ojson o;
  o["kind"] = std::string(to_string(w.kind));
  o["found"] = w.found;
  o["power"] = w.power;
  o["coefficient"] = noted(w.coefficient, w.kind == WitnessKind::condition_a ? "largest gamma with v^j >= gamma f pi"
                                                                               : "smallest a with a P^m g >= f");
  o["margin"] = noted(w.margin, "min slack of the witnessed inequality");
  return o;
}

bool matches(const ConditionWitness& w, const std::optional<std::pair<std::size_t, double>>& e) {
  if (!e) return w.found;
  return w.found && w.power == e->first && std::abs(w.coefficient - e->second) <= 1e-4;
}

void run_checks(const ScenarioConfig& cfg, ScenarioReport& rep) {
  const auto& space = *cfg.space;
  bool ok = true;
  if (!cfg.condition_f.empty()) {
    const auto w = check_condition_A(space, cfg.law, cfg.condition_f, cfg.j_max);
    rep.summary["condition_A"] = witness_json(w);
    ok = ok && matches(w, cfg.expected_condition_A);
  }
  if (!cfg.f.empty() && !cfg.g.empty()) {
    const auto w = check_small_domination(space, cfg.f, cfg.g, cfg.law, cfg.m_max);
    rep.summary["small_domination"] = witness_json(w);
    ok = ok && matches(w, cfg.expected_domination);
  }
  if (space.exponent_dim() > 0 && !cfg.g.empty()) {
    const auto sp = fit_exponential(space, cfg.law);
    const auto& phi = *sp.phi;
    rep.summary["spectral"] = spectral_json(sp);
    const auto t = ratio_translation(space, cfg.f.empty() ? cfg.g : cfg.f, cfg.g, cfg.x, cfg.y, cfg.law,
                                     std::min<std::size_t>(cfg.n_max, 200), phi);
    rep.summary["translation"] = {
        {"z", space.format(t.z)},
        {"max_relative_gap", noted(t.max_relative_gap, "P^n g_z(x) against P^n g(y)")},
        {"nu_ratio", noted(t.nu_gz / t.nu_g, "nu(g_z) / nu(g)")},
        {"phi_z", noted(t.phi_z, "phi(z)")},
        {"target_gap", noted(std::abs(t.target_pointwise - t.target_translated),
                             "pointwise target against nu(f) / nu(g_z)")}};
    ok = ok && t.max_relative_gap <= 1e-12 && t.nu_identity_residual <= 1e-12 &&
         std::abs(t.target_pointwise - t.target_translated) <= 1e-12 * std::abs(t.target_pointwise);
    if (!cfg.nu_window.empty()) {
      const double res = nu_invariance_residual(space, cfg.law, sp.R, phi, cfg.nu_window);
      rep.summary["nu_invariance_residual"] = noted(res, "max relative |R (nu P)(x) - nu(x)| on the window interior");
      ok = ok && res <= 1e-12;
    }
  }
  rep.verdict = ok ? Verdict::pass : Verdict::fail;
}

void run_spectral(const ScenarioConfig& cfg, ScenarioReport& rep) {
  rep.summary["estimate"] = estimate_r(cfg);
  if (cfg.expected_R) {
    const auto& est = rep.summary["estimate"];
    const double R = est.contains("log_fit") ? est["log_fit"]["R"]["value"].get<double>()
                                             : est["laplace_min"]["R"]["value"].get<double>();
    const bool ok = std::abs(R - *cfg.expected_R) <= cfg.tolerance;
    rep.summary["expected_R"] = noted(*cfg.expected_R, "scenario expectation");
    rep.verdict = ok ? Verdict::pass : Verdict::fail;
  }
}

void run_t3(const ScenarioConfig& cfg, ScenarioReport& rep) {
  const auto& space = *cfg.space;
  ModularRatioOptions opts = cfg.modular;
  opts.n_max = cfg.n_max;
  opts.epsilon = cfg.epsilon;
  const auto fit = fit_exponential(space, cfg.affine_law);
  opts.audit_exponent = fit.phi->parameters()[0];
  rep.summary["spectral"] = spectral_json(fit);
  auto mr = modular_ratio(space, cfg.affine_law, opts);
  rep.summary["truncation_mass"] = noted(mr.truncation_mass, "cumulative absorbed fraction of a^-c pi, c = fitted exponent");
  ojson pts = ojson::array();
  for (std::size_t p = 0; p < opts.points.size(); ++p) {
    pts.push_back({{"a", opts.points[p].a},
                   {"b", opts.points[p].b},
                   {"delta_oracle", noted(mr.delta_oracle[p], "pi(g_x) / pi(g) by grid quadrature")},
                   {"delta_closed_form", noted(mr.delta_closed_form[p], "1 / a")},
                   {"series_b_estimate", noted(mr.series_b_estimate[p], "mean of the last 10% of series B")}});
  }
  rep.summary["points"] = pts;
  rep.summary["witness_point"] = mr.witness ? ojson(*mr.witness) : ojson(nullptr);
  std::vector<RatioSeries> judged;
  for (std::size_t p = 0; p < opts.points.size(); ++p) {
    mr.series_a[p].id = fmt::format("modular-a-{}", p);
    mr.series_b[p].id = fmt::format("modular-b-{}", p);
    mr.series_b_same_point[p].id = fmt::format("same-point-{}", p);
    judged.push_back(std::move(mr.series_a[p]));
    judged.push_back(std::move(mr.series_b[p]));
  }
  mr.haar_ratio.id = "haar-ratio";
  judged.push_back(std::move(mr.haar_ratio));
  judge_all(rep, cfg, judged);
  for (auto& s : mr.series_b_same_point) rep.series.push_back(std::move(s));
  if (mr.truncation_mass > opts.truncation_bound)
    rep.invalid = fmt::format("truncation mass {:.3e} exceeds the bound {:.1e}", mr.truncation_mass,
                              opts.truncation_bound);
}

}  // namespace

ScenarioConfig parse_scenario(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario: expected a JSON object");
  ScenarioConfig c;
  c.id = required<std::string>(j, "id");
  c.theorem = theorem_from_string(field<std::string>(j, "theorem", "T1"));
  c.condition_b = field<std::string>(j, "condition_b", "yes");
  if (c.condition_b != "yes" && c.condition_b != "no" && c.condition_b != "exploratory")
    throw ConfigError("condition_b: expected yes, no or exploratory");
  const auto budget = field<std::size_t>(j, "support_budget", kDefaultSupportBudget);
  if (!j.contains("group")) throw ConfigError("missing field 'group'");
  c.space = parse_group(j.at("group"), budget);
  const auto& space = *c.space;

  if (!j.contains("law")) throw ConfigError("missing field 'law'");
  const auto& law = j.at("law");
  if (space.is_discrete()) {
    if (law.is_object()) {
      if (field<std::string>(law, "type", "") != "lazy_simple")
        throw ConfigError("law: object form supports only {\"type\": \"lazy_simple\", \"laziness\": x}");
      const double lz = required<double>(law, "laziness");
      if (space.kind() != GroupKind::free_group) throw ConfigError("law: lazy_simple is defined on free groups");
      if (!(lz >= 0.0 && lz < 1.0)) throw ConfigError("law: laziness must be in [0, 1)");
      c.law = lazy_free_group_law(space, lz);
      c.lazy_simple = lz;
    } else {
      c.law = parse_atoms(space, law, "law", Role::measure);
    }
    if (!c.law.nonnegative()) throw ConfigError("law: negative mass");
    check_law_mass(c.law.mass());
  } else {
    if (!law.is_array()) throw ConfigError("law: expected an array of affine atoms");
    for (const auto& atom : law) {
      const double w = required<double>(atom, "w");
      if (w < 0.0) throw ConfigError("law: negative mass");
      c.affine_law.emplace_back(parse_affine_point(atom, "law"), w);
    }
    if (c.affine_law.empty()) throw ConfigError("law: empty");
    check_law_mass(total_mass(c.affine_law));
  }

  c.n_max = field<std::size_t>(j, "n_max", c.n_max);
  if (c.n_max < 10) throw ConfigError("n_max: must be >= 10");
  c.m = field<std::vector<std::size_t>>(j, "m", c.m);
  for (auto m : c.m)
    if (m < 1) throw ConfigError("m: entries must be >= 1");
  c.epsilon = field<double>(j, "epsilon", c.epsilon);
  if (!(c.epsilon > 0.0)) throw ConfigError("epsilon: must be positive");
  const auto mode = field<std::string>(j, "epsilon_mode", "relative");
  if (mode != "relative" && mode != "absolute") throw ConfigError("epsilon_mode: relative or absolute");
  c.mode = mode == "relative" ? EpsilonMode::relative : EpsilonMode::absolute;
  c.tolerance = field<double>(j, "tolerance", c.tolerance);
  c.series_tolerance = field<std::map<std::string, double>>(j, "series_tolerance", {});
  c.judge_from = field<std::size_t>(j, "judge_from", 1);
  if (c.judge_from < 1 || c.judge_from > c.n_max) throw ConfigError("judge_from: must lie in [1, n_max]");
  if (j.contains("max_density")) c.max_density = field<double>(j, "max_density", 0.0);
  if (j.contains("expected_R")) c.expected_R = field<double>(j, "expected_R", 0.0);
  if (j.contains("logfit_window")) {
    const auto w = field<std::vector<std::size_t>>(j, "logfit_window", {});
    if (w.size() != 2 || w[0] < 1 || w[1] < w[0] + 9) throw ConfigError("logfit_window: [first, last] with >= 10 points");
    c.logfit_window = {w[0], w[1]};
  }
  const auto returns = field<std::string>(j, "returns", "convolution");
  if (returns != "convolution" && returns != "radial") throw ConfigError("returns: convolution or radial");
  c.returns = returns == "radial" ? ReturnSource::radial : ReturnSource::convolution;

  if (space.is_discrete()) {
    if (j.contains("f")) c.f = parse_atoms(space, j.at("f"), "f", Role::function);
    if (j.contains("g")) c.g = parse_atoms(space, j.at("g"), "g", Role::function);
    if (j.contains("kappa")) c.kappa = parse_atoms(space, j.at("kappa"), "kappa", Role::measure);
    if (j.contains("mu")) c.mu = parse_atoms(space, j.at("mu"), "mu", Role::measure);
    if (j.contains("shift_measure"))
      c.shift_measure = parse_atoms(space, j.at("shift_measure"), "shift_measure", Role::measure);
    c.x = j.contains("x") ? parse_element(space, j.at("x"), "x") : space.identity();
    c.y = j.contains("y") ? parse_element(space, j.at("y"), "y") : space.identity();
    if (j.contains("condition_f")) c.condition_f = parse_atoms(space, j.at("condition_f"), "condition_f", Role::function);
    c.j_max = field<std::size_t>(j, "j_max", c.j_max);
    c.m_max = field<std::size_t>(j, "m_max", c.m_max);
    c.similarity_n = field<std::size_t>(j, "similarity_n", c.similarity_n);
    if (c.similarity_n < 1 || c.similarity_n > 20) throw ConfigError("similarity_n: must lie in [1, 20]");
    if (j.contains("nu_window")) {
      const auto w = field<std::vector<long long>>(j, "nu_window", {});
      if (w.size() != 2 || space.kind() != GroupKind::integer_lattice || space.parameter() != 1)
        throw ConfigError("nu_window: [lo, hi] on Z");
      for (long long k = w[0]; k <= w[1]; ++k) c.nu_window.push_back(Element{k});
    }
    auto pair_field = [&](const char* key) -> std::optional<std::pair<std::size_t, double>> {
      if (!j.contains(key)) return std::nullopt;
      const auto& e = j.at(key);
      if (!e.is_array() || e.size() != 2) throw ConfigError(fmt::format("{}: expected [power, coefficient]", key));
      return std::make_pair(e[0].get<std::size_t>(), e[1].get<double>());
    };
    c.expected_condition_A = pair_field("expect_condition_A");
    c.expected_domination = pair_field("expect_small_domination");
    for (const auto* s : {&c.kappa, &c.mu, &c.shift_measure})
      if (!s->empty() && (!s->nonnegative() || std::abs(s->mass() - 1.0) > 1e-9))
        throw ConfigError("kappa, mu, shift_measure: must be probability measures");
    const bool needs_fg = c.theorem == Theorem::t1 || c.theorem == Theorem::t2 || c.theorem == Theorem::twisted;
    if (needs_fg && (c.f.empty() || c.g.empty())) throw ConfigError("f, g: required for this theorem selector");
    if (c.theorem == Theorem::t2 && (c.kappa.empty() || c.mu.empty()))
      throw ConfigError("kappa, mu: required for T2");
    if (c.theorem == Theorem::t3) throw ConfigError("theorem: T3 runs on the grid_affine group");
  } else {
    if (c.theorem != Theorem::t3 && c.theorem != Theorem::spectral)
      throw ConfigError("theorem: the grid_affine group supports T3 and spectral only");
    if (j.contains("points"))
      for (const auto& p : j.at("points")) c.modular.points.push_back(parse_affine_point(p, "points"));
    if (j.contains("bump")) c.modular.g = parse_bump(j.at("bump"));
    c.modular.f = j.contains("numerator_bump") ? parse_bump(j.at("numerator_bump")) : c.modular.g;
    c.modular.truncation_bound = field<double>(j, "truncation_bound", c.modular.truncation_bound);
    for (const auto& p : c.modular.points)
      if (!space.grid().contains(p)) throw ConfigError("points: outside the grid window");
  }
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open scenario '{}'", path.string()));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_scenario(j);
}

ojson estimate_r(const ScenarioConfig& cfg) {
  const auto& space = *cfg.space;
  ojson o;
  o["group"] = space.name();
  o["condition_b"] = cfg.condition_b;
  try {
    const auto fit = space.is_discrete() ? fit_exponential(space, cfg.law) : fit_exponential(space, cfg.affine_law);
    o["laplace_min"] = spectral_json(fit);
  } catch (const NoInteriorMinimum& e) {
    o["laplace_min"] = {{"error", e.what()}};
  }
  if (space.is_discrete()) {
    const auto logs = log_returns_for(cfg, cfg.law, cfg.logfit_window.last);
    auto lf = spectral_json(estimate_R_logfit_from_logs(logs, cfg.logfit_window));
    lf["window"] = ojson::array({cfg.logfit_window.first, cfg.logfit_window.last});
    lf["source"] = cfg.returns == ReturnSource::radial ? "radial word-length chain" : "renormalized operator iteration";
    o["log_fit"] = lf;
  }
  return o;
}

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  ScenarioReport rep;
  rep.id = cfg.id;
  rep.summary["scenario"] = cfg.id;
  rep.summary["theorem"] = std::string(to_string(cfg.theorem));
  rep.summary["group"] = cfg.space->name();
  rep.summary["condition_b"] = cfg.condition_b;
  if (cfg.condition_b != "yes")
    rep.summary["label"] = "targets use the fitted exponential; outside Condition B they are not theorems";
  rep.verdict = Verdict::pass;
  switch (cfg.theorem) {
    case Theorem::t1:
      run_t1(cfg, rep);
      break;
    case Theorem::t2:
      run_t2(cfg, rep);
      break;
    case Theorem::t3:
      run_t3(cfg, rep);
      break;
    case Theorem::twisted:
      run_twisted(cfg, rep);
      break;
    case Theorem::checks:
      run_checks(cfg, rep);
      break;
    case Theorem::spectral:
      run_spectral(cfg, rep);
      break;
  }
  ojson series = ojson::array();
  for (const auto& s : rep.series) {
    series.push_back(series_summary(s));
    if (s.verdict == Verdict::fail) rep.verdict = Verdict::fail;
  }
  rep.summary["series"] = series;
  if (rep.invalid) rep.summary["invalid"] = *rep.invalid;
  rep.summary["verdict"] = std::string(to_string(rep.verdict));
  return rep;
}

std::string series_csv(const RatioSeries& s) {
  std::string out = "n,ratio,target,abs_err,rel_err,exceptional_flag,density_to_n\n";
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    const double r = s.values[k];
    const double abs_err = std::abs(r - s.target);
    const double rel_err = s.target != 0.0 ? abs_err / std::abs(s.target) : NAN;
    const bool flag = k < s.profile.flags.size() && s.profile.flags[k];
    const double d = k < s.profile.density.size() ? s.profile.density[k] : NAN;
    out += fmt::format("{},{},{},{},{},{},{}\n", s.n_first + k, fmt_num(r), fmt_num(s.target), fmt_num(abs_err),
                       fmt_num(rel_err), flag ? 1 : 0, fmt_num(d));
  }
  return out;
}

void write_report(const ScenarioReport& report, const std::filesystem::path& dir) {
  const auto root = dir / report.id;
  std::filesystem::create_directories(root);
  for (const auto& s : report.series) {
    std::ofstream out(root / (s.id + ".csv"), std::ios::binary);
    out << series_csv(s);
  }
  std::ofstream out(root / "summary.json", std::ios::binary);
  out << report.summary.dump(2) << "\n";
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("SRLT_OUTPUT_DIR"); env && *env) return env;
  return "srlt-out";
}

CsvDensity density_from_csv(const std::filesystem::path& csv, std::size_t limit, double eps, EpsilonMode mode) {
  std::ifstream in(csv);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", csv.string()));
  std::string line;
  std::getline(in, line);
  if (line.rfind("n,ratio,target", 0) != 0) throw ConfigError("density: not a series CSV (bad header)");
  std::vector<double> values;
  std::size_t n_first = 0;
  double target = NAN;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell[3];
    for (auto& c : cell) std::getline(ss, c, ',');
    const auto n = static_cast<std::size_t>(std::stoull(cell[0]));
    if (n > limit) break;
    if (n_first == 0) n_first = n;
    values.push_back(cell[1] == "nan" ? NAN : std::stod(cell[1]));
    target = std::stod(cell[2]);
  }
  if (values.empty()) throw ConfigError("density: no rows with n <= limit");
  const auto p = exceptional_density(values, n_first, target, eps, mode);
  return {n_first + values.size() - 1, p.exceptional.size(), p.density.back()};
}

}  // namespace srlt
