#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "srlt/errors.hpp"
#include "srlt/scenario.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitInvalid = 2;

void print_groups() {
  fmt::print("integer_lattice  Z^d             params: dimension         exponentials: t in R^d\n");
  fmt::print("free_group       F_k (k <= 26)   params: rank              exponentials: a_i = phi(g_i) > 0\n");
  fmt::print("heisenberg       H3(Z)           params: none              exponentials: on Z^2 (center -> 1)\n");
  fmt::print("cyclic           Z/mZ            params: modulus           exponentials: trivial\n");
  fmt::print("grid_affine      {{x -> ax + b}}   params: levels_per_side, log2_step, b_step, b_bound"
             "   exponentials: a^c\n");
}

int report_series(const srlt::ScenarioReport& rep) {
  for (const auto& s : rep.series)
    fmt::print("{:<6} {:<24} target {:<12.7g} last {:<12.7g} d_n {:<8.4g} {}\n",
               s.verdict == srlt::Verdict::pass ? "PASS" : (s.verdict == srlt::Verdict::fail ? "FAIL" : "-"), s.id,
               s.target, s.values.empty() ? 0.0 : s.values.back(), s.final_density(), s.verdict_note);
  fmt::print("scenario {}: {}\n", rep.id, srlt::to_string(rep.verdict));
  if (rep.invalid) {
    fmt::print(stderr, "invalid run: {}\n", *rep.invalid);
    return kExitInvalid;
  }
  return rep.verdict == srlt::Verdict::fail ? kExitVerdict : kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strong ratio limit laboratory: random walks on groups"};
  app.require_subcommand(1);

  auto* groups = app.add_subcommand("groups", "Group zoo");
  auto* groups_list = groups->add_subcommand("list", "List the supported groups");
  groups->require_subcommand(1);

  std::string config;
  std::string out_dir;
  auto* est = app.add_subcommand("estimate-r", "Estimate the convergence parameter R of a scenario's walk");
  est->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

  auto* verify = app.add_subcommand("verify", "Run a scenario and print verdicts without writing reports");
  verify->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Run a scenario and write CSV series and summary.json");
  run->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (default $SRLT_OUTPUT_DIR or ./srlt-out)");

  std::string csv;
  std::size_t limit = 0;
  double eps = 1e-2;
  std::string mode = "relative";
  auto* dens = app.add_subcommand("density", "Exceptional-set density of a series CSV");
  dens->add_option("csv", csv, "Series CSV written by run")->required()->check(CLI::ExistingFile);
  dens->add_option("--limit", limit, "Largest n counted")->required();
  dens->add_option("--eps", eps, "Tolerance defining the exceptional set")->required();
  dens->add_option("--mode", mode, "relative or absolute")->check(CLI::IsMember({"relative", "absolute"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (groups_list->parsed()) {
      print_groups();
      return kExitPass;
    }
    if (est->parsed()) {
      const auto cfg = srlt::load_scenario(config);
      fmt::print("{}\n", srlt::estimate_r(cfg).dump(2));
      return kExitPass;
    }
    if (verify->parsed()) return report_series(srlt::run_scenario(srlt::load_scenario(config)));
    if (run->parsed()) {
      const auto rep = srlt::run_scenario(srlt::load_scenario(config));
      const std::filesystem::path dir = out_dir.empty() ? srlt::default_output_dir() : std::filesystem::path(out_dir);
      srlt::write_report(rep, dir);
      fmt::print("reports written to {}\n", (dir / rep.id).string());
      return report_series(rep);
    }
    if (dens->parsed()) {
      const auto d = srlt::density_from_csv(csv, limit, eps,
                                            mode == "relative" ? srlt::EpsilonMode::relative : srlt::EpsilonMode::absolute);
      fmt::print("n {}  exceptional {}  density {:.6g}\n", d.limit, d.exceptional, d.density);
      return kExitPass;
    }
  } catch (const srlt::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitInvalid;
  } catch (const srlt::BudgetExceeded& e) {
    fmt::print(stderr, "budget error: {}\n", e.what());
    return kExitInvalid;
  } catch (const srlt::TruncationExceeded& e) {
    fmt::print(stderr, "truncation error: {}\n", e.what());
    return kExitInvalid;
  } catch (const srlt::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInvalid;
  }
  return kExitPass;
}
