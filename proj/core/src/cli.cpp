#include "fleetfl/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fleetfl/error.hpp"
#include "fleetfl/report.hpp"
#include "fleetfl/simkernel.hpp"

namespace fleetfl::cli {

std::uint64_t resolve_seed(const ScenarioConfig& cfg, std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("FLEETFL_SEED"); env != nullptr && *env != '\0') {
    std::uint64_t v = 0;
    const std::string s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error("FLEETFL_SEED is not an unsigned integer: " + s);
    }
    return v;
  }
  return cfg.seed;
}

namespace {

bool report_violations(const ScenarioConfig& cfg, std::ostream& err) {
  const auto problems = validate(cfg);
  if (problems.empty()) return true;
  err << "invalid config (" << problems.size() << " violation"
      << (problems.size() == 1 ? "" : "s") << "):\n";
  for (const auto& p : problems) err << "  - " << p << '\n';
  return false;
}

int simulate(const std::string& config_path, const std::string& out_dir,
             std::optional<std::uint64_t> seed, bool plots, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg = load_config(config_path);
  cfg.seed = resolve_seed(cfg, seed);
  if (!report_violations(cfg, err)) return 2;

  const auto traces = sim::load_traces(cfg);
  std::vector<sim::SimulationResult> results;
  std::vector<mobility::RsuSite> rsus;
  for (std::size_t h : cfg.learning.horizons) {
    out << "h = " << h << ": " << cfg.learning.rounds << " rounds ..." << std::flush;
    sim::Simulation probe(cfg, traces, h);
    if (rsus.empty()) rsus = probe.rsus();
    results.push_back(sim::run_simulation(cfg, traces, h));
    const double mse = results.back().evaluation.mean;
    out << " test MSE " << mse << '\n';
  }
  report::emit_reports(cfg, results, rsus, out_dir, plots);
  out << "wrote " << out_dir << '\n';
  return 0;
}

int gen_traces(const std::string& config_path, const std::string& out_file,
               std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg = load_config(config_path);
  cfg.seed = resolve_seed(cfg, seed);
  cfg.traces.file.clear();
  if (!report_violations(cfg, err)) return 2;
  const auto& t = cfg.traces;
  const auto traces = trace::gen_synthetic_traces(t.synthetic_vehicles, t.synthetic_duration_s,
                                                  t.dt_s, cfg.seed, t.synthetic);
  std::ofstream f(out_file);
  if (!f) throw Error("cannot write " + out_file);
  trace::write_trace_csv(f, traces);
  if (!f) throw Error("cannot write " + out_file);
  out << "wrote " << traces.size() << " traces to " << out_file << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated learning over a vehicular corridor: simulator and reports", "fleetfl"};
  app.require_subcommand(1);

  std::string config, out_path, in_dir;
  std::uint64_t seed_value = 0;
  bool plots = false;

  auto* sim_cmd = app.add_subcommand("simulate", "Run the simulation for every configured horizon");
  sim_cmd->add_option("--config", config, "Scenario config (JSON)")->required();
  sim_cmd->add_option("--out", out_path, "Output directory")->required();
  auto* sim_seed = sim_cmd->add_option("--seed", seed_value, "Master seed override");
  sim_cmd->add_flag("--plots", plots, "Also render plots/*.svg");

  auto* gen_cmd = app.add_subcommand("gen-traces", "Write synthetic traces as CSV");
  gen_cmd->add_option("--config", config, "Scenario config (JSON)")->required();
  gen_cmd->add_option("--out", out_path, "Output CSV file")->required();
  auto* gen_seed = gen_cmd->add_option("--seed", seed_value, "Master seed override");

  auto* rep_cmd = app.add_subcommand("report", "Summarise a simulate output directory");
  rep_cmd->add_option("--in", in_dir, "Directory written by simulate")->required();
  rep_cmd->add_flag("--plots", plots, "Render plots/*.svg");

  auto* val_cmd = app.add_subcommand("validate", "Check a config and exit");
  val_cmd->add_option("--config", config, "Scenario config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*sim_cmd) {
      const auto seed = *sim_seed ? std::optional<std::uint64_t>(seed_value) : std::nullopt;
      return simulate(config, out_path, seed, plots, out, err);
    }
    if (*gen_cmd) {
      const auto seed = *gen_seed ? std::optional<std::uint64_t>(seed_value) : std::nullopt;
      return gen_traces(config, out_path, seed, out, err);
    }
    if (*rep_cmd) {
      report::print_summary(in_dir, out);
      if (plots) {
        report::render_plots(in_dir);
        out << "wrote " << (std::filesystem::path(in_dir) / "plots").string() << '\n';
      }
      return 0;
    }
    if (*val_cmd) {
      ScenarioConfig cfg = load_config(config);
      cfg.seed = resolve_seed(cfg, std::nullopt);
      if (!report_violations(cfg, err)) return 2;
      out << "config ok\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace fleetfl::cli
