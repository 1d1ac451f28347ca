#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fleetfl/config.hpp"
#include "fleetfl/simkernel.hpp"

namespace fleetfl::report {

inline constexpr char kRoundsHeader[] =
    "k,agent,d_down,d_cmp,d_q_up,d_up,d_tot,L_v,gamma,loss,accepted";

/// One rounds.csv row.
struct RoundRow {
  std::size_t k = 0;
  std::size_t agent = 0;
  double d_down = 0.0;
  double d_cmp = 0.0;
  double d_q_up = 0.0;
  double d_up = 0.0;
  double d_tot = 0.0;
  std::int64_t iterations = 0;
  double gamma = 0.0;
  double loss = 0.0;
  bool accepted = false;

  friend bool operator==(const RoundRow&, const RoundRow&) = default;
};

std::vector<RoundRow> rows_of(std::span<const sim::RoundReport> rounds);

/// Reals are written with 17 significant digits so parsing restores them exactly.
void write_rounds_csv(std::ostream& out, std::span<const RoundRow> rows);
std::vector<RoundRow> read_rounds_csv(std::istream& in);

/// Writes rounds.csv (first horizon), rounds_h<h>.csv (every horizon),
/// summary.json, predictions.csv, rsu_layout.csv, checkpoint_initial.bin,
/// checkpoint_final.bin (first horizon) and checkpoint_final_h<h>.bin, plus
/// plots/*.svg when `plots` is set. Throws Error naming the path on I/O failure.
void emit_reports(const ScenarioConfig& cfg, std::span<const sim::SimulationResult> results,
                  std::span<const mobility::RsuSite> rsus, const std::filesystem::path& out_dir,
                  bool plots);

/// Renders plots/*.svg from a directory written by emit_reports.
void render_plots(const std::filesystem::path& dir);

/// Human-readable tables (MSE per horizon, delay and acceptance summary).
void print_summary(const std::filesystem::path& dir, std::ostream& out);

}  // namespace fleetfl::report
