#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fleetfl/beamform.hpp"
#include "fleetfl/channel.hpp"
#include "fleetfl/fl.hpp"
#include "fleetfl/trace.hpp"

namespace fleetfl {

struct RadioConfig {
  channel::ChannelParams channel;
  int antennas_per_rsu = 4;
  std::size_t prbs_per_rsu = 10;
  double rsu_bandwidth_hz = 1.8e6;
  double total_bandwidth_hz = 3.6e6;
  double reuse_distance_m = 2000.0;  // same-band RSU spacing
  double rsu_offset_m = 15.0;
  double coverage_radius_m = 500.0;
  double hysteresis_db = 3.0;
  double fpp = 32.0;  // bits per transmitted weight
  beamform::BeamOptions beam;

  int bands() const;
  double rsu_spacing_m() const { return reuse_distance_m / bands(); }
};

struct TraceConfig {
  std::string file;  // empty: synthetic traces
  std::size_t synthetic_vehicles = 61;
  double synthetic_duration_s = 4200.0;
  trace::SyntheticTraceOptions synthetic;
  double dt_s = 3.0;
  double gap_limit_s = 30.0;
  trace::VspCoefficients vsp;
};

struct ProfileConfig {
  double rho_min = 0.2e9;  // cycles/s
  double rho_max = 0.8e9;
  double eta_min = 1e4;    // cycles/sample
  double eta_max = 4e4;
};

struct LearningConfig {
  fl::Shape shape;
  fl::HyperParams hp;
  std::size_t lag = 15;
  std::vector<std::size_t> horizons{1, 4, 8, 12};
  std::size_t rounds = 50;
  std::size_t agents_per_round = 10;
  std::int64_t fixed_iterations = 0;  // > 0: every agent runs exactly this many steps
  bool train = true;                  // false: delays only, model untouched
};

struct RoundConfig {
  double d_thr_s = 3.0;
  double compute_fraction = 0.7;  // d_k_cmp = compute_fraction * d_thr
  double subsample_fraction = 0.5;
  double round_time_step_s = 60.0;
  double warmup_s = 600.0;  // trace time before the first round's cutoff
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  RadioConfig radio;
  TraceConfig traces;
  ProfileConfig profiles;
  LearningConfig learning;
  RoundConfig round;
};

/// Itemized invariant violations; empty means valid.
std::vector<std::string> validate(const ScenarioConfig& cfg);

/// Reads a JSON config. Missing keys keep their defaults; unknown keys are
/// rejected. Throws Error with the offending key.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text);

/// Full config as indented JSON; parse_config(to_json_text(c)) reproduces c.
std::string to_json_text(const ScenarioConfig& cfg);

}  // namespace fleetfl
