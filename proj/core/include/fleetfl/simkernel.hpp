#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fleetfl/config.hpp"
#include "fleetfl/fl.hpp"
#include "fleetfl/mobility.hpp"
#include "fleetfl/trace.hpp"

namespace fleetfl::sim {

/// Per-agent delays of one round, seconds. d_tot is the plain sum of the
/// four components, evaluated left to right.
struct DelayLedger {
  double d_down = 0.0;
  double d_cmp = 0.0;
  double d_q_up = 0.0;
  double d_up = 0.0;
  double d_tot = 0.0;
  bool deadline_met = false;
};

double total_delay(double d_down, double d_cmp, double d_q_up, double d_up);
DelayLedger make_ledger(double d_down, double d_cmp, double d_q_up, double d_up, double d_thr);

struct AgentRecord {
  std::size_t vehicle = 0;
  int rsu_down = -1;
  int rsu_up = -1;
  DelayLedger ledger;
  std::int64_t iterations = 0;
  bool deadline_risk = false;
  bool downlink_delivered = true;
  bool uplink_delivered = true;
  double gamma = 0.0;
  double loss = 0.0;  // normalised units
  std::size_t dataset_size = 0;  // causal samples available this round
  std::size_t sample_count = 0;  // subsample actually trained on
  bool accepted = false;
};

struct RoundReport {
  std::size_t k = 0;
  double cutoff = 0.0;  // trace time of the round
  std::vector<std::size_t> selected;  // ascending
  std::vector<AgentRecord> agents;    // same order as selected
  bool skipped = false;      // nobody eligible
  bool all_dropped = false;  // agents selected but no update accepted
  std::uint64_t checksum = 0;  // global model after the round
  std::size_t handovers = 0;   // cumulative
};

/// Per-agent z-score transform from causal statistics; a zero spread maps to 1.
struct Normalizer {
  double mean = 0.0;
  double std = 1.0;

  double apply(double x) const { return (x - mean) / std; }
  double invert(double z) const { return z * std + mean; }
};

/// Uniform sample of min(n, |pool|) entries without replacement, keyed by
/// (seed, round); returned ascending.
std::vector<std::size_t> select_agents(std::span<const std::size_t> pool, std::size_t n,
                                       std::size_t round, std::uint64_t seed);

/// Loads the configured traces (file or synthetic).
std::vector<trace::VehicleTrace> load_traces(const ScenarioConfig& cfg);

struct VehicleData {
  std::string id;
  mobility::Trajectory trajectory;
  std::vector<trace::Sample> samples;  // raw VSP, ordered by label time
  fl::AgentProfile profile;
};

struct TestPoint {
  std::size_t vehicle = 0;
  double t = 0.0;
  double truth = 0.0;
  double prediction = 0.0;
};

struct Evaluation {
  std::vector<std::optional<double>> per_vehicle;  // raw units; nullopt: no test samples
  double mean = 0.0;  // over vehicles with test samples
  std::vector<TestPoint> points;
};

/// One FL run for a single forecast horizon.
class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, std::vector<trace::VehicleTrace> traces,
             std::size_t horizon);

  const ScenarioConfig& config() const { return cfg_; }
  std::size_t horizon() const { return horizon_; }
  const std::vector<VehicleData>& vehicles() const { return vehicles_; }
  const std::vector<mobility::RsuSite>& rsus() const { return rsus_; }
  const fl::ModelParams& model() const { return model_; }
  const fl::ModelParams& initial_model() const { return initial_; }

  double trace_start() const { return trace_start_; }
  double cutoff(std::size_t k) const;
  std::int64_t compute_deadline_ttis() const;
  double payload_bits() const;

  /// Causal sample count for vehicle at round k.
  std::size_t dataset_size(std::size_t vehicle, std::size_t k) const;
  Normalizer normalizer(std::size_t vehicle, std::size_t k) const;
  /// Normalised fresh subsample of the causal dataset used for training in round k.
  std::vector<trace::Sample> training_set(std::size_t vehicle, std::size_t k) const;
  Rng training_stream(std::size_t vehicle, std::size_t k) const;

  /// Vehicles inside some RSU's coverage with a nonempty causal dataset.
  std::vector<std::size_t> eligible(std::size_t k) const;

  RoundReport run_round(std::size_t k);

  /// Held-out samples after the last round's cutoff, denormalised with the
  /// final causal statistics.
  Evaluation evaluate() const;

 private:
  std::vector<mobility::Candidate> candidates(std::size_t vehicle, const mobility::Point& pos,
                                              std::size_t k) const;
  double shadow_db(std::size_t vehicle, int rsu, std::size_t k) const;

  ScenarioConfig cfg_;
  std::size_t horizon_;
  std::vector<VehicleData> vehicles_;
  std::vector<mobility::RsuSite> rsus_;
  mobility::AssociationState association_;
  fl::ModelParams initial_;
  fl::ModelParams model_;
  double trace_start_ = 0.0;
};

struct SimulationResult {
  std::size_t horizon = 0;
  std::vector<RoundReport> rounds;
  fl::ModelParams initial;
  fl::ModelParams final_model;
  Evaluation evaluation;
};

/// Runs all configured rounds for one horizon. Throws Error listing every
/// violation when the config is invalid.
SimulationResult run_simulation(const ScenarioConfig& cfg, std::size_t horizon);
SimulationResult run_simulation(const ScenarioConfig& cfg,
                                const std::vector<trace::VehicleTrace>& traces,
                                std::size_t horizon);

/// Mean squared error per vehicle (raw units) and the mean over vehicles.
Evaluation evaluate_model(const fl::ModelParams& model,
                          std::span<const std::vector<trace::Sample>> tests,
                          std::span<const Normalizer> norms);

}  // namespace fleetfl::sim
