#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace fleetfl::allocation {

using AgentId = std::size_t;

/// Per-pRB (row), per-agent (column) rate metric.
struct GainMatrix {
  std::vector<AgentId> agents;               // column ids
  std::vector<std::vector<double>> entries;  // entries[z][v]

  std::size_t rows() const { return entries.size(); }
  std::size_t cols() const { return agents.size(); }
  double at(std::size_t z, std::size_t v) const { return entries[z][v]; }
};

struct Pair {
  std::size_t prb = 0;
  AgentId agent = 0;

  friend bool operator==(const Pair&, const Pair&) = default;
};

struct Assignment {
  std::vector<Pair> pairs;  // sorted by agent id
  double objective = 0.0;   // entries summed in ascending agent order
};

/// Maximum-weight pRB/agent matching via the Hungarian method (rectangular
/// inputs padded with zero rows/columns). Among optimal matchings the one
/// whose (agent id -> pRB index) list is lexicographically smallest wins;
/// objectives within `tie_tol` (relative) count as ties.
Assignment hungarian_max(const GainMatrix& m, double tie_tol = 1e-12);

/// Objective of a given matching, summed in ascending agent order.
double assignment_objective(const GainMatrix& m, const std::vector<Pair>& pairs);

struct QueueEntry {
  AgentId agent = 0;
  std::int64_t enqueue_tti = 0;
};

/// FIFO by enqueue time, ties by agent id.
class UplinkQueue {
 public:
  void push(AgentId agent, std::int64_t enqueue_tti);
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<QueueEntry>& entries() const { return entries_; }
  /// Entries already waiting at `tti`, in service order.
  std::size_t ready_count(std::int64_t tti) const;
  std::int64_t next_arrival() const { return entries_.front().enqueue_tti; }
  QueueEntry pop_front();

 private:
  std::vector<QueueEntry> entries_;
};

using RateMetric = std::function<double(AgentId agent, std::size_t prb)>;

struct Batch {
  Assignment assignment;
  std::map<AgentId, std::int64_t> queuing_ttis;  // clock - enqueue time
};

/// Forms one scheduling batch at `clock_tti`: the first min(waiting, n_prbs)
/// agents in FIFO order, matched to pRBs by hungarian_max on `rate_metric`.
/// Scheduled agents leave the queue.
Batch schedule_uplink(UplinkQueue& queue, std::size_t n_prbs, const RateMetric& rate_metric,
                      std::int64_t clock_tti);

struct UplinkOutcome {
  std::size_t prb = 0;
  std::int64_t start_tti = 0;
  std::int64_t queuing_ttis = 0;
  std::int64_t transmission_ttis = 0;
};

/// Returns the number of TTIs agent needs on prb when it starts at start_tti.
using TransmitFn =
    std::function<std::int64_t(AgentId agent, std::size_t prb, std::int64_t start_tti)>;
using MetricAt = std::function<RateMetric(std::int64_t clock_tti)>;

/// Drains the queue batch by batch; each batch ends when its slowest member
/// finishes, then the next batch forms from the agents waiting by then.
std::map<AgentId, UplinkOutcome> run_uplink(UplinkQueue queue, std::size_t n_prbs,
                                            const MetricAt& metric_at, const TransmitFn& transmit);

}  // namespace fleetfl::allocation
