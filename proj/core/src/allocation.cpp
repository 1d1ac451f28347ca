#include "fleetfl/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "fleetfl/error.hpp"

namespace fleetfl::allocation {

namespace {

// Kuhn-Munkres with potentials on a dense n x n cost matrix (row-major),
// minimising. Returns the column assigned to each row. O(n^3).
std::vector<int> min_cost_square(const std::vector<double>& cost, int n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[static_cast<std::size_t>((i0 - 1) * n + (j - 1))] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

struct SubMatching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col) in the full matrix
  double value = 0.0;
};

// Best matching restricted to the given rows and columns.
SubMatching best_matching(const GainMatrix& m, const std::vector<std::size_t>& rows,
                          const std::vector<std::size_t>& cols) {
  SubMatching out;
  const int n = static_cast<int>(std::max(rows.size(), cols.size()));
  if (rows.empty() || cols.empty()) return out;
  std::vector<double> cost(static_cast<std::size_t>(n * n), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      cost[r * static_cast<std::size_t>(n) + c] = -m.at(rows[r], cols[c]);
    }
  }
  const auto row_to_col = min_cost_square(cost, n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto c = static_cast<std::size_t>(row_to_col[r]);
    if (c < cols.size()) {
      out.pairs.emplace_back(rows[r], cols[c]);
      out.value += m.at(rows[r], cols[c]);
    }
  }
  return out;
}

}  // namespace

double assignment_objective(const GainMatrix& m, const std::vector<Pair>& pairs) {
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pairs[a].agent < pairs[b].agent; });
  double sum = 0.0;
  for (std::size_t i : order) {
    const auto col = static_cast<std::size_t>(
        std::find(m.agents.begin(), m.agents.end(), pairs[i].agent) - m.agents.begin());
    sum += m.at(pairs[i].prb, col);
  }
  return sum;
}

Assignment hungarian_max(const GainMatrix& m, double tie_tol) {
  Assignment result;
  const std::size_t R = m.rows();
  const std::size_t C = m.cols();
  if (R == 0 || C == 0) return result;
  double max_abs = 0.0;
  for (const auto& row : m.entries) {
    if (row.size() != C) throw InvalidArgument("hungarian_max: ragged gain matrix");
    for (double x : row) {
      if (!std::isfinite(x)) throw InvalidArgument("hungarian_max: non-finite gain");
      max_abs = std::max(max_abs, std::abs(x));
    }
  }

  std::vector<std::size_t> free_rows(R);
  std::iota(free_rows.begin(), free_rows.end(), 0);
  std::vector<std::size_t> free_cols(C);
  std::iota(free_cols.begin(), free_cols.end(), 0);
  std::sort(free_cols.begin(), free_cols.end(),
            [&](std::size_t a, std::size_t b) { return m.agents[a] < m.agents[b]; });

  const double tol = tie_tol * (1.0 + max_abs * static_cast<double>(std::max(R, C)));
  double target = best_matching(m, free_rows, free_cols).value;
  const std::size_t pair_count = std::min(R, C);

  // Fix agents in ascending id order, each to the smallest pRB that still
  // admits an optimal completion.
  const std::vector<std::size_t> agent_order = free_cols;
  for (std::size_t col : agent_order) {
    std::erase(free_cols, col);
    const bool may_skip = free_cols.size() >= free_rows.size() &&
                          result.pairs.size() + free_rows.size() > 0;
    std::optional<std::size_t> chosen;
    for (std::size_t row : free_rows) {
      std::vector<std::size_t> rest_rows = free_rows;
      std::erase(rest_rows, row);
      const double v = m.at(row, col) + best_matching(m, rest_rows, free_cols).value;
      if (v >= target - tol) {
        chosen = row;
        target -= m.at(row, col);
        break;
      }
    }
    if (chosen) {
      result.pairs.push_back({*chosen, m.agents[col]});
      std::erase(free_rows, *chosen);
    } else if (!may_skip) {
      // Numerically no row met the target; fall back to the unconstrained
      // optimum for the remainder.
      break;
    }
    if (free_rows.empty()) break;
  }

  if (result.pairs.size() < pair_count) {
    // Complete with the optimum of whatever is left (only reached on round-off).
    std::vector<std::size_t> cols_left;
    for (std::size_t c = 0; c < C; ++c) {
      const bool used = std::any_of(result.pairs.begin(), result.pairs.end(),
                                    [&](const Pair& p) { return p.agent == m.agents[c]; });
      if (!used) cols_left.push_back(c);
    }
    for (const auto& [row, col] : best_matching(m, free_rows, cols_left).pairs) {
      result.pairs.push_back({row, m.agents[col]});
    }
  }

  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const Pair& a, const Pair& b) { return a.agent < b.agent; });
  result.objective = assignment_objective(m, result.pairs);
  return result;
}

void UplinkQueue::push(AgentId agent, std::int64_t enqueue_tti) {
  const QueueEntry e{agent, enqueue_tti};
  const auto pos = std::upper_bound(entries_.begin(), entries_.end(), e,
                                    [](const QueueEntry& a, const QueueEntry& b) {
                                      return a.enqueue_tti != b.enqueue_tti
                                                 ? a.enqueue_tti < b.enqueue_tti
                                                 : a.agent < b.agent;
                                    });
  entries_.insert(pos, e);
}

std::size_t UplinkQueue::ready_count(std::int64_t tti) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(),
                    [&](const QueueEntry& e) { return e.enqueue_tti <= tti; }));
}

QueueEntry UplinkQueue::pop_front() {
  const QueueEntry e = entries_.front();
  entries_.erase(entries_.begin());
  return e;
}

Batch schedule_uplink(UplinkQueue& queue, std::size_t n_prbs, const RateMetric& rate_metric,
                      std::int64_t clock_tti) {
  Batch batch;
  const std::size_t take = std::min(queue.ready_count(clock_tti), n_prbs);
  if (take == 0) return batch;

  GainMatrix gm;
  for (std::size_t i = 0; i < take; ++i) {
    const QueueEntry e = queue.pop_front();
    gm.agents.push_back(e.agent);
    batch.queuing_ttis[e.agent] = clock_tti - e.enqueue_tti;
  }
  gm.entries.assign(n_prbs, std::vector<double>(take, 0.0));
  for (std::size_t z = 0; z < n_prbs; ++z) {
    for (std::size_t v = 0; v < take; ++v) gm.entries[z][v] = rate_metric(gm.agents[v], z);
  }
  batch.assignment = hungarian_max(gm);
  return batch;
}

std::map<AgentId, UplinkOutcome> run_uplink(UplinkQueue queue, std::size_t n_prbs,
                                            const MetricAt& metric_at, const TransmitFn& transmit) {
  std::map<AgentId, UplinkOutcome> out;
  if (n_prbs == 0) throw InvalidArgument("run_uplink: no pRBs");
  std::int64_t clock = queue.empty() ? 0 : queue.next_arrival();
  while (!queue.empty()) {
    if (queue.ready_count(clock) == 0) clock = queue.next_arrival();
    const Batch batch = schedule_uplink(queue, n_prbs, metric_at(clock), clock);
    std::int64_t longest = 0;
    for (const Pair& p : batch.assignment.pairs) {
      UplinkOutcome o;
      o.prb = p.prb;
      o.start_tti = clock;
      o.queuing_ttis = batch.queuing_ttis.at(p.agent);
      o.transmission_ttis = transmit(p.agent, p.prb, clock);
      longest = std::max(longest, o.transmission_ttis);
      out[p.agent] = o;
    }
    clock += std::max<std::int64_t>(longest, 1);
  }
  return out;
}

}  // namespace fleetfl::allocation
