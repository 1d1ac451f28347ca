#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fleetfl/error.hpp"
#include "fleetfl/simkernel.hpp"

namespace fleetfl::sim {
namespace {

ScenarioConfig small_scenario(std::size_t rounds) {
  ScenarioConfig cfg;
  cfg.seed = 5;
  cfg.traces.synthetic_vehicles = 14;
  cfg.traces.synthetic_duration_s = 600.0 + 60.0 * static_cast<double>(rounds) + 300.0;
  cfg.profiles.eta_min = 1e6;
  cfg.profiles.eta_max = 4e6;
  cfg.learning.hp.lr = 0.01;
  cfg.learning.horizons = {1};
  cfg.learning.rounds = rounds;
  cfg.learning.agents_per_round = 6;
  cfg.radio.beam.n_rand = 20;
  return cfg;
}

bool is_multiple_of(double x, double kappa) {
  const double q = x / kappa;
  return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, q);
}

TEST(SelectAgents, WholePoolAndDeterminism) {
  std::vector<std::size_t> pool{3, 1, 4, 15, 9, 2, 6};
  auto all = select_agents(pool, pool.size(), 0, 1);
  auto sorted = pool;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(all, sorted);
  EXPECT_EQ(select_agents(pool, 3, 12, 99), select_agents(pool, 3, 12, 99));
  EXPECT_TRUE(select_agents({}, 3, 0, 1).empty());
  EXPECT_EQ(select_agents(pool, 50, 0, 1).size(), pool.size());
}

TEST(SelectAgents, AscendingDistinctSubset) {
  std::vector<std::size_t> pool(61);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t k = 0; k < 200; ++k) {
    const auto s = select_agents(pool, 10, k, 7);
    ASSERT_EQ(s.size(), 10u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 10u);
  }
}

TEST(SelectAgents, EachVehicleIsPickedWithProbabilityNOverPool) {
  std::vector<std::size_t> pool(61);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> hits(61, 0);
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) {
    for (std::size_t v : select_agents(pool, 10, static_cast<std::size_t>(k), 3)) ++hits[v];
  }
  const double p = 10.0 / 61.0;
  const double sd = std::sqrt(draws * p * (1.0 - p));
  for (int h : hits) EXPECT_NEAR(h, draws * p, 4.5 * sd);
}

TEST(Ledger, SumAndDeadline) {
  const auto l = make_ledger(0.007, 2.5, 0.010, 0.055, 3.0);
  EXPECT_NEAR(l.d_tot, 2.572, 1e-12);
  EXPECT_EQ(l.d_tot, ((0.007 + 2.5) + 0.010) + 0.055);
  EXPECT_TRUE(l.deadline_met);
  EXPECT_FALSE(make_ledger(0.5, 2.1, 0.3, 0.2, 3.0).deadline_met);
  EXPECT_EQ(total_delay(1.0, 2.0, 3.0, 4.0), 10.0);
}

TEST(EvaluateModel, HandExample) {
  // A zero network predicts 0 in normalised units, i.e. each vehicle's mean.
  fl::ModelParams zero{fl::Shape{}, Eigen::VectorXd::Zero(929)};
  std::vector<std::vector<trace::Sample>> tests(3);
  std::vector<Normalizer> norms(3);
  const double preds[] = {1.0, 2.0, 3.0}, labels[] = {1.0, 2.0, 5.0};
  for (std::size_t v = 0; v < 3; ++v) {
    tests[v].push_back({std::vector<double>(15, 0.0), labels[v], 0.0});
    norms[v] = {preds[v], 1.0};
  }
  const auto ev = evaluate_model(zero, tests, norms);
  EXPECT_NEAR(ev.mean, 4.0 / 3.0, 1e-15);
  EXPECT_EQ(ev.points.size(), 3u);
}

TEST(EvaluateModel, ConstantMeanPredictorScoresTheLabelVariance) {
  fl::ModelParams zero{fl::Shape{}, Eigen::VectorXd::Zero(929)};
  std::vector<std::vector<trace::Sample>> tests(2);
  const std::vector<double> y{2.0, 4.0, 9.0, -1.0};
  const double mean = 3.5;
  double var = 0.0;
  for (double v : y) {
    tests[0].push_back({std::vector<double>(15, 1.0), v, 0.0});
    var += (v - mean) * (v - mean) / 4.0;
  }
  std::vector<Normalizer> norms{{mean, 2.0}, {0.0, 1.0}};
  const auto ev = evaluate_model(zero, tests, norms);
  ASSERT_TRUE(ev.per_vehicle[0].has_value());
  EXPECT_NEAR(*ev.per_vehicle[0], var, 1e-12);
  EXPECT_FALSE(ev.per_vehicle[1].has_value());
  EXPECT_NEAR(ev.mean, var, 1e-12);
}

TEST(Simulation, ZeroRoundsReturnTheInitialModel) {
  const auto r = run_simulation(small_scenario(0), 1);
  EXPECT_TRUE(r.rounds.empty());
  EXPECT_EQ(r.final_model.w, r.initial.w);
}

TEST(Simulation, InvalidConfigIsRejected) {
  auto cfg = small_scenario(1);
  cfg.round.subsample_fraction = 0.0;
  EXPECT_THROW(run_simulation(cfg, 1), Error);
}

class SmallRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cfg_ = new ScenarioConfig(small_scenario(6));
    traces_ = new std::vector<trace::VehicleTrace>(load_traces(*cfg_));
    result_ = new SimulationResult(run_simulation(*cfg_, *traces_, 1));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete traces_;
    delete cfg_;
  }
  static ScenarioConfig* cfg_;
  static std::vector<trace::VehicleTrace>* traces_;
  static SimulationResult* result_;
};

ScenarioConfig* SmallRun::cfg_ = nullptr;
std::vector<trace::VehicleTrace>* SmallRun::traces_ = nullptr;
SimulationResult* SmallRun::result_ = nullptr;

TEST_F(SmallRun, LedgerIdentityAndSynchrony) {
  const double kappa = cfg_->radio.channel.tti_s;
  std::size_t agents = 0;
  for (const auto& r : result_->rounds) {
    ASSERT_EQ(r.agents.size(), r.selected.size());
    for (const auto& a : r.agents) {
      const auto& l = a.ledger;
      EXPECT_EQ(l.d_tot, l.d_down + l.d_cmp + l.d_q_up + l.d_up);
      EXPECT_GE(l.d_down, 0.0);
      EXPECT_GE(l.d_cmp, 0.0);
      EXPECT_GE(l.d_q_up, 0.0);
      EXPECT_GE(l.d_up, 0.0);
      EXPECT_TRUE(is_multiple_of(l.d_down, kappa));
      EXPECT_TRUE(is_multiple_of(l.d_q_up, kappa));
      EXPECT_TRUE(is_multiple_of(l.d_up, kappa));
      if (a.accepted) EXPECT_LE(l.d_tot, cfg_->round.d_thr_s);
      EXPECT_EQ(a.accepted,
                a.downlink_delivered && a.uplink_delivered && l.d_tot <= cfg_->round.d_thr_s);
      ++agents;
    }
  }
  EXPECT_GT(agents, 0u);
}

TEST_F(SmallRun, IterationsFitTheComputeWindow) {
  Simulation sim(*cfg_, *traces_, 1);
  for (const auto& r : result_->rounds) {
    for (const auto& a : r.agents) {
      EXPECT_GE(a.iterations, a.downlink_delivered ? 1 : 0);
      if (!a.downlink_delivered || a.deadline_risk) continue;
      const auto& prof = sim.vehicles()[a.vehicle].profile;
      const double per_iter = fl::per_iter_compute_delay(
          prof.eta, std::min(cfg_->learning.hp.batch_size, a.sample_count), prof.rho);
      EXPECT_LE(static_cast<double>(a.iterations) * per_iter, a.ledger.d_cmp * (1.0 + 1e-12));
    }
  }
}

TEST_F(SmallRun, DataGrowsCausally) {
  Simulation sim(*cfg_, *traces_, 1);
  for (std::size_t v = 0; v < sim.vehicles().size(); ++v) {
    std::size_t prev = 0;
    for (std::size_t k = 0; k <= cfg_->learning.rounds; ++k) {
      const std::size_t n = sim.dataset_size(v, k);
      EXPECT_GE(n, prev);
      prev = n;
    }
    for (std::size_t k : {std::size_t{0}, std::size_t{3}}) {
      if (sim.dataset_size(v, k) == 0) continue;
      for (const auto& s : sim.training_set(v, k)) EXPECT_LE(s.t_label, sim.cutoff(k));
    }
  }
}

TEST_F(SmallRun, DroppedUpdatesLeaveTheModelAlone) {
  std::uint64_t prev = fl::checksum(result_->initial);
  for (const auto& r : result_->rounds) {
    const bool any = std::any_of(r.agents.begin(), r.agents.end(),
                                 [](const AgentRecord& a) { return a.accepted; });
    if (!any) EXPECT_EQ(r.checksum, prev);
    EXPECT_EQ(r.all_dropped, !r.selected.empty() && !any);
    prev = r.checksum;
  }
  EXPECT_EQ(prev, fl::checksum(result_->final_model));
}

TEST_F(SmallRun, IdenticalSeedsGiveIdenticalRuns) {
  const auto again = run_simulation(*cfg_, *traces_, 1);
  ASSERT_EQ(again.rounds.size(), result_->rounds.size());
  for (std::size_t k = 0; k < again.rounds.size(); ++k) {
    const auto& a = again.rounds[k];
    const auto& b = result_->rounds[k];
    EXPECT_EQ(a.selected, b.selected);
    EXPECT_EQ(a.checksum, b.checksum);
    ASSERT_EQ(a.agents.size(), b.agents.size());
    for (std::size_t i = 0; i < a.agents.size(); ++i) {
      EXPECT_EQ(a.agents[i].ledger.d_tot, b.agents[i].ledger.d_tot);
      EXPECT_EQ(a.agents[i].loss, b.agents[i].loss);
      EXPECT_EQ(a.agents[i].gamma, b.agents[i].gamma);
    }
  }
  EXPECT_EQ(again.final_model.w, result_->final_model.w);
}

TEST_F(SmallRun, EveryRoundSelectsFromEligibleVehicles) {
  Simulation sim(*cfg_, *traces_, 1);
  for (const auto& r : result_->rounds) {
    const auto pool = sim.eligible(r.k);
    EXPECT_EQ(r.selected.size(), std::min(pool.size(), cfg_->learning.agents_per_round));
    for (std::size_t v : r.selected) {
      EXPECT_TRUE(std::binary_search(pool.begin(), pool.end(), v));
    }
    EXPECT_EQ(r.skipped, pool.empty());
  }
}

}  // namespace
}  // namespace fleetfl::sim
