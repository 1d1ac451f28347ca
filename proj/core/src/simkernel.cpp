#include "fleetfl/simkernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "fleetfl/allocation.hpp"
#include "fleetfl/beamform.hpp"
#include "fleetfl/channel.hpp"
#include "fleetfl/error.hpp"

namespace fleetfl::sim {

double total_delay(double d_down, double d_cmp, double d_q_up, double d_up) {
  return d_down + d_cmp + d_q_up + d_up;
}

DelayLedger make_ledger(double d_down, double d_cmp, double d_q_up, double d_up, double d_thr) {
  DelayLedger l;
  l.d_down = d_down;
  l.d_cmp = d_cmp;
  l.d_q_up = d_q_up;
  l.d_up = d_up;
  l.d_tot = total_delay(d_down, d_cmp, d_q_up, d_up);
  l.deadline_met = l.d_tot <= d_thr;
  return l;
}

std::vector<std::size_t> select_agents(std::span<const std::size_t> pool, std::size_t n,
                                       std::size_t round, std::uint64_t seed) {
  std::vector<std::size_t> v(pool.begin(), pool.end());
  std::sort(v.begin(), v.end());
  const std::size_t m = std::min(n, v.size());
  Rng rng = make_stream(seed, Stream::kSelect, {round});
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, v.size() - 1);
    std::swap(v[i], v[pick(rng)]);
  }
  v.resize(m);
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<trace::VehicleTrace> load_traces(const ScenarioConfig& cfg) {
  const auto& t = cfg.traces;
  if (t.file.empty()) {
    return trace::gen_synthetic_traces(t.synthetic_vehicles, t.synthetic_duration_s, t.dt_s,
                                       cfg.seed, t.synthetic);
  }
  std::ifstream in(t.file);
  if (!in) throw Error("cannot open trace file " + t.file);
  return trace::parse_trace_csv(in);
}

Simulation::Simulation(const ScenarioConfig& cfg, std::vector<trace::VehicleTrace> traces,
                       std::size_t horizon)
    : cfg_(cfg), horizon_(horizon) {
  const auto& tc = cfg_.traces;
  const mobility::GeoPoint ref{tc.synthetic.ref_lat, tc.synthetic.ref_lon};
  const auto& pc = cfg_.profiles;

  trace_start_ = std::numeric_limits<double>::infinity();
  for (const auto& tr : traces) {
    if (!tr.points.empty()) trace_start_ = std::min(trace_start_, tr.points.front().t);
  }
  if (!std::isfinite(trace_start_)) trace_start_ = tc.synthetic.start_unixtime;

  vehicles_.reserve(traces.size());
  for (std::size_t v = 0; v < traces.size(); ++v) {
    VehicleData d;
    d.id = traces[v].vehicle_id;
    d.trajectory = mobility::Trajectory(traces[v], ref, tc.gap_limit_s);
    for (const auto& seg : trace::preprocess_trace(traces[v], tc.dt_s, tc.gap_limit_s, tc.vsp)) {
      auto ds = trace::build_windows(seg, cfg_.learning.lag, horizon_);
      for (auto& s : ds.samples) d.samples.push_back(std::move(s));
    }
    Rng rng = make_stream(cfg_.seed, Stream::kProfiles, {v});
    d.profile.rho = std::uniform_real_distribution<double>(pc.rho_min, pc.rho_max)(rng);
    d.profile.eta = std::uniform_real_distribution<double>(pc.eta_min, pc.eta_max)(rng);
    vehicles_.push_back(std::move(d));
  }

  mobility::SiteTemplate tmpl;
  tmpl.antenna_count = cfg_.radio.antennas_per_rsu;
  tmpl.antenna_height = cfg_.radio.channel.height_rsu_m;
  tmpl.coverage_radius = cfg_.radio.coverage_radius_m;
  rsus_ = mobility::deploy_rsus(tc.synthetic.corridor_length, cfg_.radio.rsu_spacing_m(),
                                cfg_.radio.rsu_offset_m, cfg_.radio.bands(), tmpl);

  initial_ = fl::init_model(cfg_.learning.shape, cfg_.seed);
  model_ = initial_;
}

double Simulation::cutoff(std::size_t k) const {
  return trace_start_ + cfg_.round.warmup_s +
         static_cast<double>(k) * cfg_.round.round_time_step_s;
}

std::int64_t Simulation::compute_deadline_ttis() const {
  const double ttis = cfg_.round.compute_fraction * cfg_.round.d_thr_s / cfg_.radio.channel.tti_s;
  return static_cast<std::int64_t>(std::floor(ttis + 1e-9));
}

double Simulation::payload_bits() const { return fl::payload_bits(model_, cfg_.radio.fpp); }

std::size_t Simulation::dataset_size(std::size_t vehicle, std::size_t k) const {
  const auto& s = vehicles_.at(vehicle).samples;
  const double c = cutoff(k);
  return static_cast<std::size_t>(
      std::upper_bound(s.begin(), s.end(), c,
                       [](double t, const trace::Sample& x) { return t < x.t_label; }) -
      s.begin());
}

Normalizer Simulation::normalizer(std::size_t vehicle, std::size_t k) const {
  const std::size_t n = dataset_size(vehicle, k);
  Normalizer z;
  if (n == 0) return z;
  const auto& s = vehicles_[vehicle].samples;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += s[i].y;
  z.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += (s[i].y - z.mean) * (s[i].y - z.mean);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  z.std = sd > 0.0 ? sd : 1.0;
  return z;
}

std::vector<trace::Sample> Simulation::training_set(std::size_t vehicle, std::size_t k) const {
  const std::size_t n = dataset_size(vehicle, k);
  if (n == 0) return {};
  const double frac = cfg_.round.subsample_fraction;
  const std::size_t m =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(frac * static_cast<double>(n))),
                              1, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_stream(cfg_.seed, Stream::kSubsample, {k, vehicle});
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());

  const Normalizer z = normalizer(vehicle, k);
  std::vector<trace::Sample> out;
  out.reserve(m);
  for (std::size_t i : idx) {
    trace::Sample s = vehicles_[vehicle].samples[i];
    for (double& x : s.x) x = z.apply(x);
    s.y = z.apply(s.y);
    out.push_back(std::move(s));
  }
  return out;
}

Rng Simulation::training_stream(std::size_t vehicle, std::size_t k) const {
  return make_stream(cfg_.seed, Stream::kBatches, {k, vehicle});
}

namespace {

double planar_distance(const mobility::Point& a, const mobility::Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

std::vector<std::size_t> Simulation::eligible(std::size_t k) const {
  std::vector<std::size_t> out;
  const double t = cutoff(k);
  for (std::size_t v = 0; v < vehicles_.size(); ++v) {
    const auto pos = vehicles_[v].trajectory.position(t);
    if (!pos || dataset_size(v, k) == 0) continue;
    const bool covered = std::any_of(rsus_.begin(), rsus_.end(), [&](const mobility::RsuSite& s) {
      return planar_distance(*pos, s.position) <= s.coverage_radius;
    });
    if (covered) out.push_back(v);
  }
  return out;
}

double Simulation::shadow_db(std::size_t vehicle, int rsu, std::size_t k) const {
  const double sd = cfg_.radio.channel.shadowing_std_db;
  if (sd == 0.0) return 0.0;
  Rng rng = make_stream(cfg_.seed, Stream::kShadow, {k, vehicle, static_cast<std::uint64_t>(rsu)});
  return std::normal_distribution<double>(0.0, sd)(rng);
}

std::vector<mobility::Candidate> Simulation::candidates(std::size_t vehicle,
                                                        const mobility::Point& pos,
                                                        std::size_t k) const {
  std::vector<mobility::Candidate> out;
  for (const auto& s : rsus_) {
    if (planar_distance(pos, s.position) > s.coverage_radius) continue;
    out.push_back({s.rsu_id, mobility::rsrp(pos, s, cfg_.radio.channel,
                                            shadow_db(vehicle, s.rsu_id, k))});
  }
  return out;
}

RoundReport Simulation::run_round(std::size_t k) {
  const auto& ch = cfg_.radio.channel;
  const double kappa = ch.tti_s;
  const double omega = ch.prb_bandwidth_hz;
  const int n_b = cfg_.radio.antennas_per_rsu;
  const std::size_t n_prbs = cfg_.radio.prbs_per_rsu;
  const double d_thr = cfg_.round.d_thr_s;
  const std::uint64_t seed = cfg_.seed;

  RoundReport rep;
  rep.k = k;
  rep.cutoff = cutoff(k);

  const auto pool = eligible(k);
  rep.selected = select_agents(pool, cfg_.learning.agents_per_round, k, seed);
  if (rep.selected.empty()) {
    rep.skipped = true;
    rep.checksum = fl::checksum(model_);
    rep.handovers = association_.handovers();
    return rep;
  }

  const double payload = payload_bits();
  const std::int64_t deadline = compute_deadline_ttis();
  const std::int64_t uplink_cap =
      static_cast<std::int64_t>(std::ceil(d_thr / kappa - 1e-9));

  rep.agents.resize(rep.selected.size());
  std::map<std::size_t, std::size_t> slot;  // vehicle -> index in rep.agents
  std::vector<mobility::Point> pos(rep.selected.size());
  std::map<int, std::vector<std::size_t>> down_groups;  // rsu -> vehicles
  for (std::size_t i = 0; i < rep.selected.size(); ++i) {
    const std::size_t v = rep.selected[i];
    slot[v] = i;
    pos[i] = *vehicles_[v].trajectory.position(rep.cutoff);
    const auto cand = candidates(v, pos[i], k);
    const int rsu = association_.update(v, cand, cfg_.radio.hysteresis_db);
    rep.agents[i].vehicle = v;
    rep.agents[i].rsu_down = rsu;
    rep.agents[i].dataset_size = dataset_size(v, k);
    down_groups[rsu].push_back(v);
  }

  auto geometry = [&](const mobility::Point& p, int rsu) {
    return channel::LinkGeometry{mobility::distance_3d(p, rsus_.at(static_cast<std::size_t>(rsu)),
                                                       ch.height_vehicle_m)};
  };
  auto link = [&](std::size_t v, const mobility::Point& p, int rsu, std::size_t prb,
                  std::int64_t tti) {
    Rng rng = channel::fading_stream(seed, k, v, static_cast<std::uint64_t>(rsu), prb,
                                     static_cast<std::uint64_t>(tti));
    return channel::draw_channel(geometry(p, rsu), shadow_db(v, rsu, k), n_b, ch, rng).h;
  };

  // Downlink: one max-min multicast beam per (pRB, TTI) over the agents of
  // the RSU still receiving; an agent leaves the group once its model arrives.
  std::vector<std::int64_t> down_ttis(rep.selected.size(), deadline);
  for (const auto& [rsu, members] : down_groups) {
    std::map<std::size_t, std::vector<double>> bits;
    std::vector<std::size_t> active = members;
    for (std::int64_t tti = 0; tti < deadline && !active.empty(); ++tti) {
      std::vector<std::vector<double>> snrs(active.size());
      for (std::size_t z = 0; z < n_prbs; ++z) {
        std::vector<beamform::CVector> hs;
        hs.reserve(active.size());
        for (std::size_t v : active) hs.push_back(link(v, pos[slot[v]], rsu, z, tti));
        Rng beam_rng = make_stream(seed, Stream::kBeamRandomization,
                                   {k, static_cast<std::uint64_t>(rsu), z,
                                    static_cast<std::uint64_t>(tti)});
        const auto sol = beamform::solve_multicast(hs, cfg_.radio.beam, beam_rng);
        for (std::size_t a = 0; a < active.size(); ++a) {
          snrs[a].push_back(channel::downlink_snr(ch.tx_power_rsu_w(), hs[a], sol.g, omega,
                                                  ch.noise_density_vehicle()));
        }
      }
      std::vector<std::size_t> still;
      for (std::size_t a = 0; a < active.size(); ++a) {
        auto& b = bits[active[a]];
        b.push_back(kappa * channel::block_rate(snrs[a], omega));
        const auto r = channel::transmission_delay(payload, b, kappa);
        if (r.delivered) {
          down_ttis[slot[active[a]]] = r.ttis;
        } else {
          still.push_back(active[a]);
        }
      }
      active = std::move(still);
    }
    for (std::size_t v : active) rep.agents[slot[v]].downlink_delivered = false;
  }

  // Local computation within the d_k_cmp window.
  std::vector<std::int64_t> cmp_ttis(rep.selected.size(), 0);
  std::vector<fl::LocalUpdate> updates(rep.selected.size());
  for (std::size_t i = 0; i < rep.selected.size(); ++i) {
    AgentRecord& a = rep.agents[i];
    if (!a.downlink_delivered) continue;
    const std::size_t v = a.vehicle;
    const auto& prof = vehicles_[v].profile;
    const std::size_t m = std::max<std::size_t>(
        1, std::min(a.dataset_size,
                    static_cast<std::size_t>(std::floor(cfg_.round.subsample_fraction *
                                                        static_cast<double>(a.dataset_size)))));
    const double per_iter =
        fl::per_iter_compute_delay(prof.eta, std::min(cfg_.learning.hp.batch_size, m), prof.rho);
    const std::int64_t budget = deadline - down_ttis[i];
    if (cfg_.learning.fixed_iterations > 0) {
      a.iterations = cfg_.learning.fixed_iterations;
      const double need = static_cast<double>(a.iterations) * per_iter;
      a.deadline_risk = need > static_cast<double>(budget) * kappa;
      cmp_ttis[i] = static_cast<std::int64_t>(std::ceil(need / kappa - 1e-9));
    } else {
      const auto it = fl::compute_iterations(static_cast<double>(budget) * kappa, per_iter);
      a.iterations = it.iterations;
      a.deadline_risk = it.deadline_risk;
      cmp_ttis[i] = it.deadline_risk ? static_cast<std::int64_t>(std::ceil(per_iter / kappa - 1e-9))
                                     : budget;
    }
    if (cfg_.learning.train) {
      const auto data = training_set(v, k);
      a.sample_count = data.size();
      updates[i] = fl::train_local(model_, data, a.iterations, cfg_.learning.hp,
                                   training_stream(v, k));
      updates[i].agent = v;
      updates[i].sample_fraction =
          static_cast<double>(data.size()) / static_cast<double>(a.dataset_size);
      updates[i].gamma = fl::inexactness(updates[i].w, model_, data, cfg_.learning.hp.mu);
      a.gamma = updates[i].gamma;
      a.loss = updates[i].loss;
    } else {
      a.sample_count = m;
    }
  }

  // Uplink: agents enqueue at their serving RSU (re-evaluated at enqueue time).
  std::map<int, allocation::UplinkQueue> queues;
  std::vector<mobility::Point> up_pos = pos;
  for (std::size_t i = 0; i < rep.selected.size(); ++i) {
    AgentRecord& a = rep.agents[i];
    if (!a.downlink_delivered) continue;
    const std::int64_t enqueue = down_ttis[i] + cmp_ttis[i];
    const double t = rep.cutoff + static_cast<double>(enqueue) * kappa;
    if (const auto p = vehicles_[a.vehicle].trajectory.position(t)) up_pos[i] = *p;
    const auto cand = candidates(a.vehicle, up_pos[i], k);
    a.rsu_up = cand.empty() ? a.rsu_down
                            : association_.update(a.vehicle, cand, cfg_.radio.hysteresis_db);
    queues[a.rsu_up].push(a.vehicle, enqueue);
  }

  std::vector<allocation::UplinkOutcome> up(rep.selected.size());
  for (auto& [rsu, queue] : queues) {
    auto snr = [&, rsu = rsu](std::size_t v, std::size_t prb, std::int64_t tti) {
      const auto h = link(v, up_pos[slot[v]], rsu, prb, tti);
      return channel::uplink_snr_mrc(ch.tx_power_vehicle_w(), h, omega, ch.noise_density_rsu());
    };
    const allocation::MetricAt metric_at = [&](std::int64_t clock) -> allocation::RateMetric {
      return [&, clock](allocation::AgentId v, std::size_t prb) {
        return omega * std::log2(1.0 + snr(v, prb, clock));
      };
    };
    const allocation::TransmitFn transmit = [&](allocation::AgentId v, std::size_t prb,
                                                std::int64_t start) {
      const auto r = channel::transmission_delay(
          payload,
          [&](std::int64_t i) { return kappa * omega * std::log2(1.0 + snr(v, prb, start + i)); },
          uplink_cap, kappa);
      if (!r.delivered) rep.agents[slot[v]].uplink_delivered = false;
      return r.ttis;
    };
    for (const auto& [v, o] : allocation::run_uplink(queue, n_prbs, metric_at, transmit)) {
      up[slot[v]] = o;
    }
  }

  std::vector<fl::LocalUpdate> accepted;
  for (std::size_t i = 0; i < rep.selected.size(); ++i) {
    AgentRecord& a = rep.agents[i];
    a.ledger = make_ledger(static_cast<double>(down_ttis[i]) * kappa,
                           static_cast<double>(cmp_ttis[i]) * kappa,
                           static_cast<double>(up[i].queuing_ttis) * kappa,
                           static_cast<double>(up[i].transmission_ttis) * kappa, d_thr);
    a.accepted = a.downlink_delivered && a.uplink_delivered && a.ledger.deadline_met;
    if (a.accepted && cfg_.learning.train) accepted.push_back(std::move(updates[i]));
  }

  const bool any_accepted =
      std::any_of(rep.agents.begin(), rep.agents.end(), [](const AgentRecord& a) { return a.accepted; });
  rep.all_dropped = !any_accepted;
  if (!accepted.empty()) model_ = fl::aggregate(accepted);
  rep.checksum = fl::checksum(model_);
  rep.handovers = association_.handovers();
  return rep;
}

Evaluation evaluate_model(const fl::ModelParams& model,
                          std::span<const std::vector<trace::Sample>> tests,
                          std::span<const Normalizer> norms) {
  if (tests.size() != norms.size()) throw InvalidArgument("evaluate_model: size mismatch");
  Evaluation ev;
  ev.per_vehicle.resize(tests.size());
  double sum = 0.0;
  std::size_t count = 0;
  std::vector<double> x;
  for (std::size_t v = 0; v < tests.size(); ++v) {
    if (tests[v].empty()) continue;
    double se = 0.0;
    for (const auto& s : tests[v]) {
      x.resize(s.x.size());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = norms[v].apply(s.x[i]);
      const double pred = norms[v].invert(fl::predict(model, x));
      se += (pred - s.y) * (pred - s.y);
      ev.points.push_back({v, s.t_label, s.y, pred});
    }
    const double mse = se / static_cast<double>(tests[v].size());
    ev.per_vehicle[v] = mse;
    sum += mse;
    ++count;
  }
  ev.mean = count > 0 ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
  return ev;
}

Evaluation Simulation::evaluate() const {
  const std::size_t K = cfg_.learning.rounds;
  const double c = cutoff(K);
  std::vector<std::vector<trace::Sample>> tests(vehicles_.size());
  std::vector<Normalizer> norms(vehicles_.size());
  for (std::size_t v = 0; v < vehicles_.size(); ++v) {
    norms[v] = normalizer(v, K);
    for (const auto& s : vehicles_[v].samples) {
      if (s.t_label > c) tests[v].push_back(s);
    }
  }
  return evaluate_model(model_, tests, norms);
}

SimulationResult run_simulation(const ScenarioConfig& cfg,
                                const std::vector<trace::VehicleTrace>& traces,
                                std::size_t horizon) {
  const auto problems = validate(cfg);
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw Error(msg);
  }
  Simulation sim(cfg, traces, horizon);
  SimulationResult res;
  res.horizon = horizon;
  res.initial = sim.initial_model();
  for (std::size_t k = 1; k <= cfg.learning.rounds; ++k) res.rounds.push_back(sim.run_round(k));
  res.final_model = sim.model();
  res.evaluation = sim.evaluate();
  return res;
}

SimulationResult run_simulation(const ScenarioConfig& cfg, std::size_t horizon) {
  const auto problems = validate(cfg);
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw Error(msg);
  }
  return run_simulation(cfg, load_traces(cfg), horizon);
}

}  // namespace fleetfl::sim
