#include "fleetfl/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fleetfl/error.hpp"

namespace fleetfl {

namespace {

using json = nlohmann::ordered_json;

// Calls fn(section, key, field) for every serialized field, in output order.
// Both directions of the JSON mapping go through this one table.
template <typename Cfg, typename Fn>
void for_each_field(Cfg& c, Fn&& fn) {
  fn("", "seed", c.seed);

  auto& r = c.radio;
  auto& ch = r.channel;
  fn("radio", "carrier_ghz", ch.carrier_ghz);
  fn("radio", "prb_bandwidth_hz", ch.prb_bandwidth_hz);
  fn("radio", "rsu_bandwidth_hz", r.rsu_bandwidth_hz);
  fn("radio", "total_bandwidth_hz", r.total_bandwidth_hz);
  fn("radio", "prbs_per_rsu", r.prbs_per_rsu);
  fn("radio", "antennas_per_rsu", r.antennas_per_rsu);
  fn("radio", "height_vehicle_m", ch.height_vehicle_m);
  fn("radio", "height_rsu_m", ch.height_rsu_m);
  fn("radio", "gain_vehicle_dbi", ch.gain_vehicle_dbi);
  fn("radio", "gain_rsu_dbi", ch.gain_rsu_dbi);
  fn("radio", "noise_figure_vehicle_db", ch.noise_figure_vehicle_db);
  fn("radio", "noise_figure_rsu_db", ch.noise_figure_rsu_db);
  fn("radio", "noise_psd_dbm_hz", ch.noise_psd_dbm_hz);
  fn("radio", "tx_power_rsu_prb_dbm", ch.tx_power_rsu_prb_dbm);
  fn("radio", "tx_power_vehicle_dbm", ch.tx_power_vehicle_dbm);
  fn("radio", "tti_s", ch.tti_s);
  fn("radio", "shadowing_std_db", ch.shadowing_std_db);
  fn("radio", "reuse_distance_m", r.reuse_distance_m);
  fn("radio", "rsu_offset_m", r.rsu_offset_m);
  fn("radio", "coverage_radius_m", r.coverage_radius_m);
  fn("radio", "hysteresis_db", r.hysteresis_db);
  fn("radio", "fpp", r.fpp);
  fn("radio", "sdp_max_iters", r.beam.sdp.max_iters);
  fn("radio", "sdp_tol", r.beam.sdp.tol);
  fn("radio", "n_rand", r.beam.n_rand);

  auto& t = c.traces;
  fn("traces", "file", t.file);
  fn("traces", "synthetic_vehicles", t.synthetic_vehicles);
  fn("traces", "synthetic_duration_s", t.synthetic_duration_s);
  fn("traces", "start_unixtime", t.synthetic.start_unixtime);
  fn("traces", "mean_speed_mps", t.synthetic.mean_speed);
  fn("traces", "reversion_rate", t.synthetic.reversion_rate);
  fn("traces", "volatility", t.synthetic.volatility);
  fn("traces", "corridor_length_m", t.synthetic.corridor_length);
  fn("traces", "ref_lat", t.synthetic.ref_lat);
  fn("traces", "ref_lon", t.synthetic.ref_lon);
  fn("traces", "dt_s", t.dt_s);
  fn("traces", "gap_limit_s", t.gap_limit_s);
  fn("traces", "vsp_A", t.vsp.A);
  fn("traces", "vsp_B", t.vsp.B);
  fn("traces", "vsp_C", t.vsp.C);
  fn("traces", "vsp_c1", t.vsp.c1);
  fn("traces", "vsp_c2", t.vsp.c2);
  fn("traces", "vsp_mass", t.vsp.mass);

  auto& p = c.profiles;
  fn("profiles", "rho_min", p.rho_min);
  fn("profiles", "rho_max", p.rho_max);
  fn("profiles", "eta_min", p.eta_min);
  fn("profiles", "eta_max", p.eta_max);

  auto& l = c.learning;
  fn("learning", "input_dim", l.shape.input_dim);
  fn("learning", "hidden_dim", l.shape.hidden_dim);
  fn("learning", "output_dim", l.shape.output_dim);
  fn("learning", "mu", l.hp.mu);
  fn("learning", "lr", l.hp.lr);
  fn("learning", "momentum", l.hp.momentum);
  fn("learning", "batch_size", l.hp.batch_size);
  fn("learning", "lag", l.lag);
  fn("learning", "horizons", l.horizons);
  fn("learning", "rounds", l.rounds);
  fn("learning", "agents_per_round", l.agents_per_round);
  fn("learning", "fixed_iterations", l.fixed_iterations);
  fn("learning", "train", l.train);

  auto& rc = c.round;
  fn("round", "d_thr_s", rc.d_thr_s);
  fn("round", "compute_fraction", rc.compute_fraction);
  fn("round", "subsample_fraction", rc.subsample_fraction);
  fn("round", "round_time_step_s", rc.round_time_step_s);
  fn("round", "warmup_s", rc.warmup_s);
}

json* section_of(json& root, std::string_view section) {
  return section.empty() ? &root : &root[std::string(section)];
}

std::string key_name(std::string_view section, std::string_view key) {
  return section.empty() ? std::string(key) : std::string(section) + "." + std::string(key);
}

}  // namespace

int RadioConfig::bands() const {
  if (!(rsu_bandwidth_hz > 0.0)) return 1;
  const double ratio = total_bandwidth_hz / rsu_bandwidth_hz;
  return std::max(1, static_cast<int>(std::lround(ratio)));
}

std::vector<std::string> validate(const ScenarioConfig& c) {
  std::vector<std::string> v;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) v.push_back(msg);
  };
  const auto& r = c.radio;
  const auto& ch = r.channel;
  need(ch.tti_s > 0.0, "radio.tti_s must be > 0");
  need(ch.prb_bandwidth_hz > 0.0, "radio.prb_bandwidth_hz must be > 0");
  need(ch.carrier_ghz > 0.0, "radio.carrier_ghz must be > 0");
  need(ch.tx_power_rsu_prb_dbm >= -30.0 && ch.tx_power_rsu_prb_dbm <= 40.0,
       "radio.tx_power_rsu_prb_dbm must lie in [-30, 40]");
  need(ch.tx_power_vehicle_dbm >= -30.0 && ch.tx_power_vehicle_dbm <= 40.0,
       "radio.tx_power_vehicle_dbm must lie in [-30, 40]");
  need(ch.height_vehicle_m > 1.0 && ch.height_rsu_m > ch.height_vehicle_m,
       "radio heights must satisfy 1 < height_vehicle_m < height_rsu_m");
  need(ch.shadowing_std_db >= 0.0, "radio.shadowing_std_db must be >= 0");
  need(r.antennas_per_rsu >= 1, "radio.antennas_per_rsu must be >= 1");
  need(r.prbs_per_rsu >= 1, "radio.prbs_per_rsu must be >= 1");
  need(r.rsu_bandwidth_hz > 0.0 && r.total_bandwidth_hz > 0.0, "radio bandwidths must be > 0");
  if (ch.prb_bandwidth_hz > 0.0 && r.rsu_bandwidth_hz > 0.0) {
    need(std::abs(r.rsu_bandwidth_hz - static_cast<double>(r.prbs_per_rsu) * ch.prb_bandwidth_hz) <=
             1e-9 * r.rsu_bandwidth_hz,
         "radio.rsu_bandwidth_hz must equal prbs_per_rsu * prb_bandwidth_hz");
    const double ratio = r.total_bandwidth_hz / r.rsu_bandwidth_hz;
    need(ratio >= 1.0 - 1e-9 && std::abs(ratio - std::round(ratio)) <= 1e-9,
         "radio.total_bandwidth_hz must be a whole multiple of rsu_bandwidth_hz");
  }
  need(r.reuse_distance_m > 0.0, "radio.reuse_distance_m must be > 0");
  need(r.coverage_radius_m > 0.0, "radio.coverage_radius_m must be > 0");
  need(r.hysteresis_db >= 0.0, "radio.hysteresis_db must be >= 0");
  need(r.fpp > 0.0, "radio.fpp must be > 0");
  need(r.beam.sdp.max_iters >= 1, "radio.sdp_max_iters must be >= 1");
  need(r.beam.sdp.tol > 0.0, "radio.sdp_tol must be > 0");
  need(r.beam.n_rand >= 0, "radio.n_rand must be >= 0");

  const auto& t = c.traces;
  if (t.file.empty()) {
    need(t.synthetic_vehicles >= 1, "traces.synthetic_vehicles must be >= 1");
    need(t.synthetic_duration_s > 0.0, "traces.synthetic_duration_s must be > 0");
    need(t.synthetic.corridor_length > 0.0, "traces.corridor_length_m must be > 0");
    need(t.synthetic.reversion_rate > 0.0, "traces.reversion_rate must be > 0");
    need(t.synthetic.volatility >= 0.0, "traces.volatility must be >= 0");
  }
  need(t.dt_s > 0.0, "traces.dt_s must be > 0");
  need(t.gap_limit_s > 0.0, "traces.gap_limit_s must be > 0");
  need(t.vsp.mass > 0.0 && t.vsp.c2 != 0.0, "traces.vsp_mass must be > 0 and vsp_c2 nonzero");

  const auto& p = c.profiles;
  need(p.rho_min > 0.0 && p.rho_max >= p.rho_min, "profiles: need 0 < rho_min <= rho_max");
  need(p.eta_min > 0.0 && p.eta_max >= p.eta_min, "profiles: need 0 < eta_min <= eta_max");

  const auto& l = c.learning;
  need(l.shape.input_dim == 1, "learning.input_dim must be 1 (univariate window)");
  need(l.shape.output_dim == 1, "learning.output_dim must be 1");
  need(l.shape.hidden_dim >= 1, "learning.hidden_dim must be >= 1");
  need(l.hp.mu >= 0.0, "learning.mu must be >= 0");
  need(l.hp.lr > 0.0, "learning.lr must be > 0");
  need(l.hp.momentum >= 0.0 && l.hp.momentum < 1.0, "learning.momentum must lie in [0, 1)");
  need(l.hp.batch_size >= 1, "learning.batch_size must be >= 1");
  need(l.lag >= 1, "learning.lag must be >= 1");
  need(!l.horizons.empty(), "learning.horizons must not be empty");
  for (std::size_t h : l.horizons) {
    need(h >= 1 && h <= 24, "learning.horizons entries must lie in [1, 24] (got " +
                                std::to_string(h) + ")");
  }
  need(l.agents_per_round >= 1, "learning.agents_per_round must be >= 1");
  need(l.fixed_iterations >= 0, "learning.fixed_iterations must be >= 0");

  const auto& rc = c.round;
  need(rc.d_thr_s > 0.0, "round.d_thr_s must be > 0");
  need(rc.compute_fraction > 0.0 && rc.compute_fraction < 1.0,
       "round.compute_fraction must lie in (0, 1) so that 0 < d_k_cmp < d_thr");
  need(rc.subsample_fraction > 0.0 && rc.subsample_fraction <= 1.0,
       "round.subsample_fraction must lie in (0, 1]");
  need(rc.round_time_step_s > 0.0, "round.round_time_step_s must be > 0");
  need(rc.warmup_s >= 0.0, "round.warmup_s must be >= 0");
  return v;
}

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw Error("config: top level must be an object");

  ScenarioConfig cfg;
  std::map<std::string, std::set<std::string>> known;
  for_each_field(cfg, [&](std::string_view section, std::string_view key, auto& field) {
    known[std::string(section)].insert(std::string(key));
    const json* sec = &root;
    if (!section.empty()) {
      const auto it = root.find(std::string(section));
      if (it == root.end()) return;
      sec = &*it;
    }
    const auto it = sec->find(std::string(key));
    if (it == sec->end()) return;
    try {
      it->get_to(field);
    } catch (const json::exception& e) {
      throw Error("config: " + key_name(section, key) + ": " + e.what());
    }
  });

  for (const auto& [name, value] : root.items()) {
    if (value.is_object()) {
      if (!known.contains(name) || name.empty()) throw Error("config: unknown section " + name);
      for (const auto& [key, unused] : value.items()) {
        if (!known[name].contains(key)) throw Error("config: unknown key " + name + "." + key);
      }
    } else if (!known[""].contains(name)) {
      throw Error("config: unknown key " + name);
    }
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json_text(const ScenarioConfig& cfg) {
  json root = json::object();
  ScenarioConfig copy = cfg;
  for_each_field(copy, [&](std::string_view section, std::string_view key, auto& field) {
    (*section_of(root, section))[std::string(key)] = field;
  });
  return root.dump(2);
}

}  // namespace fleetfl
