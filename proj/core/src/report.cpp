#include "fleetfl/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fleetfl/error.hpp"
#include "fleetfl/svg.hpp"

namespace fleetfl::report {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const fs::path& p, bool binary = false) {
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot read " + p.string());
  return in;
}

template <typename T>
T parse_field(std::string_view s, std::size_t row) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(row, "bad field '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string rounds_file(std::size_t h) { return "rounds_h" + std::to_string(h) + ".csv"; }

std::string hex(std::uint64_t v) {
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << v;
  return o.str();
}

void write_checkpoint_file(const fs::path& p, const fl::ModelParams& m) {
  auto out = open_out(p, true);
  fl::write_checkpoint(out, m);
}

json read_summary(const fs::path& dir) {
  auto in = open_in(dir / "summary.json");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("summary.json: " + std::string(e.what()));
  }
}

std::vector<std::size_t> horizons_of(const json& summary) {
  std::vector<std::size_t> hs;
  for (const auto& e : summary.at("horizons")) hs.push_back(e.at("h").get<std::size_t>());
  return hs;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<RoundRow> rows_of(std::span<const sim::RoundReport> rounds) {
  std::vector<RoundRow> rows;
  for (const auto& r : rounds) {
    for (const auto& a : r.agents) {
      rows.push_back({r.k, a.vehicle, a.ledger.d_down, a.ledger.d_cmp, a.ledger.d_q_up,
                      a.ledger.d_up, a.ledger.d_tot, a.iterations, a.gamma, a.loss, a.accepted});
    }
  }
  return rows;
}

void write_rounds_csv(std::ostream& out, std::span<const RoundRow> rows) {
  out << kRoundsHeader << '\n' << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.k << ',' << r.agent << ',' << r.d_down << ',' << r.d_cmp << ',' << r.d_q_up << ','
        << r.d_up << ',' << r.d_tot << ',' << r.iterations << ',' << r.gamma << ',' << r.loss << ','
        << (r.accepted ? 1 : 0) << '\n';
  }
}

std::vector<RoundRow> read_rounds_csv(std::istream& in) {
  std::vector<RoundRow> rows;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row == 1 && line.rfind("k,", 0) == 0) continue;
    const auto f = split(line);
    if (f.size() != 11) throw ParseError(row, "expected 11 columns");
    RoundRow r;
    r.k = parse_field<std::size_t>(f[0], row);
    r.agent = parse_field<std::size_t>(f[1], row);
    r.d_down = parse_field<double>(f[2], row);
    r.d_cmp = parse_field<double>(f[3], row);
    r.d_q_up = parse_field<double>(f[4], row);
    r.d_up = parse_field<double>(f[5], row);
    r.d_tot = parse_field<double>(f[6], row);
    r.iterations = parse_field<std::int64_t>(f[7], row);
    r.gamma = parse_field<double>(f[8], row);
    r.loss = parse_field<double>(f[9], row);
    const int acc = parse_field<int>(f[10], row);
    if (acc != 0 && acc != 1) throw ParseError(row, "accepted must be 0 or 1");
    r.accepted = acc == 1;
    rows.push_back(r);
  }
  return rows;
}

void emit_reports(const ScenarioConfig& cfg, std::span<const sim::SimulationResult> results,
                  std::span<const mobility::RsuSite> rsus, const fs::path& out_dir, bool plots) {
  if (results.empty()) throw InvalidArgument("emit_reports: no results");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());

  json summary;
  summary["config"] = json::parse(to_json_text(cfg));
  summary["horizons"] = json::array();
  std::size_t total_selected = 0, total_accepted = 0;

  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& res = results[i];
    const auto rows = rows_of(res.rounds);
    {
      auto out = open_out(out_dir / rounds_file(res.horizon));
      write_rounds_csv(out, rows);
    }
    if (i == 0) {
      auto out = open_out(out_dir / "rounds.csv");
      write_rounds_csv(out, rows);
      write_checkpoint_file(out_dir / "checkpoint_initial.bin", res.initial);
      write_checkpoint_file(out_dir / "checkpoint_final.bin", res.final_model);
    }
    write_checkpoint_file(out_dir / ("checkpoint_final_h" + std::to_string(res.horizon) + ".bin"),
                          res.final_model);

    std::size_t selected = 0, accepted = 0, skipped = 0, dropped = 0;
    for (const auto& r : res.rounds) {
      selected += r.agents.size();
      accepted += static_cast<std::size_t>(std::count_if(
          r.agents.begin(), r.agents.end(), [](const sim::AgentRecord& a) { return a.accepted; }));
      skipped += r.skipped ? 1 : 0;
      dropped += (!r.skipped && r.all_dropped) ? 1 : 0;
    }
    total_selected += selected;
    total_accepted += accepted;
    std::size_t evaluated = 0;
    for (const auto& m : res.evaluation.per_vehicle) evaluated += m ? 1 : 0;

    json e;
    e["h"] = res.horizon;
    e["mean_mse"] = std::isfinite(res.evaluation.mean) ? json(res.evaluation.mean) : json(nullptr);
    e["vehicles_evaluated"] = evaluated;
    e["rounds"] = res.rounds.size();
    e["selected"] = selected;
    e["accepted"] = accepted;
    e["acceptance_rate"] =
        selected > 0 ? json(static_cast<double>(accepted) / static_cast<double>(selected))
                     : json(nullptr);
    e["rounds_skipped"] = skipped;
    e["rounds_all_dropped"] = dropped;
    e["final_checksum"] = hex(fl::checksum(res.final_model));
    e["rounds_file"] = rounds_file(res.horizon);
    summary["horizons"].push_back(e);
  }
  summary["acceptance_rate"] =
      total_selected > 0
          ? json(static_cast<double>(total_accepted) / static_cast<double>(total_selected))
          : json(nullptr);
  {
    auto out = open_out(out_dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  {
    auto out = open_out(out_dir / "predictions.csv");
    out << "h,vehicle,t,truth,pred\n" << std::setprecision(17);
    for (const auto& res : results) {
      for (const auto& p : res.evaluation.points) {
        out << res.horizon << ',' << p.vehicle << ',' << p.t << ',' << p.truth << ','
            << p.prediction << '\n';
      }
    }
  }
  {
    auto out = open_out(out_dir / "rsu_layout.csv");
    mobility::write_rsu_layout_csv(out, rsus);
  }
  if (plots) render_plots(out_dir);
}

void render_plots(const fs::path& dir) {
  const json summary = read_summary(dir);
  const auto hs = horizons_of(summary);
  const fs::path plot_dir = dir / "plots";
  std::error_code ec;
  fs::create_directories(plot_dir, ec);
  if (ec) throw Error("cannot create " + plot_dir.string() + ": " + ec.message());

  auto save = [&](const std::string& name, const std::string& doc) {
    auto out = open_out(plot_dir / name);
    out << doc;
  };

  // Delay breakdown per round (first horizon), mean over the round's agents, in TTIs of 1 ms.
  std::vector<svg::Series> loss_series;
  for (std::size_t idx = 0; idx < hs.size(); ++idx) {
    auto in = open_in(dir / rounds_file(hs[idx]));
    const auto rows = read_rounds_csv(in);
    std::map<std::size_t, std::vector<const RoundRow*>> by_round;
    for (const auto& r : rows) by_round[r.k].push_back(&r);

    svg::Series loss{"h = " + std::to_string(hs[idx]), {}, {}};
    std::vector<std::string> cats;
    std::vector<svg::Series> parts{{"d_down", {}, {}}, {"d_cmp", {}, {}}, {"d_q_up", {}, {}},
                                   {"d_up", {}, {}}};
    for (const auto& [k, rs] : by_round) {
      const double n = static_cast<double>(rs.size());
      double l = 0.0, dd = 0.0, dc = 0.0, dq = 0.0, du = 0.0;
      for (const auto* r : rs) {
        l += r->loss;
        dd += r->d_down;
        dc += r->d_cmp;
        dq += r->d_q_up;
        du += r->d_up;
      }
      loss.x.push_back(static_cast<double>(k));
      loss.y.push_back(l / n);
      cats.push_back(std::to_string(k));
      parts[0].y.push_back(1e3 * dd / n);
      parts[1].y.push_back(1e3 * dc / n);
      parts[2].y.push_back(1e3 * dq / n);
      parts[3].y.push_back(1e3 * du / n);
    }
    loss_series.push_back(std::move(loss));
    if (idx == 0) {
      save("delay_breakdown.svg",
           svg::stacked_bars({"Mean per-agent delay per round (h = " + std::to_string(hs[0]) + ")",
                              "round k", "delay (ms)"},
                             cats, parts));
      // Communication-only view: the compute share dwarfs the radio delays.
      std::vector<svg::Series> radio{parts[0], parts[2], parts[3]};
      save("delay_radio.svg",
           svg::stacked_bars({"Mean downlink, queuing and uplink delay per round", "round k",
                              "delay (ms)"},
                             cats, radio));
    }
  }
  save("loss_curves.svg",
       svg::line_chart({"Mean local training loss per round", "round k", "loss (normalised MSE)"},
                       loss_series));

  svg::Series mse{"mean test MSE", {}, {}};
  for (const auto& e : summary.at("horizons")) {
    mse.x.push_back(e.at("h").get<double>());
    mse.y.push_back(e.at("mean_mse").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                : e.at("mean_mse").get<double>());
  }
  save("mse_vs_horizon.svg",
       svg::line_chart({"Test MSE versus forecast horizon", "horizon h", "MSE (VSP units^2)"},
                       {mse}));

  // Predicted versus true series for the vehicle with the most test points.
  auto in = open_in(dir / "predictions.csv");
  std::string line;
  std::getline(in, line);
  std::map<std::size_t, std::map<std::size_t, std::vector<std::array<double, 3>>>> pts;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 5) throw ParseError(row, "predictions.csv: expected 5 columns");
    pts[parse_field<std::size_t>(f[0], row)][parse_field<std::size_t>(f[1], row)].push_back(
        {parse_field<double>(f[2], row), parse_field<double>(f[3], row),
         parse_field<double>(f[4], row)});
  }
  for (const auto& [h, vehicles] : pts) {
    const auto best = std::max_element(vehicles.begin(), vehicles.end(), [](const auto& a, const auto& b) {
      return a.second.size() < b.second.size();
    });
    if (best == vehicles.end()) continue;
    svg::Series truth{"truth", {}, {}}, pred{"prediction", {}, {}};
    const double t0 = best->second.front()[0];
    for (const auto& p : best->second) {
      truth.x.push_back(p[0] - t0);
      truth.y.push_back(p[1]);
      pred.x.push_back(p[0] - t0);
      pred.y.push_back(p[2]);
    }
    save("prediction_h" + std::to_string(h) + ".svg",
         svg::line_chart({"VSP forecast, vehicle " + std::to_string(best->first) + ", h = " +
                              std::to_string(h),
                          "time since test start (s)", "VSP (kW/tonne)"},
                         {truth, pred}));
  }
}

void print_summary(const fs::path& dir, std::ostream& out) {
  const json summary = read_summary(dir);
  out << "horizon  mean_test_mse     accepted/selected  acceptance\n";
  for (const auto& e : summary.at("horizons")) {
    std::ostringstream mse;
    if (e.at("mean_mse").is_null()) {
      mse << "n/a";
    } else {
      mse << std::setprecision(6) << e.at("mean_mse").get<double>();
    }
    std::ostringstream rate;
    if (!e.at("acceptance_rate").is_null()) {
      rate << std::fixed << std::setprecision(3) << e.at("acceptance_rate").get<double>();
    }
    out << std::left << std::setw(9) << e.at("h").get<std::size_t>() << std::setw(18) << mse.str()
        << std::setw(19)
        << (std::to_string(e.at("accepted").get<std::size_t>()) + "/" +
            std::to_string(e.at("selected").get<std::size_t>()))
        << rate.str() << '\n';
  }

  const auto hs = horizons_of(summary);
  if (hs.empty()) return;
  auto in = open_in(dir / rounds_file(hs.front()));
  const auto rows = read_rounds_csv(in);
  std::vector<double> dd, dc, dq, du, dt;
  for (const auto& r : rows) {
    dd.push_back(r.d_down);
    dc.push_back(r.d_cmp);
    dq.push_back(r.d_q_up);
    du.push_back(r.d_up);
    dt.push_back(r.d_tot);
  }
  out << "\nmedian per-agent delays (h = " << hs.front() << "), ms:\n"
      << std::fixed << std::setprecision(1) << "  d_down " << 1e3 * median(dd) << "  d_cmp "
      << 1e3 * median(dc) << "  d_q_up " << 1e3 * median(dq) << "  d_up " << 1e3 * median(du)
      << "  d_tot " << 1e3 * median(dt) << '\n';
  out.unsetf(std::ios::fixed);
}

}  // namespace fleetfl::report
