#include "fleetfl/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string_view>

#include "fleetfl/error.hpp"
#include "fleetfl/mobility.hpp"
#include "fleetfl/rng.hpp"

namespace fleetfl::trace {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_number(std::string_view field, std::size_t row, const char* name) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(row, std::string("non-numeric ") + name + " '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(row, std::string("non-finite ") + name);
  }
  return value;
}

double median_spacing(const std::vector<TracePoint>& pts) {
  if (pts.size() < 2) return 3.0;
  std::vector<double> gaps;
  gaps.reserve(pts.size() - 1);
  for (std::size_t i = 1; i < pts.size(); ++i) gaps.push_back(pts[i].t - pts[i - 1].t);
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  return gaps[gaps.size() / 2];
}

KinematicSeries resample_segment(const std::vector<TracePoint>& pts, std::size_t begin,
                                 std::size_t end, double dt, const VspCoefficients& coeffs) {
  KinematicSeries s;
  s.dt = dt;
  const double t0 = pts[begin].t;
  const double t_last = pts[end - 1].t;
  const auto n = static_cast<std::size_t>(std::floor((t_last - t0) / dt + 1e-9)) + 1;
  s.t.resize(n);
  s.u.resize(n);
  std::size_t j = begin;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    while (j + 1 < end && pts[j + 1].t < t) ++j;
    double u = pts[j].speed;
    if (j + 1 < end) {
      const double span = pts[j + 1].t - pts[j].t;
      const double w = std::clamp((t - pts[j].t) / span, 0.0, 1.0);
      u = pts[j].speed + w * (pts[j + 1].speed - pts[j].speed);
    }
    s.t[i] = t;
    s.u[i] = u;
  }
  s.a.resize(n);
  if (n >= 2) {
    s.a.front() = (s.u[1] - s.u[0]) / dt;
    s.a.back() = (s.u[n - 1] - s.u[n - 2]) / dt;
    for (std::size_t i = 1; i + 1 < n; ++i) s.a[i] = (s.u[i + 1] - s.u[i - 1]) / (2.0 * dt);
  }
  s.vsp.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.vsp[i] = compute_vsp(s.u[i], s.a[i], coeffs);
  return s;
}

}  // namespace

std::vector<VehicleTrace> parse_trace_csv(std::istream& in) {
  std::map<std::string, std::vector<TracePoint>> grouped;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    if (row == 1 && body.substr(0, 10) == "vehicle_id") continue;
    const auto fields = split_csv(body);
    if (fields.size() != 5) {
      throw ParseError(row, "expected 5 columns, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(row, "empty vehicle_id");
    TracePoint p;
    p.t = parse_number(fields[1], row, "unixtime");
    p.lat = parse_number(fields[2], row, "lat");
    p.lon = parse_number(fields[3], row, "lon");
    p.speed = parse_number(fields[4], row, "speed_mps");
    if (p.speed < 0.0) throw ParseError(row, "negative speed");
    if (std::abs(p.lat) > 90.0) throw ParseError(row, "latitude out of range");
    grouped[std::string(fields[0])].push_back(p);
  }

  std::vector<VehicleTrace> traces;
  traces.reserve(grouped.size());
  for (auto& [id, pts] : grouped) {
    std::stable_sort(pts.begin(), pts.end(),
                     [](const TracePoint& a, const TracePoint& b) { return a.t < b.t; });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const TracePoint& a, const TracePoint& b) { return a.t == b.t; }),
              pts.end());
    VehicleTrace tr;
    tr.vehicle_id = id;
    tr.dt = median_spacing(pts);
    tr.points = std::move(pts);
    traces.push_back(std::move(tr));
  }
  return traces;
}

void write_trace_csv(std::ostream& out, const std::vector<VehicleTrace>& traces) {
  out << kTraceCsvHeader << '\n';
  out << std::setprecision(17);
  for (const auto& tr : traces) {
    for (const auto& p : tr.points) {
      out << tr.vehicle_id << ',' << p.t << ',' << p.lat << ',' << p.lon << ',' << p.speed
          << '\n';
    }
  }
}

double compute_vsp(double u, double a, const VspCoefficients& k) {
  return (k.c1 / k.c2) * (k.A * u / k.mass) +
         (k.c1 * k.c1 / k.c2) * (k.B * u * u / k.mass) +
         (k.c1 * k.c1 * k.c1 / k.c2) * (k.C * u * u * u / k.mass) + k.c1 * k.c1 * u * a;
}

std::vector<KinematicSeries> preprocess_trace(const VehicleTrace& trace, double dt,
                                              double gap_limit,
                                              const VspCoefficients& coeffs) {
  if (!(dt > 0.0)) throw InvalidArgument("preprocess_trace: dt must be positive");
  std::vector<KinematicSeries> out;
  const auto& pts = trace.points;
  if (pts.size() < 2) return out;

  std::size_t begin = 0;
  for (std::size_t i = 1; i <= pts.size(); ++i) {
    const bool split = i == pts.size() || pts[i].t - pts[i - 1].t > gap_limit;
    if (!split) continue;
    if (i - begin >= 2 && pts[i - 1].t - pts[begin].t >= dt) {
      out.push_back(resample_segment(pts, begin, i, dt, coeffs));
    }
    begin = i;
  }
  return out;
}

WindowedDataset build_windows(const KinematicSeries& series, std::size_t lag,
                              std::size_t horizon, double cutoff) {
  if (lag < 1 || horizon < 1) throw InvalidArgument("build_windows: lag and horizon must be >= 1");
  WindowedDataset ds;
  ds.lag = lag;
  ds.horizon = horizon;
  const std::size_t n = series.size();
  if (n < lag + horizon) return ds;
  for (std::size_t i = lag - 1; i + horizon < n; ++i) {
    const double t_label = series.t[i + horizon];
    if (t_label > cutoff) break;
    Sample s;
    s.x.assign(series.vsp.begin() + static_cast<std::ptrdiff_t>(i + 1 - lag),
               series.vsp.begin() + static_cast<std::ptrdiff_t>(i + 1));
    s.y = series.vsp[i + horizon];
    s.t_label = t_label;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

std::vector<VehicleTrace> gen_synthetic_traces(std::size_t n_vehicles, double duration,
                                               double dt, std::uint64_t seed,
                                               const SyntheticTraceOptions& opts) {
  if (n_vehicles < 1) throw InvalidArgument("gen_synthetic_traces: need at least one vehicle");
  if (!(dt > 0.0)) throw InvalidArgument("gen_synthetic_traces: dt must be positive");

  const double decay = std::exp(-opts.reversion_rate * dt);
  const double stationary_sd = opts.volatility / std::sqrt(2.0 * opts.reversion_rate);
  const double step_sd = stationary_sd * std::sqrt(1.0 - decay * decay);
  const auto n_points = static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
  const double L = opts.corridor_length;

  std::vector<VehicleTrace> traces;
  traces.reserve(n_vehicles);
  for (std::size_t v = 0; v < n_vehicles; ++v) {
    Rng rng = make_stream(seed, Stream::kTrace, {v});
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::ostringstream id;
    id << "veh" << std::setw(3) << std::setfill('0') << v;
    VehicleTrace tr;
    tr.vehicle_id = id.str();
    tr.dt = dt;
    tr.points.reserve(n_points);

    // Unfolded travel distance; the reflected image lies in [0, L].
    double s = unit(rng) * 2.0 * L;
    double u = std::max(0.0, opts.mean_speed + stationary_sd * normal(rng));
    for (std::size_t i = 0; i < n_points; ++i) {
      if (i > 0) {
        const double next = std::max(
            0.0, opts.mean_speed + (u - opts.mean_speed) * decay + step_sd * normal(rng));
        s += 0.5 * (u + next) * dt;
        u = next;
      }
      double x = std::fmod(s, 2.0 * L);
      if (x > L) x = 2.0 * L - x;
      const auto [lat, lon] = mobility::local_to_geodetic({x, 0.0}, {opts.ref_lat, opts.ref_lon});
      tr.points.push_back({opts.start_unixtime + static_cast<double>(i) * dt, lat, lon, u});
    }
    traces.push_back(std::move(tr));
  }
  return traces;
}

}  // namespace fleetfl::trace
