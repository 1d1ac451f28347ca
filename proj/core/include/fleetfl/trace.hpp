#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace fleetfl::trace {

struct TracePoint {
  double t = 0.0;    // seconds since epoch
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
  double speed = 0.0;  // m/s, >= 0
};

struct VehicleTrace {
  std::string vehicle_id;
  std::vector<TracePoint> points;  // strictly increasing t
  double dt = 3.0;                 // nominal sampling interval, s
};

/// Uniformly sampled kinematics with the derived power label.
struct KinematicSeries {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<double> u;    // m/s
  std::vector<double> a;    // m/s^2
  std::vector<double> vsp;  // kW/tonne

  std::size_t size() const { return t.size(); }
};

/// Road-load coefficients for vehicle-specific power at zero grade. Defaults
/// are the light-duty passenger-car values (A in kW·s/m, B in kW·s²/m²,
/// C in kW·s³/m³, mass in tonnes) with SI inputs, so c1 = c2 = 1.
struct VspCoefficients {
  double A = 0.156461;
  double B = 0.00200193;
  double C = 0.000492646;
  double c1 = 1.0;
  double c2 = 1.0;
  double mass = 1.4788;
};

struct Sample {
  std::vector<double> x;  // lag window, oldest first
  double y = 0.0;
  double t_label = 0.0;
};

struct WindowedDataset {
  std::size_t lag = 0;
  std::size_t horizon = 0;
  std::vector<Sample> samples;  // ordered by t_label

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

inline constexpr char kTraceCsvHeader[] = "vehicle_id,unixtime,lat,lon,speed_mps";

/// Reads `vehicle_id,unixtime,lat,lon,speed_mps` rows (header optional).
/// Traces come back ordered by vehicle id with points sorted by time; exact
/// duplicate timestamps keep the first row. Throws ParseError on a bad row.
std::vector<VehicleTrace> parse_trace_csv(std::istream& in);

/// Writes traces in the same format parse_trace_csv reads, 17 significant digits.
void write_trace_csv(std::ostream& out, const std::vector<VehicleTrace>& traces);

double compute_vsp(double u, double a, const VspCoefficients& coeffs);

/// Resamples speed onto a uniform grid (linear interpolation), splitting at raw
/// gaps longer than `gap_limit`. Acceleration uses central differences with
/// one-sided differences at segment ends.
std::vector<KinematicSeries> preprocess_trace(const VehicleTrace& trace, double dt,
                                              double gap_limit,
                                              const VspCoefficients& coeffs);

/// One sample per index i with x = vsp[i-l+1..i], y = vsp[i+h], keeping only
/// samples whose label time is <= cutoff.
WindowedDataset build_windows(const KinematicSeries& series, std::size_t lag,
                              std::size_t horizon,
                              double cutoff = std::numeric_limits<double>::infinity());

struct SyntheticTraceOptions {
  double start_unixtime = 1202486400.0;  // 2008-02-08 16:00 UTC
  double mean_speed = 25.0;              // m/s
  double reversion_rate = 0.05;          // 1/s
  double volatility = 1.5;               // m/s per sqrt(s)
  double corridor_length = 10000.0;      // m
  double ref_lat = 37.60;
  double ref_lon = -122.10;
};

/// Ornstein-Uhlenbeck speeds (exact discretisation, clipped at zero) driven
/// along a straight east-west corridor; vehicles reflect at the corridor ends.
std::vector<VehicleTrace> gen_synthetic_traces(std::size_t n_vehicles, double duration,
                                               double dt, std::uint64_t seed,
                                               const SyntheticTraceOptions& opts = {});

}  // namespace fleetfl::trace
