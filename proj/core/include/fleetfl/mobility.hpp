#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fleetfl/channel.hpp"
#include "fleetfl/trace.hpp"

namespace fleetfl::mobility {

inline constexpr double kEarthRadiusM = 6371000.0;

struct Point {
  double x = 0.0;  // m, east
  double y = 0.0;  // m, north
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

/// Equirectangular projection about `ref`.
Point project_to_local(double lat, double lon, const GeoPoint& ref);
GeoPoint local_to_geodetic(const Point& p, const GeoPoint& ref);

using RsuId = int;

struct RsuSite {
  RsuId rsu_id = 0;
  Point position;
  int antenna_count = 4;
  double antenna_height = 25.0;
  int band_index = 0;
  double coverage_radius = 500.0;
};

struct SiteTemplate {
  int antenna_count = 4;
  double antenna_height = 25.0;
  double coverage_radius = 500.0;
};

/// Sites at x = 0, spacing, 2 spacing, ... <= corridor_length, offset from the
/// road by `offset`; bands alternate by site index.
std::vector<RsuSite> deploy_rsus(double corridor_length, double spacing, double offset, int bands,
                                 const SiteTemplate& tmpl = {});

void write_rsu_layout_csv(std::ostream& out, std::span<const RsuSite> sites);

double distance_3d(const Point& vehicle, const RsuSite& site, double vehicle_height);

/// Received reference power in dBm (per-pRB transmit power + gains - pathloss -
/// shadowing). Fast fading is not included. Throws GeometryError at zero range.
double rsrp(const Point& vehicle, const RsuSite& site, const channel::ChannelParams& params,
            double shadow_db = 0.0);

struct Candidate {
  RsuId rsu_id = 0;
  double rsrp_dbm = 0.0;
};

/// A3-style association: initial attach picks the strongest site (lowest id
/// on ties); otherwise hand over only when the best neighbour beats the
/// serving site by more than `hysteresis_db`.
RsuId associate(std::span<const Candidate> candidates, std::optional<RsuId> current,
                double hysteresis_db);

/// The a_v^b indicator: every tracked vehicle maps to exactly one RSU.
class AssociationState {
 public:
  std::optional<RsuId> serving(std::size_t vehicle) const;
  /// Applies the A3 rule and returns the (possibly new) serving RSU.
  RsuId update(std::size_t vehicle, std::span<const Candidate> candidates, double hysteresis_db);
  std::size_t handovers() const { return handovers_; }
  const std::map<std::size_t, RsuId>& map() const { return serving_; }

 private:
  std::map<std::size_t, RsuId> serving_;
  std::size_t handovers_ = 0;
};

/// Piecewise-linear position track of one vehicle in local coordinates.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(const trace::VehicleTrace& tr, const GeoPoint& ref, double gap_limit);

  /// Position at time t, or nothing when t falls outside the trace or inside
  /// a gap longer than the gap limit.
  std::optional<Point> position(double t) const;

 private:
  std::vector<double> t_;
  std::vector<Point> p_;
  double gap_limit_ = 30.0;
};

}  // namespace fleetfl::mobility
