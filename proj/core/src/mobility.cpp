#include "fleetfl/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>

#include "fleetfl/error.hpp"

namespace fleetfl::mobility {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

Point project_to_local(double lat, double lon, const GeoPoint& ref) {
  return {kEarthRadiusM * (lon - ref.lon) * std::cos(ref.lat * kDegToRad) * kDegToRad,
          kEarthRadiusM * (lat - ref.lat) * kDegToRad};
}

GeoPoint local_to_geodetic(const Point& p, const GeoPoint& ref) {
  return {ref.lat + p.y / (kEarthRadiusM * kDegToRad),
          ref.lon + p.x / (kEarthRadiusM * std::cos(ref.lat * kDegToRad) * kDegToRad)};
}

std::vector<RsuSite> deploy_rsus(double corridor_length, double spacing, double offset, int bands,
                                 const SiteTemplate& tmpl) {
  if (!(spacing > 0.0)) throw InvalidArgument("deploy_rsus: spacing must be positive");
  if (bands < 1) throw InvalidArgument("deploy_rsus: need at least one band");
  std::vector<RsuSite> sites;
  if (corridor_length < 0.0) return sites;
  for (int i = 0;; ++i) {
    const double x = static_cast<double>(i) * spacing;
    if (x > corridor_length + 1e-9) break;
    RsuSite s;
    s.rsu_id = i;
    s.position = {x, offset};
    s.antenna_count = tmpl.antenna_count;
    s.antenna_height = tmpl.antenna_height;
    s.band_index = i % bands;
    s.coverage_radius = tmpl.coverage_radius;
    sites.push_back(s);
  }
  return sites;
}

void write_rsu_layout_csv(std::ostream& out, std::span<const RsuSite> sites) {
  out << "rsu_id,x_m,y_m,band_index\n" << std::setprecision(17);
  for (const auto& s : sites) {
    out << s.rsu_id << ',' << s.position.x << ',' << s.position.y << ',' << s.band_index << '\n';
  }
}

double distance_3d(const Point& vehicle, const RsuSite& site, double vehicle_height) {
  const double dx = vehicle.x - site.position.x;
  const double dy = vehicle.y - site.position.y;
  const double dz = site.antenna_height - vehicle_height;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double rsrp(const Point& vehicle, const RsuSite& site, const channel::ChannelParams& params,
            double shadow_db) {
  const double d3d = distance_3d(vehicle, site, params.height_vehicle_m);
  if (!(d3d > 0.0)) throw GeometryError("rsrp: vehicle coincides with the RSU antenna");
  const double pl =
      channel::pathloss_uma(d3d, params.carrier_ghz, site.antenna_height, params.height_vehicle_m);
  return params.tx_power_rsu_prb_dbm + params.gain_rsu_dbi + params.gain_vehicle_dbi - pl -
         shadow_db;
}

RsuId associate(std::span<const Candidate> candidates, std::optional<RsuId> current,
                double hysteresis_db) {
  if (candidates.empty()) throw InvalidArgument("associate: no candidate RSUs");
  const Candidate* best = &candidates.front();
  for (const auto& c : candidates) {
    if (c.rsrp_dbm > best->rsrp_dbm ||
        (c.rsrp_dbm == best->rsrp_dbm && c.rsu_id < best->rsu_id)) {
      best = &c;
    }
  }
  if (!current) return best->rsu_id;
  const auto serving = std::find_if(candidates.begin(), candidates.end(),
                                    [&](const Candidate& c) { return c.rsu_id == *current; });
  if (serving == candidates.end()) return best->rsu_id;
  if (best->rsu_id != serving->rsu_id && best->rsrp_dbm > serving->rsrp_dbm + hysteresis_db) {
    return best->rsu_id;
  }
  return serving->rsu_id;
}

std::optional<RsuId> AssociationState::serving(std::size_t vehicle) const {
  const auto it = serving_.find(vehicle);
  if (it == serving_.end()) return std::nullopt;
  return it->second;
}

RsuId AssociationState::update(std::size_t vehicle, std::span<const Candidate> candidates,
                               double hysteresis_db) {
  const auto current = serving(vehicle);
  const RsuId next = associate(candidates, current, hysteresis_db);
  if (current && *current != next) ++handovers_;
  serving_[vehicle] = next;
  return next;
}

Trajectory::Trajectory(const trace::VehicleTrace& tr, const GeoPoint& ref, double gap_limit)
    : gap_limit_(gap_limit) {
  t_.reserve(tr.points.size());
  p_.reserve(tr.points.size());
  for (const auto& pt : tr.points) {
    t_.push_back(pt.t);
    p_.push_back(project_to_local(pt.lat, pt.lon, ref));
  }
}

std::optional<Point> Trajectory::position(double t) const {
  if (t_.empty() || t < t_.front() || t > t_.back()) return std::nullopt;
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  if (it == t_.end()) return p_.back();
  const auto j = static_cast<std::size_t>(it - t_.begin());
  const double span = t_[j] - t_[j - 1];
  if (span > gap_limit_) return std::nullopt;
  const double w = (t - t_[j - 1]) / span;
  return Point{p_[j - 1].x + w * (p_[j].x - p_[j - 1].x), p_[j - 1].y + w * (p_[j].y - p_[j - 1].y)};
}

}  // namespace fleetfl::mobility
