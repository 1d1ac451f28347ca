#include "fleetfl/channel.hpp"

#include <cmath>

#include "fleetfl/error.hpp"

namespace fleetfl::channel {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
constexpr double kEffectiveEnvironmentHeight = 1.0;  // m
}  // namespace

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double ChannelParams::noise_density_rsu() const {
  return dbm_to_watt(noise_psd_dbm_hz + noise_figure_rsu_db);
}
double ChannelParams::noise_density_vehicle() const {
  return dbm_to_watt(noise_psd_dbm_hz + noise_figure_vehicle_db);
}
double ChannelParams::tx_power_rsu_w() const { return dbm_to_watt(tx_power_rsu_prb_dbm); }
double ChannelParams::tx_power_vehicle_w() const { return dbm_to_watt(tx_power_vehicle_dbm); }

double pathloss_uma(double d3d, double fc_ghz, double h_bs, double h_ut) {
  if (!(d3d > 0.0)) throw GeometryError("pathloss_uma: distance must be positive");
  const double dh = h_bs - h_ut;
  const double d2d = d3d > std::abs(dh) ? std::sqrt(d3d * d3d - dh * dh) : 0.0;
  const double breakpoint = 4.0 * (h_bs - kEffectiveEnvironmentHeight) *
                            (h_ut - kEffectiveEnvironmentHeight) * fc_ghz * 1e9 / kSpeedOfLight;
  if (d2d <= breakpoint) {
    return 28.0 + 22.0 * std::log10(d3d) + 20.0 * std::log10(fc_ghz);
  }
  return 28.0 + 40.0 * std::log10(d3d) + 20.0 * std::log10(fc_ghz) -
         9.0 * std::log10(breakpoint * breakpoint + dh * dh);
}

double large_scale_gain_db(const LinkGeometry& geo, double shadow_db, const ChannelParams& p) {
  const double pl = pathloss_uma(geo.d3d, p.carrier_ghz, p.height_rsu_m, p.height_vehicle_m);
  return p.gain_rsu_dbi + p.gain_vehicle_dbi - pl - shadow_db;
}

LinkState draw_channel(const LinkGeometry& geo, double shadow_db, int n_b,
                       const ChannelParams& p, Rng& rng) {
  if (n_b < 1) throw InvalidArgument("draw_channel: n_b must be >= 1");
  LinkState s;
  s.pathloss_db = pathloss_uma(geo.d3d, p.carrier_ghz, p.height_rsu_m, p.height_vehicle_m);
  s.shadow_db = shadow_db;
  const double amplitude =
      std::sqrt(db_to_linear(p.gain_rsu_dbi + p.gain_vehicle_dbi - s.pathloss_db - shadow_db));
  // Unit-variance circularly-symmetric entries: each quadrature has variance 1/2.
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  s.h.resize(n_b);
  for (int i = 0; i < n_b; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    s.h[i] = amplitude * std::complex<double>(re, im);
  }
  return s;
}

Rng fading_stream(std::uint64_t seed, std::uint64_t round, std::uint64_t vehicle,
                  std::uint64_t rsu, std::uint64_t prb, std::uint64_t tti) {
  return make_stream(seed, Stream::kFading, {round, vehicle, rsu, prb, tti});
}

double downlink_snr(double power_w, const CVector& h, const CVector& g, double omega_hz,
                    double noise_density) {
  return power_w * std::norm(h.dot(g)) / (omega_hz * noise_density);
}

double uplink_snr_mrc(double power_w, const CVector& h, double omega_hz, double noise_density) {
  return power_w * h.squaredNorm() / (omega_hz * noise_density);
}

double block_rate(std::span<const double> snrs, double omega_hz) {
  double sum = 0.0;
  for (double snr : snrs) sum += std::log2(1.0 + snr);
  return omega_hz * sum;
}

TransmissionResult transmission_delay(double payload_bits, std::span<const double> bits_per_tti,
                                      double kappa) {
  return transmission_delay(
      payload_bits, [&](std::int64_t t) { return bits_per_tti[static_cast<std::size_t>(t)]; },
      static_cast<std::int64_t>(bits_per_tti.size()), kappa);
}

TransmissionResult transmission_delay(double payload_bits,
                                      const std::function<double(std::int64_t)>& bits_at_tti,
                                      std::int64_t max_ttis, double kappa) {
  if (payload_bits < 0.0) throw InvalidArgument("transmission_delay: negative payload");
  TransmissionResult r;
  if (payload_bits == 0.0) return r;
  double delivered = 0.0;
  for (std::int64_t t = 0; t < max_ttis; ++t) {
    delivered += bits_at_tti(t);
    if (delivered >= payload_bits) {
      r.ttis = t + 1;
      r.seconds = static_cast<double>(r.ttis) * kappa;
      return r;
    }
  }
  r.ttis = max_ttis;
  r.seconds = static_cast<double>(max_ttis) * kappa;
  r.delivered = false;
  r.bits_remaining = payload_bits - delivered;
  return r;
}

}  // namespace fleetfl::channel
