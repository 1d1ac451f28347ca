#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "fleetfl/rng.hpp"

namespace fleetfl::channel {

using CVector = Eigen::VectorXcd;

/// Radio constants shared by every link. Defaults reproduce the reference
/// deployment: 2.4 GHz, 180 kHz pRBs, 1 ms TTI, 30/23 dBm, 8/3 dBi, 5/9 dB NF.
struct ChannelParams {
  double carrier_ghz = 2.4;
  double prb_bandwidth_hz = 180e3;
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_rsu_db = 5.0;
  double noise_figure_vehicle_db = 9.0;
  double tx_power_rsu_prb_dbm = 30.0;
  double tx_power_vehicle_dbm = 23.0;
  double height_rsu_m = 25.0;
  double height_vehicle_m = 3.0;
  double gain_rsu_dbi = 8.0;
  double gain_vehicle_dbi = 3.0;
  double tti_s = 1e-3;
  double shadowing_std_db = 4.0;

  /// Noise power spectral density at the receiver (W/Hz), noise figure included.
  double noise_density_rsu() const;
  double noise_density_vehicle() const;
  double tx_power_rsu_w() const;
  double tx_power_vehicle_w() const;
};

double dbm_to_watt(double dbm);
double db_to_linear(double db);

/// 3GPP urban-macro line-of-sight pathloss in dB. Below the breakpoint
/// distance 28 + 22 log10(d3d) + 20 log10(fc); above it the 40 log10 branch.
/// Throws GeometryError for d3d <= 0.
double pathloss_uma(double d3d, double fc_ghz, double h_bs = 25.0, double h_ut = 3.0);

struct LinkState {
  CVector h;  // composed channel, length n_b
  double pathloss_db = 0.0;
  double shadow_db = 0.0;
};

struct LinkGeometry {
  double d3d = 0.0;  // m
};

/// Large-scale gain of a link in dB: antenna gains - pathloss - shadowing.
double large_scale_gain_db(const LinkGeometry& geo, double shadow_db, const ChannelParams& p);

/// Draws h = sqrt(large-scale gain) * h_small with h_small ~ CN(0, I_{n_b}).
LinkState draw_channel(const LinkGeometry& geo, double shadow_db, int n_b,
                       const ChannelParams& p, Rng& rng);

/// Stream for the fast fading of one (link, pRB, TTI) block.
Rng fading_stream(std::uint64_t seed, std::uint64_t round, std::uint64_t vehicle,
                  std::uint64_t rsu, std::uint64_t prb, std::uint64_t tti);

/// P |h^H g|^2 / (omega sigma^2)
double downlink_snr(double power_w, const CVector& h, const CVector& g, double omega_hz,
                    double noise_density);

/// P ||h||^2 / (omega sigma^2): the SNR with the maximal-ratio receiver h/||h||.
double uplink_snr_mrc(double power_w, const CVector& h, double omega_hz, double noise_density);

/// omega * sum_z log2(1 + snr_z), bits/s.
double block_rate(std::span<const double> snrs, double omega_hz);

struct TransmissionResult {
  std::int64_t ttis = 0;       // TTIs used (all available ones on a miss)
  double seconds = 0.0;        // ttis * kappa
  bool delivered = true;
  double bits_remaining = 0.0; // > 0 only on a miss
};

/// Smallest T with sum_{t<T} bits[t] >= payload. A stream that runs out first
/// yields delivered = false and the bits still owed.
TransmissionResult transmission_delay(double payload_bits, std::span<const double> bits_per_tti,
                                      double kappa);

/// Same, pulling per-TTI capacities lazily for TTIs 0..max_ttis-1.
TransmissionResult transmission_delay(double payload_bits,
                                      const std::function<double(std::int64_t)>& bits_at_tti,
                                      std::int64_t max_ttis, double kappa);

}  // namespace fleetfl::channel
