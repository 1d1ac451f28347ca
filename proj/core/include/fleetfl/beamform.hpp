#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fleetfl/rng.hpp"

namespace fleetfl::beamform {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// One Hermitian PSD matrix H_v = h_v h_v^H per user sharing a pRB.
struct MulticastProblem {
  std::vector<CMatrix> H;

  static MulticastProblem from_channels(std::span<const CVector> channels);
  int dimension() const { return H.empty() ? 0 : static_cast<int>(H.front().rows()); }
};

struct SdpOptions {
  int max_iters = 1000;
  double tol = 1e-4;  // relative duality gap
};

struct SdpResult {
  CMatrix G;                // trace one, PSD
  double value = 0.0;       // min_v Tr(G H_v) at the returned G
  double upper_bound = 0.0; // dual certificate: no feasible G does better
  int iterations = 0;
  bool converged = false;
};

/// Maximises min_v Tr(G H_v) over the spectahedron {G >= 0, Tr G = 1}.
///
/// Entropic mirror-prox on the saddle form max_G min_{lambda in simplex}
/// sum_v lambda_v Tr(G H_v): the primal player takes matrix-exponentiated
/// steps, the dual player multiplicative-weights steps. Ergodic averages give
/// a primal value and the dual bound lambda_max(sum_v lambda_v H_v); the loop
/// stops once the relative gap drops below `tol`. Throws InvalidArgument on an
/// empty or non-Hermitian problem.
SdpResult solve_multicast_sdp(const MulticastProblem& prob, const SdpOptions& opts = {});

/// min_v |h_v^H g|^2. Throws InvalidArgument on an empty user list.
double multicast_min_gain(const CVector& g, std::span<const CVector> channels);

struct Beamformer {
  CVector g;
  double value = 0.0;
};

/// Rank-one recovery: the best of the principal eigenvector of G, `n_rand`
/// Gaussian randomisations G^{1/2} xi (normalised) and each h_v / ||h_v||.
Beamformer extract_beamformer(const CMatrix& G, std::span<const CVector> channels, int n_rand,
                              Rng& rng);

struct BeamOptions {
  SdpOptions sdp;
  int n_rand = 200;
};

struct BeamSolution {
  CMatrix G;
  CVector g;
  double sdp_value = 0.0;
  double upper_bound = 0.0;
  double extracted_value = 0.0;
  bool converged = true;
};

/// Full per-pRB pipeline. A single user gets the closed-form maximal-ratio
/// beam; several users go through the relaxation and extraction. When the
/// extracted beam beats the relaxation iterate, g g^H replaces G.
BeamSolution solve_multicast(std::span<const CVector> channels, const BeamOptions& opts, Rng& rng);

}  // namespace fleetfl::beamform
