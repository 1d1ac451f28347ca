#include "fleetfl/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "fleetfl/error.hpp"

namespace fleetfl::beamform {

namespace {

using Solver = Eigen::SelfAdjointEigenSolver<CMatrix>;

// exp(Y) / Tr exp(Y) for Hermitian Y.
CMatrix normalized_exp(const CMatrix& Y) {
  const Solver es(Y);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  Eigen::VectorXd w = (ev.array() - top).exp();
  w /= w.sum();
  return es.eigenvectors() * w.cast<std::complex<double>>().asDiagonal() *
         es.eigenvectors().adjoint();
}

Eigen::VectorXd softmin_weights(const Eigen::VectorXd& z) {
  const double top = z.maxCoeff();
  Eigen::VectorXd w = (z.array() - top).exp();
  return w / w.sum();
}

double trace_product(const CMatrix& A, const CMatrix& B) {
  // Tr(A B) for Hermitian A, B is real.
  return (A.cwiseProduct(B.transpose())).sum().real();
}

Eigen::VectorXd user_gains(const CMatrix& G, const std::vector<CMatrix>& H) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(H.size()));
  for (std::size_t v = 0; v < H.size(); ++v) {
    out[static_cast<Eigen::Index>(v)] = trace_product(G, H[v]);
  }
  return out;
}

CMatrix weighted_sum(const Eigen::VectorXd& lambda, const std::vector<CMatrix>& H) {
  CMatrix S = CMatrix::Zero(H.front().rows(), H.front().cols());
  for (std::size_t v = 0; v < H.size(); ++v) S += lambda[static_cast<Eigen::Index>(v)] * H[v];
  return S;
}

double spectral_norm_hermitian(const CMatrix& H) {
  return Solver(H, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
}

void check_problem(const MulticastProblem& prob) {
  if (prob.H.empty()) throw InvalidArgument("solve_multicast_sdp: no users");
  const auto n = prob.H.front().rows();
  for (const auto& H : prob.H) {
    if (H.rows() != n || H.cols() != n) {
      throw InvalidArgument("solve_multicast_sdp: matrices must be square and equally sized");
    }
    const double scale = std::max(H.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      throw InvalidArgument("solve_multicast_sdp: matrix is not Hermitian");
    }
  }
}

}  // namespace

MulticastProblem MulticastProblem::from_channels(std::span<const CVector> channels) {
  MulticastProblem p;
  p.H.reserve(channels.size());
  for (const auto& h : channels) p.H.push_back(h * h.adjoint());
  return p;
}

SdpResult solve_multicast_sdp(const MulticastProblem& prob, const SdpOptions& opts) {
  check_problem(prob);
  const auto n = prob.H.front().rows();
  const auto m = static_cast<Eigen::Index>(prob.H.size());

  double scale = 0.0;
  for (const auto& H : prob.H) scale = std::max(scale, spectral_norm_hermitian(H));

  SdpResult best;
  best.G = CMatrix::Identity(n, n) / static_cast<double>(n);
  if (scale == 0.0) {
    best.converged = true;
    return best;
  }

  // Work on H / scale so the step is unit-free; values are reported unscaled.
  // Iterates past the 1/L step may oscillate, but every candidate is feasible and every bound valid.
  std::vector<CMatrix> H;
  H.reserve(prob.H.size());
  for (const auto& Hv : prob.H) H.push_back(Hv / scale);

  const double step = 8.0;
  CMatrix Y = CMatrix::Zero(n, n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  CMatrix G_sum = CMatrix::Zero(n, n);
  Eigen::VectorXd lambda_sum = Eigen::VectorXd::Zero(m);

  best.value = user_gains(best.G, H).minCoeff();
  best.upper_bound = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= opts.max_iters; ++it) {
    const CMatrix G = normalized_exp(Y);
    const Eigen::VectorXd lambda = softmin_weights(z);

    // Extrapolation step.
    const CMatrix G_half = normalized_exp(Y + step * weighted_sum(lambda, H));
    const Eigen::VectorXd lambda_half = softmin_weights(z - step * user_gains(G, H));

    // Correction step from the original point with gradients at the half point.
    Y += step * weighted_sum(lambda_half, H);
    z -= step * user_gains(G_half, H);
    // Keep the log-domain iterates bounded; shifts cancel in the normalisation.
    Y -= CMatrix::Identity(n, n) * (Y.trace().real() / static_cast<double>(n));
    z.array() -= z.maxCoeff();

    G_sum += G_half;
    lambda_sum += lambda_half;
    best.iterations = it;

    const CMatrix G_avg = G_sum / static_cast<double>(it);
    for (const CMatrix* cand : {&G_half, &G_avg}) {
      const double v = user_gains(*cand, H).minCoeff();
      if (v > best.value) {
        best.value = v;
        best.G = *cand;
      }
    }
    const Eigen::VectorXd lambda_avg = lambda_sum / static_cast<double>(it);
    for (const Eigen::VectorXd* cand : {&lambda_half, &lambda_avg}) {
      const double ub =
          Solver(weighted_sum(*cand, H), Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
      best.upper_bound = std::min(best.upper_bound, ub);
    }
    if (best.upper_bound - best.value <= opts.tol * best.upper_bound) {
      best.converged = true;
      break;
    }
  }

  // Symmetrise against round-off so G stays exactly Hermitian with unit trace.
  best.G = 0.5 * (best.G + best.G.adjoint());
  best.G /= best.G.trace().real();
  best.value = user_gains(best.G, prob.H).minCoeff();
  best.upper_bound *= scale;
  return best;
}

double multicast_min_gain(const CVector& g, std::span<const CVector> channels) {
  if (channels.empty()) throw InvalidArgument("multicast_min_gain: no users");
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& h : channels) worst = std::min(worst, std::norm(h.dot(g)));
  return worst;
}

Beamformer extract_beamformer(const CMatrix& G, std::span<const CVector> channels, int n_rand,
                              Rng& rng) {
  const Solver es(G);
  const auto n = G.rows();

  Beamformer best;
  best.value = -1.0;
  auto consider = [&](CVector g) {
    const double norm = g.norm();
    if (!(norm > 0.0)) return;
    g /= norm;
    const double v = multicast_min_gain(g, channels);
    if (v > best.value) {
      best.value = v;
      best.g = std::move(g);
    }
  };

  consider(es.eigenvectors().col(n - 1));

  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMatrix sqrt_G =
      es.eigenvectors() * root.cast<std::complex<double>>().asDiagonal() * es.eigenvectors().adjoint();
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  for (int r = 0; r < n_rand; ++r) {
    CVector xi(n);
    for (Eigen::Index i = 0; i < n; ++i) xi[i] = {normal(rng), normal(rng)};
    consider(sqrt_G * xi);
  }

  for (const auto& h : channels) consider(h);

  if (best.value < 0.0) {
    best.g = CVector::Zero(n);
    best.value = multicast_min_gain(best.g, channels);
  }
  return best;
}

BeamSolution solve_multicast(std::span<const CVector> channels, const BeamOptions& opts, Rng& rng) {
  if (channels.empty()) throw InvalidArgument("solve_multicast: no users");
  BeamSolution sol;
  if (channels.size() == 1) {
    const CVector& h = channels.front();
    const double norm = h.norm();
    sol.g = norm > 0.0 ? CVector(h / norm) : CVector(CVector::Zero(h.size()));
    sol.G = sol.g * sol.g.adjoint();
    if (norm == 0.0) sol.G = CMatrix::Identity(h.size(), h.size()) / static_cast<double>(h.size());
    sol.sdp_value = h.squaredNorm();
    sol.upper_bound = sol.sdp_value;
    sol.extracted_value = multicast_min_gain(sol.g, channels);
    return sol;
  }

  const auto sdp = solve_multicast_sdp(MulticastProblem::from_channels(channels), opts.sdp);
  sol.G = sdp.G;
  sol.sdp_value = sdp.value;
  sol.upper_bound = sdp.upper_bound;
  sol.converged = sdp.converged;

  auto beam = extract_beamformer(sdp.G, channels, opts.n_rand, rng);
  sol.g = std::move(beam.g);
  sol.extracted_value = beam.value;
  if (sol.extracted_value > sol.sdp_value) {
    sol.G = sol.g * sol.g.adjoint();
    sol.sdp_value = sol.extracted_value;
  }
  return sol;
}

}  // namespace fleetfl::beamform
