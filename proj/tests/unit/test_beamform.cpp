#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/QR>

#include "bloch_grid.hpp"
#include "fleetfl/beamform.hpp"
#include "fleetfl/error.hpp"

namespace fleetfl::beamform {
namespace {

using cd = std::complex<double>;

CVector vec(std::initializer_list<cd> v) {
  CVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (auto x : v) out(i++) = x;
  return out;
}

CVector random_channel(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d(0.0, 1.0);
  CVector h(n);
  for (int i = 0; i < n; ++i) h(i) = cd(d(rng), d(rng));
  return h;
}

TEST(Sdp, SingleUserIsMaximalRatio) {
  const std::vector<CVector> hs{vec({1.0, 0.0, 0.0, 0.0})};
  const auto r = solve_multicast_sdp(MulticastProblem::from_channels(hs));
  EXPECT_NEAR(r.value, 1.0, 1e-3);
  EXPECT_NEAR(std::abs(r.G(0, 0)), 1.0, 1e-3);
}

TEST(Sdp, OrthogonalEqualUsersSplitEvenly) {
  const std::vector<CVector> hs{vec({1.0, 0.0}), vec({0.0, 1.0})};
  const auto r = solve_multicast_sdp(MulticastProblem::from_channels(hs));
  EXPECT_NEAR(r.value, 0.5, 0.5e-3);
  EXPECT_TRUE(r.converged);
}

TEST(Sdp, OrthogonalUnequalUsers) {
  const std::vector<CVector> hs{vec({1.0, 0.0}), vec({0.0, 2.0})};
  const auto r = solve_multicast_sdp(MulticastProblem::from_channels(hs));
  EXPECT_NEAR(r.value, 0.8, 0.8e-3);
  EXPECT_NEAR(r.G(0, 0).real(), 0.8, 1e-2);
  EXPECT_NEAR(r.G(1, 1).real(), 0.2, 1e-2);
}

TEST(Sdp, MatchesSpectahedronGridSearch) {
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<int> users(2, 4);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<CVector> hs;
    const int m = users(rng);
    for (int v = 0; v < m; ++v) hs.push_back(random_channel(rng, 2));
    const double want = fleetfl::testing::bloch_grid_max(hs);
    const auto r = solve_multicast_sdp(MulticastProblem::from_channels(hs));
    EXPECT_NEAR(r.value, want, 1e-3 * want) << trial;
    EXPECT_GE(r.upper_bound, want * (1.0 - 1e-9)) << trial;
  }
}

TEST(Sdp, IteratesStayOnTheSpectahedron) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CVector> hs;
    for (int v = 0; v < 4; ++v) hs.push_back(random_channel(rng, 4));
    const auto r = solve_multicast_sdp(MulticastProblem::from_channels(hs));
    EXPECT_NEAR(r.G.trace().real(), 1.0, 1e-9);
    EXPECT_LT((r.G - r.G.adjoint()).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r.G);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
    EXPECT_LE(r.value, r.upper_bound * (1.0 + 1e-12));
  }
}

TEST(Sdp, InvariantUnderCommonUnitaryRotation) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<CVector> hs, rotated;
    for (int v = 0; v < 3; ++v) hs.push_back(random_channel(rng, 4));
    CMatrix A(4, 4);
    for (int j = 0; j < 4; ++j) A.col(j) = random_channel(rng, 4);
    const CMatrix U = Eigen::HouseholderQR<CMatrix>(A).householderQ();
    for (const auto& h : hs) rotated.push_back(U * h);
    const auto a = solve_multicast_sdp(MulticastProblem::from_channels(hs));
    const auto b = solve_multicast_sdp(MulticastProblem::from_channels(rotated));
    EXPECT_NEAR(b.value, a.value, 1e-3 * a.value);
    // Rotating the solution back is feasible for the original problem with the same value.
    const CMatrix back = U.adjoint() * b.G * U;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& h : hs) worst = std::min(worst, (h.adjoint() * back * h)(0, 0).real());
    EXPECT_NEAR(worst, b.value, 1e-9 * b.value);
  }
}

TEST(Sdp, ScalesLinearly) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<CVector> hs, scaled;
    for (int v = 0; v < 3; ++v) hs.push_back(random_channel(rng, 4));
    const double c = 1e-9 * (1.0 + trial);
    for (const auto& h : hs) scaled.push_back(std::sqrt(c) * h);
    const auto a = solve_multicast_sdp(MulticastProblem::from_channels(hs));
    const auto b = solve_multicast_sdp(MulticastProblem::from_channels(scaled));
    EXPECT_NEAR(b.value, c * a.value, 1e-9 * c * a.value);
    EXPECT_LT((b.G - a.G).norm(), 1e-6);
  }
}

TEST(Sdp, RejectsMalformedProblems) {
  EXPECT_THROW(solve_multicast_sdp(MulticastProblem{}), InvalidArgument);
  MulticastProblem p;
  CMatrix H(2, 2);
  H << 1.0, cd(0.0, 1.0), cd(0.0, 1.0), 1.0;
  p.H.push_back(H);
  EXPECT_THROW(solve_multicast_sdp(p), InvalidArgument);
}

TEST(MinGain, Examples) {
  const std::vector<CVector> hs{vec({1.0, 0.0}), vec({0.0, 1.0})};
  const CVector g = vec({1.0, 1.0}) / std::sqrt(2.0);
  EXPECT_NEAR(multicast_min_gain(g, hs), 0.5, 1e-15);
  EXPECT_EQ(multicast_min_gain(vec({1.0, 0.0}), hs), 0.0);
  const std::vector<CVector> one{vec({3.0, cd(0.0, 4.0)})};
  EXPECT_NEAR(multicast_min_gain(one[0].normalized(), one), 25.0, 1e-12);
  EXPECT_THROW(multicast_min_gain(g, std::vector<CVector>{}), InvalidArgument);
}

TEST(Extract, RankOneRecoversTheVector) {
  // Per-user candidates score 0 here, so only v itself can win.
  const CVector v = vec({1.0, cd(0.0, 1.0)}) / std::sqrt(2.0);
  const std::vector<CVector> hs{vec({1.0, 0.0}), vec({0.0, 1.0})};
  Rng rng(1);
  const auto b = extract_beamformer(v * v.adjoint(), hs, 50, rng);
  // Up to a global phase, every randomisation of a rank-one G is v itself.
  EXPECT_NEAR(std::abs(b.g.dot(v)), 1.0, 1e-12);
  EXPECT_NEAR(b.value, 0.5, 1e-12);
}

TEST(Extract, OrthogonalEqualUsers) {
  const std::vector<CVector> hs{vec({1.0, 0.0}), vec({0.0, 1.0})};
  const CVector g = vec({1.0, 1.0}) / std::sqrt(2.0);
  Rng rng(2);
  const auto b = extract_beamformer(g * g.adjoint(), hs, 0, rng);
  EXPECT_NEAR(b.value, 0.5, 1e-15);
  EXPECT_NEAR(std::abs(b.g(0)), 1.0 / std::sqrt(2.0), 1e-12);
  // From the full-rank optimum I/2 only randomisation can find the split beam.
  const auto s = solve_multicast(hs, BeamOptions{}, rng);
  EXPECT_NEAR(s.extracted_value, 0.5, 5e-3);
  EXPECT_LE(s.extracted_value, 0.5 + 1e-12);
}

TEST(SolveMulticast, SingleUserIsClosedForm) {
  const std::vector<CVector> hs{vec({3.0, cd(0.0, 4.0), 0.0, 0.0})};
  Rng rng(3);
  const auto s = solve_multicast(hs, BeamOptions{}, rng);
  EXPECT_NEAR(s.sdp_value, 25.0, 1e-12);
  EXPECT_NEAR(s.extracted_value, 25.0, 1e-9);
  EXPECT_NEAR(s.g.norm(), 1.0, 1e-12);
}

TEST(SolveMulticast, ExtractionIsSandwiched) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<CVector> hs;
    const int m = 2 + trial % 4;
    for (int v = 0; v < m; ++v) hs.push_back(random_channel(gen, 4));
    Rng rng(static_cast<std::uint64_t>(trial));
    const auto s = solve_multicast(hs, BeamOptions{}, rng);
    EXPECT_LE(s.extracted_value, s.sdp_value + 1e-6 * s.sdp_value);
    EXPECT_LE(s.g.norm(), 1.0 + 1e-12);
    double per_user = 0.0;
    for (const auto& h : hs) per_user = std::max(per_user, multicast_min_gain(h.normalized(), hs));
    EXPECT_GE(s.extracted_value, per_user * (1.0 - 1e-12));
    EXPECT_NEAR(s.G.trace().real(), 1.0, 1e-9);
  }
}

}  // namespace
}  // namespace fleetfl::beamform
