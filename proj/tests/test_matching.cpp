#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dmrac/matching.hpp"
#include "dmrac/presets.hpp"

using namespace dmrac;
using Catch::Approx;

TEST_CASE("feedback matching reproduces the derived gains for vehicle 1") {
  auto g = feedback_matching(table_agent(1), table_reference());
  REQUIRE(g.k_m[0] == Approx(2.0).margin(1e-12));
  REQUIRE(g.k_m[1] == Approx(-3.0).margin(1e-12));
  REQUIRE(g.k_r == Approx(2.0).margin(1e-12));
}

TEST_CASE("matched closed loop equals the reference dynamics for every vehicle") {
  auto ref = table_reference();
  const int rows = static_cast<int>(vehicle_table().size());
  for (int i = 1; i < rows; ++i) {
    auto p = table_agent(i);
    auto g = feedback_matching(p, ref);
    CAPTURE(i);
    REQUIRE((ref.A0 - (p.A + p.b * g.k_m.transpose())).cwiseAbs().maxCoeff() <
            1e-10);
    REQUIRE((ref.b0 - p.b * g.k_r).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("coupling matching aligns every adjacent chain pair") {
  for (int i = 2; i <= 6; ++i) {
    auto pi = table_agent(i);
    auto pj = table_agent(i - 1);
    auto g = coupling_matching(pi, pj);
    CAPTURE(i);
    REQUIRE((pi.A - (pj.A + pj.b * g.k_m.transpose())).cwiseAbs().maxCoeff() <
            1e-10);
    REQUIRE((pi.b - pj.b * g.k_r).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("solve_channel rejects unmatched directions and zero input vectors") {
  Vec b{{0.0, 1.0}};
  Mat M = Mat::Zero(2, 2);
  M(0, 0) = 1.0;  // outside the span of b
  REQUIRE_THROWS_AS(solve_channel(b, M), MatchingError);
  REQUIRE_THROWS_AS(solve_channel(Vec::Zero(2), Mat::Identity(2, 2)),
                    MatchingError);
  REQUIRE_THROWS_AS(solve_channel_scalar(b, Vec{{1.0, 0.0}}), MatchingError);
}

TEST_CASE("solve_lyapunov returns the closed-form P for the vehicle reference") {
  auto ref = table_reference();
  Mat Q = Mat::Zero(2, 2);
  Q(0, 0) = 100.0;
  Q(1, 1) = 1.0;
  Mat P = solve_lyapunov(ref.A0, Q);

  REQUIRE(P(0, 0) == Approx(200.25).margin(1e-9));
  REQUIRE(P(0, 1) == Approx(200.0).margin(1e-9));
  REQUIRE(P(1, 0) == Approx(200.0).margin(1e-9));
  REQUIRE(P(1, 1) == Approx(401.0).margin(1e-9));

  REQUIRE((P * ref.A0 + ref.A0.transpose() * P + Q).cwiseAbs().maxCoeff() <
          1e-10);
  REQUIRE((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  REQUIRE(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("solve_lyapunov satisfies the equation for random stable systems") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    Mat R(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) R(r, c) = u(rng);
    Eigen::EigenSolver<Mat> es(R, false);
    const double shift = es.eigenvalues().real().maxCoeff() + 1.0;
    Mat A = R - shift * Mat::Identity(n, n);
    REQUIRE(is_hurwitz(A));
    Mat Q = Mat::Identity(n, n) + R.transpose() * R;
    Mat P = solve_lyapunov(A, Q);
    const double scale = Q.cwiseAbs().maxCoeff();
    REQUIRE((P * A + A.transpose() * P + Q).cwiseAbs().maxCoeff() <
            1e-8 * scale);
    REQUIRE((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-10 * scale);
  }
}

TEST_CASE("ultimate_bound matches the closed form and scales in eps0") {
  auto ref = table_reference();
  Mat Q = Mat::Zero(2, 2);
  Q(0, 0) = 100.0;
  Q(1, 1) = 1.0;
  Mat P = solve_lyapunov(ref.A0, Q);
  Vec b{{0.0, 0.5}};
  const double eps0 = 0.05;
  // 2 ‖P b‖ eps0 / λ_min(Q) with P b = [100, 200.5] and λ_min = 1
  const double expect = 2.0 * std::hypot(100.0, 200.5) * eps0 / 1.0;
  REQUIRE(ultimate_bound(P, b, Q, eps0) == Approx(expect).epsilon(1e-9));
  REQUIRE(ultimate_bound(P, b, Q, 2 * eps0) ==
          Approx(2 * ultimate_bound(P, b, Q, eps0)).epsilon(1e-12));
  REQUIRE(ultimate_bound(P, b, Q, 0.0) == 0.0);
}

TEST_CASE("edge ideal gains reconstruct the neighbor and reference dynamics") {
  auto ref = table_reference();
  for (int i = 2; i <= 6; ++i) {
    auto f = table_agent(i);
    auto nb = table_agent(i - 1);
    CAPTURE(i);

    auto own = edge_ideal_gains(f, nb, ref, GainRegressor::own);
    REQUIRE((nb.A - (f.A + f.b * own.k_edge.transpose())).cwiseAbs().maxCoeff() <
            1e-10);
    REQUIRE(
        (ref.A0 - (nb.A + f.b * own.k_consensus.transpose())).cwiseAbs().maxCoeff() <
        1e-10);
    REQUIRE((nb.b - f.b * own.k_ff).cwiseAbs().maxCoeff() < 1e-12);

    auto nbr = edge_ideal_gains(f, nb, ref, GainRegressor::neighbor);
    REQUIRE((nbr.k_edge - own.k_edge).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(
        (ref.A0 - (f.A + f.b * nbr.k_consensus.transpose())).cwiseAbs().maxCoeff() <
        1e-10);
  }
}

TEST_CASE("leader edge ideal gains reduce to feedback matching") {
  auto ref = table_reference();
  auto p = table_agent(1);
  auto g = leader_edge_ideal_gains(p, ref);
  auto fb = feedback_matching(p, ref);
  REQUIRE((g.k_edge - fb.k_m).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE(g.k_ff == Approx(fb.k_r).margin(1e-14));
  REQUIRE(g.k_consensus.isZero());
}

TEST_CASE("matching infeasibility surfaces as MatchingError") {
  auto ref = table_reference();
  auto p = table_agent(1);
  p.A(0, 0) = 0.5;  // mismatch outside the input channel
  REQUIRE_THROWS_AS(feedback_matching(p, ref), MatchingError);

  auto f = table_agent(2);
  auto nb = table_agent(1);
  nb.A(0, 1) = 2.0;
  REQUIRE_THROWS_AS(coupling_matching(nb, f), MatchingError);
}
