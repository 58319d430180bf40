#include "mjcons/synthesis.hpp"

#include "mjcons/matops.hpp"
#include "mjcons/raptor90.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace mjcons;
using Eigen::MatrixXd;

namespace {

graphs::SpectralConstants ring_constants() {
  return graphs::spectral_constants(two_agent_ring());
}

synth::FullOrderOutcome synth_double_integrator(double gamma = 10.0) {
  return synth::synthesize_full_order(double_integrator_plant(), ring_constants(), 1.0, gamma);
}

}  // namespace

TEST(Pbh, Cases) {
  synth::Plant p;
  p.a = MatrixXd::Zero(1, 1);
  p.b = MatrixXd::Ones(1, 1);
  p.c1 = MatrixXd::Ones(1, 1);
  p.c2 = MatrixXd::Ones(1, 1);
  p.d = MatrixXd::Ones(1, 1);
  p.r_weight = MatrixXd::Ones(1, 1);
  EXPECT_TRUE(synth::check_stabilizable_detectable(p));

  p.a = MatrixXd::Ones(1, 1);  // unstable, no actuation
  p.b = MatrixXd::Zero(1, 1);
  EXPECT_FALSE(synth::check_stabilizable_detectable(p));

  EXPECT_TRUE(synth::check_stabilizable_detectable(raptor90::plant()));
}

TEST(Companion, RealizesEigenvalues) {
  const MatrixXd f = synth::companion_from_eigenvalues({-1.0, -2.0});
  MatrixXd expected(2, 2);
  expected << 0, 1, -2, -3;  // s^2 + 3 s + 2
  EXPECT_TRUE(f.isApprox(expected, 1e-14));
  const Eigen::VectorXcd eigs = Eigen::EigenSolver<MatrixXd>(f, false).eigenvalues();
  EXPECT_NEAR(eigs.real().minCoeff(), -2.0, 1e-12);
  EXPECT_NEAR(eigs.real().maxCoeff(), -1.0, 1e-12);
}

TEST(FullOrder, DoubleIntegratorFeasibleAndVerified) {
  const auto outcome = synth_double_integrator();
  ASSERT_TRUE(outcome.feasible) << outcome.log;
  const auto& proto = *outcome.protocol;

  const auto rep =
      synth::verify_full_order(proto, double_integrator_plant(), ring_constants(), 1.0);
  EXPECT_TRUE(rep.passed) << synth::describe(rep);
  EXPECT_LT(rep.sigma1_max_eig, 0.0);
  EXPECT_LT(rep.sigma2_max_eig, 0.0);

  // gains reconstruct from the certificates
  Eigen::LLT<MatrixXd> llt(proto.p1);
  const MatrixXd k = double_integrator_plant().b.transpose() *
                     llt.solve(MatrixXd::Identity(2, 2));
  EXPECT_LE((proto.k_gain - k).norm(), 1e-8 * (1.0 + k.norm()));
  // interval ordered and positive
  EXPECT_GT(rep.tau_lower, 0.0);
  EXPECT_LT(rep.tau_lower, rep.tau_upper);
  EXPECT_GT(proto.r1, 0.0);
  EXPECT_GT(proto.r2, 0.0);
}

TEST(FullOrder, PerturbedProtocolsFailVerification) {
  const auto outcome = synth_double_integrator();
  ASSERT_TRUE(outcome.feasible) << outcome.log;

  {
    synth::FullOrderProtocol bad = *outcome.protocol;
    bad.tau *= 1e3;
    const auto rep =
        synth::verify_full_order(bad, double_integrator_plant(), ring_constants(), 1.0);
    EXPECT_FALSE(rep.passed);
    EXPECT_FALSE(rep.tau_in_interval);
  }
  {
    synth::FullOrderProtocol bad = *outcome.protocol;
    bad.p2 *= 1e6;
    bad.y *= 1e6;  // keep L = P2^{-1} Y intact
    const auto rep =
        synth::verify_full_order(bad, double_integrator_plant(), ring_constants(), 1.0);
    EXPECT_FALSE(rep.trace_cond_p2);
    EXPECT_FALSE(rep.passed);
  }
}

TEST(FullOrder, UndetectablePlantInfeasible) {
  synth::Plant p = double_integrator_plant();
  p.a << 1, 0, 0, 2;  // unstable
  p.c1 = MatrixXd::Zero(2, 2);
  const auto outcome = synth::synthesize_full_order(p, ring_constants(), 1.0, 10.0);
  EXPECT_FALSE(outcome.feasible);
}

TEST(FullOrder, DeterministicAcrossRuns) {
  const auto a = synth_double_integrator();
  const auto b = synth_double_integrator();
  ASSERT_TRUE(a.feasible && b.feasible);
  EXPECT_TRUE((a.protocol->k_gain.array() == b.protocol->k_gain.array()).all());
  EXPECT_TRUE((a.protocol->p1.array() == b.protocol->p1.array()).all());
  EXPECT_EQ(a.protocol->tau, b.protocol->tau);
}

TEST(FullOrder, TauOverrideHonored) {
  synth::FullOrderOptions opts;
  opts.tau_override = 2.0;
  const auto outcome = synth::synthesize_full_order(double_integrator_plant(), ring_constants(),
                                                    1.0, 10.0, opts);
  ASSERT_TRUE(outcome.feasible) << outcome.log;
  EXPECT_EQ(outcome.protocol->tau, 2.0);
  const auto rep = synth::verify_full_order(*outcome.protocol, double_integrator_plant(),
                                            ring_constants(), 1.0);
  EXPECT_TRUE(rep.passed) << synth::describe(rep);
}

TEST(ReducedOrder, DoubleIntegratorObserverDimOne) {
  const synth::Plant p = double_integrator_position_output();
  synth::ReducedOrderOptions opts;
  opts.f_bar_eigenvalues = {-2.0};
  const auto outcome = synth::synthesize_reduced_order(p, ring_constants(), 1.0, 10.0, opts);
  ASSERT_TRUE(outcome.feasible) << outcome.log;
  const auto& proto = *outcome.protocol;
  EXPECT_EQ(proto.observer_dim(), 1);

  const auto rep = synth::reduced_certificates(proto, p, ring_constants(), 1.0);
  EXPECT_TRUE(rep.passed) << synth::describe(rep);
  EXPECT_LE(rep.sylvester_residual, 1e-8);
  EXPECT_LE(rep.identity_residual, 1e-8);

  // Q1 C1 + Q2 T = I directly
  const MatrixXd identity_gap =
      proto.q1_map * p.c1 + proto.q2_map * proto.t_map - MatrixXd::Identity(2, 2);
  EXPECT_LE(identity_gap.norm(), 1e-8);
}

TEST(ReducedOrder, PerturbationsFailCertificates) {
  const synth::Plant p = double_integrator_position_output();
  synth::ReducedOrderOptions opts;
  opts.f_bar_eigenvalues = {-2.0};
  const auto outcome = synth::synthesize_reduced_order(p, ring_constants(), 1.0, 10.0, opts);
  ASSERT_TRUE(outcome.feasible) << outcome.log;

  {
    synth::ReducedOrderProtocol bad = *outcome.protocol;
    bad.tau = bad.tau * 1e3;
    EXPECT_FALSE(synth::reduced_certificates(bad, p, ring_constants(), 1.0).passed);
  }
  {
    synth::ReducedOrderProtocol bad = *outcome.protocol;
    bad.t_map *= 1.01;  // 1% perturbation breaks the Sylvester identity
    const auto rep = synth::reduced_certificates(bad, p, ring_constants(), 1.0);
    EXPECT_GT(rep.sylvester_residual, 1e-8);
    EXPECT_FALSE(rep.passed);
  }
}

TEST(ReducedOrder, SharedEigenvalueRejected) {
  synth::Plant p = double_integrator_position_output();
  p.a << -1, 1, 0, -3;  // stable A with eigenvalue -1
  synth::ReducedOrderOptions opts;
  opts.f_bar_eigenvalues = {-1.0};
  EXPECT_THROW(synth::synthesize_reduced_order(p, ring_constants(), 1.0, 10.0, opts),
               matops::SharedEigenvaluesError);
}

TEST(ReducedOrder, ExplicitSingularGRejected) {
  const synth::Plant p = double_integrator_position_output();
  synth::ReducedOrderOptions opts;
  opts.f_bar_eigenvalues = {-2.0};
  opts.g_matrix = MatrixXd::Zero(1, 1);  // G = 0 gives T = 0 and a singular stack
  EXPECT_THROW(synth::synthesize_reduced_order(p, ring_constants(), 1.0, 10.0, opts),
               synth::SingularStackError);
}
