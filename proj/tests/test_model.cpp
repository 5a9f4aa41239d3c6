#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "ptcam/model.hpp"

using namespace ptcam;

namespace
{
// Independent route: numerical eigenvalues of [[delta - i d1, g1], [g1, delta - i d2]].
Eigen::Vector2cd numeric_eigenvalues(const CoupledModeSystem& s)
{
    Eigen::Matrix2cd m;
    m << cplx(s.delta, -s.d1), cplx(s.g1, 0.0), cplx(s.g1, 0.0), cplx(s.delta, -s.d2);
    return Eigen::ComplexEigenSolver<Eigen::Matrix2cd>(m, false).eigenvalues();
}

double set_distance(const Eigen::Vector2cd& ev, cplx p, cplx m)
{
    const double direct = std::max(std::abs(ev(0) - p), std::abs(ev(1) - m));
    const double swapped = std::max(std::abs(ev(1) - p), std::abs(ev(0) - m));
    return std::min(direct, swapped);
}

const CoupledModeSystem kNominal = CoupledModeSystem::pt(0.0, 20.0, 16.0, 19.8, 5.0);
} // namespace

TEST(Decompose, PtSymmetricNominalParameters)
{
    const auto d = decompose(kNominal);
    EXPECT_DOUBLE_EQ(d.chi, 2.0);
    EXPECT_DOUBLE_EQ(d.dlt, 18.0);
    EXPECT_NEAR(d.beta.real(), 8.248636250, 1e-8);
    EXPECT_EQ(d.beta.imag(), 0.0);
    EXPECT_NEAR(d.freq_plus(), 8.248636250, 1e-8);
    EXPECT_NEAR(d.freq_minus(), -8.248636250, 1e-8);
    EXPECT_DOUBLE_EQ(d.decay_plus(), 2.0);
    EXPECT_DOUBLE_EQ(d.decay_minus(), 2.0);
    EXPECT_EQ(d.phase, Phase::pt_symmetric);
    EXPECT_TRUE(d.stable);
    EXPECT_NEAR(d.g_eff, 0.30308, 1e-5);

    const auto ev = numeric_eigenvalues(kNominal);
    EXPECT_LT(set_distance(ev, d.omega_plus, d.omega_minus), 1e-12);
}

TEST(Decompose, UncoupledRecoversBareRates)
{
    const auto d = decompose(kNominal.with_g1(0.0));
    EXPECT_DOUBLE_EQ(d.beta.real(), 0.0);
    EXPECT_DOUBLE_EQ(d.beta.imag(), 18.0);
    // omega_plus labels the less damped mode in the broken phase.
    EXPECT_DOUBLE_EQ(d.decay_plus(), -16.0);
    EXPECT_DOUBLE_EQ(d.decay_minus(), 20.0);
    EXPECT_EQ(d.phase, Phase::broken);
    EXPECT_FALSE(d.stable);
    EXPECT_NE(d.amplifying_mode().find("omega_plus"), std::string::npos);
}

TEST(Decompose, TransitionCoalesces)
{
    const auto d = decompose(kNominal.with_g1(18.0));
    EXPECT_EQ(d.beta, cplx(0.0, 0.0));
    EXPECT_EQ(d.omega_plus, cplx(0.0, -2.0));
    EXPECT_EQ(d.omega_minus, cplx(0.0, -2.0));
    EXPECT_EQ(d.phase, Phase::transition);
    EXPECT_TRUE(std::isinf(d.g_eff));
}

TEST(Decompose, TwoLossyCavities)
{
    const auto sys = CoupledModeSystem::ep(0.0, 20.0, 16.0, 1.0, 5.0);
    const auto d = decompose(sys);
    EXPECT_DOUBLE_EQ(d.chi, 18.0);
    EXPECT_DOUBLE_EQ(d.dlt, 2.0);
    EXPECT_DOUBLE_EQ(d.beta.real(), 0.0);
    EXPECT_NEAR(d.beta.imag(), std::sqrt(3.0), 1e-14);
    EXPECT_DOUBLE_EQ(d.freq_plus(), 0.0);
    EXPECT_DOUBLE_EQ(d.freq_minus(), 0.0);
    EXPECT_NEAR(d.decay_plus(), 16.267949192, 1e-8);
    EXPECT_NEAR(d.decay_minus(), 19.732050808, 1e-8);
    EXPECT_TRUE(d.stable);
    EXPECT_EQ(d.phase, Phase::broken);
}

TEST(Decompose, RejectsInvalidParameters)
{
    EXPECT_THROW(decompose({0.0, 0.0, 1.0, 1.0, 1.0}), InvalidParameter);
    EXPECT_THROW(decompose({0.0, 1.0, 1.0, -1.0, 1.0}), InvalidParameter);
    EXPECT_THROW(decompose({0.0, 1.0, 1.0, 1.0, -1.0}), InvalidParameter);
    EXPECT_THROW(decompose({NAN, 1.0, 1.0, 1.0, 1.0}), InvalidParameter);
    EXPECT_THROW(decompose(kNominal, 0.0), InvalidParameter);
    EXPECT_THROW(decompose(kNominal, 0.1), InvalidParameter);
}

TEST(DecomposeProperty, MatchesNumericEigenvalues)
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> rate(0.01, 100.0), signed_rate(-100.0, 100.0), det(-50.0, 50.0);
    for (int i = 0; i < 10000; ++i) {
        const CoupledModeSystem s{det(rng), rate(rng), signed_rate(rng), rate(rng), rate(rng)};
        const auto d = decompose(s);
        const auto ev = numeric_eigenvalues(s);
        const double scale = std::max(std::abs(ev(0)), std::abs(ev(1)));
        ASSERT_LT(set_distance(ev, d.omega_plus, d.omega_minus) / scale, 1e-10) << "draw " << i;

        // trace and branch invariants
        const cplx trace = d.omega_plus + d.omega_minus;
        const double mag = std::abs(d.omega_plus) + std::abs(d.omega_minus);
        ASSERT_NEAR(trace.real(), 2.0 * s.delta, 1e-14 * mag);
        ASSERT_NEAR(trace.imag(), -2.0 * d.chi, 1e-14 * mag);
        const cplx shifted = d.omega_plus - cplx(s.delta, -d.chi);
        const double disc = s.g1 * s.g1 - d.dlt * d.dlt;
        ASSERT_LE(std::abs(shifted * shifted - disc), 1e-12 * std::max(s.g1 * s.g1, d.dlt * d.dlt));
        ASSERT_GE(d.beta.real(), 0.0);
        if (d.beta.real() == 0.0) {
            ASSERT_GE(d.beta.imag(), 0.0);
        }
        ASSERT_EQ(d.stable, d.decay_plus() > 0.0 && d.decay_minus() > 0.0);
        if (d.phase == Phase::pt_symmetric) {
            ASSERT_EQ(d.decay_plus(), d.chi);
            ASSERT_EQ(d.decay_minus(), d.chi);
            ASSERT_GT(d.freq_plus(), d.freq_minus());
        }
        if (d.phase == Phase::broken) {
            ASSERT_EQ(d.freq_plus(), s.delta);
            ASSERT_EQ(d.freq_minus(), s.delta);
            ASSERT_NE(d.decay_plus(), d.decay_minus());
        }
    }
}

TEST(DecomposeProperty, UncoupledLimitIsExact)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> rate(0.01, 100.0), signed_rate(-100.0, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const CoupledModeSystem s{0.0, rate(rng), signed_rate(rng), 0.0, 1.0};
        const auto d = decompose(s);
        const double lo = std::min(s.d1, s.d2), hi = std::max(s.d1, s.d2);
        ASSERT_EQ(std::min(d.decay_plus(), d.decay_minus()), lo);
        ASSERT_EQ(std::max(d.decay_plus(), d.decay_minus()), hi);
    }
}

TEST(DecomposeProperty, PhaseBoundaryNeverSkipped)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> rate(0.01, 100.0);
    for (int i = 0; i < 2000; ++i) {
        const double d1 = rate(rng) + 1.0;
        const double d2 = d1 - 2.0 * rate(rng); // dlt > 0
        const CoupledModeSystem s{0.0, d1, d2, 0.0, 1.0};
        const double dlt = s.dlt();
        const auto above = decompose(s.with_g1(dlt * (1.0 + 1e-6))).phase;
        const auto below = decompose(s.with_g1(dlt * (1.0 - 1e-6))).phase;
        ASSERT_TRUE(above == Phase::pt_symmetric || above == Phase::transition);
        ASSERT_TRUE(below == Phase::broken || below == Phase::transition);
        // With the default tolerance 1e-9 a 1e-6 offset is always resolved.
        ASSERT_EQ(above, Phase::pt_symmetric);
        ASSERT_EQ(below, Phase::broken);
    }
}

TEST(DecomposeProperty, ScaleInvariance)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> rate(0.01, 100.0), signed_rate(-100.0, 100.0), det(-50.0, 50.0),
        scale(1e-3, 1e3);
    for (int i = 0; i < 2000; ++i) {
        const CoupledModeSystem s{det(rng), rate(rng), signed_rate(rng), rate(rng), rate(rng)};
        const double k = scale(rng);
        const auto a = decompose(s);
        const auto b = decompose(s.scaled(k));
        const double mag = std::abs(a.omega_plus) + std::abs(a.omega_minus);
        ASSERT_LE(std::abs(b.omega_plus - k * a.omega_plus), 1e-12 * k * mag);
        ASSERT_LE(std::abs(b.omega_minus - k * a.omega_minus), 1e-12 * k * mag);
        ASSERT_EQ(a.phase, b.phase);
        ASSERT_EQ(a.stable, b.stable);
        ASSERT_NEAR(b.g_eff, a.g_eff, 1e-12 * a.g_eff);
    }
}

TEST(EffectiveCoupling, Examples)
{
    EXPECT_NEAR(effective_coupling(kNominal), 0.303080, 1e-6);
    EXPECT_NEAR(effective_coupling(kNominal.with_g1(0.0)), 5.0 / 36.0, 1e-15);
    const double near = effective_coupling(kNominal.with_g1(18.1));
    EXPECT_NEAR(near, 5.0 / (2.0 * std::sqrt(3.61)), 1e-12);
    EXPECT_GT(near, effective_coupling(kNominal.with_g1(0.0)));
}

TEST(EffectiveCoupling, SingularAtTransition)
{
    EXPECT_THROW(effective_coupling(kNominal.with_g1(18.0)), TransitionSingularity);
    EXPECT_THROW(effective_coupling({0.0, 20.0, 20.0, 0.0, 5.0}), TransitionSingularity);
}

TEST(EffectiveCoupling, DivergesMonotonicallyTowardTransition)
{
    const double dlt = 18.0;
    for (const double side : {1.0, -1.0}) {
        double previous = 0.0;
        for (int k = 1; k <= 6; ++k) {
            const double g1 = dlt * (1.0 + side * std::pow(10.0, -k));
            const double v = effective_coupling(kNominal.with_g1(g1));
            EXPECT_GT(v, previous) << "side " << side << " k " << k;
            previous = v;
        }
    }
}

TEST(EpThreshold, Examples)
{
    EXPECT_DOUBLE_EQ(ep_threshold({0.0, 20.0, 16.0, 1.0, 5.0}), 2.0);
    EXPECT_DOUBLE_EQ(ep_threshold({0.0, 20.0, -16.0, 1.0, 5.0}), 18.0);
    EXPECT_DOUBLE_EQ(ep_threshold({0.0, 20.0, 20.0, 1.0, 5.0}), 0.0);
}

TEST(AmplificationRatio, ClosedForm)
{
    EXPECT_EQ(pt_ep_amplification_ratio(20.0, 16.0, 16.0), 576.0);
    EXPECT_NEAR(pt_ep_amplification_ratio(20.0, 10.0, 16.0), 14.4, 1e-12);
}

TEST(AmplificationRatio, MonotoneAndDivergent)
{
    double previous = 0.0;
    for (double gamma = 1.0; gamma < 20.0; gamma += 0.25) {
        const double v = pt_ep_amplification_ratio(20.0, gamma, 16.0);
        EXPECT_GT(v, previous);
        previous = v;
    }
    EXPECT_GT(pt_ep_amplification_ratio(20.0, 20.0 - 1e-6, 16.0), 1e20);
    EXPECT_THROW(pt_ep_amplification_ratio(20.0, 20.0, 16.0), BalancedGainError);
    EXPECT_THROW(pt_ep_amplification_ratio(20.0, 21.0, 16.0), InvalidParameter);
    EXPECT_THROW(pt_ep_amplification_ratio(20.0, 0.0, 16.0), InvalidParameter);
    EXPECT_THROW(pt_ep_amplification_ratio(20.0, 10.0, -1.0), InvalidParameter);
}

TEST(SingleCavityReference, DecouplesModeTwo)
{
    const auto ref = single_cavity_reference(kNominal);
    EXPECT_EQ(ref.g1, 0.0);
    EXPECT_EQ(ref.d1, kNominal.d1);
    EXPECT_TRUE(decompose(ref).stable);
}
