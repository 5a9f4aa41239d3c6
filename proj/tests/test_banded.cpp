#include <complex>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ptcam/banded.hpp"

using namespace ptcam;
using cd = std::complex<double>;

namespace
{
Eigen::MatrixXcd dense(const Tridiagonal<cd>& m)
{
    const auto n = static_cast<Eigen::Index>(m.size());
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = m.diag[static_cast<std::size_t>(i)];
        if (i + 1 < n) {
            d(i + 1, i) = m.lower[static_cast<std::size_t>(i)];
            d(i, i + 1) = m.upper[static_cast<std::size_t>(i)];
        }
    }
    return d;
}
} // namespace

TEST(Tridiagonal, MatchesDenseSolveWithPivoting)
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 30;
        Tridiagonal<cd> m(n);
        // Small diagonal forces row swaps.
        for (auto& v : m.diag) v = cd(nd(rng), nd(rng)) * 0.05;
        for (auto& v : m.lower) v = cd(nd(rng), nd(rng));
        for (auto& v : m.upper) v = cd(nd(rng), nd(rng));
        std::vector<cd> rhs(n);
        for (auto& v : rhs) v = cd(nd(rng), nd(rng));

        const auto x = solve_tridiagonal<cd>(m, rhs);
        const Eigen::VectorXcd ref =
            dense(m).fullPivLu().solve(Eigen::Map<const Eigen::VectorXcd>(rhs.data(), static_cast<Eigen::Index>(n)));
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(x[i] - ref(static_cast<Eigen::Index>(i))));
        EXPECT_LT(err, 1e-8 * (1.0 + ref.cwiseAbs().maxCoeff())) << "trial " << trial;
        EXPECT_LT(residual_norm<cd>(m, x, rhs), 1e-10 * l2_norm<cd>(rhs));
    }
}

TEST(Tridiagonal, SingularThrows)
{
    Tridiagonal<cd> m(2);
    m.diag = {cd(1.0), cd(1.0)};
    m.lower = {cd(1.0)};
    m.upper = {cd(1.0)};
    const std::vector<cd> rhs{cd(1.0), cd(2.0)};
    EXPECT_THROW(solve_tridiagonal<cd>(m, rhs), std::domain_error);
}

TEST(Tridiagonal, RealScalar)
{
    Tridiagonal<double> m(3);
    m.diag = {2.0, 2.0, 2.0};
    m.lower = {-1.0, -1.0};
    m.upper = {-1.0, -1.0};
    const std::vector<double> rhs{1.0, 0.0, 1.0};
    const auto x = solve_tridiagonal<double>(m, rhs);
    EXPECT_NEAR(x[0], 1.0, 1e-15);
    EXPECT_NEAR(x[1], 1.0, 1e-15);
    EXPECT_NEAR(x[2], 1.0, 1e-15);
}
