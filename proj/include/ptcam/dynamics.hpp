#pragma once

// Time-domain integration of the coupled-mode equations of motion and
// least-squares extraction of the harmonic line amplitudes. Serves as the
// brute-force cross-check for the frequency-domain sideband ladder.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "model.hpp"
#include "spectrum.hpp"

namespace ptcam
{
struct Trajectory
{
    std::vector<double> times;
    std::vector<cplx> a_t;
    std::vector<cplx> c_t;
    double dt = 0.0;
    std::size_t transient_cut = 0;
    // max |E(t + T) - E(t)| / max E over the post-cut segment, E = |a|^2 + |c|^2.
    // NaN when T is not an integer number of steps.
    double periodicity = std::numeric_limits<double>::quiet_NaN();

    std::size_t size() const { return times.size(); }
    std::size_t segment_length() const { return size() - transient_cut; }
};

struct IntegrationConfig
{
    double dt = 0.0;               // <= 0 selects the default step
    double t_end = 0.0;            // <= 0 selects the shortest admissible run
    double transient_factor = 20.0; // transient horizon = factor / stability margin
    double min_periods = 64.0;     // post-cut segment length in mechanical periods
    double phase = 0.0;            // z(t) = z0 cos(omega_m t + phase)
};

/// Largest admissible step: min(1 / (20 max rate), 2 pi / (40 omega_m)).
inline double max_step(const CoupledModeSystem& sys, const MechanicalMode& mech)
{
    const double rate = std::max({std::abs(sys.delta), std::abs(sys.d1), std::abs(sys.d2), sys.g1,
                                  sys.g * mech.z0});
    return std::min(1.0 / (20.0 * rate), 2.0 * std::numbers::pi / (40.0 * mech.omega_m));
}

/// Default step: a quarter of max_step, rounded down so that one mechanical
/// period is an integer number of steps.
inline double default_step(const CoupledModeSystem& sys, const MechanicalMode& mech)
{
    const double period = 2.0 * std::numbers::pi / mech.omega_m;
    const double steps = std::ceil(period / (0.25 * max_step(sys, mech)));
    return period / steps;
}

namespace detail
{
struct ModeState
{
    cplx a;
    cplx c;

    ModeState operator+(const ModeState& o) const { return {a + o.a, c + o.c}; }
    ModeState operator*(double s) const { return {a * s, c * s}; }
};

inline std::size_t next_pow2(std::size_t n)
{
    return std::bit_ceil(std::max<std::size_t>(n, 1));
}

inline std::size_t prev_pow2(std::size_t n)
{
    return n == 0 ? 0 : std::bit_floor(n);
}
} // namespace detail

/// Classical fixed-step fourth-order Runge-Kutta from a = c = 0 of
///   a' = -(i delta + d1) a - i g1 c - i g z(t) a + eps
///   c' = -(i delta + d2) c - i g1 a
inline Trajectory integrate(const CoupledModeSystem& sys, const MechanicalMode& mech, double eps,
                            const IntegrationConfig& cfg = {})
{
    sys.validate();
    mech.validate();
    detail::require(std::isfinite(eps) && eps > 0.0, "integrate: eps must be > 0");
    detail::require(cfg.transient_factor > 0.0, "integrate: transient_factor must be > 0");
    detail::require(cfg.min_periods >= 1.0, "integrate: min_periods must be >= 1");
    const auto dec = decompose(sys);
    if (!dec.stable) {
        throw InstabilityError("integrate: no steady state, amplifying supermode " + dec.amplifying_mode());
    }

    const double bound = max_step(sys, mech);
    const double dt = cfg.dt > 0.0 ? cfg.dt : default_step(sys, mech);
    if (dt > bound * (1.0 + 1e-12)) {
        throw StepSizeError("integrate: dt = " + std::to_string(dt) + " exceeds the step bound " +
                            std::to_string(bound));
    }

    const double period = 2.0 * std::numbers::pi / mech.omega_m;
    const double horizon = cfg.transient_factor / dec.stability_margin;
    const auto cut = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    const auto needed = static_cast<std::size_t>(std::ceil(cfg.min_periods * period / dt));
    std::size_t segment = detail::next_pow2(needed);
    if (cfg.t_end > 0.0) {
        const auto total = static_cast<std::size_t>(std::floor(cfg.t_end / dt + 1e-9)) + 1;
        detail::require(total > cut, "integrate: t_end shorter than the transient horizon");
        segment = detail::prev_pow2(total - cut);
        detail::require(segment >= needed, "integrate: t_end leaves fewer than min_periods after the transient");
    }
    const std::size_t length = cut + segment;

    Trajectory traj;
    traj.dt = dt;
    traj.transient_cut = cut;
    traj.times.resize(length);
    traj.a_t.resize(length);
    traj.c_t.resize(length);

    const cplx self1 = -(kI * sys.delta + sys.d1);
    const cplx self2 = -(kI * sys.delta + sys.d2);
    const cplx hop = -kI * sys.g1;
    const double drive = sys.g * mech.z0;
    auto rhs = [&](double t, const detail::ModeState& y) -> detail::ModeState {
        const double z = drive * std::cos(mech.omega_m * t + cfg.phase);
        return {self1 * y.a + hop * y.c - kI * z * y.a + eps, self2 * y.c + hop * y.a};
    };

    const double limit = 1e12 * eps / sys.d1;
    detail::ModeState y{cplx{}, cplx{}};
    for (std::size_t k = 0; k < length; ++k) {
        const double t = static_cast<double>(k) * dt;
        traj.times[k] = t;
        traj.a_t[k] = y.a;
        traj.c_t[k] = y.c;
        if (!(std::abs(y.a) <= limit)) {
            throw DivergenceError("integrate: |a| exceeded 1e12 eps/d1 at t = " + std::to_string(t));
        }
        const auto k1 = rhs(t, y);
        const auto k2 = rhs(t + 0.5 * dt, y + k1 * (0.5 * dt));
        const auto k3 = rhs(t + 0.5 * dt, y + k2 * (0.5 * dt));
        const auto k4 = rhs(t + dt, y + k3 * dt);
        y = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }

    const double steps_per_period = period / dt;
    const auto shift = static_cast<std::size_t>(std::llround(steps_per_period));
    if (std::abs(steps_per_period - static_cast<double>(shift)) < 1e-6 && shift < segment) {
        double worst = 0.0;
        double scale = 0.0;
        for (std::size_t k = cut; k < length; ++k) scale = std::max(scale, std::norm(traj.a_t[k]) + std::norm(traj.c_t[k]));
        for (std::size_t k = cut; k + shift < length; ++k) {
            const double e0 = std::norm(traj.a_t[k]) + std::norm(traj.c_t[k]);
            const double e1 = std::norm(traj.a_t[k + shift]) + std::norm(traj.c_t[k + shift]);
            worst = std::max(worst, std::abs(e1 - e0));
        }
        traj.periodicity = scale > 0.0 ? worst / scale : 0.0;
    }
    return traj;
}

struct LineFit
{
    int order = 0;
    std::vector<cplx> amplitudes; // index n + order
    double residual = 0.0;        // ||fit - signal|| / ||signal||

    cplx at(int n) const { return amplitudes.at(static_cast<std::size_t>(n + order)); }
    double power(int n) const { return std::norm(at(n)); }
};

inline constexpr double kPoorFitLevel = 1e-3;

/// Least-squares fit of the post-cut mode-1 samples to
/// sum_{|n| <= order} A_n exp(-i n omega_m t).
inline LineFit line_powers(std::span<const double> times, std::span<const cplx> samples, double omega_m, int order)
{
    detail::require(times.size() == samples.size(), "line_powers: size mismatch");
    detail::require(order >= 0, "line_powers: order must be >= 0");
    detail::require(omega_m > 0.0, "line_powers: omega_m must be > 0");
    const auto cols = static_cast<Eigen::Index>(2 * order + 1);
    const auto rows = static_cast<Eigen::Index>(samples.size());
    detail::require(rows >= cols, "line_powers: not enough samples");

    Eigen::MatrixXcd basis(rows, cols);
    Eigen::VectorXcd signal(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double t = times[static_cast<std::size_t>(r)];
        for (Eigen::Index col = 0; col < cols; ++col) {
            const double n = static_cast<double>(col - order);
            basis(r, col) = std::polar(1.0, -n * omega_m * t);
        }
        signal(r) = samples[static_cast<std::size_t>(r)];
    }
    const Eigen::VectorXcd coef = basis.colPivHouseholderQr().solve(signal);

    LineFit fit;
    fit.order = order;
    fit.amplitudes.assign(coef.data(), coef.data() + coef.size());
    const double norm = signal.norm();
    fit.residual = norm > 0.0 ? (basis * coef - signal).norm() / norm : 0.0;
    if (!(fit.residual <= kPoorFitLevel)) {
        throw PoorFitError("line_powers: fit residual " + std::to_string(fit.residual) + " exceeds 1e-3");
    }
    return fit;
}

/// Fit over the trajectory's post-transient segment; requires >= 64 periods.
inline LineFit line_powers(const Trajectory& traj, double omega_m, int order)
{
    detail::require(traj.transient_cut < traj.size(), "line_powers: empty post-transient segment");
    const double span = static_cast<double>(traj.segment_length()) * traj.dt;
    detail::require(span * omega_m / (2.0 * std::numbers::pi) >= 64.0 - 1e-9,
                    "line_powers: post-transient segment shorter than 64 mechanical periods");
    const auto begin = static_cast<std::ptrdiff_t>(traj.transient_cut);
    return line_powers(std::span<const double>(traj.times).subspan(static_cast<std::size_t>(begin)),
                       std::span<const cplx>(traj.a_t).subspan(static_cast<std::size_t>(begin)), omega_m, order);
}

/// t, Re(a), Im(a), Re(c), Im(c)
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj)
{
    os << "t,re_a,im_a,re_c,im_c\n";
    os.precision(17);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << traj.times[k] << ',' << traj.a_t[k].real() << ',' << traj.a_t[k].imag() << ','
           << traj.c_t[k].real() << ',' << traj.c_t[k].imag() << '\n';
    }
}

// ---------------------------------------------------------------------------

struct CrossValidationConfig
{
    int ladder_order = kDefaultLadderOrder;
    int fit_order = kDefaultLadderOrder;
    IntegrationConfig integration;
    double tolerance = 1e-3;
};

struct CrossValidationReport
{
    std::array<double, 3> ladder_power{};     // |a_n|^2, n = 0, 1, 2
    std::array<double, 3> oracle_power{};
    std::array<double, 3> deviation{};        // relative
    double fit_residual = 0.0;
    double periodicity = 0.0;
    bool truncation_warning = false;
    bool pass = false;

    double max_deviation() const { return *std::max_element(deviation.begin(), deviation.end()); }
};

namespace detail
{
inline double relative_deviation(double value, double reference)
{
    if (value == reference) return 0.0;
    return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}
} // namespace detail

/// Integrates, fits, and compares |a_n|^2 (n = 0, 1, 2) against the ladder.
inline CrossValidationReport cross_validate(const CoupledModeSystem& sys, const MechanicalMode& mech, double eps,
                                            const CrossValidationConfig& cfg = {})
{
    const auto ladder = sideband_ladder(sys, mech, eps, cfg.ladder_order);
    const auto traj = integrate(sys, mech, eps, cfg.integration);
    const auto fit = line_powers(traj, mech.omega_m, cfg.fit_order);

    CrossValidationReport report;
    report.fit_residual = fit.residual;
    report.periodicity = traj.periodicity;
    report.truncation_warning = ladder.truncation_warning;
    for (int n = 0; n < 3; ++n) {
        const auto idx = static_cast<std::size_t>(n);
        report.ladder_power[idx] = ladder.power(n);
        report.oracle_power[idx] = fit.power(n);
        report.deviation[idx] = detail::relative_deviation(fit.power(n), ladder.power(n));
    }
    report.pass = report.max_deviation() <= cfg.tolerance;
    return report;
}
} // namespace ptcam
