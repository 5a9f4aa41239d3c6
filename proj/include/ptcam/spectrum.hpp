#pragma once

// Frequency-domain steady state of the coupled-mode model under a prescribed
// mechanical displacement z(t) = z0 cos(omega_m t): background spectra,
// sideband ladders, composite transducer spectra and the amplification factor.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "banded.hpp"
#include "errors.hpp"
#include "model.hpp"

namespace ptcam
{
struct MechanicalMode
{
    double omega_m = 6.0;
    double gamma_m = 0.2;
    double z0 = 0.2; // prescribed classical amplitude; g*z0 is a rate in MHz

    void validate() const
    {
        detail::require(std::isfinite(omega_m) && omega_m > 0.0, "MechanicalMode: omega_m must be > 0");
        detail::require(std::isfinite(gamma_m) && gamma_m > 0.0, "MechanicalMode: gamma_m must be > 0");
        detail::require(std::isfinite(z0) && z0 >= 0.0, "MechanicalMode: z0 must be >= 0");
    }

    MechanicalMode with_z0(double value) const
    {
        auto copy = *this;
        copy.z0 = value;
        return copy;
    }

    bool operator==(const MechanicalMode&) const = default;
};

inline constexpr int kDefaultLadderOrder = 5;
inline constexpr double kTruncationWarnLevel = 1e-8;
inline constexpr double kLadderResidualTol = 1e-10;

/// Whether steady-state operations insist on a stable system. `formal`
/// evaluates the frequency-domain linear response regardless; the result is
/// not a physical steady state when a supermode amplifies.
enum class ResponsePolicy
{
    require_stable,
    formal,
};

struct SidebandLadder
{
    int order = 0;
    std::vector<cplx> a; // mode-1 coefficients, index n + order
    std::vector<cplx> c; // mode-2 coefficients
    double eps = 0.0;
    double residual = 0.0; // ||M x - rhs|| / ||rhs||
    bool truncation_warning = false;
    CoupledModeSystem system;
    MechanicalMode mech;

    cplx a_at(int n) const { return a.at(static_cast<std::size_t>(n + order)); }
    cplx c_at(int n) const { return c.at(static_cast<std::size_t>(n + order)); }
    double power(int n) const { return std::norm(a_at(n)); }
    /// |a_n / a_0|^2
    double contrast(int n) const { return power(n) / power(0); }
};

namespace detail
{
inline cplx mode2_denominator(const CoupledModeSystem& sys, double omega)
{
    return kI * (sys.delta - omega) + sys.d2;
}

inline void require_stable(const CoupledModeSystem& sys, const char* where)
{
    const auto dec = decompose(sys);
    if (!dec.stable) {
        throw InstabilityError(std::string(where) + ": no steady state, amplifying supermode " +
                               dec.amplifying_mode());
    }
}
} // namespace detail

/// Spectral radius of the one-period propagator of the homogeneous, modulated
/// equations (Floquet multiplier). The modulated system has a steady state
/// only when it is below 1; a statically stable system can still be driven
/// into parametric growth by g z0.
inline double floquet_radius(const CoupledModeSystem& sys, const MechanicalMode& mech)
{
    sys.validate();
    mech.validate();
    const double period = 2.0 * std::numbers::pi / mech.omega_m;
    const double rate = std::max({std::abs(sys.delta), std::abs(sys.d1), std::abs(sys.d2), sys.g1,
                                  sys.g * mech.z0, mech.omega_m});
    const int steps = std::max(256, static_cast<int>(std::ceil(period * rate * 40.0)));
    const double h = period / steps;
    const cplx self1 = -(kI * sys.delta + sys.d1);
    const cplx self2 = -(kI * sys.delta + sys.d2);
    const cplx hop = -kI * sys.g1;
    const double drive = sys.g * mech.z0;
    using State = std::array<cplx, 2>;
    auto rhs = [&](double t, const State& y) -> State {
        const cplx mod = -kI * (drive * std::cos(mech.omega_m * t));
        return {(self1 + mod) * y[0] + hop * y[1], self2 * y[1] + hop * y[0]};
    };
    auto axpy = [](const State& y, double s, const State& k) -> State { return {y[0] + s * k[0], y[1] + s * k[1]}; };

    std::array<State, 2> cols{State{cplx{1.0}, cplx{}}, State{cplx{}, cplx{1.0}}};
    for (auto& y : cols) {
        for (int k = 0; k < steps; ++k) {
            const double t = k * h;
            const auto k1 = rhs(t, y);
            const auto k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1));
            const auto k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2));
            const auto k4 = rhs(t + h, axpy(y, h, k3));
            for (int i = 0; i < 2; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    // Eigenvalues of [[m00, m01], [m10, m11]] with columns cols[0], cols[1].
    const cplx tr = cols[0][0] + cols[1][1];
    const cplx det = cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1];
    const cplx root = std::sqrt(tr * tr - 4.0 * det);
    return std::max(std::abs(0.5 * (tr + root)), std::abs(0.5 * (tr - root)));
}

namespace detail
{
inline void require_floquet_stable(const CoupledModeSystem& sys, const MechanicalMode& mech, const char* where)
{
    if (sys.g * mech.z0 == 0.0) return;
    const double radius = floquet_radius(sys, mech);
    if (!(radius < 1.0)) {
        std::ostringstream os;
        os.precision(6);
        os << where << ": no steady state, parametric instability under modulation (Floquet multiplier "
           << radius << ", growth rate " << std::log(radius) * mech.omega_m / (2.0 * std::numbers::pi) << " MHz)";
        throw InstabilityError(os.str());
    }
}
} // namespace detail

/// Solves the truncated Fourier recurrence of the equations of motion with
/// a(t) = sum a_n exp(-i n omega_m t):
///   (-i n w_m + i delta + d1) a_n + i g1 c_n + i (g z0 / 2)(a_{n-1} + a_{n+1}) = eps delta_{n0}
///   (-i n w_m + i delta + d2) c_n + i g1 a_n = 0
/// c_n is eliminated, leaving a tridiagonal system in a_n.
inline SidebandLadder sideband_ladder(const CoupledModeSystem& sys, const MechanicalMode& mech, double eps,
                                      int order = kDefaultLadderOrder,
                                      ResponsePolicy policy = ResponsePolicy::require_stable)
{
    sys.validate();
    mech.validate();
    detail::require(order >= 2, "sideband_ladder: order must be >= 2");
    detail::require(std::isfinite(eps), "sideband_ladder: eps must be finite");
    if (policy == ResponsePolicy::require_stable) detail::require_stable(sys, "sideband_ladder");
    const double drive = sys.g * mech.z0;
    detail::require(drive < sys.g1 + std::abs(sys.chi()),
                    "sideband_ladder: g*z0 outside the weak-drive regime (g*z0 >= g1 + |chi|)");
    if (policy == ResponsePolicy::require_stable) detail::require_floquet_stable(sys, mech, "sideband_ladder");

    const auto size = static_cast<std::size_t>(2 * order + 1);
    Tridiagonal<cplx> m(size);
    std::vector<cplx> c_factor(size);
    const cplx hop = kI * (0.5 * drive);
    for (std::size_t k = 0; k < size; ++k) {
        const int n = static_cast<int>(k) - order;
        const double omega = n * mech.omega_m;
        const cplx den2 = detail::mode2_denominator(sys, omega);
        if (den2 == cplx{}) {
            detail::require(sys.g1 == 0.0, "sideband_ladder: mode 2 exactly resonant and undamped");
        }
        c_factor[k] = den2 == cplx{} ? cplx{} : -kI * sys.g1 / den2;
        m.diag[k] = kI * (sys.delta - omega) + sys.d1 + kI * sys.g1 * c_factor[k];
        if (k + 1 < size) {
            m.lower[k] = hop;
            m.upper[k] = hop;
        }
    }

    std::vector<cplx> rhs(size, cplx{});
    rhs[static_cast<std::size_t>(order)] = eps;

    SidebandLadder out;
    out.order = order;
    out.eps = eps;
    out.system = sys;
    out.mech = mech;
    try {
        out.a = solve_tridiagonal<cplx>(m, rhs);
    } catch (const std::domain_error& e) {
        throw Error(std::string("sideband_ladder: ") + e.what());
    }
    out.c.resize(size);
    for (std::size_t k = 0; k < size; ++k) out.c[k] = c_factor[k] * out.a[k];

    const double rhs_norm = l2_norm<cplx>(rhs);
    out.residual = rhs_norm > 0.0 ? residual_norm<cplx>(m, out.a, rhs) / rhs_norm : 0.0;
    if (!(out.residual < kLadderResidualTol)) {
        throw Error("sideband_ladder: residual " + std::to_string(out.residual) + " above tolerance");
    }
    const double edge = std::max(std::abs(out.a.front()), std::abs(out.a.back()));
    out.truncation_warning = std::abs(out.a[static_cast<std::size_t>(order)]) > 0.0 &&
                             edge > kTruncationWarnLevel * std::abs(out.a[static_cast<std::size_t>(order)]);
    return out;
}

// ---------------------------------------------------------------------------
// Spectra

enum class Normalization
{
    raw,
    peak_unit,
};

enum class ComponentKind
{
    background,
    sideband,
};

struct SpectrumComponent
{
    ComponentKind kind = ComponentKind::background;
    int order = 0;
    std::vector<double> values;

    std::string label() const
    {
        return kind == ComponentKind::background ? "BACKGROUND" : "SIDEBAND(" + std::to_string(order) + ")";
    }
};

struct SpectrumResult
{
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<SpectrumComponent> components;
    Normalization normalization = Normalization::raw;

    /// Sum of the sideband components (n != 0).
    std::vector<double> sideband_total() const
    {
        std::vector<double> out(grid.size(), 0.0);
        for (const auto& comp : components) {
            if (comp.kind != ComponentKind::sideband) continue;
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += comp.values[i];
        }
        return out;
    }
};

/// `count` evenly spaced points covering [lo, hi] inclusive.
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t count)
{
    detail::require(count >= 2, "uniform_grid: need at least two points");
    detail::require(std::isfinite(lo) && std::isfinite(hi) && hi > lo, "uniform_grid: need lo < hi");
    std::vector<double> grid(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = lo + step * static_cast<double>(i);
    grid.back() = hi;
    return grid;
}

inline constexpr std::size_t kDefaultGridPoints = 16001;

namespace detail
{
inline void require_increasing(std::span<const double> grid, const char* where)
{
    require(!grid.empty(), std::string(where) + ": empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        require(std::isfinite(grid[i]), std::string(where) + ": grid values must be finite");
        if (i > 0) require(grid[i] > grid[i - 1], std::string(where) + ": grid must be strictly increasing");
    }
}

inline void normalize_peak(SpectrumResult& spec)
{
    const double peak = spec.values.empty() ? 0.0 : *std::max_element(spec.values.begin(), spec.values.end());
    if (peak > 0.0) {
        for (auto& v : spec.values) v /= peak;
        for (auto& comp : spec.components)
            for (auto& v : comp.values) v /= peak;
    }
    spec.normalization = Normalization::peak_unit;
}
} // namespace detail

/// Mode-1 steady-state response to a probe at offset omega with the DUT
/// decoupled: a0 = eps / [i(delta - omega) + d1 + g1^2 / (i(delta - omega) + d2)].
inline cplx probe_response(const CoupledModeSystem& sys, double omega, double eps = 1.0)
{
    const cplx den2 = detail::mode2_denominator(sys, omega);
    const cplx self = kI * (sys.delta - omega) + sys.d1;
    const cplx den = den2 == cplx{} ? cplx{std::numeric_limits<double>::infinity()} : self + sys.g1 * sys.g1 / den2;
    return eps / den;
}

/// |a0(omega)|^2 normalized to unit peak.
inline SpectrumResult background_spectrum(const CoupledModeSystem& sys, std::span<const double> grid)
{
    sys.validate();
    detail::require_increasing(grid, "background_spectrum");
    detail::require_stable(sys, "background_spectrum");

    SpectrumResult out;
    out.grid.assign(grid.begin(), grid.end());
    out.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] = std::norm(probe_response(sys, grid[i]));
    out.components.push_back({ComponentKind::background, 0, out.values});
    detail::normalize_peak(out);
    return out;
}

inline double lorentzian(double x, double centre, double half_width)
{
    const double dx = x - centre;
    return half_width / (std::numbers::pi * (dx * dx + half_width * half_width));
}

/// Renders each ladder line n as |a_n|^2 times a unit-area Lorentzian at
/// n omega_m with half-width Gamma_bg + |n| gamma_m, Gamma_bg being the decay
/// rate of the least-damped supermode.
inline SpectrumResult composite_spectrum(const SidebandLadder& ladder, const CoupledModeSystem& sys,
                                         const MechanicalMode& mech, std::span<const double> grid)
{
    detail::require(ladder.system == sys && ladder.mech == mech,
                    "composite_spectrum: ladder was solved for a different system");
    detail::require_increasing(grid, "composite_spectrum");
    const auto dec = decompose(sys);
    const double gamma_bg = std::min(dec.decay_plus(), dec.decay_minus());
    detail::require(gamma_bg > 0.0, "composite_spectrum: least-damped supermode must decay");

    SpectrumResult out;
    out.grid.assign(grid.begin(), grid.end());
    out.values.assign(grid.size(), 0.0);
    for (int n = -ladder.order; n <= ladder.order; ++n) {
        SpectrumComponent comp;
        comp.kind = n == 0 ? ComponentKind::background : ComponentKind::sideband;
        comp.order = n;
        comp.values.resize(grid.size());
        const double weight = ladder.power(n);
        const double width = gamma_bg + std::abs(n) * mech.gamma_m;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            comp.values[i] = weight * lorentzian(grid[i], n * mech.omega_m, width);
        }
        out.components.push_back(std::move(comp));
    }
    // Accumulate in a fixed order so the total is reproducible bit for bit.
    for (const auto& comp : out.components)
        for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] += comp.values[i];
    detail::normalize_peak(out);
    return out;
}

/// Sideband contrast |a_1/a_0|^2 of `sys` divided by that of its
/// single-cavity reference (same d1, g, z0, omega_m). Independent of eps.
inline double amplification_factor(const CoupledModeSystem& sys, const MechanicalMode& mech, double eps = 1.0,
                                   int order = kDefaultLadderOrder,
                                   ResponsePolicy policy = ResponsePolicy::require_stable)
{
    if (policy == ResponsePolicy::require_stable) detail::require_stable(sys, "amplification_factor");
    const auto reference = sideband_ladder(single_cavity_reference(sys), mech, eps, order);
    const double ref_contrast = reference.contrast(1);
    if (!(ref_contrast >= 1e-300)) {
        throw DegenerateError("amplification_factor: reference sideband vanishes (g*z0 = 0?)");
    }
    const auto ladder = sideband_ladder(sys, mech, eps, order, policy);
    return ladder.contrast(1) / ref_contrast;
}

// ---------------------------------------------------------------------------
// Peak analysis

struct Peak
{
    double position = 0.0;
    double height = 0.0;
    double fwhm = 0.0; // NaN when a half-maximum crossing is not reached
};

inline constexpr double kDefaultProminence = 1e-3;
inline constexpr double kMinPointsPerPeak = 5.0;

/// Local maxima whose topographic prominence exceeds `prominence` times the
/// global maximum. Positions and heights are refined by a three-point
/// parabola; the FWHM uses linear interpolation of the half-height crossings.
inline std::vector<Peak> peak_analysis(const SpectrumResult& spec, double prominence = kDefaultProminence)
{
    const auto& x = spec.grid;
    const auto& y = spec.values;
    detail::require(x.size() == y.size(), "peak_analysis: grid/value size mismatch");
    detail::require(prominence >= 0.0, "peak_analysis: prominence must be >= 0");
    std::vector<Peak> peaks;
    const std::size_t n = y.size();
    if (n < 3) return peaks;
    const double ymax = *std::max_element(y.begin(), y.end());

    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;

        // Lowest point on each side before reaching higher ground.
        double left_min = y[i];
        for (std::size_t j = i; j-- > 0;) {
            if (y[j] > y[i]) break;
            left_min = std::min(left_min, y[j]);
        }
        double right_min = y[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            if (y[j] > y[i]) break;
            right_min = std::min(right_min, y[j]);
        }
        if (y[i] - std::max(left_min, right_min) < prominence * ymax) continue;

        Peak p;
        const double ym = y[i - 1], y0 = y[i], yp = y[i + 1];
        const double curv = ym - 2.0 * y0 + yp;
        const double step = 0.5 * (x[i + 1] - x[i - 1]);
        double shift = curv != 0.0 ? 0.5 * (ym - yp) / curv : 0.0;
        shift = std::clamp(shift, -0.5, 0.5);
        p.position = x[i] + shift * step;
        p.height = y0 - 0.25 * (ym - yp) * shift;

        const double half = 0.5 * p.height;
        double lo = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t j = i; j-- > 0;) {
            if (y[j] < half) {
                lo = x[j] + (half - y[j]) * (x[j + 1] - x[j]) / (y[j + 1] - y[j]);
                break;
            }
            if (y[j] > y[j + 1]) break; // climbed into a neighbour first
        }
        double hi = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t j = i + 1; j < n; ++j) {
            if (y[j] < half) {
                hi = x[j - 1] + (y[j - 1] - half) * (x[j] - x[j - 1]) / (y[j - 1] - y[j]);
                break;
            }
            if (y[j] > y[j - 1]) break;
        }
        p.fwhm = hi - lo;
        if (std::isfinite(p.fwhm) && p.fwhm < kMinPointsPerPeak * step) {
            throw ResolutionError("peak_analysis: peak at " + std::to_string(p.position) + " spans fewer than " +
                                  std::to_string(static_cast<int>(kMinPointsPerPeak)) + " grid points");
        }
        peaks.push_back(p);
    }
    return peaks;
}
} // namespace ptcam
