#pragma once

// Closed-form displacement / back-action force spectral densities and the
// PT-vs-EP-vs-single-cavity sensitivity sweep.
//
// Absolute S_xx and S_FF values carry the formula's natural units (hbar in
// J s, rates in MHz, P_in in W) and have no zero-point displacement scale;
// only ratios between configurations are meaningful.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "spectrum.hpp"

namespace ptcam
{
enum class BracketMode
{
    dimensional, // 1 + 4 w^2 / Gamma^2
    as_printed,  // 1 + 4 w / Gamma^2
};

inline std::string_view to_string(BracketMode m)
{
    return m == BracketMode::dimensional ? "dimensional" : "as_printed";
}

inline constexpr double kHbar = 1.054571817e-34;
// 2 pi c / 1550 nm expressed in rad/us ("MHz" in the library's units).
inline constexpr double kCarrier1550 = 2.0 * std::numbers::pi * 299792458.0 / 1550e-9 * 1e-6;

struct SensitivityParams
{
    double p_in = 1e-3;
    double omega0 = kCarrier1550;
    double hbar = kHbar;
    BracketMode bracket = BracketMode::dimensional;

    void validate() const
    {
        detail::require(std::isfinite(p_in) && p_in > 0.0, "SensitivityParams: P_in must be > 0");
        detail::require(std::isfinite(omega0) && omega0 > 0.0, "SensitivityParams: omega0 must be > 0");
        detail::require(std::isfinite(hbar) && hbar > 0.0, "SensitivityParams: hbar must be > 0");
    }
};

/// The three quantities the closed forms depend on.
struct ReadoutMode
{
    double decay = 0.0;     // Gamma_-
    double frequency = 0.0; // Omega_-, absolute
    double g_eff = 0.0;
};

/// Least-damped supermode of a decomposition, carrier-shifted.
inline ReadoutMode readout_mode(const SupermodeDecomposition& dec, const SensitivityParams& sp)
{
    if (!dec.stable) {
        throw InstabilityError("readout_mode: no steady state, amplifying supermode " + dec.amplifying_mode());
    }
    if (!std::isfinite(dec.g_eff)) {
        throw TransitionSingularity("readout_mode: g_eff diverges at the transition; S_xx -> 0 and S_FF -> inf");
    }
    detail::require(dec.g_eff > 0.0, "readout_mode: g_eff must be > 0 (g = 0?)");
    const cplx mode = dec.least_damped();
    return {-mode.imag(), sp.omega0 + mode.real(), dec.g_eff};
}

/// Uncoupled single-cavity convention: Gamma -> kappa, Omega -> omega0 + delta,
/// g_eff -> g / kappa.
inline ReadoutMode single_cavity_readout(const CoupledModeSystem& sys, const SensitivityParams& sp)
{
    sys.validate();
    detail::require(sys.g > 0.0, "single_cavity_readout: g must be > 0");
    return {sys.d1, sp.omega0 + sys.delta, sys.g / sys.d1};
}

namespace detail
{
inline double bracket(const ReadoutMode& m, BracketMode mode, double omega)
{
    const double gamma2 = m.decay * m.decay;
    const double value = mode == BracketMode::dimensional ? 1.0 + 4.0 * omega * omega / gamma2
                                                          : 1.0 + 4.0 * omega / gamma2;
    require(value > 0.0 && std::isfinite(value), "spectral density: bracket term must be positive");
    return value;
}

inline void check_readout(const ReadoutMode& m)
{
    require(m.decay > 0.0 && std::isfinite(m.decay), "spectral density: Gamma_- must be > 0");
    require(m.frequency > 0.0 && std::isfinite(m.frequency), "spectral density: Omega_- must be > 0");
    require(m.g_eff > 0.0 && std::isfinite(m.g_eff), "spectral density: g_eff must be finite and > 0");
}
} // namespace detail

/// Gamma^2 hbar Omega / (64 g_eff^2 P_in) * bracket
inline double displacement_psd(const ReadoutMode& m, const SensitivityParams& sp, double omega)
{
    sp.validate();
    detail::check_readout(m);
    return m.decay * m.decay * sp.hbar * m.frequency / (64.0 * m.g_eff * m.g_eff * sp.p_in) *
           detail::bracket(m, sp.bracket, omega);
}

/// 16 hbar g_eff^2 P_in / (Gamma^2 Omega) / bracket
inline double force_psd(const ReadoutMode& m, const SensitivityParams& sp, double omega)
{
    sp.validate();
    detail::check_readout(m);
    return 16.0 * sp.hbar * m.g_eff * m.g_eff * sp.p_in / (m.decay * m.decay * m.frequency) /
           detail::bracket(m, sp.bracket, omega);
}

inline double displacement_psd(const SupermodeDecomposition& dec, const SensitivityParams& sp, double omega)
{
    return displacement_psd(readout_mode(dec, sp), sp, omega);
}

inline double force_psd(const SupermodeDecomposition& dec, const SensitivityParams& sp, double omega)
{
    return force_psd(readout_mode(dec, sp), sp, omega);
}

/// S_xx * S_FF; the closed forms saturate hbar^2 / 4.
inline double heisenberg_product(const SupermodeDecomposition& dec, const SensitivityParams& sp, double omega)
{
    const auto m = readout_mode(dec, sp);
    return displacement_psd(m, sp, omega) * force_psd(m, sp, omega);
}

// ---------------------------------------------------------------------------

enum class PointStatus
{
    ok,
    unstable,
    singular,
};

inline std::string_view to_string(PointStatus s)
{
    switch (s) {
    case PointStatus::ok: return "ok";
    case PointStatus::unstable: return "unstable";
    case PointStatus::singular: return "singular";
    }
    return "?";
}

struct SensitivityCurve
{
    std::vector<double> sweep_values; // g1 / threshold of the PT system
    std::vector<double> s_xx_pt;
    std::vector<double> s_xx_single;
    std::vector<double> s_xx_ep;
    std::vector<double> ratio_pt;
    std::vector<double> ratio_ep;
    std::vector<PointStatus> status_pt;
    std::vector<PointStatus> status_ep;
    std::vector<std::string> notes; // explanation for non-ok points, empty otherwise
};

namespace detail
{
struct PsdPoint
{
    double value = std::numeric_limits<double>::quiet_NaN();
    PointStatus status = PointStatus::ok;
    std::string note;
};

inline PsdPoint guarded_psd(const CoupledModeSystem& sys, const SensitivityParams& sp, double omega)
{
    PsdPoint out;
    try {
        out.value = displacement_psd(decompose(sys), sp, omega);
    } catch (const InstabilityError& e) {
        out.status = PointStatus::unstable;
        out.note = e.what();
    } catch (const TransitionSingularity& e) {
        out.status = PointStatus::singular;
        out.note = e.what();
    }
    return out;
}
} // namespace detail

/// S_xx(omega_m) along g1 = x * threshold(pt_base) for the gain-loss system and
/// the two-lossy-cavity system at the same absolute g1, each divided by the
/// single-cavity baseline. Failed points carry NaN and a status, never a value.
inline SensitivityCurve sensitivity_ratio_sweep(const CoupledModeSystem& pt_base, const CoupledModeSystem& ep_base,
                                                const MechanicalMode& mech, const SensitivityParams& sp,
                                                std::span<const double> grid)
{
    pt_base.validate();
    ep_base.validate();
    mech.validate();
    sp.validate();
    detail::require(pt_base.d1 == ep_base.d1 && pt_base.g == ep_base.g,
                    "sensitivity_ratio_sweep: systems must share d1 and g");
    const double threshold = ep_threshold(pt_base);
    detail::require(threshold > 0.0, "sensitivity_ratio_sweep: PT system has zero threshold");

    const double omega = mech.omega_m;
    const double single = displacement_psd(single_cavity_readout(pt_base, sp), sp, omega);

    SensitivityCurve curve;
    curve.sweep_values.assign(grid.begin(), grid.end());
    for (const double x : grid) {
        detail::require(std::isfinite(x) && x >= 0.0, "sensitivity_ratio_sweep: grid values must be >= 0");
        const double g1 = x * threshold;
        const auto pt = detail::guarded_psd(pt_base.with_g1(g1), sp, omega);
        const auto ep = detail::guarded_psd(ep_base.with_g1(g1), sp, omega);
        curve.s_xx_pt.push_back(pt.value);
        curve.s_xx_ep.push_back(ep.value);
        curve.s_xx_single.push_back(single);
        curve.ratio_pt.push_back(pt.value / single);
        curve.ratio_ep.push_back(ep.value / single);
        curve.status_pt.push_back(pt.status);
        curve.status_ep.push_back(ep.status);
        std::string note = pt.note;
        if (!ep.note.empty()) note += (note.empty() ? "" : "; ") + ep.note;
        curve.notes.push_back(std::move(note));
    }
    return curve;
}
} // namespace ptcam
