#pragma once

// Two-mode non-Hermitian coupled-cavity model.
//
// Mode 1 (a) is the passive cavity that couples to the device under test,
// mode 2 (c) is either a gain cavity (d2 < 0, PT configuration) or a second
// lossy cavity (d2 >= 0, EP configuration). All rates are in MHz and are used
// directly as angular rates; time is therefore in microseconds.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace ptcam
{
using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

struct CoupledModeSystem
{
    double delta = 0.0; // common detuning from the drive
    double d1 = 20.0;   // damping of the passive, DUT-coupled mode (kappa)
    double d2 = -16.0;  // signed damping of mode 2: -gamma (gain) or kappa1 (loss)
    double g1 = 19.8;   // inter-mode coupling
    double g = 5.0;     // DUT coupling

    /// Gain cavity of rate gamma coupled to a lossy cavity of rate kappa.
    static CoupledModeSystem pt(double delta, double kappa, double gamma, double g1, double g)
    {
        return {delta, kappa, -gamma, g1, g};
    }

    /// Two lossy cavities, kappa on the DUT side and kappa1 on the other.
    static CoupledModeSystem ep(double delta, double kappa, double kappa1, double g1, double g)
    {
        return {delta, kappa, kappa1, g1, g};
    }

    double chi() const { return 0.5 * (d1 + d2); } // mean damping
    double dlt() const { return 0.5 * (d1 - d2); } // damping contrast
    bool has_gain() const { return d2 < 0.0; }

    CoupledModeSystem with_g1(double value) const
    {
        auto copy = *this;
        copy.g1 = value;
        return copy;
    }

    CoupledModeSystem scaled(double s) const { return {s * delta, s * d1, s * d2, s * g1, s * g}; }

    void validate() const
    {
        const bool finite = std::isfinite(delta) && std::isfinite(d1) && std::isfinite(d2) &&
                            std::isfinite(g1) && std::isfinite(g);
        detail::require(finite, "CoupledModeSystem: all rates must be finite");
        detail::require(d1 > 0.0, "CoupledModeSystem: d1 must be > 0");
        detail::require(g1 >= 0.0, "CoupledModeSystem: g1 must be >= 0");
        detail::require(g >= 0.0, "CoupledModeSystem: g must be >= 0");
    }

    bool operator==(const CoupledModeSystem&) const = default;
};

/// The same passive cavity with mode 2 decoupled. Mode 2 is made passive
/// (d2 = d1) so the reference never reports a spurious bare-gain instability.
inline CoupledModeSystem single_cavity_reference(const CoupledModeSystem& sys)
{
    return {sys.delta, sys.d1, sys.d1, 0.0, sys.g};
}

enum class Phase
{
    pt_symmetric,
    broken,
    transition,
};

inline std::string_view to_string(Phase p)
{
    switch (p) {
    case Phase::pt_symmetric: return "PT_SYMMETRIC";
    case Phase::broken: return "BROKEN";
    case Phase::transition: return "TRANSITION";
    }
    return "?";
}

inline constexpr double kDefaultTransitionTol = 1e-9;

struct SupermodeDecomposition
{
    cplx omega_plus;
    cplx omega_minus;
    cplx beta;
    double chi = 0.0;
    double dlt = 0.0;
    Phase phase = Phase::pt_symmetric;
    bool stable = false;
    double stability_margin = 0.0;
    double g_eff = 0.0; // +inf at the exact transition

    double decay_plus() const { return -omega_plus.imag(); }
    double decay_minus() const { return -omega_minus.imag(); }
    double freq_plus() const { return omega_plus.real(); }
    double freq_minus() const { return omega_minus.real(); }

    /// The supermode with the smallest decay rate; ties go to omega_minus.
    cplx least_damped() const { return decay_plus() < decay_minus() ? omega_plus : omega_minus; }

    /// Name of an amplifying supermode, for diagnostics. Empty when stable.
    std::string amplifying_mode() const
    {
        std::ostringstream os;
        os.precision(6);
        if (decay_plus() <= 0.0) os << "omega_plus (Gamma_plus = " << decay_plus() << " MHz)";
        if (decay_minus() <= 0.0) {
            if (os.tellp() > 0) os << ", ";
            os << "omega_minus (Gamma_minus = " << decay_minus() << " MHz)";
        }
        return os.str();
    }
};

namespace detail
{
// g1^2 - dlt^2 factored to avoid cancellation near the transition.
inline double coupling_discriminant(double g1, double dlt)
{
    return (g1 - dlt) * (g1 + dlt);
}
} // namespace detail

/// g / (2 sqrt|g1^2 - dlt^2|). Dimensionless and scale invariant.
inline double effective_coupling(const CoupledModeSystem& sys)
{
    sys.validate();
    const double dlt = sys.dlt();
    const double disc = detail::coupling_discriminant(sys.g1, dlt);
    const double scale = std::max(sys.g1 * sys.g1, dlt * dlt);
    if (disc == 0.0 || std::abs(disc) < std::numeric_limits<double>::epsilon() * scale) {
        throw TransitionSingularity("effective_coupling: g1 = |dlt| = " + std::to_string(std::abs(dlt)) +
                                    ", effective coupling diverges");
    }
    return sys.g / (2.0 * std::sqrt(std::abs(disc)));
}

/// Eigenfrequencies omega_pm = delta - i chi +- beta of the 2x2 model, with
/// beta on the principal branch (Re beta >= 0, Im beta >= 0 when Re beta = 0).
/// omega_plus is therefore the higher-frequency mode in the PT-symmetric phase
/// and the less damped one in the broken phase.
inline SupermodeDecomposition decompose(const CoupledModeSystem& sys, double tol = kDefaultTransitionTol)
{
    sys.validate();
    detail::require(tol > 0.0 && tol <= 1e-2, "decompose: tol must lie in (0, 1e-2]");

    SupermodeDecomposition out;
    out.chi = sys.chi();
    out.dlt = sys.dlt();
    // +0.0 imaginary part selects +i sqrt(.) for a negative discriminant.
    out.beta = std::sqrt(cplx(detail::coupling_discriminant(sys.g1, out.dlt), 0.0));
    const cplx centre(sys.delta, -out.chi);
    out.omega_plus = centre + out.beta;
    out.omega_minus = centre - out.beta;
    if (sys.g1 == 0.0) {
        // Bare cavity rates, free of the chi +- dlt rounding.
        out.omega_plus = cplx(sys.delta, -std::min(sys.d1, sys.d2));
        out.omega_minus = cplx(sys.delta, -std::max(sys.d1, sys.d2));
    }

    const double threshold = std::abs(out.dlt);
    if (std::abs(sys.g1 - threshold) <= tol * std::max({sys.g1, threshold, 1.0})) {
        out.phase = Phase::transition;
    } else {
        out.phase = sys.g1 > threshold ? Phase::pt_symmetric : Phase::broken;
    }

    out.stability_margin = std::min(out.decay_plus(), out.decay_minus());
    out.stable = out.decay_plus() > 0.0 && out.decay_minus() > 0.0;

    try {
        out.g_eff = effective_coupling(sys);
    } catch (const TransitionSingularity&) {
        out.g_eff = std::numeric_limits<double>::infinity();
    }
    return out;
}

/// Coupling at which the two eigenfrequencies coalesce: (d1 - d2)/2, i.e.
/// Gamma for a gain-loss pair and (kappa - kappa1)/2 for two lossy cavities.
inline double ep_threshold(const CoupledModeSystem& sys)
{
    sys.validate();
    return std::abs(sys.dlt());
}

/// 4 gamma^2 (kappa + kappa1) / (kappa - gamma)^3: amplification of the
/// gain-loss system relative to the two-lossy-cavity system.
inline double pt_ep_amplification_ratio(double kappa, double gamma, double kappa1)
{
    detail::require(std::isfinite(kappa) && std::isfinite(gamma) && std::isfinite(kappa1),
                    "pt_ep_amplification_ratio: rates must be finite");
    detail::require(gamma > 0.0, "pt_ep_amplification_ratio: gamma must be > 0");
    detail::require(kappa1 >= 0.0, "pt_ep_amplification_ratio: kappa1 must be >= 0");
    if (gamma == kappa) {
        throw BalancedGainError("pt_ep_amplification_ratio: gamma == kappa, ratio diverges");
    }
    detail::require(kappa > gamma, "pt_ep_amplification_ratio: requires kappa > gamma");
    const double gap = kappa - gamma;
    return 4.0 * gamma * gamma * (kappa + kappa1) / (gap * gap * gap);
}
} // namespace ptcam
