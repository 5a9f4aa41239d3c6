#pragma once

// Self-check entry point: time-domain vs frequency-domain cross-validation on
// a matrix derived from the run configuration, plus randomized invariant
// checks of the closed forms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "config.hpp"
#include "dynamics.hpp"
#include "format.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "sensitivity.hpp"
#include "spectrum.hpp"

namespace ptcam
{
struct Finding
{
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport
{
    std::vector<Finding> findings;

    bool pass() const
    {
        return !findings.empty() &&
               std::all_of(findings.begin(), findings.end(), [](const Finding& f) { return f.pass; });
    }
};

struct CrossValidationCase
{
    std::string name;
    CoupledModeSystem sys;
    MechanicalMode mech;
};

/// Configuration system plus perturbations that stay inside the stable,
/// weak-drive regime.
inline std::vector<CrossValidationCase> cross_validation_matrix(const RunConfig& cfg)
{
    const auto base = cfg.model();
    const auto mech = cfg.mech();
    std::vector<CrossValidationCase> cases;
    cases.push_back({"config", base, mech});
    cases.push_back({"single_cavity", single_cavity_reference(base), mech});
    cases.push_back({"ep_partner", cfg.ep_partner(), mech});
    cases.push_back({"config_z0_x2", base, mech.with_z0(2.0 * mech.z0)});
    auto detuned = base;
    detuned.delta += 0.5 * mech.omega_m;
    cases.push_back({"config_detuned", detuned, mech});
    return cases;
}

inline Finding check_cross_validation(const RunConfig& cfg, const CrossValidationCase& c)
{
    Finding f;
    f.name = "cross_validation/" + c.name;
    CrossValidationConfig xv;
    xv.ladder_order = cfg.numerics.ladder_order;
    xv.fit_order = cfg.numerics.ladder_order;
    xv.integration.dt = cfg.numerics.dt;
    xv.integration.t_end = cfg.numerics.t_end;
    xv.integration.transient_factor = cfg.numerics.transient_factor;
    xv.tolerance = cfg.numerics.oracle_tol;
    try {
        const auto report = cross_validate(c.sys, c.mech, cfg.numerics.eps, xv);
        f.pass = report.pass;
        f.detail = "max relative deviation " + format_double(report.max_deviation()) + " (tol " +
                   format_double(xv.tolerance) + ")";
        if (report.truncation_warning) f.detail += ", ladder truncation warning";
    } catch (const StepSizeError& e) {
        f.detail = std::string("step-size: ") + e.what();
    } catch (const InstabilityError& e) {
        f.detail = std::string("instability: ") + e.what();
    } catch (const Error& e) {
        f.detail = e.what();
    }
    return f;
}

namespace detail
{
inline CoupledModeSystem random_system(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> rate(0.1, 50.0);
    std::uniform_real_distribution<double> signed_rate(-50.0, 50.0);
    std::uniform_real_distribution<double> detuning(-20.0, 20.0);
    return {detuning(rng), rate(rng), signed_rate(rng), rate(rng), rate(rng)};
}

inline double eigen_set_error(const CoupledModeSystem& sys, const SupermodeDecomposition& dec)
{
    Eigen::Matrix2cd m;
    m << cplx(sys.delta, -sys.d1), cplx(sys.g1, 0.0), cplx(sys.g1, 0.0), cplx(sys.delta, -sys.d2);
    const Eigen::Vector2cd ev = Eigen::ComplexEigenSolver<Eigen::Matrix2cd>(m, false).eigenvalues();
    const double scale = std::max({std::abs(ev(0)), std::abs(ev(1)), 1e-300});
    const double direct = std::max(std::abs(ev(0) - dec.omega_plus), std::abs(ev(1) - dec.omega_minus));
    const double swapped = std::max(std::abs(ev(1) - dec.omega_plus), std::abs(ev(0) - dec.omega_minus));
    return std::min(direct, swapped) / scale;
}
} // namespace detail

inline Finding check_eigen_oracle(std::uint64_t seed, int draws)
{
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int i = 0; i < draws; ++i) {
        const auto sys = detail::random_system(rng);
        worst = std::max(worst, detail::eigen_set_error(sys, decompose(sys)));
    }
    return {"invariant/eigen_oracle", worst <= 1e-10, "max relative error " + format_double(worst)};
}

inline Finding check_heisenberg(const RunConfig& cfg, std::uint64_t seed, int draws)
{
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    int used = 0;
    auto sp = cfg.sensitivity_params();
    while (used < draws) {
        const auto sys = detail::random_system(rng);
        const auto dec = decompose(sys);
        if (!dec.stable || !std::isfinite(dec.g_eff) || sys.g <= 0.0) continue;
        for (const auto mode : {BracketMode::dimensional, BracketMode::as_printed}) {
            sp.bracket = mode;
            const double prod = heisenberg_product(dec, sp, cfg.mechanics.omega_m);
            const double target = 0.25 * sp.hbar * sp.hbar;
            worst = std::max(worst, std::abs(prod - target) / target);
        }
        ++used;
    }
    return {"invariant/heisenberg", worst <= 1e-12, "max relative deviation " + format_double(worst)};
}

inline Finding check_eps_independence(const RunConfig& cfg)
{
    Finding f{"invariant/amplification_eps_independence", false, {}};
    try {
        const auto sys = cfg.model();
        const auto mech = cfg.mech();
        const double a1 = amplification_factor(sys, mech, cfg.numerics.eps, cfg.numerics.ladder_order);
        const double a2 = amplification_factor(sys, mech, 2.0 * cfg.numerics.eps, cfg.numerics.ladder_order);
        const double dev = std::abs(a2 - a1) / std::abs(a1);
        f.pass = dev < 1e-10;
        f.detail = "relative change " + format_double(dev);
    } catch (const Error& e) {
        f.detail = e.what();
    }
    return f;
}

inline Finding check_stability(const RunConfig& cfg)
{
    const auto dec = decompose(cfg.model(), cfg.numerics.transition_tol);
    if (dec.stable) {
        return {"config/stability", true, "stability margin " + format_double(dec.stability_margin) + " MHz"};
    }
    return {"config/stability", false, "amplifying supermode " + dec.amplifying_mode()};
}

inline ValidationReport run_validation(const RunConfig& cfg, unsigned threads = 1)
{
    ValidationReport report;
    report.findings.push_back(check_stability(cfg));

    const auto cases = cross_validation_matrix(cfg);
    std::vector<Finding> xv(cases.size());
    parallel_for(cases.size(), threads, [&](std::size_t i) { xv[i] = check_cross_validation(cfg, cases[i]); });
    report.findings.insert(report.findings.end(), xv.begin(), xv.end());

    constexpr std::uint64_t kSeed = 0x5eed0001;
    report.findings.push_back(check_eigen_oracle(kSeed, 10000));
    report.findings.push_back(check_heisenberg(cfg, kSeed + 1, 1000));
    report.findings.push_back(check_eps_independence(cfg));
    return report;
}
} // namespace ptcam
