#pragma once

// Figure-data pipelines. Each returns the CSV table (fixed header) plus a
// short list of summary metrics; nothing here touches the filesystem.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "sensitivity.hpp"
#include "spectrum.hpp"

namespace ptcam
{
struct Summary
{
    std::vector<std::pair<std::string, std::string>> entries;

    void add(std::string key, double value) { entries.emplace_back(std::move(key), format_double(value)); }
    void add(std::string key, std::string value) { entries.emplace_back(std::move(key), std::move(value)); }
    void add(std::string key, bool value) { entries.emplace_back(std::move(key), value ? "true" : "false"); }

    const std::string* find(std::string_view key) const
    {
        for (const auto& [k, v] : entries)
            if (k == key) return &v;
        return nullptr;
    }
};

struct FigureData
{
    std::string id;
    CsvTable table;
    Summary summary;
};

inline constexpr std::string_view kFigureIds[] = {"fig1c", "fig1d", "fig2b", "fig2c"};

namespace detail
{
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Status string for a per-point failure.
inline std::string classify(const std::exception_ptr& ex)
{
    try {
        std::rethrow_exception(ex);
    } catch (const InstabilityError&) {
        return "unstable";
    } catch (const TransitionSingularity&) {
        return "singular";
    } catch (const DegenerateError&) {
        return "degenerate";
    } catch (const InvalidParameter&) {
        return "invalid";
    } catch (...) {
        return "failed";
    }
}
} // namespace detail

/// A along g1 = x * threshold. Unstable points are marked, never valued.
struct AmplificationSweep
{
    std::vector<double> x;
    std::vector<double> value;
    std::vector<std::string> status;
};

inline AmplificationSweep amplification_sweep(const CoupledModeSystem& sys, const MechanicalMode& mech, double eps,
                                              int order, std::span<const double> grid, unsigned threads = 1)
{
    const double threshold = ep_threshold(sys);
    detail::require(threshold > 0.0, "amplification_sweep: zero threshold");
    AmplificationSweep out;
    out.x.assign(grid.begin(), grid.end());
    out.value.assign(grid.size(), detail::kNaN);
    out.status.assign(grid.size(), "ok");
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        try {
            out.value[i] = amplification_factor(sys.with_g1(grid[i] * threshold), mech, eps, order);
        } catch (const Error&) {
            out.status[i] = detail::classify(std::current_exception());
        }
    });
    return out;
}

inline FigureData reproduce_fig1c(const RunConfig& cfg, unsigned threads = 1)
{
    const auto sys = cfg.model();
    const auto mech = cfg.mech();
    const auto grid = cfg.sweep_grid();
    const auto sweep = amplification_sweep(sys, mech, cfg.numerics.eps, cfg.numerics.ladder_order, grid, threads);

    FigureData fig;
    fig.id = "fig1c";
    fig.table.header = {"g1_over_Gamma", "A", "status"};
    std::size_t best = grid.size();
    std::size_t stable = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        fig.table.rows.push_back({grid[i], sweep.value[i], sweep.status[i]});
        if (sweep.status[i] != "ok") continue;
        ++stable;
        if (best == grid.size() || sweep.value[i] > sweep.value[best]) best = i;
    }

    fig.summary.add("stable_points", static_cast<double>(stable));
    if (best < grid.size()) {
        fig.summary.add("peak_g1_over_Gamma", grid[best]);
        fig.summary.add("peak_A", sweep.value[best]);
        fig.summary.add("peak_offset_from_transition", std::abs(grid[best] - 1.0));
        // The sweep start may sit in the amplifying regime; its A is the
        // formal frequency-domain response, reported only as a reference.
        try {
            const double start = amplification_factor(sys.with_g1(grid.front() * ep_threshold(sys)), mech,
                                                      cfg.numerics.eps, cfg.numerics.ladder_order,
                                                      ResponsePolicy::formal);
            fig.summary.add("A_at_sweep_start_formal", start);
            fig.summary.add("growth_peak_over_start", sweep.value[best] / start);
        } catch (const Error& e) {
            fig.summary.add("A_at_sweep_start_formal", std::string("unavailable: ") + e.what());
        }
    }
    return fig;
}

inline FigureData reproduce_fig1d(const RunConfig& cfg, unsigned /*threads*/ = 1)
{
    const auto sys = cfg.model();
    const double kappa = cfg.system.kappa;
    const auto grid = uniform_grid(-3.0 * kappa, 3.0 * kappa, static_cast<std::size_t>(cfg.numerics.grid_points));
    const auto single = background_spectrum(single_cavity_reference(sys), grid);
    const auto broken_sys = sys.with_g1(cfg.figures.fig1d_broken_g1);
    const auto broken = background_spectrum(broken_sys, grid);
    const auto ptsym = background_spectrum(sys, grid);

    FigureData fig;
    fig.id = "fig1d";
    fig.table.header = {"omega", "S_single", "S_broken", "S_ptsym"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        fig.table.rows.push_back({grid[i], single.values[i], broken.values[i], ptsym.values[i]});
    }

    const auto dec = decompose(sys);
    fig.summary.add("ptsym_phase", std::string(to_string(dec.phase)));
    fig.summary.add("ptsym_expected_peaks", format_double(dec.freq_minus()) + " " + format_double(dec.freq_plus()));
    std::string positions, widths;
    for (const auto& p : peak_analysis(ptsym)) {
        positions += (positions.empty() ? "" : " ") + format_double(p.position);
        widths += (widths.empty() ? "" : " ") + format_double(p.fwhm);
    }
    fig.summary.add("ptsym_peak_positions", positions);
    fig.summary.add("ptsym_peak_fwhm", widths);
    fig.summary.add("ptsym_expected_fwhm", 2.0 * dec.chi);

    const auto broken_peaks = peak_analysis(broken);
    fig.summary.add("broken_g1", cfg.figures.fig1d_broken_g1);
    fig.summary.add("broken_phase", std::string(to_string(decompose(broken_sys).phase)));
    fig.summary.add("broken_peak_count", static_cast<double>(broken_peaks.size()));
    if (!broken_peaks.empty()) fig.summary.add("broken_fwhm", broken_peaks.front().fwhm);
    const auto single_peaks = peak_analysis(single);
    if (!single_peaks.empty()) fig.summary.add("single_fwhm", single_peaks.front().fwhm);
    return fig;
}

/// Peak prominence used for the composite spectrum: a higher-order sideband
/// riding on the tail of the first stands only ~5e-4 above the shared valley.
inline constexpr double kSidebandPeakProminence = 1e-4;

inline FigureData reproduce_fig2b(const RunConfig& cfg, unsigned /*threads*/ = 1)
{
    const auto sys = cfg.model();
    const auto mech = cfg.mech().with_z0(cfg.figures.fig2b_z0);
    const int order = cfg.figures.fig2b_ladder_order;
    const double eps = cfg.numerics.eps;
    const double wm = mech.omega_m;
    const auto grid = uniform_grid(-4.0 * wm, 4.0 * wm, static_cast<std::size_t>(cfg.numerics.grid_points));

    const auto ref_sys = single_cavity_reference(sys);
    const auto ep_sys = cfg.ep_partner();
    const auto pt_ladder = sideband_ladder(sys, mech, eps, order);
    const auto single_ladder = sideband_ladder(ref_sys, mech, eps, order);
    const auto ep_ladder = sideband_ladder(ep_sys, mech, eps, order);
    const auto pt = composite_spectrum(pt_ladder, sys, mech, grid);
    const auto single = composite_spectrum(single_ladder, ref_sys, mech, grid);
    const auto ep = composite_spectrum(ep_ladder, ep_sys, mech, grid);

    FigureData fig;
    fig.id = "fig2b";
    fig.table.header = {"omega_over_omegam", "S_pt", "S_single", "S_ep"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        fig.table.rows.push_back({grid[i] / wm, pt.values[i], single.values[i], ep.values[i]});
    }

    fig.summary.add("z0", mech.z0);
    fig.summary.add("contrast_pt", pt_ladder.contrast(1));
    fig.summary.add("contrast_single", single_ladder.contrast(1));
    fig.summary.add("contrast_ep", ep_ladder.contrast(1));
    fig.summary.add("contrast_ratio_pt_over_single", pt_ladder.contrast(1) / single_ladder.contrast(1));
    fig.summary.add("truncation_warning", pt_ladder.truncation_warning || single_ladder.truncation_warning ||
                                              ep_ladder.truncation_warning);
    std::string positions, heights;
    for (const auto& p : peak_analysis(pt, kSidebandPeakProminence)) {
        if (p.position < -0.5 * wm) continue;
        positions += (positions.empty() ? "" : " ") + format_double(p.position / wm);
        heights += (heights.empty() ? "" : " ") + format_double(p.height);
    }
    fig.summary.add("pt_peak_positions_over_omegam", positions);
    fig.summary.add("pt_peak_heights", heights);
    return fig;
}

inline std::string combined_status(PointStatus pt, PointStatus ep)
{
    if (pt == PointStatus::ok && ep == PointStatus::ok) return "ok";
    std::string s;
    if (pt != PointStatus::ok) s += "pt_" + std::string(to_string(pt));
    if (ep != PointStatus::ok) s += (s.empty() ? "" : ";") + std::string("ep_") + std::string(to_string(ep));
    return s;
}

inline FigureData reproduce_fig2c(const RunConfig& cfg, unsigned /*threads*/ = 1)
{
    const auto grid = cfg.sweep_grid();
    const auto curve =
        sensitivity_ratio_sweep(cfg.model(), cfg.ep_partner(), cfg.mech(), cfg.sensitivity_params(), grid);

    FigureData fig;
    fig.id = "fig2c";
    fig.table.header = {"g1_over_threshold", "ratio_pt", "ratio_ep", "status"};
    double min_pt = detail::kNaN, min_ep = detail::kNaN, min_pt_x = detail::kNaN;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        fig.table.rows.push_back(
            {grid[i], curve.ratio_pt[i], curve.ratio_ep[i], combined_status(curve.status_pt[i], curve.status_ep[i])});
        if (curve.status_pt[i] == PointStatus::ok && !(curve.ratio_pt[i] >= min_pt)) {
            min_pt = curve.ratio_pt[i];
            min_pt_x = grid[i];
        }
        if (curve.status_ep[i] == PointStatus::ok && !(curve.ratio_ep[i] >= min_ep)) min_ep = curve.ratio_ep[i];
    }
    fig.summary.add("min_ratio_pt", min_pt);
    fig.summary.add("min_ratio_pt_at", min_pt_x);
    fig.summary.add("min_ratio_ep", min_ep);
    fig.summary.add("min_ratio_pt_below_1e-2", min_pt < 1e-2);
    fig.summary.add("min_ratio_pt_below_min_ratio_ep", min_pt < min_ep);
    return fig;
}

inline FigureData reproduce(std::string_view id, const RunConfig& cfg, unsigned threads = 1)
{
    if (id == "fig1c") return reproduce_fig1c(cfg, threads);
    if (id == "fig1d") return reproduce_fig1d(cfg, threads);
    if (id == "fig2b") return reproduce_fig2b(cfg, threads);
    if (id == "fig2c") return reproduce_fig2c(cfg, threads);
    throw InvalidParameter("reproduce: unknown figure id \"" + std::string(id) + "\"");
}
} // namespace ptcam
