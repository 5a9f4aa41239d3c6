// ptcam: command-line front end for the coupled-cavity metrology simulator.
//
// Exit codes: 0 success, 1 validation failure, 2 configuration error,
// 3 numeric failure (instability, divergence, singularity).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ptcam/ptcam.hpp"

namespace fs = std::filesystem;

namespace
{
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Options
{
    std::string config_path;
    std::string out_dir;
    unsigned threads = 1;
    std::uint64_t seed = 0; // reserved
};

ptcam::RunConfig load_config(const Options& opt)
{
    if (opt.config_path.empty()) return ptcam::parse_config("");
    std::ifstream in(opt.config_path);
    if (!in) throw ptcam::ConfigError("cannot read config file " + opt.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    return ptcam::parse_config(buf.str());
}

fs::path output_dir(const Options& opt, const ptcam::RunConfig& cfg)
{
    if (!opt.out_dir.empty()) return opt.out_dir;
    if (const char* env = std::getenv("PTCAM_OUT_DIR"); env && *env) return env;
    return cfg.output;
}

void write_csv(const fs::path& dir, const std::string& name, const ptcam::CsvTable& table)
{
    fs::create_directories(dir);
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    table.write(out);
    std::cout << "wrote " << path.string() << '\n';
}

void print_summary(const std::string& title, const ptcam::Summary& s)
{
    std::cout << "[" << title << "]\n";
    for (const auto& [k, v] : s.entries) std::cout << k << " = " << v << '\n';
}

int cmd_supermodes(const ptcam::RunConfig& cfg)
{
    using ptcam::format_double;
    auto show = [&](const char* title, const ptcam::CoupledModeSystem& sys) {
        const auto d = ptcam::decompose(sys, cfg.numerics.transition_tol);
        std::cout << "[" << title << "]\n"
                  << "omega_plus = " << format_double(d.omega_plus.real()) << " " << format_double(d.omega_plus.imag())
                  << "i\n"
                  << "omega_minus = " << format_double(d.omega_minus.real()) << " "
                  << format_double(d.omega_minus.imag()) << "i\n"
                  << "beta = " << format_double(d.beta.real()) << " " << format_double(d.beta.imag()) << "i\n"
                  << "chi = " << format_double(d.chi) << "\ndlt = " << format_double(d.dlt) << '\n'
                  << "threshold = " << format_double(ptcam::ep_threshold(sys)) << '\n'
                  << "phase = " << ptcam::to_string(d.phase) << '\n'
                  << "stable = " << (d.stable ? "true" : "false") << '\n'
                  << "stability_margin = " << format_double(d.stability_margin) << '\n'
                  << "g_eff = " << format_double(d.g_eff) << '\n';
    };
    show("system", cfg.model());
    show("ep_partner", cfg.ep_partner());
    return kExitOk;
}

int cmd_spectrum(const ptcam::RunConfig& cfg, const fs::path& dir, const std::string& kind)
{
    const auto sys = cfg.model();
    const auto mech = cfg.mech();
    const auto points = static_cast<std::size_t>(cfg.numerics.grid_points);
    ptcam::CsvTable table;
    if (kind == "background") {
        const auto grid = ptcam::uniform_grid(-3.0 * sys.d1, 3.0 * sys.d1, points);
        const auto spec = ptcam::background_spectrum(sys, grid);
        table.header = {"omega", "S"};
        for (std::size_t i = 0; i < grid.size(); ++i) table.rows.push_back({grid[i], spec.values[i]});
    } else {
        const auto grid = ptcam::uniform_grid(-4.0 * mech.omega_m, 4.0 * mech.omega_m, points);
        const auto ladder = ptcam::sideband_ladder(sys, mech, cfg.numerics.eps, cfg.numerics.ladder_order);
        if (ladder.truncation_warning) std::cerr << "warning: ladder truncation, increase numerics.ladder_order\n";
        const auto spec = ptcam::composite_spectrum(ladder, sys, mech, grid);
        const auto sidebands = spec.sideband_total();
        table.header = {"omega", "S", "S_background", "S_sidebands"};
        for (std::size_t i = 0; i < grid.size(); ++i) {
            table.rows.push_back({grid[i], spec.values[i], spec.components[static_cast<std::size_t>(ladder.order)].values[i],
                                  sidebands[i]});
        }
    }
    write_csv(dir, "spectrum.csv", table);
    return kExitOk;
}

int cmd_amplification(const ptcam::RunConfig& cfg, const fs::path& dir, unsigned threads)
{
    auto fig = ptcam::reproduce_fig1c(cfg, threads);
    write_csv(dir, "amplification.csv", fig.table);
    print_summary("amplification", fig.summary);
    return kExitOk;
}

int cmd_sensitivity(const ptcam::RunConfig& cfg, const fs::path& dir)
{
    const auto sp = cfg.sensitivity_params();
    const auto grid = cfg.sweep_grid();
    const auto curve = ptcam::sensitivity_ratio_sweep(cfg.model(), cfg.ep_partner(), cfg.mech(), sp, grid);
    ptcam::CsvTable table;
    table.header = {"g1_over_threshold", "s_xx_pt", "s_xx_single", "s_xx_ep", "ratio_pt", "ratio_ep", "status"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        table.rows.push_back({grid[i], curve.s_xx_pt[i], curve.s_xx_single[i], curve.s_xx_ep[i], curve.ratio_pt[i],
                              curve.ratio_ep[i], ptcam::combined_status(curve.status_pt[i], curve.status_ep[i])});
    }
    write_csv(dir, "sensitivity.csv", table);

    const auto dec = ptcam::decompose(cfg.model(), cfg.numerics.transition_tol);
    const double w = cfg.mechanics.omega_m;
    ptcam::Summary s;
    s.add("omega", w);
    s.add("s_xx", ptcam::displacement_psd(dec, sp, w));
    s.add("s_ff", ptcam::force_psd(dec, sp, w));
    s.add("heisenberg_product_over_hbar2_4", ptcam::heisenberg_product(dec, sp, w) / (0.25 * sp.hbar * sp.hbar));
    s.add("s_xx_single", ptcam::displacement_psd(ptcam::single_cavity_readout(cfg.model(), sp), sp, w));
    s.add("units", std::string("formula-natural units; only ratios are meaningful"));
    print_summary("sensitivity", s);
    return kExitOk;
}

int cmd_ep_compare(const ptcam::RunConfig& cfg)
{
    ptcam::Summary s;
    const auto pt = cfg.model();
    const auto ep = cfg.ep_partner();
    s.add("pt_threshold", ptcam::ep_threshold(pt));
    s.add("ep_threshold", ptcam::ep_threshold(ep));
    s.add("ep_phase", std::string(ptcam::to_string(ptcam::decompose(ep, cfg.numerics.transition_tol).phase)));
    if (cfg.system.mode == ptcam::SystemMode::pt) {
        try {
            s.add("amplification_ratio_pt_over_ep",
                  ptcam::pt_ep_amplification_ratio(cfg.system.kappa, cfg.system.gamma_or_kappa1, cfg.system.ep_kappa1));
        } catch (const ptcam::BalancedGainError& e) {
            s.add("amplification_ratio_pt_over_ep", std::string("diverges: ") + e.what());
        }
    }
    print_summary("ep-compare", s);
    return kExitOk;
}

int cmd_reproduce(const ptcam::RunConfig& cfg, const fs::path& dir, const std::string& id, unsigned threads)
{
    if (id == "all") {
        for (const auto fid : ptcam::kFigureIds) cmd_reproduce(cfg, dir, std::string(fid), threads);
        return kExitOk;
    }
    const auto fig = ptcam::reproduce(id, cfg, threads);
    write_csv(dir, fig.id + ".csv", fig.table);
    print_summary(fig.id, fig.summary);
    return kExitOk;
}

int cmd_validate(const ptcam::RunConfig& cfg, unsigned threads)
{
    const auto report = ptcam::run_validation(cfg, threads);
    for (const auto& f : report.findings) {
        std::cout << (f.pass ? "PASS " : "FAIL ") << f.name << ": " << f.detail << '\n';
    }
    std::cout << (report.pass() ? "validation PASSED" : "validation FAILED") << '\n';
    return report.pass() ? kExitOk : kExitValidation;
}
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"PT-symmetric coupled-cavity metrology simulator"};
    app.require_subcommand(1);
    app.fallthrough(); // global options may follow the subcommand
    Options opt;
    app.add_option("--config", opt.config_path, "Configuration file (key = value with [sections])");
    app.add_option("--out", opt.out_dir, "Output directory for CSV files");
    app.add_option("--threads", opt.threads, "Worker threads (affects speed only)")->check(CLI::PositiveNumber);
    app.add_option("--seed", opt.seed, "Reserved; nothing stochastic is exposed");

    auto* supermodes = app.add_subcommand("supermodes", "Eigenfrequencies, phase and stability");
    auto* spectrum = app.add_subcommand("spectrum", "Background or composite spectrum CSV");
    std::string kind = "composite";
    spectrum->add_option("--kind", kind, "background | composite")
        ->check(CLI::IsMember({"background", "composite"}));
    auto* amplification = app.add_subcommand("amplification", "Amplification factor sweep");
    auto* sensitivity = app.add_subcommand("sensitivity", "Displacement spectral density sweep");
    auto* ep_compare = app.add_subcommand("ep-compare", "Gain-loss vs two-lossy-cavity comparison");
    auto* reproduce = app.add_subcommand("reproduce", "Figure data: fig1c, fig1d, fig2b, fig2c or all");
    std::string figure;
    reproduce->add_option("figure", figure, "Figure id")
        ->required()
        ->check(CLI::IsMember({"fig1c", "fig1d", "fig2b", "fig2c", "all"}));
    auto* validate = app.add_subcommand("validate", "Cross-validation and invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const auto cfg = load_config(opt);
        const auto dir = output_dir(opt, cfg);
        if (*supermodes) return cmd_supermodes(cfg);
        if (*spectrum) return cmd_spectrum(cfg, dir, kind);
        if (*amplification) return cmd_amplification(cfg, dir, opt.threads);
        if (*sensitivity) return cmd_sensitivity(cfg, dir);
        if (*ep_compare) return cmd_ep_compare(cfg);
        if (*reproduce) return cmd_reproduce(cfg, dir, figure, opt.threads);
        if (*validate) return cmd_validate(cfg, opt.threads);
    } catch (const ptcam::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ptcam::InvalidParameter& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ptcam::Error& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitOk;
}
