#pragma once

// Run configuration: a flat `key = value` document split into [sections].
// Unknown sections or keys are rejected; every violated invariant is reported
// at once. Defaults reproduce the transducer parameters
// (delta = 0, omega_m = 6, kappa = 20, gamma_m = 0.2, gamma = 16, g1 = 19.8, g = 5; MHz).

#include <charconv>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "errors.hpp"
#include "format.hpp"
#include "model.hpp"
#include "sensitivity.hpp"
#include "spectrum.hpp"

namespace ptcam
{
enum class SystemMode
{
    pt,
    ep,
};

enum class Spacing
{
    linear,
    log,
};

struct RunConfig
{
    struct System
    {
        double delta = 0.0;
        double kappa = 20.0;
        double gamma_or_kappa1 = 16.0;
        SystemMode mode = SystemMode::pt;
        double g1 = 19.8;
        double g = 5.0;
        double ep_kappa1 = 16.0; // loss of the second cavity in the EP comparison system
        bool operator==(const System&) const = default;
    };
    struct Mechanics
    {
        double omega_m = 6.0;
        double gamma_m = 0.2;
        double z0 = 0.2;
        bool operator==(const Mechanics&) const = default;
    };
    struct Numerics
    {
        int ladder_order = kDefaultLadderOrder;
        int grid_points = static_cast<int>(kDefaultGridPoints);
        double eps = 1.0;
        double dt = 0.0;    // 0 = automatic
        double t_end = 0.0; // 0 = automatic
        double transient_factor = 20.0;
        double transition_tol = kDefaultTransitionTol;
        double oracle_tol = 1e-3;
        bool operator==(const Numerics&) const = default;
    };
    struct Sensitivity
    {
        double p_in = 1e-3;
        double omega0 = kCarrier1550;
        BracketMode bracket_mode = BracketMode::dimensional;
        bool operator==(const Sensitivity&) const = default;
    };
    struct Sweep
    {
        std::string parameter = "g1_over_threshold";
        double start = 0.5;
        double stop = 1.5;
        int count = 1000;
        Spacing spacing = Spacing::linear;
        bool operator==(const Sweep&) const = default;
    };
    struct Figures
    {
        double fig1d_broken_g1 = 17.95;
        double fig2b_z0 = 1.0;
        int fig2b_ladder_order = 12;
        bool operator==(const Figures&) const = default;
    };

    System system;
    Mechanics mechanics;
    Numerics numerics;
    Sensitivity sensitivity;
    Sweep sweep;
    Figures figures;
    std::string output = "out";

    bool operator==(const RunConfig&) const = default;

    CoupledModeSystem model() const
    {
        const double d2 = system.mode == SystemMode::pt ? -system.gamma_or_kappa1 : system.gamma_or_kappa1;
        return {system.delta, system.kappa, d2, system.g1, system.g};
    }

    /// Two-lossy-cavity partner sharing kappa and g.
    CoupledModeSystem ep_partner() const
    {
        return CoupledModeSystem::ep(system.delta, system.kappa, system.ep_kappa1, system.g1, system.g);
    }

    MechanicalMode mech() const { return {mechanics.omega_m, mechanics.gamma_m, mechanics.z0}; }

    SensitivityParams sensitivity_params() const
    {
        SensitivityParams sp;
        sp.p_in = sensitivity.p_in;
        sp.omega0 = sensitivity.omega0;
        sp.bracket = sensitivity.bracket_mode;
        return sp;
    }

    std::vector<double> sweep_grid() const
    {
        std::vector<double> out(static_cast<std::size_t>(sweep.count));
        const double n = static_cast<double>(sweep.count - 1);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double f = static_cast<double>(i) / n;
            out[i] = sweep.spacing == Spacing::linear
                         ? sweep.start + (sweep.stop - sweep.start) * f
                         : sweep.start * std::pow(sweep.stop / sweep.start, f);
        }
        out.back() = sweep.stop;
        return out;
    }
};

namespace detail
{
inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline bool parse_number(std::string_view text, double& out)
{
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

inline bool parse_number(std::string_view text, int& out)
{
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

// One entry per accepted key: how to read it from text and how to write it back.
struct ConfigField
{
    std::function<bool(RunConfig&, std::string_view)> read;
    std::function<std::string(const RunConfig&)> write;
};

template <typename Member>
ConfigField make_field(Member member)
{
    using Value = std::remove_cvref_t<decltype(std::invoke(member, std::declval<RunConfig&>()))>;
    ConfigField f;
    f.read = [member](RunConfig& cfg, std::string_view text) {
        Value v{};
        if (!parse_number(text, v)) return false;
        std::invoke(member, cfg) = v;
        return true;
    };
    f.write = [member](const RunConfig& cfg) {
        const Value v = std::invoke(member, const_cast<RunConfig&>(cfg));
        if constexpr (std::is_same_v<Value, double>) {
            return format_double(v);
        } else {
            return std::to_string(v);
        }
    };
    return f;
}

inline const std::map<std::string, ConfigField, std::less<>>& config_fields()
{
    using C = RunConfig;
    static const std::map<std::string, ConfigField, std::less<>> fields = [] {
        std::map<std::string, ConfigField, std::less<>> m;
        m["system.delta"] = make_field([](C& c) -> double& { return c.system.delta; });
        m["system.kappa"] = make_field([](C& c) -> double& { return c.system.kappa; });
        m["system.gamma_or_kappa1"] = make_field([](C& c) -> double& { return c.system.gamma_or_kappa1; });
        m["system.g1"] = make_field([](C& c) -> double& { return c.system.g1; });
        m["system.g"] = make_field([](C& c) -> double& { return c.system.g; });
        m["system.ep_kappa1"] = make_field([](C& c) -> double& { return c.system.ep_kappa1; });
        m["system.mode"] = {[](C& c, std::string_view v) {
                                if (v == "pt" || v == "PT") c.system.mode = SystemMode::pt;
                                else if (v == "ep" || v == "EP") c.system.mode = SystemMode::ep;
                                else return false;
                                return true;
                            },
                            [](const C& c) { return std::string(c.system.mode == SystemMode::pt ? "pt" : "ep"); }};

        m["mechanics.omega_m"] = make_field([](C& c) -> double& { return c.mechanics.omega_m; });
        m["mechanics.gamma_m"] = make_field([](C& c) -> double& { return c.mechanics.gamma_m; });
        m["mechanics.z0"] = make_field([](C& c) -> double& { return c.mechanics.z0; });

        m["numerics.ladder_order"] = make_field([](C& c) -> int& { return c.numerics.ladder_order; });
        m["numerics.grid_points"] = make_field([](C& c) -> int& { return c.numerics.grid_points; });
        m["numerics.eps"] = make_field([](C& c) -> double& { return c.numerics.eps; });
        m["numerics.dt"] = make_field([](C& c) -> double& { return c.numerics.dt; });
        m["numerics.t_end"] = make_field([](C& c) -> double& { return c.numerics.t_end; });
        m["numerics.transient_factor"] = make_field([](C& c) -> double& { return c.numerics.transient_factor; });
        m["numerics.transition_tol"] = make_field([](C& c) -> double& { return c.numerics.transition_tol; });
        m["numerics.oracle_tol"] = make_field([](C& c) -> double& { return c.numerics.oracle_tol; });

        m["sensitivity.p_in"] = make_field([](C& c) -> double& { return c.sensitivity.p_in; });
        m["sensitivity.omega0"] = make_field([](C& c) -> double& { return c.sensitivity.omega0; });
        m["sensitivity.bracket_mode"] = {
            [](C& c, std::string_view v) {
                if (v == "dimensional") c.sensitivity.bracket_mode = BracketMode::dimensional;
                else if (v == "as_printed") c.sensitivity.bracket_mode = BracketMode::as_printed;
                else return false;
                return true;
            },
            [](const C& c) { return std::string(to_string(c.sensitivity.bracket_mode)); }};

        m["sweep.parameter"] = {[](C& c, std::string_view v) {
                                    c.sweep.parameter = std::string(v);
                                    return !v.empty();
                                },
                                [](const C& c) { return c.sweep.parameter; }};
        m["sweep.start"] = make_field([](C& c) -> double& { return c.sweep.start; });
        m["sweep.stop"] = make_field([](C& c) -> double& { return c.sweep.stop; });
        m["sweep.count"] = make_field([](C& c) -> int& { return c.sweep.count; });
        m["sweep.spacing"] = {[](C& c, std::string_view v) {
                                  if (v == "linear") c.sweep.spacing = Spacing::linear;
                                  else if (v == "log") c.sweep.spacing = Spacing::log;
                                  else return false;
                                  return true;
                              },
                              [](const C& c) { return std::string(c.sweep.spacing == Spacing::linear ? "linear" : "log"); }};

        m["figures.fig1d_broken_g1"] = make_field([](C& c) -> double& { return c.figures.fig1d_broken_g1; });
        m["figures.fig2b_z0"] = make_field([](C& c) -> double& { return c.figures.fig2b_z0; });
        m["figures.fig2b_ladder_order"] = make_field([](C& c) -> int& { return c.figures.fig2b_ladder_order; });

        m["output.path"] = {[](C& c, std::string_view v) {
                                c.output = std::string(v);
                                return !v.empty();
                            },
                            [](const C& c) { return c.output; }};
        return m;
    }();
    return fields;
}

inline constexpr std::string_view kSectionOrder[] = {"system", "mechanics", "numerics", "sensitivity",
                                                     "sweep",  "figures",   "output"};
} // namespace detail

/// Every violated invariant, one message per entry. Empty when valid.
inline std::vector<std::string> validation_errors(const RunConfig& c)
{
    std::vector<std::string> errs;
    auto check = [&errs](bool ok, std::string msg) {
        if (!ok) errs.push_back(std::move(msg));
    };
    auto finite = [](double v) { return std::isfinite(v); };

    check(finite(c.system.delta), "system.delta must be finite");
    check(finite(c.system.kappa) && c.system.kappa > 0.0, "system.kappa must be > 0");
    check(finite(c.system.gamma_or_kappa1) && c.system.gamma_or_kappa1 >= 0.0, "system.gamma_or_kappa1 must be >= 0");
    check(finite(c.system.g1) && c.system.g1 >= 0.0, "system.g1 must be >= 0");
    check(finite(c.system.g) && c.system.g >= 0.0, "system.g must be >= 0");
    check(finite(c.system.ep_kappa1) && c.system.ep_kappa1 >= 0.0, "system.ep_kappa1 must be >= 0");

    check(finite(c.mechanics.omega_m) && c.mechanics.omega_m > 0.0, "mechanics.omega_m must be > 0");
    check(finite(c.mechanics.gamma_m) && c.mechanics.gamma_m > 0.0, "mechanics.gamma_m must be > 0");
    check(finite(c.mechanics.z0) && c.mechanics.z0 >= 0.0, "mechanics.z0 must be >= 0");

    check(c.numerics.ladder_order >= 2, "numerics.ladder_order must be >= 2");
    check(c.numerics.grid_points >= 3, "numerics.grid_points must be >= 3");
    check(finite(c.numerics.eps) && c.numerics.eps > 0.0, "numerics.eps must be > 0");
    check(finite(c.numerics.dt) && c.numerics.dt >= 0.0, "numerics.dt must be >= 0 (0 = automatic)");
    check(finite(c.numerics.t_end) && c.numerics.t_end >= 0.0, "numerics.t_end must be >= 0 (0 = automatic)");
    check(finite(c.numerics.transient_factor) && c.numerics.transient_factor > 0.0,
          "numerics.transient_factor must be > 0");
    check(c.numerics.transition_tol > 0.0 && c.numerics.transition_tol <= 1e-2,
          "numerics.transition_tol must lie in (0, 1e-2]");
    check(c.numerics.oracle_tol > 0.0 && finite(c.numerics.oracle_tol), "numerics.oracle_tol must be > 0");

    check(finite(c.sensitivity.p_in) && c.sensitivity.p_in > 0.0, "sensitivity.p_in must be > 0");
    check(finite(c.sensitivity.omega0) && c.sensitivity.omega0 > 0.0, "sensitivity.omega0 must be > 0");

    check(c.sweep.parameter == "g1_over_threshold", "sweep.parameter must be g1_over_threshold");
    check(finite(c.sweep.start) && finite(c.sweep.stop) && c.sweep.stop > c.sweep.start,
          "sweep.stop must exceed sweep.start");
    check(c.sweep.start >= 0.0, "sweep.start must be >= 0");
    check(c.sweep.count >= 2, "sweep.count must be >= 2");
    check(c.sweep.spacing != Spacing::log || (c.sweep.start > 0.0 && c.sweep.stop > 0.0),
          "sweep.spacing = log requires positive endpoints");

    check(finite(c.figures.fig1d_broken_g1) && c.figures.fig1d_broken_g1 >= 0.0,
          "figures.fig1d_broken_g1 must be >= 0");
    check(finite(c.figures.fig2b_z0) && c.figures.fig2b_z0 >= 0.0, "figures.fig2b_z0 must be >= 0");
    check(c.figures.fig2b_ladder_order >= 2, "figures.fig2b_ladder_order must be >= 2");
    check(!c.output.empty(), "output.path must not be empty");
    return errs;
}

/// Parses and validates a configuration document. Empty input yields the defaults.
inline RunConfig parse_config(std::string_view text)
{
    RunConfig cfg;
    const auto& fields = detail::config_fields();
    std::string section;
    std::vector<std::string> parse_errs;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;

        if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";

        if (line.front() == '[') {
            if (line.back() != ']') {
                parse_errs.push_back(where + "unterminated section header");
                continue;
            }
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            bool known = false;
            for (const auto s : detail::kSectionOrder) known = known || s == section;
            if (!known) parse_errs.push_back(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            parse_errs.push_back(where + "expected key = value");
            continue;
        }
        const auto key = detail::trim(line.substr(0, eq));
        auto value = detail::trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
        const auto it = fields.find(full);
        if (it == fields.end()) {
            parse_errs.push_back(where + "unknown key \"" + std::string(key) + "\"" +
                                 (section.empty() ? std::string(" (outside any section)") : " in [" + section + "]"));
            continue;
        }
        if (!it->second.read(cfg, value)) {
            parse_errs.push_back(where + "invalid value \"" + std::string(value) + "\" for " + full);
        }
    }

    if (!parse_errs.empty()) {
        std::string msg = "configuration parse error";
        for (const auto& e : parse_errs) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    const auto errs = validation_errors(cfg);
    if (!errs.empty()) {
        std::string msg = "configuration validation error";
        for (const auto& e : errs) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

/// Canonical text form; parse_config(to_text(c)) == c.
inline std::string to_text(const RunConfig& cfg)
{
    const auto& fields = detail::config_fields();
    std::ostringstream os;
    for (const auto section : detail::kSectionOrder) {
        os << '[' << section << "]\n";
        const std::string prefix = std::string(section) + ".";
        for (const auto& [name, field] : fields) {
            if (name.compare(0, prefix.size(), prefix) != 0) continue;
            os << name.substr(prefix.size()) << " = " << field.write(cfg) << '\n';
        }
        os << '\n';
    }
    return os.str();
}
} // namespace ptcam
