#include <gtest/gtest.h>

#include "ptcam/config.hpp"

using namespace ptcam;

namespace
{
std::string error_of(std::string_view text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}
} // namespace

TEST(Config, EmptyDocumentGivesDefaults)
{
    const auto cfg = parse_config("");
    EXPECT_EQ(cfg, RunConfig{});
    EXPECT_EQ(cfg.model(), CoupledModeSystem::pt(0.0, 20.0, 16.0, 19.8, 5.0));
    EXPECT_EQ(cfg.ep_partner(), CoupledModeSystem::ep(0.0, 20.0, 16.0, 19.8, 5.0));
    EXPECT_EQ(cfg.mech().omega_m, 6.0);
    EXPECT_EQ(cfg.mech().gamma_m, 0.2);
    EXPECT_EQ(cfg.sensitivity_params().bracket, BracketMode::dimensional);
}

TEST(Config, ParsesSectionsAndComments)
{
    const auto cfg = parse_config(R"(
# comment
[system]
mode = ep          ; trailing comment
gamma_or_kappa1 = 12
g1 = 3.5
[sweep]
spacing = log
start = 0.1
stop = 10
count = 7
[output]
path = "results dir"
)");
    EXPECT_EQ(cfg.system.mode, SystemMode::ep);
    EXPECT_EQ(cfg.model().d2, 12.0);
    EXPECT_EQ(cfg.system.g1, 3.5);
    EXPECT_EQ(cfg.output, "results dir");
    const auto grid = cfg.sweep_grid();
    ASSERT_EQ(grid.size(), 7u);
    EXPECT_NEAR(grid[0], 0.1, 1e-15);
    EXPECT_NEAR(grid[3], 1.0, 1e-14);
    EXPECT_EQ(grid[6], 10.0);
}

TEST(Config, NegativeCouplingNamesField)
{
    const auto msg = error_of("[system]\ng1 = -1\n");
    EXPECT_NE(msg.find("validation"), std::string::npos) << msg;
    EXPECT_NE(msg.find("system.g1"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyRejectedByName)
{
    const auto msg = error_of("[system]\ncoupling_strenght = 3\n");
    EXPECT_NE(msg.find("coupling_strenght"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(Config, ReportsEveryViolation)
{
    const auto msg = error_of("[system]\nkappa = 0\ng = -2\n[sweep]\ncount = 1\n");
    EXPECT_NE(msg.find("system.kappa"), std::string::npos) << msg;
    EXPECT_NE(msg.find("system.g "), std::string::npos) << msg;
    EXPECT_NE(msg.find("sweep.count"), std::string::npos) << msg;
}

TEST(Config, MalformedLines)
{
    EXPECT_NE(error_of("[system\n").find("line 1"), std::string::npos);
    EXPECT_NE(error_of("[nonsense]\n").find("unknown section"), std::string::npos);
    EXPECT_NE(error_of("[system]\ng1\n").find("key = value"), std::string::npos);
    EXPECT_NE(error_of("[system]\ng1 = abc\n").find("system.g1"), std::string::npos);
    EXPECT_NE(error_of("[system]\nmode = gain\n").find("system.mode"), std::string::npos);
    EXPECT_NE(error_of("g1 = 3\n").find("outside any section"), std::string::npos);
}

TEST(Config, LogSpacingNeedsPositiveEndpoints)
{
    const auto msg = error_of("[sweep]\nspacing = log\nstart = 0\n");
    EXPECT_NE(msg.find("sweep.spacing"), std::string::npos) << msg;
}

TEST(Config, RoundTrip)
{
    RunConfig cfg;
    cfg.system.delta = 0.1 + 0.2; // not exactly representable as a short decimal
    cfg.system.mode = SystemMode::ep;
    cfg.mechanics.z0 = 1.0 / 3.0;
    cfg.numerics.ladder_order = 9;
    cfg.numerics.dt = 1e-3;
    cfg.sensitivity.bracket_mode = BracketMode::as_printed;
    cfg.sweep.spacing = Spacing::log;
    cfg.sweep.start = 0.9;
    cfg.figures.fig2b_z0 = 0.75;
    cfg.output = "some/where";
    EXPECT_EQ(parse_config(to_text(cfg)), cfg);
    EXPECT_EQ(parse_config(to_text(RunConfig{})), RunConfig{});
    EXPECT_EQ(to_text(parse_config(to_text(cfg))), to_text(cfg));
}
