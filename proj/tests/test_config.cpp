#include <gtest/gtest.h>

#include "test_support.hpp"
#include "v2xalloc/config.hpp"
#include "v2xalloc/error.hpp"

using namespace v2x;

namespace {

const char* kMinimal = R"(# minimal config
m_cellular = 8
k_v2v = 10
pmax_c = 1
pmax_v = 0.5   # V2V budget
noise_var = 0.1
channel_mode = IID_EXPONENTIAL
)";

}  // namespace

TEST(Config, MinimalFileFillsDefaults) {
    const SystemConfig cfg = parse_config(kMinimal);
    EXPECT_EQ(cfg.m_cellular, 8);
    EXPECT_EQ(cfg.k_v2v, 10);
    EXPECT_DOUBLE_EQ(cfg.pmax_v, 0.5);
    EXPECT_EQ(cfg.weight_c, std::vector<double>(8, 1.0));
    EXPECT_EQ(cfg.weight_v, std::vector<double>(10, 1.0));
    EXPECT_EQ(cfg.feature_layout, FeatureLayout::Full);
    EXPECT_EQ(cfg.seed, 0u);
    EXPECT_FALSE(cfg.geo.has_value());
}

TEST(Config, ScalarWeightBroadcastsAndListIsKept) {
    const SystemConfig cfg = parse_config(std::string(kMinimal) +
                                          "weight_c = 2\nweight_v = 1,2,3,4,5,6,7,8,9,10\n");
    EXPECT_EQ(cfg.weight_c, std::vector<double>(8, 2.0));
    EXPECT_DOUBLE_EQ(cfg.weight_v[9], 10.0);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "weight_v = 1,2\n"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "weight_c = -1\n"), ConfigError);
}

TEST(Config, MissingKeyIsNamed) {
    try {
        parse_config("m_cellular = 1\nk_v2v = 1\npmax_c = 1\npmax_v = 1\nchannel_mode = GEOMETRIC\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("noise_var"), std::string::npos) << e.what();
    }
}

TEST(Config, UnknownAndDuplicateKeysCarryLineNumbers) {
    try {
        parse_config(std::string(kMinimal) + "bogus = 3\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 8u);
    }
    EXPECT_THROW(parse_config(std::string(kMinimal) + "k_v2v = 3\n"), ParseError);
    EXPECT_THROW(parse_config("m_cellular 3\n"), ParseError);
}

TEST(Config, GeometricKeysOnlyInGeometricMode) {
    EXPECT_THROW(parse_config(std::string(kMinimal) + "pathloss_exp = 3\n"), ParseError);

    std::string geo = kMinimal;
    geo.replace(geo.find("IID_EXPONENTIAL"), 15, "GEOMETRIC");
    const SystemConfig cfg = parse_config(geo + "pathloss_exp = 3\n");
    ASSERT_TRUE(cfg.geo.has_value());
    EXPECT_DOUBLE_EQ(cfg.geo->pathloss_exp, 3.0);
    EXPECT_DOUBLE_EQ(cfg.geo->pathloss_const, 1e-3);
    EXPECT_DOUBLE_EQ(cfg.geo->shadow_sigma_db, 8.0);
    EXPECT_DOUBLE_EQ(cfg.geo->cell_radius_m, 500.0);
    EXPECT_DOUBLE_EQ(cfg.geo->v2v_dist_min_m, 10.0);
    EXPECT_DOUBLE_EQ(cfg.geo->v2v_dist_max_m, 50.0);
}

TEST(Config, RejectsInvalidValues) {
    auto with = [](const std::string& from, const std::string& to) {
        std::string s = kMinimal;
        s.replace(s.find(from), from.size(), to);
        return s;
    };
    EXPECT_THROW(parse_config(with("noise_var = 0.1", "noise_var = 0")), ConfigError);
    EXPECT_THROW(parse_config(with("pmax_c = 1", "pmax_c = -1")), ConfigError);
    EXPECT_THROW(parse_config(with("k_v2v = 10", "k_v2v = -1")), ConfigError);
    EXPECT_THROW(parse_config(with("m_cellular = 8", "m_cellular = 8.5")), ConfigError);
    EXPECT_THROW(parse_config(with("IID_EXPONENTIAL", "RAYLEIGH")), ConfigError);
}

TEST(Config, SingleClassNetworksAreAllowed) {
    const SystemConfig cfg = parse_config(
        "m_cellular = 1\nk_v2v = 0\npmax_c = 1\npmax_v = 1\nnoise_var = 0.1\n"
        "channel_mode = IID_EXPONENTIAL\n");
    EXPECT_EQ(cfg.users(), 1);
    EXPECT_THROW(SystemConfig::with_dims(0, 0).validate(), ConfigError);
}

TEST(Config, FormatRoundTrips) {
    std::string geo = kMinimal;
    geo.replace(geo.find("IID_EXPONENTIAL"), 15, "GEOMETRIC");
    for (const std::string& text :
         {std::string(kMinimal) + "seed = 42\nfeature_layout = PAPER_COMPAT\nweight_c = 0.25\n",
          geo + "shadow_sigma_db = 6\n"}) {
        const SystemConfig a = parse_config(text);
        const SystemConfig b = parse_config(format_config(a));
        EXPECT_EQ(format_config(a), format_config(b));
        EXPECT_EQ(a.seed, b.seed);
        EXPECT_EQ(a.weight_c, b.weight_c);
        EXPECT_EQ(a.feature_layout, b.feature_layout);
    }
}
