#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mcmot/config.hpp"
#include "mcmot/errors.hpp"

using namespace mcmot;

TEST(Config, DefaultsValidate) {
    const TrackingConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.chain.n_samples, 100);
    EXPECT_EQ(c.chain.burn_in, 30);
    EXPECT_DOUBLE_EQ(c.cpd.threshold, 0.3);
    EXPECT_DOUBLE_EQ(c.min_avg_score, 0.3);
    EXPECT_EQ(c.link.gap_max, 15);
}

TEST(Config, SnapshotRoundTripsExactly) {
    TrackingConfig c;
    c.seed = 1234567890123ULL;
    c.chain.sigma_data = 0.1 + 0.2;  // not representable as a short decimal
    c.motion.process_sigma_size = 1.0 / 3.0;
    c.cpd.sdar.discount = 0.07;
    c.weights = DetectorWeightSet({{"detector", 0.5}, {"color", 0.25}, {"motion", 0.25}});
    const ConfigSnapshot snap = snapshot(c);
    ASSERT_EQ(snap.size(), config_keys().size());
    for (std::size_t i = 0; i < snap.size(); ++i) EXPECT_EQ(snap[i].first, config_keys()[i].name);
    const TrackingConfig back = config_from_snapshot(snap);
    EXPECT_EQ(snapshot(back), snap);
    EXPECT_EQ(back.chain.sigma_data, c.chain.sigma_data);
    EXPECT_EQ(back.motion.process_sigma_size, c.motion.process_sigma_size);
    EXPECT_EQ(back.seed, c.seed);
    EXPECT_DOUBLE_EQ(back.weights.weight("detector"), 0.5);
}

TEST(Config, FormatDoubleIsShortestRoundTrip) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng);
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(format_double(100), "100");
}

TEST(Config, UnknownKeyAndBadValues) {
    TrackingConfig c;
    EXPECT_THROW(apply_config_value(c, "no-such-key", "1"), ConfigError);
    EXPECT_THROW(apply_config_value(c, "particles", "many"), ConfigError);
    EXPECT_THROW(apply_config_value(c, "particles", "12x"), ConfigError);
    apply_config_value(c, "particles", "0");
    EXPECT_THROW(c.validate(), ConfigError);
    c = TrackingConfig{};
    apply_config_value(c, "min-avg-score", "1.5");
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, TextParsing) {
    std::istringstream in("# comment\nparticles = 50\n\n  burn-in=5  # trailing\ncpd-threshold = 0.25\n");
    const auto entries = parse_config_text(in);
    ASSERT_EQ(entries.size(), 3u);
    EXPECT_EQ(entries[0], (std::pair<std::string, std::string>{"particles", "50"}));
    EXPECT_EQ(entries[1], (std::pair<std::string, std::string>{"burn-in", "5"}));
    TrackingConfig c;
    for (const auto& [k, v] : entries) apply_config_value(c, k, v);
    EXPECT_EQ(c.chain.n_samples, 50);
    EXPECT_EQ(c.chain.burn_in, 5);
    EXPECT_DOUBLE_EQ(c.cpd.threshold, 0.25);
}

TEST(Config, TextParsingErrorsCarryLine) {
    std::istringstream in("particles = 50\nthis line has no equals\n");
    try {
        parse_config_text(in);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Config, WriteThenParse) {
    const ConfigSnapshot snap = snapshot(TrackingConfig{});
    std::stringstream buf;
    write_config_text(snap, buf);
    EXPECT_EQ(parse_config_text(buf), snap);
}

TEST(Config, EnvNames) {
    EXPECT_EQ(env_name("burn-in"), "MCMOT_BURN_IN");
    EXPECT_EQ(env_name("seed"), "MCMOT_SEED");
}

TEST(Config, WeightsKey) {
    TrackingConfig c;
    apply_config_value(c, "weights", "detector:0.6,color:0.2,motion:0.2");
    EXPECT_DOUBLE_EQ(c.weights.weight("detector"), 0.6);
    EXPECT_THROW(apply_config_value(c, "weights", "detector:0.6,color:0.6"), ConfigError);
    EXPECT_THROW(apply_config_value(c, "weights", "detector"), ConfigError);
}
