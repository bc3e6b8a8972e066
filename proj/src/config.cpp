#include "mcmot/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "mcmot/errors.hpp"

namespace mcmot {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw ConfigError("invalid value for " + key + ": '" + text + "'");
    }
    return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
    Int v{};
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("invalid value for " + key + ": '" + text + "'");
    }
    return v;
}

std::string format_weights(const DetectorWeightSet& w) {
    std::string out;
    for (const auto& [name, value] : w.entries()) {
        if (!out.empty()) out += ',';
        out += name + ':' + format_double(value);
    }
    return out;
}

DetectorWeightSet parse_weights(const std::string& key, const std::string& text) {
    std::vector<std::pair<std::string, double>> entries;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("invalid value for " + key + ": expected name:weight pairs");
        }
        entries.emplace_back(trim(item.substr(0, colon)),
                             parse_double(key, trim(item.substr(colon + 1))));
    }
    try {
        return DetectorWeightSet(std::move(entries));
    } catch (const ContractError& e) {
        throw ConfigError("invalid value for " + key + ": " + e.what());
    }
}

struct KeyBinding {
    ConfigKey key;
    std::function<std::string(const TrackingConfig&)> get;
    std::function<void(TrackingConfig&, const std::string&)> set;
};

KeyBinding real(std::string name, std::string help, double TrackingConfig::*outer) {
    return {{name, std::move(help)},
            [outer](const TrackingConfig& c) { return format_double(c.*outer); },
            [outer, name](TrackingConfig& c, const std::string& v) {
                c.*outer = parse_double(name, v);
            }};
}

template <class Part>
KeyBinding real(std::string name, std::string help, Part TrackingConfig::*part,
                double Part::*field) {
    return {{name, std::move(help)},
            [part, field](const TrackingConfig& c) { return format_double(c.*part.*field); },
            [part, field, name](TrackingConfig& c, const std::string& v) {
                c.*part.*field = parse_double(name, v);
            }};
}

template <class Part>
KeyBinding integer(std::string name, std::string help, Part TrackingConfig::*part,
                   int Part::*field) {
    return {{name, std::move(help)},
            [part, field](const TrackingConfig& c) { return std::to_string(c.*part.*field); },
            [part, field, name](TrackingConfig& c, const std::string& v) {
                c.*part.*field = parse_int<int>(name, v);
            }};
}

const std::vector<KeyBinding>& bindings() {
    static const std::vector<KeyBinding> table = [] {
        std::vector<KeyBinding> t;
        t.push_back({{"seed", "master seed for every random stream"},
                     [](const TrackingConfig& c) { return std::to_string(c.seed); },
                     [](TrackingConfig& c, const std::string& v) {
                         c.seed = parse_int<std::uint64_t>("seed", v);
                     }});
        t.push_back(integer("particles", "retained samples per frame (N)", &TrackingConfig::chain,
                            &ChainConfig::n_samples));
        t.push_back(integer("burn-in", "discarded samples per frame (B)", &TrackingConfig::chain,
                            &ChainConfig::burn_in));
        t.push_back(real("lambda-motion", "weight of the motion proposal component",
                         &TrackingConfig::chain, &ChainConfig::lambda_motion));
        t.push_back(real("sigma-data", "center spread of the detection proposal, pixels",
                         &TrackingConfig::chain, &ChainConfig::sigma_data));
        t.push_back(real("likelihood-power", "inverse temperature of the likelihood in the sampler",
                         &TrackingConfig::chain, &ChainConfig::likelihood_power));
        t.push_back(real("sigma-pos", "motion noise on the box center, pixels",
                         &TrackingConfig::motion, &MotionModel::process_sigma_pos));
        t.push_back(real("sigma-size", "motion noise on log width/height",
                         &TrackingConfig::motion, &MotionModel::process_sigma_size));
        t.push_back(real("velocity-decay", "velocity factor applied at prediction",
                         &TrackingConfig::motion, &MotionModel::velocity_decay));
        t.push_back(real("velocity-smoothing", "weight of the newest displacement in velocity",
                         &TrackingConfig::velocity_smoothing));
        t.push_back(real("border-margin", "entry border width, pixels", &TrackingConfig::entry,
                         &EntryModel::border_margin));
        t.push_back(real("beta-border", "birth prior near the border", &TrackingConfig::entry,
                         &EntryModel::beta_border));
        t.push_back(real("beta-interior", "birth prior away from the border",
                         &TrackingConfig::entry, &EntryModel::beta_interior));
        t.push_back(real("birth-threshold", "minimum confidence of a birth detection",
                         &TrackingConfig::entry, &EntryModel::birth_threshold));
        t.push_back(integer("miss-tolerance", "unmatched frames before a track dies",
                            &TrackingConfig::entry, &EntryModel::miss_tolerance));
        t.push_back(real("match-iou", "IoU gate of the track/detection matching",
                         &TrackingConfig::entry, &EntryModel::match_iou));
        t.push_back(real("likelihood-floor", "soft floor of the fused likelihood",
                         &TrackingConfig::observation, &ObservationParams::floor));
        t.push_back(real("sigma-color", "bandwidth of the color likelihood",
                         &TrackingConfig::observation, &ObservationParams::sigma_color));
        t.push_back(real("sigma-motion", "bandwidth of the motion likelihood",
                         &TrackingConfig::observation, &ObservationParams::sigma_motion));
        t.push_back(real("gate-iou", "IoU gate of the detector likelihood",
                         &TrackingConfig::observation, &ObservationParams::gate_iou));
        t.push_back({{"weights", "fusion weights as name:weight pairs"},
                     [](const TrackingConfig& c) { return format_weights(c.weights); },
                     [](TrackingConfig& c, const std::string& v) {
                         c.weights = parse_weights("weights", v);
                     }});
        t.push_back({{"cpd-order", "AR order of both change-finding stages"},
                     [](const TrackingConfig& c) { return std::to_string(c.cpd.sdar.order); },
                     [](TrackingConfig& c, const std::string& v) {
                         c.cpd.sdar.order = parse_int<int>("cpd-order", v);
                     }});
        t.push_back({{"cpd-discount", "discount rate r of the change finder"},
                     [](const TrackingConfig& c) { return format_double(c.cpd.sdar.discount); },
                     [](TrackingConfig& c, const std::string& v) {
                         c.cpd.sdar.discount = parse_double("cpd-discount", v);
                     }});
        t.push_back({{"cpd-min-variance", "variance floor of the AR models"},
                     [](const TrackingConfig& c) {
                         return format_double(c.cpd.sdar.min_variance);
                     },
                     [](TrackingConfig& c, const std::string& v) {
                         c.cpd.sdar.min_variance = parse_double("cpd-min-variance", v);
                     }});
        t.push_back(integer("cpd-window", "smoothing window T", &TrackingConfig::cpd,
                            &CpdConfig::window));
        t.push_back(real("cpd-threshold", "change score threshold", &TrackingConfig::cpd,
                         &CpdConfig::threshold));
        t.push_back(integer("cpd-refractory", "frames suppressed after a detection",
                            &TrackingConfig::cpd, &CpdConfig::refractory));
        t.push_back(integer("cpd-warmup", "leading frames whose scores are masked",
                            &TrackingConfig::cpd, &CpdConfig::warmup));
        t.push_back(real("cpd-offset", "offset of the logistic score map, in deviations",
                         &TrackingConfig::cpd, &CpdConfig::score_offset));
        t.push_back(real("cpd-min-deviation", "floor of the running score deviation",
                         &TrackingConfig::cpd, &CpdConfig::min_deviation));
        t.push_back(real("fb-drift-ratio", "drift threshold as a fraction of the mean diagonal",
                         &TrackingConfig::fb, &FbConfig::drift_ratio));
        t.push_back(integer("link-gap", "largest frame gap bridged by segment linking",
                            &TrackingConfig::link, &LinkConfig::gap_max));
        t.push_back(real("link-radius-ratio", "link radius as a fraction of the mean diagonal",
                         &TrackingConfig::link, &LinkConfig::radius_ratio));
        t.push_back(real("min-avg-score", "minimum mean likelihood of an emitted segment",
                         &TrackingConfig::min_avg_score));
        return t;
    }();
    return table;
}

const KeyBinding* find_binding(const std::string& key) {
    for (const auto& b : bindings()) {
        if (b.key.name == key) return &b;
    }
    return nullptr;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw ContractError("format_double: buffer too small");
    return std::string(buf, ptr);
}

void TrackingConfig::validate() const {
    chain.validate();
    motion.validate();
    entry.validate();
    observation.validate();
    cpd.validate();
    if (!(fb.drift_ratio > 0.0)) throw ConfigError("fb-drift-ratio must be > 0");
    if (link.gap_max < 0) throw ConfigError("link-gap must be >= 0");
    if (!(link.radius_ratio >= 0.0)) throw ConfigError("link-radius-ratio must be >= 0");
    if (!(min_avg_score >= 0.0 && min_avg_score <= 1.0)) {
        throw ConfigError("min-avg-score must be in [0,1]");
    }
    if (!(velocity_smoothing > 0.0 && velocity_smoothing <= 1.0)) {
        throw ConfigError("velocity-smoothing must be in (0,1]");
    }
    if (weights.entries().empty()) throw ConfigError("weights must name at least one provider");
    for (const auto& [name, w] : weights.entries()) {
        if (name != "detector" && name != "color" && name != "motion") {
            throw ConfigError("weights: unknown provider '" + name + "'");
        }
    }
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        for (const auto& b : bindings()) k.push_back(b.key);
        return k;
    }();
    return keys;
}

void apply_config_value(TrackingConfig& config, const std::string& key, const std::string& value) {
    const KeyBinding* b = find_binding(key);
    if (!b) throw ConfigError("unknown configuration key '" + key + "'");
    b->set(config, trim(value));
}

ConfigSnapshot snapshot(const TrackingConfig& config) {
    ConfigSnapshot out;
    for (const auto& b : bindings()) out.emplace_back(b.key.name, b.get(config));
    return out;
}

TrackingConfig config_from_snapshot(const ConfigSnapshot& entries) {
    TrackingConfig c;
    for (const auto& [k, v] : entries) apply_config_value(c, k, v);
    return c;
}

ConfigSnapshot parse_config_text(std::istream& in) {
    ConfigSnapshot out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(lineno) + ": expected key = value",
                             lineno);
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ParseError("config line " + std::to_string(lineno) + ": empty key", lineno);
        }
        if (!find_binding(key)) {
            throw ParseError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'",
                             lineno);
        }
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

ConfigSnapshot parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    return parse_config_text(in);
}

void write_config_text(const ConfigSnapshot& entries, std::ostream& out) {
    for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
}

std::string env_name(const std::string& key) {
    std::string out = "MCMOT_";
    for (char ch : key) {
        out += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
    return out;
}

}  // namespace mcmot
