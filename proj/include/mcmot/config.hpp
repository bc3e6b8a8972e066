#pragma once

// Tracker configuration and its flat key/value form. The same keys serve as
// config-file entries, CLI flag names, environment overrides (MCMOT_ prefix)
// and the resolved snapshot stored in run manifests.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mcmot/cpd.hpp"
#include "mcmot/mcmc_sampler.hpp"
#include "mcmot/motion_entity.hpp"
#include "mcmot/observation.hpp"

namespace mcmot {

struct FbConfig {
    double drift_ratio = 0.5;  // threshold as a fraction of the mean box diagonal
};

struct LinkConfig {
    int gap_max = 15;           // frames
    double radius_ratio = 0.5;  // link radius as a fraction of the mean box diagonal
};

struct TrackingConfig {
    std::uint64_t seed = 0;
    ChainConfig chain;
    MotionModel motion;
    EntryModel entry;
    ObservationParams observation;
    DetectorWeightSet weights = DetectorWeightSet::equal({"detector", "color", "motion"});
    CpdConfig cpd;
    FbConfig fb;
    LinkConfig link;
    double min_avg_score = 0.3;
    double velocity_smoothing = 0.5;  // weight of the newest displacement

    void validate() const;
};

using ConfigSnapshot = std::vector<std::pair<std::string, std::string>>;

struct ConfigKey {
    std::string name;
    std::string help;
};

/// Every configurable key, in snapshot order.
const std::vector<ConfigKey>& config_keys();

/// Sets one key from its text form. Unknown keys and malformed values throw
/// ConfigError.
void apply_config_value(TrackingConfig& config, const std::string& key, const std::string& value);

/// Fully resolved key/value view; values round-trip exactly.
ConfigSnapshot snapshot(const TrackingConfig& config);

TrackingConfig config_from_snapshot(const ConfigSnapshot& entries);

/// Parses `key = value` lines; `#` starts a comment. Throws ParseError with
/// the line number for malformed lines.
ConfigSnapshot parse_config_text(std::istream& in);
ConfigSnapshot parse_config_file(const std::filesystem::path& path);

void write_config_text(const ConfigSnapshot& entries, std::ostream& out);

/// MCMOT_ prefix, upper case, '-' replaced by '_'.
std::string env_name(const std::string& key);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace mcmot
