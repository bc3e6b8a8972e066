#pragma once

// Seeded synthetic scenarios: ground-truth trajectories with constant
// velocity, and a corrupted detection stream (jitter, misses, occlusions,
// clutter, drift injections) derived from them.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcmot/cpd.hpp"
#include "mcmot/mot_io.hpp"

namespace mcmot {

struct ObjectSpec {
    int class_id = kDefaultClass;
    int birth = 1;   // first frame present
    int death = 1;   // last frame present
    BoundingBox initial;
    double vx = 0.0;
    double vy = 0.0;
};

struct OcclusionWindow {
    int object = 0;  // index into ScenarioSpec::objects
    int first = 0;
    int last = 0;
};

/// From `frame` on, detections of `object` are drawn around the ground-truth
/// box of `target` instead of its own.
struct DriftInjection {
    int object = 0;
    int frame = 0;
    int target = 0;
};

struct ScenarioSpec {
    std::string name = "synthetic";
    int image_width = 1920;
    int image_height = 1080;
    int frame_count = 300;
    std::vector<ObjectSpec> objects;
    double jitter_sigma = 0.0;  // pixels
    double fp_rate = 0.0;       // expected clutter boxes per frame
    double fn_rate = 0.0;       // per-box miss probability
    std::vector<OcclusionWindow> occlusions;
    std::vector<DriftInjection> drifts;
    int appearance_bins = 0;  // 0 disables histograms
    std::uint64_t seed = 0;

    void validate() const;
};

struct InjectionRecord {
    int object = 0;    // index
    int identity = 0;  // ground-truth identity (index + 1)
    int frame = 0;
    int target = 0;
    int target_identity = 0;
};

struct Scenario {
    SequenceInfo info;
    std::vector<TrajectoryRecord> gt;  // sorted by (identity, frame)
    std::vector<Detection> detections;  // sorted by (frame, confidence desc)
    std::vector<InjectionRecord> injection_log;
    std::size_t clutter_count = 0;
    std::size_t missed_count = 0;
    std::size_t eligible_count = 0;  // true boxes subject to the miss draw
};

Scenario generate_scenario(const ScenarioSpec& spec);

struct RandomScenarioOptions {
    int objects = 10;
    int frame_count = 300;
    int image_width = 1920;
    int image_height = 1080;
    double jitter_sigma = 0.0;
    double fp_rate = 0.0;
    double fn_rate = 0.0;
    int classes = 1;
    bool full_lifetime = true;  // every object spans the whole sequence
    int appearance_bins = 0;
    std::uint64_t seed = 0;
};

/// Objects with random size, position and velocity that stay in view.
ScenarioSpec random_scenario(const RandomScenarioOptions& options);

enum class SegmentProfile { clean, collapse, swap };

struct LikelihoodSegmentSpec {
    int length = 300;
    double level = 0.9;
    double noise_sigma = 0.05;
    SegmentProfile profile = SegmentProfile::clean;
    int injection_frame = 150;  // first affected frame (1-based)
    double collapse_level = 0.1;
    std::uint64_t seed = 0;
};

struct LikelihoodSegment {
    LikelihoodSeries series;
    std::optional<int> injection_frame;
};

/// Noisy likelihood series, optionally with an injected drop.
LikelihoodSegment generate_likelihood_segment(const LikelihoodSegmentSpec& spec);

}  // namespace mcmot
