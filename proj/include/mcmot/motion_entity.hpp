#pragma once

// Constant-velocity motion model and birth/death (entity status) estimation.
// Births and deaths are resolved here, before the per-frame sampler runs, so
// the sampler never changes the number of objects.

#include <span>
#include <vector>

#include "mcmot/observation.hpp"

namespace mcmot {

struct MotionModel {
    double process_sigma_pos = 4.0;    // pixels, on the box center
    double process_sigma_size = 0.05;  // on log width and log height
    double velocity_decay = 1.0;

    void validate() const;
};

/// Mean prediction: center moved by velocity * decay, size unchanged.
BoundingBox predict_state(const ObjectState& state, const MotionModel& model);

/// Gaussian density of `proposed` around `predicted` over
/// (center x, center y, log width, log height).
double motion_prior(const BoundingBox& proposed, const BoundingBox& predicted,
                    const MotionModel& model);
double log_motion_prior(const BoundingBox& proposed, const BoundingBox& predicted,
                        const MotionModel& model);

/// Log of the Gaussian normalization constant used by motion_prior.
double log_motion_normalizer(const MotionModel& model);

/// Moves `state` to `observed_box`, blending the displacement into the
/// velocity with weight `smoothing`.
ObjectState advance_state(const ObjectState& state, const BoundingBox& observed_box,
                          double smoothing);

struct EntryModel {
    double border_margin = 50.0;
    double beta_border = 0.9;
    double beta_interior = 0.3;
    double birth_threshold = 0.4;
    int miss_tolerance = 8;
    double match_iou = 0.3;

    void validate() const;
};

enum class EntityCase { birth, death, alive, absent };

/// Status of one hypothesis at one frame. Only the probability matching
/// `kind` and its complement are meaningful; the others stay zero.
struct EntityStatus {
    int identity = 0;    // 0 for detections that never received an identity
    int detection = -1;  // detection index, -1 if none
    EntityCase kind = EntityCase::absent;
    double birth = 0.0;
    double death = 0.0;
    double alive = 0.0;
    double null = 0.0;
};

/// A track that existed at the previous frame.
struct LiveTrack {
    ObjectState state;
    BoundingBox predicted;  // prediction for the current frame
    int misses = 0;         // consecutive unmatched frames so far
    double last_likelihood = 1.0;
};

struct BirthCandidate {
    int detection = -1;
    int identity = 0;
    double probability = 0.0;
};

struct DeathNotice {
    int track = -1;  // index into the input tracks
    int identity = 0;
    double probability = 0.0;
};

struct EntityTransitions {
    std::vector<EntityStatus> statuses;
    std::vector<BirthCandidate> births;
    std::vector<DeathNotice> deaths;
    std::vector<int> track_detection;  // per input track: matched detection or -1
    std::vector<int> detection_track;  // per detection: matched track or -1
};

struct ImageBounds {
    double width = 0.0;
    double height = 0.0;
};

bool touches_border(const BoundingBox& box, const ImageBounds& image, double margin);

/// Greedy IoU matching between detections (by descending confidence) and the
/// tracks' predicted boxes, followed by the four-case status assignment.
/// New identities are numbered from `next_identity` in detection order.
EntityTransitions estimate_entity_transitions(std::span<const LiveTrack> prev_tracks,
                                              std::span<const Detection> frame_detections,
                                              const EntryModel& entry, int frame,
                                              const ImageBounds& image, int next_identity);

}  // namespace mcmot
