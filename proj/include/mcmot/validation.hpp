#pragma once

// Track segments and their forward-backward validation: a segment flagged by
// change-point detection is re-tracked in reverse from its last observed
// state, and the reverse track's position at the segment's birth frame is
// compared with where the forward track started.

#include <optional>
#include <span>
#include <vector>

#include "mcmot/config.hpp"
#include "mcmot/cpd.hpp"

namespace mcmot {

enum class SegmentStatus { open, closed, validated, drifted };

const char* status_name(SegmentStatus s);

/// Detections bucketed by frame (index 0 unused), see group_by_frame.
using DetectionStore = std::vector<std::vector<Detection>>;

/// One identity's contiguous run of states from birth to death. Frames after
/// the last matched detection are kept (the track coasted there) but are not
/// part of the observed span used for scoring and emission.
struct TrackSegment {
    int segment_id = 0;
    int identity = 0;
    int class_id = kDefaultClass;
    int birth_frame = 0;
    int death_frame = -1;
    std::vector<ObjectState> states;
    std::vector<double> likelihoods;
    std::vector<char> observed;
    SegmentStatus status = SegmentStatus::open;
    std::vector<int> change_points;

    bool empty() const { return states.empty(); }
    std::size_t size() const { return states.size(); }
    bool covers(int frame) const { return !empty() && frame >= birth_frame && frame <= death_frame; }
    const ObjectState& state_at(int frame) const;
    double likelihood_at(int frame) const;

    void append(const ObjectState& state, double likelihood, bool was_observed);

    /// Last frame with a matched detection, or birth_frame - 1 when none.
    int last_observed_frame() const;

    /// Mean likelihood over every stored frame.
    double mean_likelihood() const;

    /// Mean box diagonal over the observed span.
    double mean_diagonal() const;

    /// Likelihoods of the matched frames within the observed span.
    LikelihoodSeries likelihood_series() const;

    /// Drops every frame >= split_frame.
    void truncate_before(int split_frame);

    void check_invariants() const;
};

struct FbVerdict {
    int segment_id = 0;
    double distance = 0.0;
    double confidence_threshold = 0.0;
    bool drifted = false;
    std::optional<int> split_frame;
};

/// Re-runs the single-object tracker from the last observed frame back to the
/// birth frame with the velocity negated. The result is stored in ascending
/// frame order. Deterministic given cfg.seed and the segment id.
TrackSegment reverse_track(const TrackSegment& segment, const DetectionStore& detections,
                           const TrackingConfig& cfg,
                           std::optional<ImageBounds> image = std::nullopt);

/// Center distance at forward.birth_frame between the two segments.
double fb_distance(const TrackSegment& forward, const TrackSegment& backward);

/// Only called for segments with at least one change point.
FbVerdict validate_segment(const TrackSegment& segment, const std::vector<int>& change_points,
                           const DetectionStore& detections, const TrackingConfig& cfg,
                           std::optional<ImageBounds> image = std::nullopt);

}  // namespace mcmot
