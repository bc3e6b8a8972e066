#pragma once

// Frame-by-frame tracking followed by segment-level post-processing:
//
//   per frame   entity transitions -> MCMC refinement -> append to segments
//   at the end  change points -> FB validation of flagged segments ->
//               truncation -> score filter -> kinematic linking -> records

#include <span>
#include <string>
#include <vector>

#include "mcmot/config.hpp"
#include "mcmot/validation.hpp"

namespace mcmot {

struct RunReport {
    int frames = 0;
    int births = 0;
    int deaths = 0;
    int segments_total = 0;
    int segments_validated = 0;
    int segments_drifted = 0;
    int segments_filtered_out = 0;
    int segments_emitted = 0;
    int fb_invocations = 0;
    int change_points = 0;
    int links = 0;
    int records = 0;
    double tracking_seconds = 0.0;
    double fps = 0.0;
};

struct LiveSegment {
    TrackSegment segment;
    int misses = 0;
};

struct TrackerState {
    int cursor = 0;  // last processed frame
    std::vector<LiveSegment> live;  // sorted by identity
    std::vector<TrackSegment> closed;
    int next_identity = 1;
    int next_segment_id = 1;
    std::vector<SceneParticle> prev_samples;
    RunReport report;
};

/// Processes frame cursor + 1. All detections must belong to that frame.
void step_frame(TrackerState& state, int frame, std::span<const Detection> detections,
                const TrackingConfig& cfg, const ImageBounds& image);

/// Closes live segments, scores every segment for change points and runs FB
/// validation on the flagged ones. Drifted segments are cut at the split
/// frame. Segments are returned in segment_id order.
std::vector<TrackSegment> finalize(TrackerState& state, const DetectionStore& detections,
                                   const TrackingConfig& cfg, const ImageBounds& image);

/// Keeps segments whose mean likelihood is at least `min_avg_score`.
std::vector<TrackSegment> filter_segments(const std::vector<TrackSegment>& segments,
                                          double min_avg_score);

struct LinkResult {
    std::vector<TrajectoryRecord> records;  // sorted by (frame, identity)
    int links = 0;
};

/// Links segments across short gaps and emits their observed spans.
LinkResult link_segments(const std::vector<TrackSegment>& segments, const LinkConfig& link = {});

std::vector<TrajectoryRecord> combine_segments(const std::vector<TrackSegment>& segments,
                                               const LinkConfig& link = {});

struct TrackingOutput {
    std::vector<TrajectoryRecord> records;
    std::vector<TrackSegment> segments;  // after validation, before filtering
    RunReport report;
};

/// Runs the whole pipeline over one sequence. Timing covers tracking only.
TrackingOutput run_tracking(const std::vector<Detection>& detections, const SequenceInfo& info,
                            const TrackingConfig& cfg);

}  // namespace mcmot
