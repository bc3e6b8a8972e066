#pragma once

// CLEAR-MOT evaluation: per-frame matching at IoU >= 0.5 with match
// persistence and optimal assignment, aggregated into MOTA, MOTP, MT/ML,
// fragmentations, identity switches and false alarms per frame.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcmot/mot_io.hpp"

namespace mcmot {

struct FrameBox {
    int id = 0;
    BoundingBox box;
    bool ignore = false;
};

struct MatchedPair {
    int gt_id = 0;
    int result_id = 0;
    double iou = 0.0;
};

struct FrameMatching {
    std::vector<MatchedPair> matches;
    std::vector<int> unmatched_gt;       // ids, ignored gt excluded
    std::vector<int> unmatched_results;  // ids counted as false positives
    int fp = 0;
    int fn = 0;
    int idsw = 0;
};

/// `prior` maps a gt id to the result id it was last matched with. Pairs of
/// `prior` that still overlap by at least `iou_threshold` are kept before the
/// remaining boxes are assigned to maximize total IoU. A match whose result
/// id differs from the gt's prior entry is an identity switch. Results that
/// overlap an ignored gt box are neither matches nor false positives.
FrameMatching match_frame(std::span<const FrameBox> gt, std::span<const FrameBox> results,
                          const std::map<int, int>& prior, double iou_threshold = 0.5);

struct MetricSummary {
    double mota = 1.0;
    double motp = 0.0;
    long fp = 0;
    long fn = 0;
    long idsw = 0;
    long frag = 0;
    double mt = 0.0;
    double ml = 0.0;
    double faf = 0.0;

    long gt_boxes = 0;
    long matches = 0;
    double iou_sum = 0.0;
    long frames = 0;
    long gt_tracks = 0;
    long mt_tracks = 0;
    long ml_tracks = 0;

    /// Recomputes the ratio fields from the counts.
    void finish();
    MetricSummary& operator+=(const MetricSummary& other);
};

struct ClassMacro {
    double mota = 0.0;
    double motp = 0.0;
    double mt = 0.0;
    double ml = 0.0;
    double faf = 0.0;
    int classes = 0;
};

struct MetricReport {
    MetricSummary aggregate;
    std::vector<std::pair<std::string, MetricSummary>> per_sequence;
    std::map<int, MetricSummary> per_class;  // class-aware mode only
    std::optional<ClassMacro> macro;         // class-aware mode only
};

struct EvalOptions {
    double iou_threshold = 0.5;
    bool class_aware = false;
    int jobs = 1;  // sequences evaluated in parallel
};

struct SequenceData {
    SequenceInfo info;
    std::vector<TrajectoryRecord> gt;
    std::vector<TrajectoryRecord> results;
};

/// Throws ConfigError when a record lies outside its sequence or a
/// (frame, identity) pair repeats.
MetricReport compute_metrics(std::span<const SequenceData> sequences,
                             const EvalOptions& options = {});

MetricReport compute_metrics(const std::vector<TrajectoryRecord>& gt,
                             const std::vector<TrajectoryRecord>& results,
                             const SequenceInfo& info, const EvalOptions& options = {});

/// Human-readable table in the usual column order.
std::string format_report(const MetricReport& report);

}  // namespace mcmot
