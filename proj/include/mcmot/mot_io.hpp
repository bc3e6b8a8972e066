#pragma once

// MOT-challenge style CSV files: detections, ground truth, tracker results,
// the seqinfo.ini sequence description, and an appearance sidecar that
// attaches per-detection color histograms.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mcmot/geometry.hpp"

namespace mcmot {

using Histogram = std::vector<double>;
using HistogramRef = std::shared_ptr<const Histogram>;

/// Class label used when a file carries no class information.
inline constexpr int kDefaultClass = 1;

struct Detection {
    int frame = 1;
    int class_id = kDefaultClass;
    BoundingBox box;
    double confidence = 0.0;
    HistogramRef appearance;  // optional, normalized
    int row_in_frame = 0;     // 0-based file order within the frame, keys the sidecar
};

struct SequenceInfo {
    std::string name;
    int frame_count = 1;
    int image_width = 1;
    int image_height = 1;
    double frame_rate = 30.0;
};

struct TrajectoryRecord {
    int frame = 1;
    int identity = 1;
    int class_id = kDefaultClass;
    BoundingBox box;
    double score = 1.0;
    bool ignore = false;  // ground-truth rows with flag 0
};

/// Maps the raw token of the 8th detection column to a class id.
using ClassMap = std::map<std::string, int>;

struct DetectionFile {
    std::vector<Detection> detections;  // sorted by (frame asc, confidence desc)
    std::size_t rejected_rows = 0;      // rows dropped for non-positive extent
    bool rescaled = false;              // confidences were min-max mapped to [0,1]
    double raw_min_confidence = 0.0;
    double raw_max_confidence = 0.0;
};

/// Whether the 8th CSV column carries the class id or the MOT placeholder -1.
enum class ClassColumn { placeholder, class_id };

DetectionFile parse_detections(std::istream& in, const ClassMap* class_map = nullptr);
DetectionFile parse_detections(const std::filesystem::path& path,
                               const ClassMap* class_map = nullptr);

/// Reads `frame,det_index,b1..bK` rows and attaches normalized histograms to
/// the matching detections (det_index is the row order within the frame).
/// Returns the number of detections that received a histogram.
std::size_t attach_appearance(std::vector<Detection>& detections, std::istream& in);
std::size_t attach_appearance(std::vector<Detection>& detections,
                              const std::filesystem::path& path);

std::vector<TrajectoryRecord> parse_ground_truth(std::istream& in);
std::vector<TrajectoryRecord> parse_ground_truth(const std::filesystem::path& path);

/// Tracker output in the result layout. Rows are returned sorted by (frame, id).
std::vector<TrajectoryRecord> parse_trajectories(std::istream& in);
std::vector<TrajectoryRecord> parse_trajectories(const std::filesystem::path& path);

void write_trajectories(const std::vector<TrajectoryRecord>& records, std::ostream& out,
                        ClassColumn layout = ClassColumn::placeholder);
void write_trajectories(const std::vector<TrajectoryRecord>& records,
                        const std::filesystem::path& path,
                        ClassColumn layout = ClassColumn::placeholder);

void write_ground_truth(const std::vector<TrajectoryRecord>& records, std::ostream& out);
void write_ground_truth(const std::vector<TrajectoryRecord>& records,
                        const std::filesystem::path& path);

void write_detections(const std::vector<Detection>& detections, std::ostream& out,
                      ClassColumn layout = ClassColumn::placeholder);
void write_detections(const std::vector<Detection>& detections,
                      const std::filesystem::path& path,
                      ClassColumn layout = ClassColumn::placeholder);

void write_appearance_sidecar(const std::vector<Detection>& detections, std::ostream& out);
void write_appearance_sidecar(const std::vector<Detection>& detections,
                              const std::filesystem::path& path);

SequenceInfo load_sequence_info(std::istream& in);
SequenceInfo load_sequence_info(const std::filesystem::path& path);
void write_sequence_info(const SequenceInfo& info, const std::filesystem::path& path);

/// Buckets detections by frame; index 0 is unused so that frames stay 1-based.
std::vector<std::vector<Detection>> group_by_frame(const std::vector<Detection>& detections,
                                                   int frame_count);

}  // namespace mcmot
