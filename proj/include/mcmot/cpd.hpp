#pragma once

// Two-stage change-point scoring on a likelihood time series.
//
// Stage 1 fits a sequentially discounting AR model (SDAR) online and scores
// each value by its negative log predictive density. Those scores are
// smoothed by a trailing moving average, fed through a second SDAR, smoothed
// again, and finally squashed to [0,1] against a discounted running mean and
// deviation of the stage-2 scores.

#include <cstddef>
#include <deque>
#include <vector>

namespace mcmot {

struct SdarConfig {
    int order = 2;              // AR order k
    double discount = 0.05;     // r
    double min_variance = 1e-4;

    void validate() const;
};

class SdarModel {
public:
    explicit SdarModel(SdarConfig config = {});

    /// Scores y under the current predictive Gaussian, then absorbs it.
    double update(double y);

    double predictive_mean() const;
    double predictive_variance() const;
    std::size_t observations() const { return seen_; }
    const std::vector<double>& coefficients() const { return coeffs_; }

private:
    double effective_discount() const;
    void solve_yule_walker();

    SdarConfig config_;
    double mean_ = 0.0;
    double variance_;
    std::vector<double> autocov_;  // C_0..C_k
    std::vector<double> coeffs_;   // w_1..w_k
    std::deque<double> history_;   // most recent first, at most k values
    std::size_t seen_ = 0;
};

struct SdarUpdate {
    SdarModel model;
    double outlier_score;
};

/// Value-semantics wrapper: returns the updated model and the score.
SdarUpdate sdar_update(SdarModel model, double y);

/// Trailing moving average over min(window, available) points.
std::vector<double> smooth_series(const std::vector<double>& scores, int window);

struct CpdConfig {
    SdarConfig sdar;
    int window = 5;                // T
    double threshold = 0.3;
    int refractory = 10;           // frames
    int warmup = 20;               // frames whose scores are masked to 0
    double score_offset = 5.0;     // shift of the logistic squashing, in deviations
    double min_deviation = 1.5;    // floor on the running deviation of stage-2 scores

    void validate() const;
};

struct LikelihoodSeries {
    int segment_id = 0;
    std::vector<int> frames;  // strictly increasing
    std::vector<double> values;
};

struct ChangePointSeries {
    int segment_id = 0;
    std::vector<int> frames;
    std::vector<double> raw_outlier_scores;  // stage 1
    std::vector<double> change_scores;       // normalized, in [0,1]
    std::vector<int> detected_points;        // frames
};

/// Streaming form of change_point_scores; batch scoring is a loop over push().
class ChangeFinder {
public:
    explicit ChangeFinder(CpdConfig config = {});

    struct Step {
        double stage1 = 0.0;
        double score = 0.0;
    };
    Step push(double value);

    std::size_t size() const { return pushed_; }

private:
    static double trailing_mean(const std::deque<double>& window);

    CpdConfig config_;
    SdarModel stage1_;
    SdarModel stage2_;
    std::deque<double> window1_;
    std::deque<double> window2_;
    double norm_mean_ = 0.0;
    double norm_var_ = 0.0;
    std::size_t norm_seen_ = 0;
    std::size_t pushed_ = 0;
};

ChangePointSeries change_point_scores(const LikelihoodSeries& series, const CpdConfig& config = {});

/// Upward crossings of `threshold`, each suppressing further detections for
/// `refractory` frames.
std::vector<int> detect_change_points(const ChangePointSeries& cps, double threshold = 0.3,
                                      int refractory = 10);

}  // namespace mcmot
