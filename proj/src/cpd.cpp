#include "mcmot/cpd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcmot/errors.hpp"

namespace mcmot {

void SdarConfig::validate() const {
    if (order < 1) throw ConfigError("SDAR order must be >= 1");
    if (!(discount > 0.0 && discount < 1.0)) throw ConfigError("SDAR discount must be in (0,1)");
    if (!(min_variance > 0.0)) throw ConfigError("SDAR min_variance must be > 0");
}

SdarModel::SdarModel(SdarConfig config)
    : config_(config),
      variance_(config.min_variance),
      autocov_(static_cast<std::size_t>(config.order) + 1, 0.0),
      coeffs_(static_cast<std::size_t>(config.order), 0.0) {
    config_.validate();
}

// Behaves as a plain running average until 1/n drops below r, so the first
// observations do not leave a long-lived imprint on the discounted moments.
double SdarModel::effective_discount() const {
    return std::max(config_.discount, 1.0 / static_cast<double>(seen_ + 1));
}

double SdarModel::predictive_mean() const {
    double pred = mean_;
    for (std::size_t i = 0; i < history_.size(); ++i) pred += coeffs_[i] * (history_[i] - mean_);
    return pred;
}

double SdarModel::predictive_variance() const { return std::max(variance_, config_.min_variance); }

void SdarModel::solve_yule_walker() {
    const std::size_t k = coeffs_.size();
    std::fill(coeffs_.begin(), coeffs_.end(), 0.0);
    const double c0 = autocov_[0];
    if (!(c0 > 1e-12)) return;

    // Levinson-Durbin recursion on the Toeplitz system.
    std::vector<double> a(k + 1, 0.0);
    std::vector<double> prev(k + 1, 0.0);
    double err = c0;
    std::size_t usable = std::min(k, history_.size());
    for (std::size_t m = 1; m <= usable; ++m) {
        double acc = autocov_[m];
        for (std::size_t j = 1; j < m; ++j) acc -= a[j] * autocov_[m - j];
        const double refl = acc / err;
        if (!std::isfinite(refl) || std::fabs(refl) >= 1.0) break;
        prev = a;
        a[m] = refl;
        for (std::size_t j = 1; j < m; ++j) a[j] = prev[j] - refl * prev[m - j];
        err *= 1.0 - refl * refl;
        if (!(err > 0.0)) break;
    }
    for (std::size_t i = 0; i < k; ++i) coeffs_[i] = a[i + 1];
}

double SdarModel::update(double y) {
    double score = 0.0;
    if (seen_ > 0) {
        const double v = predictive_variance();
        const double e = y - predictive_mean();
        score = 0.5 * std::log(2.0 * std::numbers::pi * v) + 0.5 * e * e / v;
    }

    const double r = effective_discount();
    mean_ = (1.0 - r) * mean_ + r * y;
    autocov_[0] = (1.0 - r) * autocov_[0] + r * (y - mean_) * (y - mean_);
    for (std::size_t j = 1; j < autocov_.size() && j <= history_.size(); ++j) {
        autocov_[j] = (1.0 - r) * autocov_[j] + r * (y - mean_) * (history_[j - 1] - mean_);
    }
    solve_yule_walker();
    const double fitted = predictive_mean();
    if (seen_ > 0) {
        variance_ = (1.0 - r) * variance_ + r * (y - fitted) * (y - fitted);
    }
    variance_ = std::max(variance_, config_.min_variance);

    history_.push_front(y);
    if (history_.size() > coeffs_.size()) history_.pop_back();
    ++seen_;
    return score;
}

SdarUpdate sdar_update(SdarModel model, double y) {
    const double score = model.update(y);
    return SdarUpdate{std::move(model), score};
}

std::vector<double> smooth_series(const std::vector<double>& scores, int window) {
    if (window < 1) throw ContractError("smooth_series: window must be >= 1");
    std::vector<double> out(scores.size());
    const std::size_t t = static_cast<std::size_t>(window);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const std::size_t first = i + 1 >= t ? i + 1 - t : 0;
        double sum = 0.0;
        for (std::size_t j = first; j <= i; ++j) sum += scores[j];
        out[i] = sum / static_cast<double>(i - first + 1);
    }
    return out;
}

void CpdConfig::validate() const {
    sdar.validate();
    if (window < 1) throw ConfigError("cpd window must be >= 1");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("cpd threshold must be in (0,1)");
    if (refractory < 0) throw ConfigError("cpd refractory must be >= 0");
    if (warmup < 0) throw ConfigError("cpd warm-up must be >= 0");
    if (!(min_deviation > 0.0)) throw ConfigError("cpd min_deviation must be > 0");
}

ChangeFinder::ChangeFinder(CpdConfig config)
    : config_(config), stage1_(config.sdar), stage2_(config.sdar) {
    config_.validate();
}

// Summed oldest-first, matching smooth_series exactly.
double ChangeFinder::trailing_mean(const std::deque<double>& window) {
    double sum = 0.0;
    for (double v : window) sum += v;
    return sum / static_cast<double>(window.size());
}

ChangeFinder::Step ChangeFinder::push(double value) {
    Step step;
    const std::size_t t = static_cast<std::size_t>(config_.window);

    step.stage1 = stage1_.update(value);
    window1_.push_back(step.stage1);
    if (window1_.size() > t) window1_.pop_front();
    const double smoothed1 = trailing_mean(window1_);

    const double stage2 = stage2_.update(smoothed1);
    window2_.push_back(stage2);
    if (window2_.size() > t) window2_.pop_front();
    const double smoothed2 = trailing_mean(window2_);

    ++pushed_;
    // Start-up transients would dominate the running deviation for a long
    // time, so the normalizer only sees post-warm-up scores.
    if (pushed_ <= static_cast<std::size_t>(config_.warmup)) return step;

    double normalized = 0.0;
    if (norm_seen_ > 0) {
        const double dev = std::max(std::sqrt(norm_var_), config_.min_deviation);
        const double z = (smoothed2 - norm_mean_) / dev;
        normalized = 1.0 / (1.0 + std::exp(-(z - config_.score_offset)));
    }
    const double r = std::max(config_.sdar.discount, 1.0 / static_cast<double>(norm_seen_ + 1));
    const double delta = smoothed2 - norm_mean_;
    norm_mean_ += r * delta;
    norm_var_ = (1.0 - r) * (norm_var_ + r * delta * delta);
    ++norm_seen_;

    step.score = normalized;
    return step;
}

ChangePointSeries change_point_scores(const LikelihoodSeries& series, const CpdConfig& config) {
    if (series.frames.size() != series.values.size()) {
        throw ContractError("likelihood series: frames and values differ in length");
    }
    for (std::size_t i = 1; i < series.frames.size(); ++i) {
        if (series.frames[i] <= series.frames[i - 1]) {
            throw ContractError("likelihood series: frames must be strictly increasing");
        }
    }
    ChangePointSeries out;
    out.segment_id = series.segment_id;
    out.frames = series.frames;
    out.raw_outlier_scores.reserve(series.values.size());
    out.change_scores.reserve(series.values.size());

    ChangeFinder finder(config);
    for (double v : series.values) {
        const auto step = finder.push(v);
        out.raw_outlier_scores.push_back(step.stage1);
        out.change_scores.push_back(step.score);
    }
    if (series.values.size() >= static_cast<std::size_t>(config.sdar.order) + 1) {
        out.detected_points = detect_change_points(out, config.threshold, config.refractory);
    }
    return out;
}

std::vector<int> detect_change_points(const ChangePointSeries& cps, double threshold,
                                      int refractory) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ContractError("detect_change_points: threshold must be in (0,1)");
    }
    std::vector<int> points;
    bool above = false;
    bool have_last = false;
    int last = 0;
    for (std::size_t i = 0; i < cps.change_scores.size(); ++i) {
        const bool now_above = cps.change_scores[i] > threshold;
        if (now_above && !above) {
            const int f = cps.frames[i];
            if (!have_last || f - last >= refractory) {
                points.push_back(f);
                last = f;
                have_last = true;
            }
        }
        above = now_above;
    }
    return points;
}

}  // namespace mcmot
