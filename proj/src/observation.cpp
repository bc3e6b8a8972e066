#include "mcmot/observation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "mcmot/errors.hpp"

namespace mcmot {

namespace {

constexpr std::size_t kMaxProviders = 8;

// eps + (1 - eps) * x written so that x == 1 maps to exactly 1.
double soft_floor(double x, double floor) { return 1.0 - (1.0 - floor) * (1.0 - x); }

void check_histogram(std::span<const double> h, const char* what) {
    double sum = 0.0;
    for (double v : h) {
        if (!(v >= 0.0)) throw ContractError(std::string(what) + ": negative histogram entry");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-6) {
        throw ContractError(std::string(what) + ": histogram does not sum to 1");
    }
}

}  // namespace

void ObservationParams::validate() const {
    if (!(floor >= 0.0 && floor < 1.0)) throw ConfigError("observation floor must be in [0,1)");
    if (!(sigma_color > 0.0)) throw ConfigError("sigma_color must be > 0");
    if (!(sigma_motion > 0.0)) throw ConfigError("sigma_motion must be > 0");
    if (!(gate_iou > 0.0 && gate_iou < 1.0)) throw ConfigError("gate_iou must be in (0,1)");
}

DetectorWeightSet::DetectorWeightSet(std::vector<std::pair<std::string, double>> weights)
    : weights_(std::move(weights)) {
    double sum = 0.0;
    for (const auto& [name, w] : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ConfigError("detector weight for '" + name + "' must be >= 0");
        }
        sum += w;
    }
    if (weights_.empty() || std::fabs(sum - 1.0) > 1e-9) {
        throw ConfigError("detector weights must sum to 1");
    }
}

DetectorWeightSet DetectorWeightSet::equal(const std::vector<std::string>& names) {
    if (names.empty()) throw ConfigError("detector weight set needs at least one provider");
    std::vector<std::pair<std::string, double>> w;
    const double each = 1.0 / static_cast<double>(names.size());
    for (const auto& n : names) w.emplace_back(n, each);
    // Rounding of 1/n can leave the sum a few ulps away from 1; absorb it in the last entry.
    double rest = 1.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) rest -= w[i].second;
    w.back().second = rest;
    return DetectorWeightSet(std::move(w));
}

bool DetectorWeightSet::contains(const std::string& name) const {
    return std::any_of(weights_.begin(), weights_.end(),
                       [&](const auto& e) { return e.first == name; });
}

double DetectorWeightSet::weight(const std::string& name) const {
    for (const auto& [n, w] : weights_) {
        if (n == name) return w;
    }
    throw ContractError("no weight for provider '" + name + "'");
}

DetectionMatch detection_likelihood(const ObjectState& state,
                                    std::span<const Detection> detections, double gate_iou,
                                    double floor) {
    if (!(gate_iou > 0.0 && gate_iou < 1.0)) throw ContractError("gate_iou must be in (0,1)");
    DetectionMatch best{floor, -1, 0.0};
    double best_score = -1.0;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        const auto& d = detections[i];
        if (d.class_id != state.class_id) continue;
        const double overlap = iou(state.box, d.box);
        if (overlap < gate_iou) continue;
        const double score = d.confidence * overlap;
        if (score > best_score) {
            best_score = score;
            best.index = static_cast<int>(i);
            best.iou = overlap;
        }
    }
    if (best.index >= 0) best.likelihood = soft_floor(best_score, floor);
    return best;
}

double bhattacharyya_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ContractError("bhattacharyya_distance: length mismatch");
    check_histogram(p, "bhattacharyya_distance");
    check_histogram(q, "bhattacharyya_distance");
    const double bc = kernels::bhattacharyya_coefficient(p, q);
    return std::sqrt(std::clamp(1.0 - bc, 0.0, 1.0));
}

double appearance_likelihood(const ObjectState& state, std::span<const double> candidate_hist,
                             double sigma_color) {
    if (!state.appearance_ref) return 1.0;
    if (state.appearance_ref->size() != candidate_hist.size()) {
        throw ContractError("appearance_likelihood: histogram length mismatch");
    }
    const double d = bhattacharyya_distance(*state.appearance_ref, candidate_hist);
    return std::exp(-(d * d) / (sigma_color * sigma_color));
}

double motion_likelihood(const ObjectState& state, const BoundingBox& predicted,
                         double sigma_motion) {
    const double miss = 1.0 - iou(state.box, predicted);
    return std::exp(-(miss * miss) / (sigma_motion * sigma_motion));
}

double fuse_values(std::span<const double> likelihoods, std::span<const double> weights,
                   double floor) {
    if (likelihoods.size() != weights.size()) throw ContractError("fuse: size mismatch");
    if (!(floor >= 0.0 && floor < 1.0)) throw ContractError("fuse: floor must be in [0,1)");
    double log_sum = 0.0;
    for (std::size_t i = 0; i < likelihoods.size(); ++i) {
        const double l = likelihoods[i];
        if (!(l > 0.0 && l <= 1.0)) throw ContractError("fuse: likelihood outside (0,1]");
        if (weights[i] == 0.0) continue;
        log_sum += weights[i] * std::log(soft_floor(l, floor));
    }
    return std::exp(log_sum);
}

FusedLikelihood fuse_likelihoods(const std::map<std::string, double>& per_detector,
                                 const DetectorWeightSet& weights, double floor) {
    std::vector<double> l;
    std::vector<double> w;
    for (const auto& [name, value] : per_detector) {
        l.push_back(value);
        w.push_back(weights.weight(name));
    }
    for (const auto& [name, weight] : weights.entries()) {
        if (weight > 0.0 && !per_detector.contains(name)) {
            throw ContractError("fuse: missing likelihood for provider '" + name + "'");
        }
    }
    return FusedLikelihood{fuse_values(l, w, floor), per_detector};
}

FrameObservations::FrameObservations(std::span<const Detection> detections)
    : detections_(detections) {
    for (std::size_t i = 0; i < detections.size(); ++i) {
        const auto& d = detections[i];
        auto it = std::find_if(buckets_.begin(), buckets_.end(),
                               [&](const ClassBucket& b) { return b.class_id == d.class_id; });
        if (it == buckets_.end()) {
            buckets_.push_back(ClassBucket{});
            it = std::prev(buckets_.end());
            it->class_id = d.class_id;
        }
        it->boxes.push_back(d.box);
        it->confidence.push_back(d.confidence);
        it->index.push_back(static_cast<int>(i));
    }
    scratch_.resize(detections.size());
}

const FrameObservations::ClassBucket* FrameObservations::bucket(int class_id) const {
    for (const auto& b : buckets_) {
        if (b.class_id == class_id) return &b;
    }
    return nullptr;
}

DetectionMatch FrameObservations::best_match(const BoundingBox& box, int class_id,
                                             double gate_iou, double floor) const {
    DetectionMatch best{floor, -1, 0.0};
    const ClassBucket* b = bucket(class_id);
    if (!b) return best;
    const std::size_t n = b->boxes.size();
    kernels::iou_one_to_many(box, b->boxes, std::span<double>(scratch_.data(), n));
    double best_score = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (scratch_[i] < gate_iou) continue;
        const double score = b->confidence[i] * scratch_[i];
        if (score > best_score) {
            best_score = score;
            best.index = b->index[i];
            best.iou = scratch_[i];
        }
    }
    if (best.index >= 0) best.likelihood = soft_floor(best_score, floor);
    return best;
}

double DetectorProvider::evaluate(const ObjectState&, const ObservationContext& ctx) const {
    return ctx.match.likelihood;
}

double ColorProvider::evaluate(const ObjectState& candidate, const ObservationContext& ctx) const {
    if (ctx.match.index < 0 || !candidate.appearance_ref) return 1.0;
    const auto& det = ctx.frame.detections()[static_cast<std::size_t>(ctx.match.index)];
    if (!det.appearance) return 1.0;
    return appearance_likelihood(candidate, *det.appearance, ctx.params.sigma_color);
}

double MotionProvider::evaluate(const ObjectState& candidate, const ObservationContext& ctx) const {
    return motion_likelihood(candidate, ctx.predicted, ctx.params.sigma_motion);
}

ProviderRegistry& ProviderRegistry::add(std::unique_ptr<LikelihoodProvider> provider) {
    if (!provider) throw ContractError("null likelihood provider");
    for (const auto& p : providers_) {
        if (p->name() == provider->name()) {
            throw ConfigError("duplicate likelihood provider '" + provider->name() + "'");
        }
    }
    if (providers_.size() == kMaxProviders) throw ConfigError("too many likelihood providers");
    providers_.push_back(std::move(provider));
    return *this;
}

std::vector<std::string> ProviderRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& p : providers_) out.push_back(p->name());
    return out;
}

ProviderRegistry ProviderRegistry::standard() {
    ProviderRegistry r;
    r.add(std::make_unique<DetectorProvider>());
    r.add(std::make_unique<ColorProvider>());
    r.add(std::make_unique<MotionProvider>());
    return r;
}

ObservationModel::ObservationModel(ProviderRegistry providers, DetectorWeightSet weights,
                                   ObservationParams params)
    : providers_(std::move(providers)), weights_(std::move(weights)), params_(params) {
    params_.validate();
    for (std::size_t i = 0; i < providers_.size(); ++i) {
        const auto name = providers_.at(i).name();
        if (!weights_.contains(name)) {
            throw ConfigError("no detector weight for provider '" + name + "'");
        }
        aligned_weights_.push_back(weights_.weight(name));
    }
    const auto names = providers_.names();
    for (const auto& [name, w] : weights_.entries()) {
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            throw ConfigError("detector weight given for unknown provider '" + name + "'");
        }
    }
}

ObservationModel ObservationModel::standard(const ObservationParams& params,
                                            const DetectorWeightSet& weights) {
    auto registry = ProviderRegistry::standard();
    auto w = weights.entries().empty() ? DetectorWeightSet::equal(registry.names()) : weights;
    return ObservationModel(std::move(registry), std::move(w), params);
}

ObservationModel::Evaluation ObservationModel::evaluate(const ObjectState& candidate,
                                                        const FrameObservations& frame,
                                                        const BoundingBox& predicted) const {
    Evaluation ev;
    ev.match = frame.best_match(candidate.box, candidate.class_id, params_.gate_iou, params_.floor);
    const ObservationContext ctx{frame, predicted, ev.match, params_};
    std::array<double, kMaxProviders> values{};
    const std::size_t n = providers_.size();
    for (std::size_t i = 0; i < n; ++i) values[i] = providers_.at(i).evaluate(candidate, ctx);
    ev.fused = fuse_values(std::span<const double>(values.data(), n), aligned_weights_,
                           params_.floor);
    return ev;
}

FusedLikelihood ObservationModel::evaluate_detailed(const ObjectState& candidate,
                                                    const FrameObservations& frame,
                                                    const BoundingBox& predicted) const {
    const auto match =
        frame.best_match(candidate.box, candidate.class_id, params_.gate_iou, params_.floor);
    const ObservationContext ctx{frame, predicted, match, params_};
    std::map<std::string, double> per;
    for (std::size_t i = 0; i < providers_.size(); ++i) {
        per[providers_.at(i).name()] = providers_.at(i).evaluate(candidate, ctx);
    }
    return fuse_likelihoods(per, weights_, params_.floor);
}

}  // namespace mcmot
