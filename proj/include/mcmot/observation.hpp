#pragma once

// Per-detector likelihood providers and their ensemble fusion.
//
// Each provider scores how well a candidate object state is explained by one
// cue (detector responses, color appearance, motion agreement). The fused
// value is exp(sum_e w_e * log(eps + (1 - eps) * L_e)): a weighted geometric
// mean with a soft floor eps, so one silent detector cannot zero the product.

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcmot/kernels.hpp"
#include "mcmot/mot_io.hpp"

namespace mcmot {

struct ObjectState {
    int identity = 1;
    int class_id = kDefaultClass;
    BoundingBox box;
    double vx = 0.0;  // pixels per frame
    double vy = 0.0;
    HistogramRef appearance_ref;  // reference target model, optional
};

struct ObservationParams {
    double floor = 0.01;        // soft floor for detection likelihood and fusion
    double sigma_color = 0.5;
    double sigma_motion = 0.7;
    double gate_iou = 0.3;

    void validate() const;
};

/// Non-negative weights over named providers, summing to one.
class DetectorWeightSet {
public:
    DetectorWeightSet() = default;
    explicit DetectorWeightSet(std::vector<std::pair<std::string, double>> weights);

    static DetectorWeightSet equal(const std::vector<std::string>& names);

    bool contains(const std::string& name) const;
    double weight(const std::string& name) const;
    const std::vector<std::pair<std::string, double>>& entries() const { return weights_; }

private:
    std::vector<std::pair<std::string, double>> weights_;
};

struct FusedLikelihood {
    double value = 1.0;
    std::map<std::string, double> per_detector;
};

/// Best gating detection for a box. `index` is -1 when nothing gates in.
struct DetectionMatch {
    double likelihood = 0.0;
    int index = -1;
    double iou = 0.0;
};

DetectionMatch detection_likelihood(const ObjectState& state,
                                    std::span<const Detection> detections, double gate_iou,
                                    double floor = 0.01);

double bhattacharyya_distance(std::span<const double> p, std::span<const double> q);

/// 1 when the state carries no reference histogram (the provider abstains).
double appearance_likelihood(const ObjectState& state, std::span<const double> candidate_hist,
                             double sigma_color = 0.5);

double motion_likelihood(const ObjectState& state, const BoundingBox& predicted,
                         double sigma_motion = 0.7);

FusedLikelihood fuse_likelihoods(const std::map<std::string, double>& per_detector,
                                 const DetectorWeightSet& weights, double floor);

/// Allocation-free fusion over parallel arrays (hot path of the sampler).
double fuse_values(std::span<const double> likelihoods, std::span<const double> weights,
                   double floor);

/// One frame's detections, bucketed by class into SoA arrays for the batched
/// IoU kernel.
class FrameObservations {
public:
    FrameObservations() = default;
    explicit FrameObservations(std::span<const Detection> detections);

    std::span<const Detection> detections() const { return detections_; }

    /// Highest confidence * IoU over same-class detections with IoU >= gate.
    DetectionMatch best_match(const BoundingBox& box, int class_id, double gate_iou,
                              double floor) const;

private:
    struct ClassBucket {
        int class_id = 0;
        kernels::BoxArray boxes;
        std::vector<double> confidence;
        std::vector<int> index;
    };
    const ClassBucket* bucket(int class_id) const;

    std::span<const Detection> detections_;
    std::vector<ClassBucket> buckets_;
    mutable std::vector<double> scratch_;
};

struct ObservationContext {
    const FrameObservations& frame;
    const BoundingBox& predicted;
    const DetectionMatch& match;  // best gating detection for the candidate
    const ObservationParams& params;
};

class LikelihoodProvider {
public:
    virtual ~LikelihoodProvider() = default;
    virtual std::string name() const = 0;
    /// Likelihood in (0,1] of `candidate` given the frame data.
    virtual double evaluate(const ObjectState& candidate, const ObservationContext& ctx) const = 0;
};

/// File-fed detector responses (stands in for the global/local CNN detectors).
class DetectorProvider final : public LikelihoodProvider {
public:
    std::string name() const override { return "detector"; }
    double evaluate(const ObjectState& candidate, const ObservationContext& ctx) const override;
};

/// Color histogram agreement between the matched detection and the reference.
class ColorProvider final : public LikelihoodProvider {
public:
    std::string name() const override { return "color"; }
    double evaluate(const ObjectState& candidate, const ObservationContext& ctx) const override;
};

/// Agreement of the candidate with the constant-velocity prediction.
class MotionProvider final : public LikelihoodProvider {
public:
    std::string name() const override { return "motion"; }
    double evaluate(const ObjectState& candidate, const ObservationContext& ctx) const override;
};

class ProviderRegistry {
public:
    ProviderRegistry& add(std::unique_ptr<LikelihoodProvider> provider);
    std::size_t size() const { return providers_.size(); }
    const LikelihoodProvider& at(std::size_t i) const { return *providers_[i]; }
    std::vector<std::string> names() const;

    /// detector, color and motion providers.
    static ProviderRegistry standard();

private:
    std::vector<std::shared_ptr<const LikelihoodProvider>> providers_;
};

class ObservationModel {
public:
    ObservationModel(ProviderRegistry providers, DetectorWeightSet weights,
                     ObservationParams params);

    /// Standard providers with the given weights (equal weights when empty).
    static ObservationModel standard(const ObservationParams& params,
                                     const DetectorWeightSet& weights = {});

    struct Evaluation {
        double fused = 1.0;
        DetectionMatch match;
    };

    Evaluation evaluate(const ObjectState& candidate, const FrameObservations& frame,
                        const BoundingBox& predicted) const;

    FusedLikelihood evaluate_detailed(const ObjectState& candidate, const FrameObservations& frame,
                                      const BoundingBox& predicted) const;

    const ObservationParams& params() const { return params_; }
    const DetectorWeightSet& weights() const { return weights_; }

private:
    ProviderRegistry providers_;
    DetectorWeightSet weights_;
    std::vector<double> aligned_weights_;
    ObservationParams params_;
};

}  // namespace mcmot
