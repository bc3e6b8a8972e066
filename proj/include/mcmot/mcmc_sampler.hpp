#pragma once

// Data-driven Metropolis-Hastings over scene particles.
//
// One object is moved per iteration. Its proposal is a mixture of a motion
// kernel (Gaussian around the prediction of a uniformly drawn previous-frame
// sample) and a data kernel (Gaussian around the associated detection):
//
//   q(o') = l1 * (1/N) sum_s N(o'; pred(o_s), S_motion) + l2 * N(o'; D, S_data)
//
// The target is fused likelihood times the same motion mixture. Because the
// proposal does not depend on the current state, the reverse density is the
// mixture evaluated at the current object.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mcmot/motion_entity.hpp"
#include "mcmot/observation.hpp"

namespace mcmot {

using Rng = std::mt19937_64;

/// splitmix64 finalizer over (seed, stream); used to derive per-frame streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);
Rng stream_rng(std::uint64_t seed, std::uint64_t stream);

struct SceneParticle {
    int frame = 0;
    std::vector<ObjectState> states;  // sorted by identity, identities unique

    const ObjectState* find(int identity) const;
};

struct ChainConfig {
    int n_samples = 100;
    int burn_in = 30;
    double lambda_motion = 0.5;  // lambda_data is the complement
    double sigma_data = 4.0;     // pixels, center spread of the data kernel
    double likelihood_power = 100.0;  // inverse temperature on the fused likelihood in the target
    std::uint64_t seed = 0;

    double lambda_data() const { return 1.0 - lambda_motion; }
    void validate() const;
};

/// min(1, [L' * M' * q_rev] / [L * M * q_fwd]).
double acceptance_ratio(double fused_current, double fused_candidate, double q_forward,
                        double q_reverse, double motion_current, double motion_candidate);

/// Log-domain acceptance used by the engine; tolerates -inf targets.
double log_acceptance(double log_target_current, double log_target_candidate,
                      double log_q_forward, double log_q_reverse);

template <class State>
struct ProposedMove {
    State candidate;
    double log_likelihood = 0.0;
    double log_prior = 0.0;
    double log_q_forward = 0.0;
    double log_q_reverse = 0.0;
};

template <class State>
struct ChainRun {
    std::vector<State> samples;  // retained samples, burn-in removed
    State map_state{};           // highest log likelihood of every state visited, init included
    double map_log_likelihood = -std::numeric_limits<double>::infinity();
    std::size_t accepted = 0;
};

/// Generic engine. `Model` supplies State, log_likelihood(State),
/// log_prior(State) and propose(State, Rng&) -> ProposedMove<State>.
template <class Model>
ChainRun<typename Model::State> run_metropolis_hastings(Model& model,
                                                         typename Model::State init,
                                                         int burn_in, int n_samples, Rng& rng) {
    using State = typename Model::State;
    ChainRun<State> run;
    run.samples.reserve(static_cast<std::size_t>(n_samples));
    State current = std::move(init);
    double ll = model.log_likelihood(current);
    double lp = model.log_prior(current);
    run.map_state = current;
    run.map_log_likelihood = ll;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int total = burn_in + n_samples;
    for (int it = 0; it < total; ++it) {
        ProposedMove<State> move = model.propose(current, rng);
        const double log_a = log_acceptance(ll + lp, move.log_likelihood + move.log_prior,
                                            move.log_q_forward, move.log_q_reverse);
        if (unit(rng) < std::exp(log_a)) {
            current = std::move(move.candidate);
            ll = move.log_likelihood;
            lp = move.log_prior;
            ++run.accepted;
            if (ll > run.map_log_likelihood) {
                run.map_state = current;
                run.map_log_likelihood = ll;
            }
        }
        if (it >= burn_in) run.samples.push_back(current);
    }
    return run;
}

/// Per-frame inputs the tracking model needs besides the particles.
struct SceneContext {
    const ObservationModel* observation = nullptr;
    MotionModel motion;
    std::map<int, BoundingBox> predicted;          // motion-cue reference; defaults to init box
    std::map<int, BoundingBox> association;        // D_{id,t}: associated detection box
    std::optional<ImageBounds> canvas;             // boxes must stay inside when set
    double canvas_margin = 0.1;                    // fraction of the image size
};

struct TrackingChainState {
    SceneParticle particle;
    std::vector<double> object_log_likelihood;
    std::vector<double> object_log_prior;
    std::vector<double> object_log_q;
    double log_likelihood = 0.0;
    double log_prior = 0.0;
};

struct TrackingMove {
    TrackingChainState candidate;
    int chosen_identity = 0;
    bool motion_component = true;
    double log_q_forward = 0.0;
    double log_q_reverse = 0.0;

    double q_forward() const { return std::exp(log_q_forward); }
    double q_reverse() const { return std::exp(log_q_reverse); }
};

class TrackingChainModel {
public:
    using State = TrackingChainState;

    TrackingChainModel(const SceneParticle& init, std::span<const SceneParticle> prev_samples,
                       std::span<const Detection> frame_detections, const SceneContext& context,
                       const ChainConfig& config);

    State initial_state() const;

    TrackingMove propose_move(const State& current, Rng& rng);
    ProposedMove<State> propose(const State& current, Rng& rng);

    /// Tempered scene log likelihood used by the acceptance rule. The stored
    /// per-object values stay untempered.
    double log_likelihood(const State& s) const { return config_.likelihood_power * s.log_likelihood; }
    double log_prior(const State& s) const { return s.log_prior; }

    /// log q(box) for object slot `object` (mixture of motion and data kernels).
    double log_proposal_density(std::size_t object, const BoundingBox& box) const;
    /// log (1/N) sum_s motion_prior(box | pred(o_s)).
    double log_motion_mixture(std::size_t object, const BoundingBox& box) const;
    /// log fused likelihood, -inf outside the canvas.
    double object_log_likelihood(std::size_t object, const ObjectState& state) const;

    std::size_t object_count() const { return objects_.size(); }

private:
    struct ObjectSlot {
        int identity = 0;
        kernels::GaussianMeans motion_means;
        std::optional<BoundingBox> data_mean;
        BoundingBox predicted;
    };

    bool inside_canvas(const BoundingBox& box) const;
    BoundingBox sample_box(double cx, double cy, double lw, double lh, double sigma_pos,
                           double sigma_size, Rng& rng);

    SceneParticle init_;
    FrameObservations frame_;
    const ObservationModel* observation_;
    MotionModel motion_;
    ChainConfig config_;
    std::optional<ImageBounds> canvas_;
    double canvas_margin_;
    std::vector<ObjectSlot> objects_;
    double log_norm_motion_;
    double log_norm_data_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    mutable std::vector<double> scratch_;
};

struct PosteriorEstimate {
    SceneParticle map_particle;
    std::map<int, BoundingBox> per_object_mean;
    std::map<int, double> per_object_likelihood;  // fused likelihood of the MAP state
};

struct ChainResult {
    std::vector<SceneParticle> samples;
    PosteriorEstimate estimate;
    std::size_t accepted = 0;
};

/// B + N iterations seeded from (config.seed, init.frame). Deterministic.
ChainResult run_chain(const SceneParticle& init, std::span<const SceneParticle> prev_samples,
                      std::span<const Detection> frame_detections, const SceneContext& context,
                      const ChainConfig& config);

}  // namespace mcmot
