#include "mcmot/mcmc_sampler.hpp"

#include <algorithm>
#include <numbers>

#include "mcmot/errors.hpp"

namespace mcmot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double log_sum_exp(std::span<const double> xs) {
    double hi = kNegInf;
    for (double x : xs) hi = std::max(hi, x);
    if (hi == kNegInf) return kNegInf;
    double sum = 0.0;
    for (double x : xs) sum += std::exp(x - hi);
    return hi + std::log(sum);
}

double gaussian4_log_norm(double sigma_pos, double sigma_size) {
    return -2.0 * std::log(2.0 * std::numbers::pi) - 2.0 * std::log(sigma_pos) -
           2.0 * std::log(sigma_size);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng stream_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(mix_seed(seed, stream)); }

const ObjectState* SceneParticle::find(int identity) const {
    const auto it = std::lower_bound(
        states.begin(), states.end(), identity,
        [](const ObjectState& s, int id) { return s.identity < id; });
    return it != states.end() && it->identity == identity ? &*it : nullptr;
}

void ChainConfig::validate() const {
    if (n_samples < 1) throw ConfigError("particles (N) must be >= 1");
    if (burn_in < 0) throw ConfigError("burn-in (B) must be >= 0");
    if (!(lambda_motion >= 0.0 && lambda_motion <= 1.0)) {
        throw ConfigError("lambda-motion must be in [0,1]");
    }
    if (!(sigma_data > 0.0)) throw ConfigError("sigma_data must be > 0");
    if (!(likelihood_power > 0.0)) throw ConfigError("likelihood_power must be > 0");
}

double acceptance_ratio(double fused_current, double fused_candidate, double q_forward,
                        double q_reverse, double motion_current, double motion_candidate) {
    for (double d : {fused_current, fused_candidate, q_forward, q_reverse, motion_current,
                     motion_candidate}) {
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw ContractError("acceptance_ratio: densities must be positive and finite");
        }
    }
    const double num = fused_candidate * motion_candidate * q_reverse;
    const double den = fused_current * motion_current * q_forward;
    return std::min(1.0, num / den);
}

double log_acceptance(double log_target_current, double log_target_candidate,
                      double log_q_forward, double log_q_reverse) {
    if (log_target_candidate == kNegInf) return kNegInf;
    if (log_target_current == kNegInf) return 0.0;
    const double r = (log_target_candidate + log_q_reverse) - (log_target_current + log_q_forward);
    if (std::isnan(r)) return kNegInf;
    return std::min(0.0, r);
}

TrackingChainModel::TrackingChainModel(const SceneParticle& init,
                                       std::span<const SceneParticle> prev_samples,
                                       std::span<const Detection> frame_detections,
                                       const SceneContext& context, const ChainConfig& config)
    : init_(init),
      frame_(frame_detections),
      observation_(context.observation),
      motion_(context.motion),
      config_(config),
      canvas_(context.canvas),
      canvas_margin_(context.canvas_margin) {
    if (!observation_) throw ContractError("SceneContext without an observation model");
    config_.validate();
    motion_.validate();
    log_norm_motion_ = gaussian4_log_norm(motion_.process_sigma_pos, motion_.process_sigma_size);
    log_norm_data_ = gaussian4_log_norm(config_.sigma_data, motion_.process_sigma_size);

    for (std::size_t i = 1; i < init_.states.size(); ++i) {
        if (init_.states[i - 1].identity >= init_.states[i].identity) {
            throw ContractError("scene particle identities must be unique and sorted");
        }
    }

    objects_.reserve(init_.states.size());
    std::size_t max_means = 1;
    for (const auto& s : init_.states) {
        ObjectSlot slot;
        slot.identity = s.identity;
        slot.motion_means.reserve(prev_samples.size());
        for (const auto& prev : prev_samples) {
            if (const ObjectState* o = prev.find(s.identity)) {
                const BoundingBox p = predict_state(*o, motion_);
                slot.motion_means.push_back(p.center_x(), p.center_y(), std::log(p.width),
                                            std::log(p.height));
            }
        }
        if (slot.motion_means.empty()) {
            // Newborn: no history, the prior is centered on the initial box.
            slot.motion_means.push_back(s.box.center_x(), s.box.center_y(), std::log(s.box.width),
                                        std::log(s.box.height));
        }
        max_means = std::max(max_means, slot.motion_means.size());
        if (const auto it = context.association.find(s.identity); it != context.association.end()) {
            slot.data_mean = it->second;
        }
        const auto pit = context.predicted.find(s.identity);
        slot.predicted = pit != context.predicted.end() ? pit->second : s.box;
        objects_.push_back(std::move(slot));
    }
    scratch_.resize(max_means);
}

bool TrackingChainModel::inside_canvas(const BoundingBox& box) const {
    if (!canvas_) return true;
    const double mx = canvas_margin_ * canvas_->width;
    const double my = canvas_margin_ * canvas_->height;
    return box.left >= -mx && box.top >= -my && box.right() <= canvas_->width + mx &&
           box.bottom() <= canvas_->height + my;
}

double TrackingChainModel::object_log_likelihood(std::size_t object, const ObjectState& state) const {
    if (!state.box.valid() || !inside_canvas(state.box)) return kNegInf;
    const auto ev = observation_->evaluate(state, frame_, objects_[object].predicted);
    return std::log(ev.fused);
}

double TrackingChainModel::log_motion_mixture(std::size_t object, const BoundingBox& box) const {
    const auto& means = objects_[object].motion_means;
    const double vp = motion_.process_sigma_pos * motion_.process_sigma_pos;
    const double vs = motion_.process_sigma_size * motion_.process_sigma_size;
    const kernels::GaussianQuery q{box.center_x(), box.center_y(), std::log(box.width),
                                   std::log(box.height), 1.0 / vp, 1.0 / vs};
    const std::span<double> out(scratch_.data(), means.size());
    kernels::gaussian_exponents(q, means, out);
    return log_sum_exp(out) - std::log(static_cast<double>(means.size())) + log_norm_motion_;
}

double TrackingChainModel::log_proposal_density(std::size_t object, const BoundingBox& box) const {
    const auto& slot = objects_[object];
    const double motion = log_motion_mixture(object, box);
    const double l1 = config_.lambda_motion;
    const double l2 = config_.lambda_data();
    if (!slot.data_mean || l2 == 0.0) return motion;
    const BoundingBox& d = *slot.data_mean;
    const double dx = box.center_x() - d.center_x();
    const double dy = box.center_y() - d.center_y();
    const double dw = std::log(box.width) - std::log(d.width);
    const double dh = std::log(box.height) - std::log(d.height);
    const double vd = config_.sigma_data * config_.sigma_data;
    const double vs = motion_.process_sigma_size * motion_.process_sigma_size;
    const double data = log_norm_data_ - 0.5 * ((dx * dx + dy * dy) / vd + (dw * dw + dh * dh) / vs);
    if (l1 == 0.0) return data;
    return log_add_exp(std::log(l1) + motion, std::log(l2) + data);
}

TrackingChainState TrackingChainModel::initial_state() const {
    State s;
    s.particle = init_;
    const std::size_t n = objects_.size();
    s.object_log_likelihood.resize(n);
    s.object_log_prior.resize(n);
    s.object_log_q.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& st = init_.states[i];
        s.object_log_likelihood[i] = object_log_likelihood(i, st);
        s.object_log_prior[i] = log_motion_mixture(i, st.box);
        s.object_log_q[i] = log_proposal_density(i, st.box);
        s.log_likelihood += s.object_log_likelihood[i];
        s.log_prior += s.object_log_prior[i];
    }
    return s;
}

BoundingBox TrackingChainModel::sample_box(double cx, double cy, double lw, double lh,
                                           double sigma_pos, double sigma_size, Rng& rng) {
    const double x = cx + sigma_pos * normal_(rng);
    const double y = cy + sigma_pos * normal_(rng);
    const double w = std::exp(lw + sigma_size * normal_(rng));
    const double h = std::exp(lh + sigma_size * normal_(rng));
    return BoundingBox::from_center(x, y, w, h);
}

TrackingMove TrackingChainModel::propose_move(const State& current, Rng& rng) {
    if (objects_.empty()) throw ContractError("propose_move on an empty scene particle");
    std::uniform_int_distribution<std::size_t> pick_object(0, objects_.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::size_t j = pick_object(rng);
    const auto& slot = objects_[j];
    const bool use_motion = unit(rng) < config_.lambda_motion || !slot.data_mean;

    BoundingBox box;
    if (use_motion) {
        const auto& m = slot.motion_means;
        std::uniform_int_distribution<std::size_t> pick_sample(0, m.size() - 1);
        const std::size_t s = pick_sample(rng);
        box = sample_box(m.cx()[s], m.cy()[s], m.log_w()[s], m.log_h()[s],
                         motion_.process_sigma_pos, motion_.process_sigma_size, rng);
    } else {
        const BoundingBox& d = *slot.data_mean;
        box = sample_box(d.center_x(), d.center_y(), std::log(d.width), std::log(d.height),
                         config_.sigma_data, motion_.process_sigma_size, rng);
    }

    TrackingMove move;
    move.chosen_identity = slot.identity;
    move.motion_component = use_motion;
    move.candidate = current;
    State& c = move.candidate;
    ObjectState& obj = c.particle.states[j];
    obj.box = box;

    const double ll = object_log_likelihood(j, obj);
    const double lp = log_motion_mixture(j, box);
    const double lq = log_proposal_density(j, box);
    c.log_likelihood += ll - current.object_log_likelihood[j];
    c.log_prior += lp - current.object_log_prior[j];
    // Keep the sums exact when an infinite term enters or leaves.
    if (!std::isfinite(c.log_likelihood) || !std::isfinite(current.log_likelihood)) {
        c.object_log_likelihood[j] = ll;
        c.log_likelihood = 0.0;
        for (double v : c.object_log_likelihood) c.log_likelihood += v;
    }
    c.object_log_likelihood[j] = ll;
    c.object_log_prior[j] = lp;
    c.object_log_q[j] = lq;
    move.log_q_forward = lq;
    move.log_q_reverse = current.object_log_q[j];
    return move;
}

ProposedMove<TrackingChainState> TrackingChainModel::propose(const State& current, Rng& rng) {
    TrackingMove m = propose_move(current, rng);
    ProposedMove<State> out;
    out.log_likelihood = log_likelihood(m.candidate);
    out.log_prior = m.candidate.log_prior;
    out.log_q_forward = m.log_q_forward;
    out.log_q_reverse = m.log_q_reverse;
    out.candidate = std::move(m.candidate);
    return out;
}

ChainResult run_chain(const SceneParticle& init, std::span<const SceneParticle> prev_samples,
                      std::span<const Detection> frame_detections, const SceneContext& context,
                      const ChainConfig& config) {
    config.validate();
    ChainResult result;
    if (init.states.empty()) {
        result.samples.assign(static_cast<std::size_t>(config.n_samples), init);
        result.estimate.map_particle = init;
        return result;
    }

    TrackingChainModel model(init, prev_samples, frame_detections, context, config);
    Rng rng = stream_rng(config.seed, static_cast<std::uint64_t>(init.frame));
    auto run = run_metropolis_hastings(model, model.initial_state(), config.burn_in,
                                       config.n_samples, rng);

    result.accepted = run.accepted;
    result.samples.reserve(run.samples.size());
    const auto& map_state = run.map_state;
    for (std::size_t i = 0; i < map_state.particle.states.size(); ++i) {
        const auto& s = map_state.particle.states[i];
        result.estimate.per_object_likelihood[s.identity] =
            std::exp(map_state.object_log_likelihood[i]);
    }
    result.estimate.map_particle = map_state.particle;

    const std::size_t n_obj = init.states.size();
    std::vector<double> sum(4 * n_obj, 0.0);
    for (auto& st : run.samples) {
        for (std::size_t i = 0; i < n_obj; ++i) {
            const auto& b = st.particle.states[i].box;
            sum[4 * i + 0] += b.left;
            sum[4 * i + 1] += b.top;
            sum[4 * i + 2] += b.width;
            sum[4 * i + 3] += b.height;
        }
        result.samples.push_back(std::move(st.particle));
    }
    const double n = static_cast<double>(result.samples.size());
    for (std::size_t i = 0; i < n_obj; ++i) {
        result.estimate.per_object_mean[init.states[i].identity] =
            BoundingBox{sum[4 * i] / n, sum[4 * i + 1] / n, sum[4 * i + 2] / n, sum[4 * i + 3] / n};
    }
    return result;
}

}  // namespace mcmot
