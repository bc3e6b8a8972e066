#include "mcmot/validation.hpp"

#include <algorithm>
#include <cmath>

#include "mcmot/errors.hpp"

namespace mcmot {

namespace {

constexpr std::uint64_t kReverseStream = 0xFB;

std::size_t offset_of(const TrackSegment& s, int frame) {
    if (!s.covers(frame)) {
        throw ContractError("segment " + std::to_string(s.segment_id) + " does not cover frame " +
                            std::to_string(frame));
    }
    return static_cast<std::size_t>(frame - s.birth_frame);
}

}  // namespace

const char* status_name(SegmentStatus s) {
    switch (s) {
        case SegmentStatus::open: return "open";
        case SegmentStatus::closed: return "closed";
        case SegmentStatus::validated: return "validated";
        case SegmentStatus::drifted: return "drifted";
    }
    return "unknown";
}

const ObjectState& TrackSegment::state_at(int frame) const { return states[offset_of(*this, frame)]; }

double TrackSegment::likelihood_at(int frame) const { return likelihoods[offset_of(*this, frame)]; }

void TrackSegment::append(const ObjectState& state, double likelihood, bool was_observed) {
    if (empty()) {
        death_frame = birth_frame - 1;
    }
    states.push_back(state);
    likelihoods.push_back(likelihood);
    observed.push_back(was_observed ? 1 : 0);
    ++death_frame;
}

int TrackSegment::last_observed_frame() const {
    for (std::size_t i = observed.size(); i-- > 0;) {
        if (observed[i]) return birth_frame + static_cast<int>(i);
    }
    return birth_frame - 1;
}

double TrackSegment::mean_likelihood() const {
    if (likelihoods.empty()) return 0.0;
    double sum = 0.0;
    for (double v : likelihoods) sum += v;
    return sum / static_cast<double>(likelihoods.size());
}

double TrackSegment::mean_diagonal() const {
    const int last = last_observed_frame();
    const std::size_t n = last >= birth_frame ? static_cast<std::size_t>(last - birth_frame + 1)
                                              : states.size();
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += states[i].box.diagonal();
    return sum / static_cast<double>(n);
}

LikelihoodSeries TrackSegment::likelihood_series() const {
    LikelihoodSeries out;
    out.segment_id = segment_id;
    const int last = last_observed_frame();
    for (int f = birth_frame; f <= last; ++f) {
        const std::size_t i = static_cast<std::size_t>(f - birth_frame);
        if (!observed[i]) continue;
        out.frames.push_back(f);
        out.values.push_back(likelihoods[i]);
    }
    return out;
}

void TrackSegment::truncate_before(int split_frame) {
    if (empty() || split_frame > death_frame) return;
    const std::size_t keep =
        split_frame <= birth_frame ? 0 : static_cast<std::size_t>(split_frame - birth_frame);
    states.resize(keep);
    likelihoods.resize(keep);
    observed.resize(keep);
    death_frame = birth_frame + static_cast<int>(keep) - 1;
}

void TrackSegment::check_invariants() const {
    if (states.size() != likelihoods.size() || states.size() != observed.size()) {
        throw ContractError("segment " + std::to_string(segment_id) + ": length mismatch");
    }
    if (!empty() && death_frame - birth_frame + 1 != static_cast<int>(states.size())) {
        throw ContractError("segment " + std::to_string(segment_id) + ": frames not contiguous");
    }
    for (const auto& s : states) {
        if (s.identity != identity) {
            throw ContractError("segment " + std::to_string(segment_id) + ": mixed identities");
        }
    }
}

TrackSegment reverse_track(const TrackSegment& segment, const DetectionStore& detections,
                           const TrackingConfig& cfg, std::optional<ImageBounds> image) {
    if (segment.empty()) throw ContractError("reverse_track: empty segment");
    int last = segment.last_observed_frame();
    if (last < segment.birth_frame) last = segment.death_frame;

    TrackSegment reversed;
    reversed.segment_id = segment.segment_id;
    reversed.identity = segment.identity;
    reversed.class_id = segment.class_id;
    reversed.status = segment.status;

    const int span = last - segment.birth_frame + 1;
    std::vector<ObjectState> states(static_cast<std::size_t>(span));
    std::vector<double> liks(static_cast<std::size_t>(span));
    std::vector<char> seen(static_cast<std::size_t>(span));

    const std::size_t terminal = static_cast<std::size_t>(span - 1);
    ObjectState current = segment.states[terminal];
    states[terminal] = current;
    liks[terminal] = segment.likelihoods[terminal];
    seen[terminal] = segment.observed[terminal];
    current.vx = -current.vx;
    current.vy = -current.vy;

    const ObservationModel observation = ObservationModel::standard(cfg.observation, cfg.weights);
    ChainConfig chain = cfg.chain;
    chain.seed = mix_seed(mix_seed(cfg.seed, kReverseStream),
                          static_cast<std::uint64_t>(segment.segment_id));
    const ImageBounds bounds = image.value_or(ImageBounds{});

    std::vector<SceneParticle> prev{SceneParticle{last, {current}}};
    int misses = 0;
    for (int f = last - 1; f >= segment.birth_frame; --f) {
        static const std::vector<Detection> kNone;
        const auto& dets = f >= 0 && static_cast<std::size_t>(f) < detections.size()
                               ? detections[static_cast<std::size_t>(f)]
                               : kNone;
        LiveTrack track{current, predict_state(current, cfg.motion), misses, 1.0};
        const auto transitions = estimate_entity_transitions(
            std::span<const LiveTrack>(&track, 1), dets, cfg.entry, f, bounds, 0);
        const int matched = transitions.track_detection[0];

        SceneContext ctx;
        ctx.observation = &observation;
        ctx.motion = cfg.motion;
        ctx.canvas = image;
        ctx.predicted[current.identity] = track.predicted;
        ObjectState init = current;
        init.box = track.predicted;
        if (matched >= 0) {
            const BoundingBox& d = dets[static_cast<std::size_t>(matched)].box;
            ctx.association[current.identity] = d;
            init.box = d;
        }
        SceneParticle init_particle{f, {init}};
        auto result = run_chain(init_particle, prev, dets, ctx, chain);
        const ObjectState& map = result.estimate.map_particle.states[0];

        ObjectState next = matched >= 0 ? advance_state(current, map.box, cfg.velocity_smoothing)
                                        : current;
        next.box = map.box;
        misses = matched >= 0 ? 0 : misses + 1;

        const std::size_t i = static_cast<std::size_t>(f - segment.birth_frame);
        states[i] = next;
        states[i].vx = -next.vx;
        states[i].vy = -next.vy;
        liks[i] = result.estimate.per_object_likelihood.at(current.identity);
        seen[i] = matched >= 0 ? 1 : 0;

        for (auto& p : result.samples) {
            p.states[0].vx = next.vx;
            p.states[0].vy = next.vy;
        }
        prev = std::move(result.samples);
        current = next;
    }

    reversed.birth_frame = segment.birth_frame;
    reversed.death_frame = last;
    reversed.states = std::move(states);
    reversed.likelihoods = std::move(liks);
    reversed.observed = std::move(seen);
    return reversed;
}

double fb_distance(const TrackSegment& forward, const TrackSegment& backward) {
    if (forward.empty()) throw ContractError("fb_distance: empty forward segment");
    if (!backward.covers(forward.birth_frame)) {
        throw ContractError("fb_distance: backward segment does not reach the forward birth frame");
    }
    return center_distance(forward.state_at(forward.birth_frame).box,
                           backward.state_at(forward.birth_frame).box);
}

FbVerdict validate_segment(const TrackSegment& segment, const std::vector<int>& change_points,
                           const DetectionStore& detections, const TrackingConfig& cfg,
                           std::optional<ImageBounds> image) {
    if (change_points.empty()) {
        throw ContractError("validate_segment: segment has no change points");
    }
    const TrackSegment backward = reverse_track(segment, detections, cfg, image);
    FbVerdict v;
    v.segment_id = segment.segment_id;
    v.distance = fb_distance(segment, backward);
    v.confidence_threshold = cfg.fb.drift_ratio * segment.mean_diagonal();
    v.drifted = v.distance > v.confidence_threshold;
    if (v.drifted) v.split_frame = *std::min_element(change_points.begin(), change_points.end());
    return v;
}

}  // namespace mcmot
