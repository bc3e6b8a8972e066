#include "mcmot/motion_entity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mcmot/errors.hpp"

namespace mcmot {

void MotionModel::validate() const {
    if (!(process_sigma_pos > 0.0)) throw ConfigError("process_sigma_pos must be > 0");
    if (!(process_sigma_size > 0.0)) throw ConfigError("process_sigma_size must be > 0");
    if (!(velocity_decay > 0.0 && velocity_decay <= 1.0)) {
        throw ConfigError("velocity_decay must be in (0,1]");
    }
}

BoundingBox predict_state(const ObjectState& state, const MotionModel& model) {
    const double cx = state.box.center_x() + state.vx * model.velocity_decay;
    const double cy = state.box.center_y() + state.vy * model.velocity_decay;
    return BoundingBox::from_center(cx, cy, state.box.width, state.box.height);
}

double log_motion_normalizer(const MotionModel& model) {
    const double vp = model.process_sigma_pos * model.process_sigma_pos;
    const double vs = model.process_sigma_size * model.process_sigma_size;
    return -2.0 * std::log(2.0 * std::numbers::pi) - std::log(vp) - std::log(vs);
}

double log_motion_prior(const BoundingBox& proposed, const BoundingBox& predicted,
                        const MotionModel& model) {
    const double dx = proposed.center_x() - predicted.center_x();
    const double dy = proposed.center_y() - predicted.center_y();
    const double dw = std::log(proposed.width) - std::log(predicted.width);
    const double dh = std::log(proposed.height) - std::log(predicted.height);
    const double vp = model.process_sigma_pos * model.process_sigma_pos;
    const double vs = model.process_sigma_size * model.process_sigma_size;
    return log_motion_normalizer(model) - 0.5 * ((dx * dx + dy * dy) / vp + (dw * dw + dh * dh) / vs);
}

double motion_prior(const BoundingBox& proposed, const BoundingBox& predicted,
                    const MotionModel& model) {
    return std::exp(log_motion_prior(proposed, predicted, model));
}

ObjectState advance_state(const ObjectState& state, const BoundingBox& observed_box,
                          double smoothing) {
    ObjectState next = state;
    next.box = observed_box;
    next.vx = (1.0 - smoothing) * state.vx +
              smoothing * (observed_box.center_x() - state.box.center_x());
    next.vy = (1.0 - smoothing) * state.vy +
              smoothing * (observed_box.center_y() - state.box.center_y());
    return next;
}

void EntryModel::validate() const {
    if (!(border_margin >= 0.0)) throw ConfigError("border_margin must be >= 0");
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(beta_border) || !prob(beta_interior)) {
        throw ConfigError("entry betas must be probabilities");
    }
    if (beta_border < beta_interior) throw ConfigError("beta_border must be >= beta_interior");
    if (!prob(birth_threshold)) throw ConfigError("birth_threshold must be in [0,1]");
    if (miss_tolerance < 1) throw ConfigError("miss_tolerance must be >= 1");
    if (!(match_iou > 0.0 && match_iou < 1.0)) throw ConfigError("match_iou must be in (0,1)");
}

bool touches_border(const BoundingBox& box, const ImageBounds& image, double margin) {
    return box.left < margin || box.top < margin || box.right() > image.width - margin ||
           box.bottom() > image.height - margin;
}

EntityTransitions estimate_entity_transitions(std::span<const LiveTrack> prev_tracks,
                                              std::span<const Detection> frame_detections,
                                              const EntryModel& entry, int frame,
                                              const ImageBounds& image, int next_identity) {
    EntityTransitions out;
    out.track_detection.assign(prev_tracks.size(), -1);
    out.detection_track.assign(frame_detections.size(), -1);

    std::vector<int> order(frame_detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return frame_detections[a].confidence > frame_detections[b].confidence;
    });

    for (int di : order) {
        const auto& det = frame_detections[di];
        if (det.frame != frame) throw ContractError("detection does not belong to the frame");
        int best = -1;
        double best_iou = entry.match_iou;
        for (std::size_t ti = 0; ti < prev_tracks.size(); ++ti) {
            if (out.track_detection[ti] >= 0) continue;
            if (prev_tracks[ti].state.class_id != det.class_id) continue;
            const double overlap = iou(prev_tracks[ti].predicted, det.box);
            if (overlap >= best_iou && (best < 0 || overlap > best_iou)) {
                best = static_cast<int>(ti);
                best_iou = overlap;
            }
        }
        if (best >= 0) {
            out.track_detection[static_cast<std::size_t>(best)] = di;
            out.detection_track[static_cast<std::size_t>(di)] = best;
        }
    }

    for (std::size_t ti = 0; ti < prev_tracks.size(); ++ti) {
        const auto& t = prev_tracks[ti];
        EntityStatus s;
        s.identity = t.state.identity;
        s.detection = out.track_detection[ti];
        s.death = 1.0 - t.last_likelihood;
        const bool dies = s.detection < 0 && t.misses + 1 >= entry.miss_tolerance;
        if (dies) {
            s.kind = EntityCase::death;
            out.deaths.push_back(DeathNotice{static_cast<int>(ti), s.identity, s.death});
        } else {
            s.kind = EntityCase::alive;
            s.alive = 1.0 - s.death;
        }
        out.statuses.push_back(s);
    }

    int identity = next_identity;
    for (std::size_t di = 0; di < frame_detections.size(); ++di) {
        const auto& det = frame_detections[di];
        const double beta = touches_border(det.box, image, entry.border_margin)
                                ? entry.beta_border
                                : entry.beta_interior;
        EntityStatus s;
        s.detection = static_cast<int>(di);
        s.birth = det.confidence * beta;
        const bool born = out.detection_track[di] < 0 && det.confidence >= entry.birth_threshold;
        if (born) {
            s.kind = EntityCase::birth;
            s.identity = identity++;
            out.births.push_back(BirthCandidate{s.detection, s.identity, s.birth});
        } else {
            s.kind = EntityCase::absent;
            s.null = 1.0 - s.birth;
        }
        out.statuses.push_back(s);
    }
    return out;
}

}  // namespace mcmot
