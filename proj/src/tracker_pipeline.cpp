#include "mcmot/tracker_pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <tuple>

#include "mcmot/errors.hpp"

namespace mcmot {

namespace {

bool inside_canvas(const BoundingBox& b, const ImageBounds& image, double margin) {
    const double mx = margin * image.width;
    const double my = margin * image.height;
    return b.left >= -mx && b.top >= -my && b.right() <= image.width + mx &&
           b.bottom() <= image.height + my;
}

BoundingBox clip_to_canvas(const BoundingBox& b, const ImageBounds& image, double margin) {
    const double mx = margin * image.width;
    const double my = margin * image.height;
    const double l = std::clamp(b.left, -mx, image.width + mx - 1.0);
    const double t = std::clamp(b.top, -my, image.height + my - 1.0);
    const double r = std::clamp(b.right(), l + 1.0, image.width + mx);
    const double btm = std::clamp(b.bottom(), t + 1.0, image.height + my);
    return BoundingBox{l, t, r - l, btm - t};
}

void close_segment(TrackerState& state, LiveSegment& live) {
    live.segment.status = SegmentStatus::closed;
    state.closed.push_back(std::move(live.segment));
}

}  // namespace

void step_frame(TrackerState& state, int frame, std::span<const Detection> detections,
                const TrackingConfig& cfg, const ImageBounds& image) {
    if (frame != state.cursor + 1) {
        throw ContractError("step_frame: expected frame " + std::to_string(state.cursor + 1) +
                            ", got " + std::to_string(frame));
    }
    for (const auto& d : detections) {
        if (d.frame != frame) throw ContractError("step_frame: detection from another frame");
    }
    state.cursor = frame;
    ++state.report.frames;

    std::vector<LiveTrack> tracks;
    tracks.reserve(state.live.size());
    for (const auto& l : state.live) {
        const ObjectState& last = l.segment.states.back();
        tracks.push_back(LiveTrack{last, predict_state(last, cfg.motion), l.misses,
                                   l.segment.likelihoods.back()});
    }
    const auto transitions = estimate_entity_transitions(tracks, detections, cfg.entry, frame,
                                                         image, state.next_identity);

    // Deaths close the segment as it stood at the previous frame.
    std::vector<LiveSegment> survivors;
    std::vector<int> survivor_track;
    survivors.reserve(state.live.size() + transitions.births.size());
    for (std::size_t ti = 0; ti < state.live.size(); ++ti) {
        if (transitions.statuses[ti].kind == EntityCase::death) {
            ++state.report.deaths;
            close_segment(state, state.live[ti]);
        } else {
            survivors.push_back(std::move(state.live[ti]));
            survivor_track.push_back(static_cast<int>(ti));
        }
    }

    SceneParticle init{frame, {}};
    SceneContext ctx;
    const ObservationModel observation = ObservationModel::standard(cfg.observation, cfg.weights);
    ctx.observation = &observation;
    ctx.motion = cfg.motion;
    ctx.canvas = image;
    std::vector<int> matched_detection;

    for (std::size_t k = 0; k < survivors.size(); ++k) {
        const auto& t = tracks[static_cast<std::size_t>(survivor_track[k])];
        ObjectState s = t.state;
        s.box = t.predicted;
        const int di = transitions.track_detection[static_cast<std::size_t>(survivor_track[k])];
        ctx.predicted[s.identity] = t.predicted;
        if (di >= 0) {
            const Detection& d = detections[static_cast<std::size_t>(di)];
            s.box = d.box;
            ctx.association[s.identity] = d.box;
            if (!s.appearance_ref && d.appearance) s.appearance_ref = d.appearance;
        }
        init.states.push_back(s);
        matched_detection.push_back(di);
    }
    for (const auto& b : transitions.births) {
        const Detection& d = detections[static_cast<std::size_t>(b.detection)];
        ObjectState s;
        s.identity = b.identity;
        s.class_id = d.class_id;
        s.box = d.box;
        s.appearance_ref = d.appearance;
        ctx.predicted[s.identity] = d.box;
        ctx.association[s.identity] = d.box;
        init.states.push_back(s);
        matched_detection.push_back(b.detection);

        LiveSegment seg;
        seg.segment.segment_id = state.next_segment_id++;
        seg.segment.identity = b.identity;
        seg.segment.class_id = d.class_id;
        seg.segment.birth_frame = frame;
        survivors.push_back(std::move(seg));
        state.next_identity = std::max(state.next_identity, b.identity + 1);
        ++state.report.births;
        ++state.report.segments_total;
    }

    ChainConfig chain = cfg.chain;
    chain.seed = cfg.seed;
    ChainResult result = run_chain(init, state.prev_samples, detections, ctx, chain);

    const FrameObservations frame_obs(detections);
    for (std::size_t k = 0; k < survivors.size(); ++k) {
        LiveSegment& live = survivors[k];
        const ObjectState& before = init.states[k];
        const ObjectState& map = result.estimate.map_particle.states[k];
        double likelihood = result.estimate.per_object_likelihood.at(map.identity);
        BoundingBox box = map.box;
        if (!box.valid() || !inside_canvas(box, image, ctx.canvas_margin)) {
            box = clip_to_canvas(box.valid() ? box : before.box, image, ctx.canvas_margin);
            ObjectState probe = map;
            probe.box = box;
            likelihood = observation.evaluate(probe, frame_obs, ctx.predicted.at(map.identity)).fused;
        }
        const bool observed = matched_detection[k] >= 0;
        ObjectState next;
        if (live.segment.empty()) {
            next = before;
            next.box = box;
        } else {
            const ObjectState& prev = live.segment.states.back();
            next = observed ? advance_state(prev, box, cfg.velocity_smoothing) : prev;
            next.box = box;
            next.appearance_ref = before.appearance_ref;
        }
        live.segment.append(next, likelihood, observed);
        live.misses = observed ? 0 : live.misses + 1;
    }

    for (auto& p : result.samples) {
        for (std::size_t k = 0; k < p.states.size(); ++k) {
            p.states[k].vx = survivors[k].segment.states.back().vx;
            p.states[k].vy = survivors[k].segment.states.back().vy;
        }
    }
    state.prev_samples = std::move(result.samples);
    state.live = std::move(survivors);
}

static TrackSegment tail_from(const TrackSegment& seg, int split_frame) {
    TrackSegment tail;
    tail.class_id = seg.class_id;
    tail.birth_frame = std::max(split_frame, seg.birth_frame);
    tail.status = SegmentStatus::closed;
    for (int f = tail.birth_frame; f <= seg.death_frame; ++f) {
        const auto i = static_cast<std::size_t>(f - seg.birth_frame);
        tail.append(seg.states[i], seg.likelihoods[i], seg.observed[i] != 0);
    }
    return tail;
}

std::vector<TrackSegment> finalize(TrackerState& state, const DetectionStore& detections,
                                   const TrackingConfig& cfg, const ImageBounds& image) {
    for (auto& l : state.live) close_segment(state, l);
    state.live.clear();
    state.prev_samples.clear();

    std::vector<TrackSegment> segments = std::move(state.closed);
    state.closed.clear();
    std::sort(segments.begin(), segments.end(),
              [](const TrackSegment& a, const TrackSegment& b) { return a.segment_id < b.segment_id; });

    std::vector<TrackSegment> out;
    out.reserve(segments.size());
    std::deque<TrackSegment> work(std::make_move_iterator(segments.begin()),
                                  std::make_move_iterator(segments.end()));
    while (!work.empty()) {
        TrackSegment seg = std::move(work.front());
        work.pop_front();
        const ChangePointSeries cps = change_point_scores(seg.likelihood_series(), cfg.cpd);
        seg.change_points = cps.detected_points;
        state.report.change_points += static_cast<int>(cps.detected_points.size());
        if (cps.detected_points.empty()) {
            seg.status = SegmentStatus::validated;
            ++state.report.segments_validated;
        } else {
            ++state.report.fb_invocations;
            const FbVerdict v = validate_segment(seg, cps.detected_points, detections, cfg, image);
            if (v.drifted) {
                // Tracking resumes after the split under a fresh identity; the
                // tail goes through the same checks as any other segment.
                TrackSegment tail = tail_from(seg, *v.split_frame);
                seg.truncate_before(*v.split_frame);
                seg.status = SegmentStatus::drifted;
                ++state.report.segments_drifted;
                if (tail.last_observed_frame() >= tail.birth_frame) {
                    tail.segment_id = state.next_segment_id++;
                    tail.identity = state.next_identity++;
                    for (auto& st : tail.states) st.identity = tail.identity;
                    ++state.report.segments_total;
                    work.push_back(std::move(tail));
                }
            } else {
                seg.status = SegmentStatus::validated;
                ++state.report.segments_validated;
            }
        }
        if (!seg.empty()) out.push_back(std::move(seg));
    }
    std::sort(out.begin(), out.end(),
              [](const TrackSegment& a, const TrackSegment& b) { return a.segment_id < b.segment_id; });
    return out;
}

std::vector<TrackSegment> filter_segments(const std::vector<TrackSegment>& segments,
                                          double min_avg_score) {
    std::vector<TrackSegment> out;
    for (const auto& s : segments) {
        if (!s.empty() && s.mean_likelihood() >= min_avg_score) out.push_back(s);
    }
    return out;
}

LinkResult link_segments(const std::vector<TrackSegment>& segments, const LinkConfig& link) {
    struct Candidate {
        int gap;
        double distance;
        std::size_t from;
        std::size_t to;
    };
    const std::size_t n = segments.size();
    std::vector<int> last_obs(n);
    for (std::size_t i = 0; i < n; ++i) last_obs[i] = segments[i].last_observed_frame();

    std::vector<Candidate> candidates;
    for (std::size_t a = 0; a < n; ++a) {
        const auto& A = segments[a];
        // A drifted segment ends at a known tracking failure; joining its
        // successor would carry the failure into one identity.
        if (A.empty() || last_obs[a] < A.birth_frame || A.status == SegmentStatus::drifted) continue;
        const ObjectState& end = A.state_at(last_obs[a]);
        const double radius = link.radius_ratio * A.mean_diagonal();
        for (std::size_t b = 0; b < n; ++b) {
            const auto& B = segments[b];
            if (a == b || B.empty() || B.class_id != A.class_id) continue;
            const int gap = B.birth_frame - last_obs[a];
            if (gap < 1 || gap > link.gap_max) continue;
            const double px = end.box.center_x() + end.vx * gap;
            const double py = end.box.center_y() + end.vy * gap;
            const BoundingBox& start = B.states.front().box;
            const double dist = std::hypot(start.center_x() - px, start.center_y() - py);
            if (dist <= radius) candidates.push_back({gap, dist, a, b});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& x, const Candidate& y) {
        return std::tie(x.gap, x.distance, segments[x.from].segment_id, segments[x.to].segment_id) <
               std::tie(y.gap, y.distance, segments[y.from].segment_id, segments[y.to].segment_id);
    });

    std::vector<int> next(n, -1);
    std::vector<int> prev(n, -1);
    LinkResult result;
    for (const auto& c : candidates) {
        if (next[c.from] >= 0 || prev[c.to] >= 0) continue;
        next[c.from] = static_cast<int>(c.to);
        prev[c.to] = static_cast<int>(c.from);
        ++result.links;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = segments[i];
        std::size_t head = i;
        while (prev[head] >= 0) head = static_cast<std::size_t>(prev[head]);
        const int identity = segments[head].identity;
        const double score = s.mean_likelihood();
        for (int f = s.birth_frame; f <= last_obs[i]; ++f) {
            const ObjectState& st = s.state_at(f);
            TrajectoryRecord r;
            r.frame = f;
            r.identity = identity;
            r.class_id = s.class_id;
            r.box = st.box;
            r.score = score;
            result.records.push_back(r);
        }
    }
    std::sort(result.records.begin(), result.records.end(),
              [](const TrajectoryRecord& a, const TrajectoryRecord& b) {
                  return std::tie(a.frame, a.identity) < std::tie(b.frame, b.identity);
              });
    return result;
}

std::vector<TrajectoryRecord> combine_segments(const std::vector<TrackSegment>& segments,
                                               const LinkConfig& link) {
    return link_segments(segments, link).records;
}

TrackingOutput run_tracking(const std::vector<Detection>& detections, const SequenceInfo& info,
                            const TrackingConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const ImageBounds image{static_cast<double>(info.image_width),
                            static_cast<double>(info.image_height)};
    const DetectionStore store = group_by_frame(detections, info.frame_count);

    TrackerState state;
    for (int f = 1; f <= info.frame_count; ++f) {
        step_frame(state, f, store[static_cast<std::size_t>(f)], cfg, image);
    }
    TrackingOutput out;
    out.segments = finalize(state, store, cfg, image);
    const auto kept = filter_segments(out.segments, cfg.min_avg_score);
    LinkResult linked = link_segments(kept, cfg.link);
    out.records = std::move(linked.records);

    out.report = state.report;
    out.report.segments_filtered_out = static_cast<int>(out.segments.size() - kept.size());
    out.report.segments_emitted = static_cast<int>(kept.size());
    out.report.links = linked.links;
    out.report.records = static_cast<int>(out.records.size());
    const auto stop = std::chrono::steady_clock::now();
    out.report.tracking_seconds = std::chrono::duration<double>(stop - start).count();
    out.report.fps = out.report.tracking_seconds > 0.0
                         ? static_cast<double>(info.frame_count) / out.report.tracking_seconds
                         : 0.0;
    return out;
}

}  // namespace mcmot
