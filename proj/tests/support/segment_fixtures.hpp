#pragma once

// Helpers that build track segments and drift trials directly from simulator
// ground truth, so validation and finalization can be checked against the
// injection log.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "mcmot/mot_io.hpp"
#include "mcmot/simgen.hpp"
#include "mcmot/validation.hpp"

namespace mcmot::testing {

inline const TrajectoryRecord* find_gt(const std::vector<TrajectoryRecord>& gt, int identity,
                                       int frame) {
    for (const auto& r : gt) {
        if (r.identity == identity && r.frame == frame) return &r;
    }
    return nullptr;
}

/// A segment that follows `identity` over [first, last] with the given
/// per-frame likelihood and every frame observed.
inline TrackSegment segment_from_gt(const std::vector<TrajectoryRecord>& gt, int identity,
                                    int first, int last, double likelihood = 0.9) {
    TrackSegment s;
    s.segment_id = identity;
    s.identity = identity;
    s.birth_frame = first;
    s.status = SegmentStatus::closed;
    for (int f = first; f <= last; ++f) {
        ObjectState st;
        st.identity = identity;
        st.box = find_gt(gt, identity, f)->box;
        s.append(st, likelihood, true);
    }
    return s;
}

struct DriftTrial {
    Scenario scenario;
    DetectionStore store;
    TrackSegment forward;  // follows object 1, then object 2 from the injection
    int injection_frame = 0;
};

/// Two well-separated objects; object 1's detections are drawn at object 2's
/// box from the injection frame on, and the forward segment latches on.
inline DriftTrial make_drift_trial(std::uint64_t seed, int frames = 120) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(200, 700), uy(150, 600), uv(-1.5, 1.5);
    std::uniform_int_distribution<int> inj(40, frames - 30);

    ScenarioSpec spec;
    spec.frame_count = frames;
    spec.jitter_sigma = 1.0;
    spec.seed = seed;
    ObjectSpec a;
    a.birth = 1;
    a.death = frames;
    a.initial = BoundingBox::from_center(ux(rng), uy(rng), 50, 120);
    a.vx = uv(rng);
    a.vy = uv(rng);
    ObjectSpec b = a;
    b.initial = BoundingBox::from_center(a.initial.center_x() + 700, uy(rng), 50, 120);
    b.vx = uv(rng);
    b.vy = uv(rng);
    spec.objects = {a, b};
    const int k = inj(rng);
    spec.drifts = {DriftInjection{0, k, 1}};

    DriftTrial t;
    t.injection_frame = k;
    t.scenario = generate_scenario(spec);
    t.store = group_by_frame(t.scenario.detections, frames);

    TrackSegment s = segment_from_gt(t.scenario.gt, 1, 1, k - 1);
    for (int f = k; f <= frames; ++f) {
        ObjectState st;
        st.identity = 1;
        st.box = find_gt(t.scenario.gt, 2, f)->box;
        s.append(st, 0.9, true);
    }
    t.forward = std::move(s);
    return t;
}

}  // namespace mcmot::testing
