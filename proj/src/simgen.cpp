#include "mcmot/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "mcmot/errors.hpp"
#include "mcmot/mcmc_sampler.hpp"

namespace mcmot {

namespace {

constexpr std::uint64_t kAppearanceStream = 0xA11CE;
constexpr std::uint64_t kLayoutStream = 0x5CE7E;

BoundingBox gt_box(const ObjectSpec& o, int frame, int width, int height) {
    const double dt = static_cast<double>(frame - o.birth);
    const double left = std::clamp(o.initial.left + o.vx * dt, 0.0,
                                   std::max(0.0, width - o.initial.width));
    const double top = std::clamp(o.initial.top + o.vy * dt, 0.0,
                                  std::max(0.0, height - o.initial.height));
    return BoundingBox{left, top, o.initial.width, o.initial.height};
}

Histogram random_histogram(int bins, Rng& rng) {
    std::gamma_distribution<double> g(1.0, 1.0);
    Histogram h(static_cast<std::size_t>(bins));
    double sum = 0.0;
    for (auto& v : h) sum += (v = g(rng) + 1e-6);
    for (auto& v : h) v /= sum;
    return h;
}

HistogramRef perturbed(const Histogram& base, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto h = std::make_shared<Histogram>(base.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) sum += ((*h)[i] = 0.9 * base[i] + 0.1 * u(rng) / base.size());
    for (auto& v : *h) v /= sum;
    return h;
}

}  // namespace

void ScenarioSpec::validate() const {
    if (image_width <= 0 || image_height <= 0) throw ConfigError("scenario: image size must be > 0");
    if (frame_count < 1) throw ConfigError("scenario: frame_count must be >= 1");
    if (!(jitter_sigma >= 0.0)) throw ConfigError("scenario: jitter must be >= 0");
    if (!(fp_rate >= 0.0)) throw ConfigError("scenario: fp_rate must be >= 0");
    if (!(fn_rate >= 0.0 && fn_rate < 1.0)) throw ConfigError("scenario: fn_rate must be in [0,1)");
    if (appearance_bins < 0) throw ConfigError("scenario: appearance bins must be >= 0");
    const int n = static_cast<int>(objects.size());
    for (int i = 0; i < n; ++i) {
        const auto& o = objects[static_cast<std::size_t>(i)];
        if (!(o.birth >= 1 && o.birth < o.death && o.death <= frame_count)) {
            throw ConfigError("scenario: object " + std::to_string(i) +
                              " needs 1 <= birth < death <= frame_count");
        }
        if (!o.initial.valid()) throw ConfigError("scenario: object " + std::to_string(i) + " box");
    }
    for (const auto& w : occlusions) {
        if (w.object < 0 || w.object >= n || w.first > w.last) {
            throw ConfigError("scenario: invalid occlusion window");
        }
    }
    std::set<int> drifted;
    for (const auto& d : drifts) {
        if (d.object < 0 || d.object >= n || d.target < 0 || d.target >= n || d.object == d.target) {
            throw ConfigError("scenario: invalid drift injection");
        }
        if (d.frame < 1 || d.frame > frame_count) {
            throw ConfigError("scenario: drift injection frame outside the sequence");
        }
        // An injection lasts until the object's death, so two on one object overlap.
        if (!drifted.insert(d.object).second) {
            throw ConfigError("scenario: overlapping drift injections on object " +
                              std::to_string(d.object));
        }
    }
}

Scenario generate_scenario(const ScenarioSpec& spec) {
    spec.validate();
    Scenario out;
    out.info = SequenceInfo{spec.name, spec.frame_count, spec.image_width, spec.image_height, 30.0};

    const std::size_t n = spec.objects.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& o = spec.objects[i];
        for (int f = o.birth; f <= o.death; ++f) {
            TrajectoryRecord r;
            r.frame = f;
            r.identity = static_cast<int>(i) + 1;
            r.class_id = o.class_id;
            r.box = gt_box(o, f, spec.image_width, spec.image_height);
            r.score = 1.0;
            out.gt.push_back(r);
        }
    }

    std::vector<Histogram> base;
    if (spec.appearance_bins > 0) {
        Rng rng = stream_rng(spec.seed, kAppearanceStream);
        for (std::size_t i = 0; i < n; ++i) base.push_back(random_histogram(spec.appearance_bins, rng));
    }

    std::vector<const DriftInjection*> drift_of(n, nullptr);
    for (const auto& d : spec.drifts) {
        drift_of[static_cast<std::size_t>(d.object)] = &d;
        out.injection_log.push_back(
            {d.object, d.object + 1, d.frame, d.target, d.target + 1});
    }

    std::set<int> class_set;
    for (const auto& o : spec.objects) class_set.insert(o.class_id);
    const std::vector<int> classes = class_set.empty() ? std::vector<int>{kDefaultClass}
                                                       : std::vector<int>(class_set.begin(), class_set.end());

    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> true_conf(0.7, 1.0);
    std::uniform_real_distribution<double> clutter_conf(0.3, 0.7);
    std::poisson_distribution<int> clutter(spec.fp_rate);
    const double sigma = spec.jitter_sigma;

    for (int f = 1; f <= spec.frame_count; ++f) {
        Rng rng = stream_rng(spec.seed, static_cast<std::uint64_t>(f));
        std::vector<Detection> frame_dets;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& o = spec.objects[i];
            if (f < o.birth || f > o.death) continue;
            const bool occluded = std::any_of(spec.occlusions.begin(), spec.occlusions.end(),
                                              [&](const OcclusionWindow& w) {
                                                  return w.object == static_cast<int>(i) &&
                                                         f >= w.first && f <= w.last;
                                              });
            if (occluded) continue;

            std::size_t source = i;
            if (const DriftInjection* d = drift_of[i]; d && f >= d->frame) {
                source = static_cast<std::size_t>(d->target);
                const auto& t = spec.objects[source];
                if (f < t.birth || f > t.death) continue;
            }
            ++out.eligible_count;
            if (spec.fn_rate > 0.0 && unit(rng) < spec.fn_rate) {
                ++out.missed_count;
                continue;
            }
            BoundingBox box = gt_box(spec.objects[source], f, spec.image_width, spec.image_height);
            if (sigma > 0.0) {
                const double cx = box.center_x() + sigma * normal(rng);
                const double cy = box.center_y() + sigma * normal(rng);
                const double w = box.width * std::exp(sigma / box.width * normal(rng));
                const double h = box.height * std::exp(sigma / box.height * normal(rng));
                box = BoundingBox::from_center(cx, cy, w, h);
            }
            Detection d;
            d.frame = f;
            d.class_id = o.class_id;
            d.box = box;
            d.confidence = true_conf(rng);
            if (!base.empty()) d.appearance = perturbed(base[source], rng);
            frame_dets.push_back(std::move(d));
        }

        const int k = spec.fp_rate > 0.0 ? clutter(rng) : 0;
        for (int c = 0; c < k; ++c) {
            const double w = 20.0 + 100.0 * unit(rng);
            const double h = std::min(w * (1.5 + unit(rng)), 0.9 * spec.image_height);
            const double ww = std::min(w, 0.9 * spec.image_width);
            Detection d;
            d.frame = f;
            d.class_id = classes[static_cast<std::size_t>(unit(rng) * classes.size()) % classes.size()];
            d.box = BoundingBox{unit(rng) * (spec.image_width - ww), unit(rng) * (spec.image_height - h),
                                ww, h};
            d.confidence = clutter_conf(rng);
            if (spec.appearance_bins > 0) {
                d.appearance = std::make_shared<Histogram>(random_histogram(spec.appearance_bins, rng));
            }
            frame_dets.push_back(std::move(d));
            ++out.clutter_count;
        }

        std::stable_sort(frame_dets.begin(), frame_dets.end(),
                         [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
        for (std::size_t r = 0; r < frame_dets.size(); ++r) {
            frame_dets[r].row_in_frame = static_cast<int>(r);
            out.detections.push_back(std::move(frame_dets[r]));
        }
    }
    return out;
}

ScenarioSpec random_scenario(const RandomScenarioOptions& opt) {
    if (opt.objects < 0 || opt.frame_count < 2 || opt.classes < 1) {
        throw ConfigError("random scenario: invalid options");
    }
    ScenarioSpec spec;
    spec.image_width = opt.image_width;
    spec.image_height = opt.image_height;
    spec.frame_count = opt.frame_count;
    spec.jitter_sigma = opt.jitter_sigma;
    spec.fp_rate = opt.fp_rate;
    spec.fn_rate = opt.fn_rate;
    spec.appearance_bins = opt.appearance_bins;
    spec.seed = opt.seed;

    Rng rng = stream_rng(opt.seed, kLayoutStream);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < opt.objects; ++i) {
        ObjectSpec o;
        o.class_id = 1 + i % opt.classes;
        if (opt.full_lifetime) {
            o.birth = 1;
            o.death = opt.frame_count;
        } else {
            o.birth = 1 + static_cast<int>(unit(rng) * (opt.frame_count / 2));
            const int min_life = std::max(2, opt.frame_count / 4);
            const int room = std::max(0, opt.frame_count - o.birth - min_life);
            o.death = std::min(opt.frame_count, o.birth + min_life + static_cast<int>(unit(rng) * room));
        }
        const double w = 30.0 + 60.0 * unit(rng);
        const double h = w * (1.8 + 0.8 * unit(rng));
        const double max_l = std::max(0.0, opt.image_width - w);
        const double max_t = std::max(0.0, opt.image_height - h);
        const double l0 = unit(rng) * max_l;
        const double t0 = unit(rng) * max_t;
        const int life = o.death - o.birth;
        const double reach = 3.0 * life;
        const double l1 = std::clamp(l0 + (2.0 * unit(rng) - 1.0) * reach, 0.0, max_l);
        const double t1 = std::clamp(t0 + (2.0 * unit(rng) - 1.0) * reach * 0.5, 0.0, max_t);
        o.initial = BoundingBox{l0, t0, w, h};
        o.vx = (l1 - l0) / life;
        o.vy = (t1 - t0) / life;
        spec.objects.push_back(o);
    }
    return spec;
}

LikelihoodSegment generate_likelihood_segment(const LikelihoodSegmentSpec& spec) {
    if (spec.length < 1) throw ConfigError("likelihood segment: length must be >= 1");
    if (spec.profile != SegmentProfile::clean &&
        (spec.injection_frame < 2 || spec.injection_frame > spec.length)) {
        throw ConfigError("likelihood segment: injection frame outside the segment");
    }
    Rng rng = stream_rng(spec.seed, 0x11CE);
    std::normal_distribution<double> normal(0.0, 1.0);
    LikelihoodSegment out;
    out.series.segment_id = 1;
    constexpr int kSwapDip = 6;
    const double recovered = 0.85 * spec.level;
    for (int f = 1; f <= spec.length; ++f) {
        double mean = spec.level;
        if (spec.profile == SegmentProfile::collapse && f >= spec.injection_frame) {
            mean = spec.collapse_level;
        } else if (spec.profile == SegmentProfile::swap && f >= spec.injection_frame) {
            mean = f < spec.injection_frame + kSwapDip ? spec.collapse_level : recovered;
        }
        const double v = std::clamp(mean + spec.noise_sigma * normal(rng), 1e-3, 1.0);
        out.series.frames.push_back(f);
        out.series.values.push_back(v);
    }
    if (spec.profile != SegmentProfile::clean) out.injection_frame = spec.injection_frame;
    return out;
}

}  // namespace mcmot
