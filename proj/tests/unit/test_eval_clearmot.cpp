#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "mcmot/errors.hpp"
#include "mcmot/eval_clearmot.hpp"
#include "mcmot/simgen.hpp"

using namespace mcmot;

namespace {

TrajectoryRecord rec(int frame, int id, BoundingBox b, int cls = kDefaultClass) {
    TrajectoryRecord r;
    r.frame = frame;
    r.identity = id;
    r.class_id = cls;
    r.box = b;
    return r;
}

SequenceInfo info(int frames) {
    SequenceInfo s;
    s.name = "seq";
    s.frame_count = frames;
    s.image_width = 1000;
    s.image_height = 1000;
    return s;
}

void expect_identity(const MetricSummary& m) {
    const double gt = static_cast<double>(std::max(m.gt_boxes, 1L));
    EXPECT_NEAR(m.mota, 1.0 - static_cast<double>(m.fp + m.fn + m.idsw) / gt, 1e-12);
    EXPECT_LE(m.mt + m.ml, 1.0 + 1e-12);
}

// Exhaustive best total IoU over admissible one-to-one matchings.
double brute_best(const std::vector<FrameBox>& g, const std::vector<FrameBox>& r, double thr,
                  std::size_t i = 0, std::vector<char> used = {}) {
    if (used.empty()) used.assign(r.size(), 0);
    if (i == g.size()) return 0.0;
    double best = brute_best(g, r, thr, i + 1, used);
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (used[j]) continue;
        const double v = iou(g[i].box, r[j].box);
        if (v < thr) continue;
        used[j] = 1;
        best = std::max(best, v + brute_best(g, r, thr, i + 1, used));
        used[j] = 0;
    }
    return best;
}

}  // namespace

TEST(MatchFrame, IdenticalSets) {
    const std::vector<FrameBox> g{{1, {0, 0, 10, 10}}, {2, {50, 0, 10, 10}}};
    const auto m = match_frame(g, g, {{1, 1}, {2, 2}});
    EXPECT_EQ(m.fp + m.fn + m.idsw, 0);
    EXPECT_EQ(m.matches.size(), 2u);
}

TEST(MatchFrame, BelowThresholdIsFpAndFn) {
    // 10x10 boxes shifted by 4.3: IoU = 57/143 < 0.5.
    const std::vector<FrameBox> g{{1, {0, 0, 10, 10}}};
    const std::vector<FrameBox> r{{7, {4.3, 0, 10, 10}}};
    const auto m = match_frame(g, r, {});
    EXPECT_EQ(m.fp, 1);
    EXPECT_EQ(m.fn, 1);
    EXPECT_TRUE(m.matches.empty());
}

TEST(MatchFrame, CrossedIdentitiesGiveTwoSwitches) {
    const std::vector<FrameBox> g{{1, {0, 0, 10, 10}}, {2, {100, 0, 10, 10}}};
    const std::vector<FrameBox> r{{20, {0, 0, 10, 10}}, {10, {100, 0, 10, 10}}};
    const auto m = match_frame(g, r, {{1, 10}, {2, 20}});
    EXPECT_EQ(m.idsw, 2);
    EXPECT_EQ(m.fp, 0);
    EXPECT_EQ(m.fn, 0);
}

TEST(MatchFrame, PriorPersistsOverBetterIou) {
    const std::vector<FrameBox> g{{1, {0, 0, 10, 10}}};
    const std::vector<FrameBox> r{{5, {1, 0, 10, 10}}, {6, {0, 0, 10, 10}}};
    const auto m = match_frame(g, r, {{1, 5}});
    ASSERT_EQ(m.matches.size(), 1u);
    EXPECT_EQ(m.matches[0].result_id, 5);
    EXPECT_EQ(m.idsw, 0);
    EXPECT_EQ(m.fp, 1);
}

TEST(MatchFrame, IgnoredGtAbsorbsResult) {
    const std::vector<FrameBox> g{{1, {0, 0, 10, 10}, true}};
    const std::vector<FrameBox> r{{5, {0, 0, 10, 10}}};
    const auto m = match_frame(g, r, {});
    EXPECT_EQ(m.fp, 0);
    EXPECT_EQ(m.fn, 0);
}

TEST(MatchFrame, OptimalTotalIouAgainstBruteForce) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> pos(0, 60), ext(15, 30);
    std::uniform_int_distribution<int> cnt(0, 5);
    for (int t = 0; t < 300; ++t) {
        std::vector<FrameBox> g, r;
        const int ng = cnt(rng), nr = cnt(rng);
        for (int i = 0; i < ng; ++i) g.push_back({i + 1, {pos(rng), pos(rng), ext(rng), ext(rng)}});
        for (int i = 0; i < nr; ++i) r.push_back({i + 1, {pos(rng), pos(rng), ext(rng), ext(rng)}});
        const auto m = match_frame(g, r, {});
        double total = 0;
        for (const auto& p : m.matches) total += p.iou;
        ASSERT_NEAR(total, brute_best(g, r, 0.5), 1e-9);
        ASSERT_EQ(m.fn + static_cast<int>(m.matches.size()), ng);
        ASSERT_EQ(m.fp + static_cast<int>(m.matches.size()), nr);
    }
}

TEST(ComputeMetrics, ResultsEqualGt) {
    std::vector<TrajectoryRecord> gt;
    for (int f = 1; f <= 10; ++f) {
        gt.push_back(rec(f, 1, {10.0 * f, 0, 20, 40}));
        gt.push_back(rec(f, 2, {10.0 * f, 200, 20, 40}));
    }
    const auto rep = compute_metrics(gt, gt, info(10));
    const auto& m = rep.aggregate;
    EXPECT_DOUBLE_EQ(m.mota, 1.0);
    EXPECT_DOUBLE_EQ(m.motp, 1.0);
    EXPECT_EQ(m.fp + m.fn + m.idsw + m.frag, 0);
    EXPECT_DOUBLE_EQ(m.mt, 1.0);
    EXPECT_DOUBLE_EQ(m.ml, 0.0);
    expect_identity(m);
}

TEST(ComputeMetrics, MotaPointEight) {
    std::vector<TrajectoryRecord> gt, res;
    for (int f = 1; f <= 10; ++f) {
        gt.push_back(rec(f, 1, {10.0 * f, 0, 20, 40}));
        if (f != 4) res.push_back(rec(f, 9, {10.0 * f, 0, 20, 40}));
    }
    res.push_back(rec(6, 3, {500, 500, 20, 40}));
    const auto m = compute_metrics(gt, res, info(10)).aggregate;
    EXPECT_EQ(m.fn, 1);
    EXPECT_EQ(m.fp, 1);
    EXPECT_EQ(m.idsw, 0);
    EXPECT_DOUBLE_EQ(m.mota, 0.8);
    EXPECT_DOUBLE_EQ(m.mt, 1.0);  // 9 of 10 frames
    EXPECT_EQ(m.frag, 1);
    EXPECT_NEAR(m.faf, 0.1, 1e-12);
    expect_identity(m);
}

TEST(ComputeMetrics, CrossedIdentitiesAcrossFrames) {
    std::vector<TrajectoryRecord> gt, res;
    for (int f = 1; f <= 2; ++f) {
        gt.push_back(rec(f, 1, {0, 0, 10, 10}));
        gt.push_back(rec(f, 2, {100, 0, 10, 10}));
    }
    res.push_back(rec(1, 10, {0, 0, 10, 10}));
    res.push_back(rec(1, 20, {100, 0, 10, 10}));
    res.push_back(rec(2, 20, {0, 0, 10, 10}));
    res.push_back(rec(2, 10, {100, 0, 10, 10}));
    const auto m = compute_metrics(gt, res, info(2)).aggregate;
    EXPECT_EQ(m.idsw, 2);
    EXPECT_DOUBLE_EQ(m.mota, 0.5);
}

TEST(ComputeMetrics, MostlyLost) {
    std::vector<TrajectoryRecord> gt, res;
    for (int f = 1; f <= 10; ++f) gt.push_back(rec(f, 1, {0, 0, 10, 10}));
    res.push_back(rec(1, 1, {0, 0, 10, 10}));
    res.push_back(rec(2, 1, {0, 0, 10, 10}));
    const auto m = compute_metrics(gt, res, info(10)).aggregate;
    EXPECT_DOUBLE_EQ(m.ml, 1.0);
    EXPECT_DOUBLE_EQ(m.mt, 0.0);
}

TEST(ComputeMetrics, InvalidRecords) {
    std::vector<TrajectoryRecord> gt{rec(1, 1, {0, 0, 10, 10})};
    EXPECT_THROW(compute_metrics(gt, {rec(11, 1, {0, 0, 10, 10})}, info(10)), ConfigError);
    EXPECT_THROW(compute_metrics(gt, {rec(1, 1, {0, 0, 10, 10}), rec(1, 1, {5, 0, 10, 10})}, info(10)),
                 ConfigError);
}

TEST(ComputeMetrics, PermutationInvarianceAndMonotonicity) {
    RandomScenarioOptions o;
    o.objects = 6;
    o.frame_count = 60;
    o.jitter_sigma = 3.0;
    o.fn_rate = 0.2;
    o.fp_rate = 1.0;
    o.seed = 3;
    const Scenario sc = generate_scenario(random_scenario(o));
    // Detections with noisy pseudo identities stand in for tracker output.
    std::vector<TrajectoryRecord> res;
    std::map<int, int> per_frame;
    for (const auto& d : sc.detections) {
        res.push_back(rec(d.frame, ++per_frame[d.frame], d.box));
    }
    const auto base = compute_metrics(sc.gt, res, sc.info).aggregate;
    expect_identity(base);

    std::mt19937_64 rng(1);
    std::vector<int> perm(256);
    for (int t = 0; t < 100; ++t) {
        std::iota(perm.begin(), perm.end(), 100);
        std::shuffle(perm.begin(), perm.end(), rng);
        auto renamed = res;
        for (auto& r : renamed) r.identity = perm[static_cast<std::size_t>(r.identity)];
        const auto m = compute_metrics(sc.gt, renamed, sc.info).aggregate;
        ASSERT_EQ(m.fp, base.fp);
        ASSERT_EQ(m.fn, base.fn);
        ASSERT_EQ(m.idsw, base.idsw);
        ASSERT_EQ(m.frag, base.frag);
        ASSERT_DOUBLE_EQ(m.mota, base.mota);
        ASSERT_DOUBLE_EQ(m.motp, base.motp);
        ASSERT_DOUBLE_EQ(m.mt, base.mt);
        ASSERT_DOUBLE_EQ(m.ml, base.ml);
    }

    auto extra = res;
    extra.push_back(rec(5, 999, {1500, 900, 30, 30}));
    const auto m = compute_metrics(sc.gt, extra, sc.info).aggregate;
    EXPECT_GE(m.fp, base.fp);
    EXPECT_LE(m.mota, base.mota);
}

TEST(ComputeMetrics, ClassAwareMacro) {
    std::vector<TrajectoryRecord> gt, res;
    for (int f = 1; f <= 10; ++f) {
        gt.push_back(rec(f, 1, {0, 0, 10, 10}, 1));
        gt.push_back(rec(f, 2, {100, 0, 10, 10}, 2));
        res.push_back(rec(f, 1, {0, 0, 10, 10}, 1));
        if (f <= 5) res.push_back(rec(f, 2, {100, 0, 10, 10}, 2));
    }
    EvalOptions opt;
    opt.class_aware = true;
    const auto rep = compute_metrics(gt, res, info(10), opt);
    ASSERT_TRUE(rep.macro);
    EXPECT_EQ(rep.macro->classes, 2);
    EXPECT_DOUBLE_EQ(rep.per_class.at(1).mota, 1.0);
    EXPECT_DOUBLE_EQ(rep.per_class.at(2).mota, 0.5);
    EXPECT_DOUBLE_EQ(rep.macro->mota, 0.75);
    // A result of the wrong class never matches.
    std::vector<TrajectoryRecord> wrong{rec(1, 1, {0, 0, 10, 10}, 2)};
    const auto w = compute_metrics({rec(1, 1, {0, 0, 10, 10}, 1)}, wrong, info(1), opt);
    EXPECT_EQ(w.aggregate.fp, 1);
    EXPECT_EQ(w.aggregate.fn, 1);
}

TEST(ComputeMetrics, ParallelJobsMatchSerial) {
    std::vector<SequenceData> seqs;
    for (int s = 0; s < 4; ++s) {
        RandomScenarioOptions o;
        o.objects = 4;
        o.frame_count = 40;
        o.jitter_sigma = 2;
        o.fn_rate = 0.1;
        o.seed = static_cast<std::uint64_t>(s);
        const Scenario sc = generate_scenario(random_scenario(o));
        std::vector<TrajectoryRecord> res;
        std::map<int, int> k;
        for (const auto& d : sc.detections) res.push_back(rec(d.frame, ++k[d.frame], d.box));
        SequenceData sd{sc.info, sc.gt, res};
        sd.info.name = "s" + std::to_string(s);
        seqs.push_back(sd);
    }
    EvalOptions serial, parallel;
    parallel.jobs = 3;
    const auto a = compute_metrics(seqs, serial);
    const auto b = compute_metrics(seqs, parallel);
    EXPECT_EQ(a.aggregate.fp, b.aggregate.fp);
    EXPECT_EQ(a.aggregate.idsw, b.aggregate.idsw);
    EXPECT_DOUBLE_EQ(a.aggregate.mota, b.aggregate.mota);
    ASSERT_EQ(a.per_sequence.size(), 4u);
    EXPECT_EQ(a.per_sequence[2].first, "s2");
    EXPECT_NE(format_report(a).find("MOTA"), std::string::npos);
}
