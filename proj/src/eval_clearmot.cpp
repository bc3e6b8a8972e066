#include "mcmot/eval_clearmot.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

#include "mcmot/assignment.hpp"
#include "mcmot/errors.hpp"

namespace mcmot {

namespace {

// Assigns rows to columns maximizing the summed IoU over admissible pairs.
std::vector<std::pair<std::size_t, std::size_t>> best_pairs(
    const std::vector<const FrameBox*>& rows, const std::vector<const FrameBox*>& cols,
    double threshold) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (rows.empty() || cols.empty()) return out;
    std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(cols.size(), 1.0));
    bool any = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const double o = iou(rows[i]->box, cols[j]->box);
            if (o >= threshold) {
                cost[i][j] = 1.0 - o;
                any = true;
            }
        }
    }
    if (!any) return out;
    const auto assigned = solve_assignment(cost);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int j = assigned[i];
        if (j < 0) continue;
        if (iou(rows[i]->box, cols[static_cast<std::size_t>(j)]->box) >= threshold) {
            out.emplace_back(i, static_cast<std::size_t>(j));
        }
    }
    return out;
}

struct TrackCoverage {
    long lifetime = 0;
    long matched = 0;
    long frag = 0;
    bool ever_matched = false;
    bool last_matched = false;
};

void check_records(const std::vector<TrajectoryRecord>& records, const SequenceInfo& info,
                   const char* what) {
    std::set<std::pair<int, int>> seen;
    for (const auto& r : records) {
        if (r.frame < 1 || r.frame > info.frame_count) {
            throw ConfigError(std::string(what) + " record at frame " + std::to_string(r.frame) +
                              " lies outside sequence '" + info.name + "' (" +
                              std::to_string(info.frame_count) + " frames)");
        }
        if (!seen.emplace(r.frame, r.identity).second) {
            throw ConfigError(std::string(what) + " repeats identity " +
                              std::to_string(r.identity) + " at frame " + std::to_string(r.frame));
        }
    }
}

MetricSummary evaluate_one(const std::vector<TrajectoryRecord>& gt,
                           const std::vector<TrajectoryRecord>& results, int frame_count,
                           double threshold) {
    std::vector<std::vector<FrameBox>> gt_frames(static_cast<std::size_t>(frame_count) + 1);
    std::vector<std::vector<FrameBox>> res_frames(static_cast<std::size_t>(frame_count) + 1);
    for (const auto& r : gt) {
        gt_frames[static_cast<std::size_t>(r.frame)].push_back({r.identity, r.box, r.ignore});
    }
    for (const auto& r : results) {
        res_frames[static_cast<std::size_t>(r.frame)].push_back({r.identity, r.box, false});
    }

    MetricSummary s;
    s.frames = frame_count;
    std::map<int, int> last;
    std::map<int, TrackCoverage> coverage;
    for (int f = 1; f <= frame_count; ++f) {
        const auto& g = gt_frames[static_cast<std::size_t>(f)];
        const auto& r = res_frames[static_cast<std::size_t>(f)];
        const FrameMatching m = match_frame(g, r, last, threshold);
        s.fp += m.fp;
        s.fn += m.fn;
        s.idsw += m.idsw;
        s.matches += static_cast<long>(m.matches.size());
        for (const auto& p : m.matches) {
            s.iou_sum += p.iou;
            last[p.gt_id] = p.result_id;
        }
        std::set<int> matched_ids;
        for (const auto& p : m.matches) matched_ids.insert(p.gt_id);
        for (const auto& box : g) {
            if (box.ignore) continue;
            ++s.gt_boxes;
            TrackCoverage& c = coverage[box.id];
            ++c.lifetime;
            const bool now = matched_ids.count(box.id) > 0;
            if (now) {
                ++c.matched;
                if (c.ever_matched && !c.last_matched) ++c.frag;
                c.ever_matched = true;
            }
            c.last_matched = now;
        }
    }
    for (const auto& [id, c] : coverage) {
        ++s.gt_tracks;
        const double ratio = static_cast<double>(c.matched) / static_cast<double>(c.lifetime);
        if (ratio >= 0.8) ++s.mt_tracks;
        if (ratio <= 0.2) ++s.ml_tracks;
        s.frag += c.frag;
    }
    s.finish();
    return s;
}

std::vector<TrajectoryRecord> of_class(const std::vector<TrajectoryRecord>& records, int cls) {
    std::vector<TrajectoryRecord> out;
    for (const auto& r : records) {
        if (r.class_id == cls) out.push_back(r);
    }
    return out;
}

struct SequenceOutcome {
    MetricSummary overall;
    std::map<int, MetricSummary> per_class;
};

SequenceOutcome evaluate_sequence(const SequenceData& seq, const EvalOptions& options) {
    check_records(seq.gt, seq.info, "ground truth");
    check_records(seq.results, seq.info, "result");
    SequenceOutcome out;
    if (!options.class_aware) {
        out.overall = evaluate_one(seq.gt, seq.results, seq.info.frame_count, options.iou_threshold);
        return out;
    }
    std::set<int> classes;
    for (const auto& r : seq.gt) classes.insert(r.class_id);
    for (const auto& r : seq.results) classes.insert(r.class_id);
    out.overall.frames = seq.info.frame_count;
    for (int cls : classes) {
        MetricSummary m = evaluate_one(of_class(seq.gt, cls), of_class(seq.results, cls),
                                       seq.info.frame_count, options.iou_threshold);
        out.per_class[cls] = m;
        m.frames = 0;
        out.overall += m;
    }
    out.overall.finish();
    return out;
}

}  // namespace

FrameMatching match_frame(std::span<const FrameBox> gt, std::span<const FrameBox> results,
                          const std::map<int, int>& prior, double iou_threshold) {
    FrameMatching m;
    std::vector<char> gt_done(gt.size(), 0);
    std::vector<char> res_done(results.size(), 0);

    auto record = [&](std::size_t gi, std::size_t ri) {
        const double o = iou(gt[gi].box, results[ri].box);
        m.matches.push_back({gt[gi].id, results[ri].id, o});
        gt_done[gi] = res_done[ri] = 1;
        if (const auto it = prior.find(gt[gi].id); it != prior.end() && it->second != results[ri].id) {
            ++m.idsw;
        }
    };

    for (std::size_t gi = 0; gi < gt.size(); ++gi) {
        if (gt[gi].ignore) continue;
        const auto it = prior.find(gt[gi].id);
        if (it == prior.end()) continue;
        for (std::size_t ri = 0; ri < results.size(); ++ri) {
            if (res_done[ri] || results[ri].id != it->second) continue;
            if (iou(gt[gi].box, results[ri].box) >= iou_threshold) record(gi, ri);
            break;
        }
    }

    std::vector<const FrameBox*> rows, cols;
    std::vector<std::size_t> row_idx, col_idx;
    for (std::size_t gi = 0; gi < gt.size(); ++gi) {
        if (gt_done[gi] || gt[gi].ignore) continue;
        rows.push_back(&gt[gi]);
        row_idx.push_back(gi);
    }
    for (std::size_t ri = 0; ri < results.size(); ++ri) {
        if (res_done[ri]) continue;
        cols.push_back(&results[ri]);
        col_idx.push_back(ri);
    }
    for (const auto& [i, j] : best_pairs(rows, cols, iou_threshold)) record(row_idx[i], col_idx[j]);

    // Leftover results covering an ignored region are dropped silently.
    rows.clear();
    row_idx.clear();
    cols.clear();
    col_idx.clear();
    for (std::size_t gi = 0; gi < gt.size(); ++gi) {
        if (!gt[gi].ignore) continue;
        rows.push_back(&gt[gi]);
        row_idx.push_back(gi);
    }
    for (std::size_t ri = 0; ri < results.size(); ++ri) {
        if (res_done[ri]) continue;
        cols.push_back(&results[ri]);
        col_idx.push_back(ri);
    }
    for (const auto& [i, j] : best_pairs(rows, cols, iou_threshold)) res_done[col_idx[j]] = 1;

    for (std::size_t gi = 0; gi < gt.size(); ++gi) {
        if (!gt_done[gi] && !gt[gi].ignore) m.unmatched_gt.push_back(gt[gi].id);
    }
    for (std::size_t ri = 0; ri < results.size(); ++ri) {
        if (!res_done[ri]) m.unmatched_results.push_back(results[ri].id);
    }
    m.fn = static_cast<int>(m.unmatched_gt.size());
    m.fp = static_cast<int>(m.unmatched_results.size());
    return m;
}

void MetricSummary::finish() {
    const double errors = static_cast<double>(fp + fn + idsw);
    mota = 1.0 - errors / static_cast<double>(std::max<long>(gt_boxes, 1));
    motp = matches > 0 ? iou_sum / static_cast<double>(matches) : 0.0;
    mt = gt_tracks > 0 ? static_cast<double>(mt_tracks) / static_cast<double>(gt_tracks) : 0.0;
    ml = gt_tracks > 0 ? static_cast<double>(ml_tracks) / static_cast<double>(gt_tracks) : 0.0;
    faf = frames > 0 ? static_cast<double>(fp) / static_cast<double>(frames) : 0.0;
}

MetricSummary& MetricSummary::operator+=(const MetricSummary& o) {
    fp += o.fp;
    fn += o.fn;
    idsw += o.idsw;
    frag += o.frag;
    gt_boxes += o.gt_boxes;
    matches += o.matches;
    iou_sum += o.iou_sum;
    frames += o.frames;
    gt_tracks += o.gt_tracks;
    mt_tracks += o.mt_tracks;
    ml_tracks += o.ml_tracks;
    return *this;
}

MetricReport compute_metrics(std::span<const SequenceData> sequences, const EvalOptions& options) {
    std::vector<SequenceOutcome> outcomes(sequences.size());
    std::vector<std::exception_ptr> errors(sequences.size());
    const std::size_t jobs =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.jobs, 1)), 1,
                                std::max<std::size_t>(sequences.size(), 1));
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (std::size_t i = cursor++; i < sequences.size(); i = cursor++) {
            try {
                outcomes[i] = evaluate_sequence(sequences[i], options);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    MetricReport report;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        report.per_sequence.emplace_back(sequences[i].info.name, outcomes[i].overall);
        report.aggregate += outcomes[i].overall;
        for (const auto& [cls, m] : outcomes[i].per_class) {
            auto [it, fresh] = report.per_class.try_emplace(cls, m);
            if (!fresh) it->second += m;
        }
    }
    report.aggregate.finish();
    if (options.class_aware) {
        ClassMacro macro;
        for (auto& [cls, m] : report.per_class) {
            m.finish();
            macro.mota += m.mota;
            macro.motp += m.motp;
            macro.mt += m.mt;
            macro.ml += m.ml;
            macro.faf += m.faf;
            ++macro.classes;
        }
        if (macro.classes > 0) {
            const double k = static_cast<double>(macro.classes);
            macro.mota /= k;
            macro.motp /= k;
            macro.mt /= k;
            macro.ml /= k;
            macro.faf /= k;
        }
        report.macro = macro;
    }
    return report;
}

MetricReport compute_metrics(const std::vector<TrajectoryRecord>& gt,
                             const std::vector<TrajectoryRecord>& results,
                             const SequenceInfo& info, const EvalOptions& options) {
    const SequenceData seq{info, gt, results};
    return compute_metrics(std::span<const SequenceData>(&seq, 1), options);
}

std::string format_report(const MetricReport& report) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %7s %7s %7s %6s %6s %7s %7s %6s %6s\n", "sequence",
                  "MOTA", "MOTP", "FAF", "MT", "ML", "FP", "FN", "IDSw", "Frag");
    out << line;
    auto row = [&](const std::string& name, const MetricSummary& m) {
        std::snprintf(line, sizeof line, "%-16s %7.3f %7.3f %7.3f %6.3f %6.3f %7ld %7ld %6ld %6ld\n",
                      name.c_str(), m.mota, m.motp, m.faf, m.mt, m.ml, m.fp, m.fn, m.idsw, m.frag);
        out << line;
    };
    for (const auto& [name, m] : report.per_sequence) row(name, m);
    row("OVERALL", report.aggregate);
    for (const auto& [cls, m] : report.per_class) row("class " + std::to_string(cls), m);
    if (report.macro) {
        std::snprintf(line, sizeof line, "%-16s %7.3f %7.3f %7.3f %6.3f %6.3f\n", "macro",
                      report.macro->mota, report.macro->motp, report.macro->faf, report.macro->mt,
                      report.macro->ml);
        out << line;
    }
    return out.str();
}

}  // namespace mcmot
