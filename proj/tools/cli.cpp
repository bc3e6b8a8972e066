#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcmot/config.hpp"
#include "mcmot/errors.hpp"
#include "mcmot/eval_clearmot.hpp"
#include "mcmot/kernels.hpp"
#include "mcmot/simgen.hpp"
#include "mcmot/tracker_pipeline.hpp"

namespace mcmot::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr const char* kManifestVersion = "1";

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

// Re-throws parse failures with the offending file named.
template <class F>
auto with_path(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), e.line());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

ClassColumn class_column(const std::string& name) {
    if (name == "placeholder") return ClassColumn::placeholder;
    if (name == "class") return ClassColumn::class_id;
    throw ConfigError("--class-column must be 'placeholder' or 'class'");
}

/// Every tracker key as a flag with an environment fallback, plus --config.
struct ConfigFlags {
    std::map<std::string, std::string> values;
    std::vector<std::pair<std::string, CLI::Option*>> options;
    std::string config_path;

    void attach(CLI::App& app) {
        app.add_option("--config", config_path, "flat key = value configuration file")
            ->envname("MCMOT_CONFIG");
        for (const auto& key : config_keys()) {
            CLI::Option* opt = app.add_option("--" + key.name, values[key.name], key.help)
                                   ->envname(env_name(key.name))
                                   ->group("Tracker configuration");
            options.emplace_back(key.name, opt);
        }
    }

    TrackingConfig resolve(const ConfigSnapshot* base = nullptr) const {
        TrackingConfig c = base ? config_from_snapshot(*base) : TrackingConfig{};
        if (!config_path.empty()) {
            ConfigSnapshot entries;
            try {
                entries = parse_config_file(config_path);
            } catch (const ParseError& e) {
                throw ConfigError(config_path + ": " + e.what());
            }
            for (const auto& [k, v] : entries) apply_config_value(c, k, v);
        }
        for (const auto& [key, opt] : options) {
            if (opt->count() > 0) apply_config_value(c, key, values.at(key));
        }
        c.validate();
        return c;
    }
};

json report_json(const RunReport& r) {
    json j;
    j["frames"] = r.frames;
    j["births"] = r.births;
    j["deaths"] = r.deaths;
    j["segments_total"] = r.segments_total;
    j["segments_validated"] = r.segments_validated;
    j["segments_drifted"] = r.segments_drifted;
    j["segments_filtered_out"] = r.segments_filtered_out;
    j["segments_emitted"] = r.segments_emitted;
    j["fb_invocations"] = r.fb_invocations;
    j["change_points"] = r.change_points;
    j["links"] = r.links;
    j["records"] = r.records;
    return j;
}

json summary_json(const MetricSummary& m) {
    json j;
    j["MOTA"] = m.mota;
    j["MOTP"] = m.motp;
    j["FAF"] = m.faf;
    j["MT"] = m.mt;
    j["ML"] = m.ml;
    j["FP"] = m.fp;
    j["FN"] = m.fn;
    j["IDSW"] = m.idsw;
    j["Frag"] = m.frag;
    j["GT"] = m.gt_boxes;
    j["matches"] = m.matches;
    j["frames"] = m.frames;
    j["gt_tracks"] = m.gt_tracks;
    return j;
}

// ---------------------------------------------------------------- track

struct TrackArgs {
    std::string det;
    std::string seq_info;
    std::string out;
    std::string manifest;
    std::string appearance;
    std::string replay;
    std::string class_column = "placeholder";
};

int run_track(const TrackArgs& args_in, const ConfigFlags& flags, std::ostream& out) {
    const auto total_t0 = Clock::now();
    TrackArgs args = args_in;
    std::optional<ConfigSnapshot> base;
    if (!args.replay.empty()) {
        const json m = read_json(args.replay);
        try {
            ConfigSnapshot snap;
            for (const auto& [k, v] : m.at("config").items()) snap.emplace_back(k, v.get<std::string>());
            base = std::move(snap);
            const auto& in = m.at("inputs");
            if (args.det.empty()) args.det = in.at("det").get<std::string>();
            if (args.seq_info.empty()) args.seq_info = in.at("seq_info").get<std::string>();
            if (args.appearance.empty() && in.contains("appearance")) {
                args.appearance = in.at("appearance").get<std::string>();
            }
            if (args.out.empty()) args.out = m.at("outputs").at("result").get<std::string>();
            if (args_in.class_column == "placeholder" && m.contains("class_column")) {
                args.class_column = m.at("class_column").get<std::string>();
            }
        } catch (const json::exception& e) {
            throw ConfigError("manifest '" + args.replay + "' is incomplete: " + e.what());
        }
    }
    if (args.det.empty()) throw ConfigError("--det is required");
    if (args.seq_info.empty()) throw ConfigError("--seq-info is required");
    if (args.out.empty()) throw ConfigError("--out is required");
    if (args.manifest.empty()) args.manifest = args.out + ".manifest.json";

    const TrackingConfig cfg = flags.resolve(base ? &*base : nullptr);
    const ClassColumn layout = class_column(args.class_column);

    const auto parse_t0 = Clock::now();
    const SequenceInfo info = with_path(args.seq_info, [&] { return load_sequence_info(args.seq_info); });
    DetectionFile dets = with_path(args.det, [&] { return parse_detections(fs::path(args.det)); });
    if (!args.appearance.empty()) {
        with_path(args.appearance, [&] { return attach_appearance(dets.detections, fs::path(args.appearance)); });
    }
    const double parse_seconds = seconds_since(parse_t0);

    const TrackingOutput result = run_tracking(dets.detections, info, cfg);

    const auto write_t0 = Clock::now();
    write_trajectories(result.records, fs::path(args.out), layout);
    const double write_seconds = seconds_since(write_t0);

    json m;
    m["manifest_version"] = kManifestVersion;
    m["subcommand"] = "track";
    json config = json::object();
    for (const auto& [k, v] : snapshot(cfg)) config[k] = v;
    m["config"] = config;
    m["seed"] = cfg.seed;
    json inputs;
    inputs["det"] = fs::absolute(args.det).string();
    inputs["seq_info"] = fs::absolute(args.seq_info).string();
    if (!args.appearance.empty()) inputs["appearance"] = fs::absolute(args.appearance).string();
    m["inputs"] = inputs;
    m["outputs"] = {{"result", fs::absolute(args.out).string()},
                    {"manifest", fs::absolute(args.manifest).string()}};
    m["class_column"] = args.class_column;
    m["sequence"] = {{"name", info.name},
                     {"frames", info.frame_count},
                     {"width", info.image_width},
                     {"height", info.image_height}};
    m["detections"] = {{"count", dets.detections.size()},
                       {"rejected_rows", dets.rejected_rows},
                       {"rescaled", dets.rescaled}};
    m["kernel_isa"] = kernels::isa_name(kernels::active_isa());
    m["report"] = report_json(result.report);
    m["timings"] = {{"parse_seconds", parse_seconds},
                    {"tracking_seconds", result.report.tracking_seconds},
                    {"write_seconds", write_seconds},
                    {"total_seconds", seconds_since(total_t0)}};
    m["fps"] = result.report.fps;
    write_text(args.manifest, m.dump(2) + "\n");

    char line[200];
    std::snprintf(line, sizeof line, "tracked %d frames: %d records, %d segments emitted, %.1f fps\n",
                  info.frame_count, result.report.records, result.report.segments_emitted,
                  result.report.fps);
    out << line;
    return kOk;
}

// ---------------------------------------------------------------- evaluate

struct EvalArgs {
    std::vector<std::string> gt;
    std::vector<std::string> res;
    std::vector<std::string> seq_info;
    bool class_aware = false;
    double iou = 0.5;
    int jobs = 1;
    std::string json_out;
};

int run_evaluate(const EvalArgs& args, std::ostream& out) {
    if (args.gt.empty()) throw ConfigError("--gt is required");
    if (args.gt.size() != args.res.size() || args.gt.size() != args.seq_info.size()) {
        throw ConfigError("--gt, --res and --seq-info must be given the same number of times");
    }
    if (!(args.iou > 0.0 && args.iou <= 1.0)) throw ConfigError("--iou must be in (0,1]");
    if (args.jobs < 1) throw ConfigError("--jobs must be >= 1");

    std::vector<SequenceData> data;
    for (std::size_t i = 0; i < args.gt.size(); ++i) {
        SequenceData s;
        s.info = with_path(args.seq_info[i], [&] { return load_sequence_info(args.seq_info[i]); });
        s.gt = with_path(args.gt[i], [&] { return parse_ground_truth(fs::path(args.gt[i])); });
        s.results = with_path(args.res[i], [&] { return parse_trajectories(fs::path(args.res[i])); });
        data.push_back(std::move(s));
    }
    EvalOptions opt;
    opt.iou_threshold = args.iou;
    opt.class_aware = args.class_aware;
    opt.jobs = args.jobs;
    const MetricReport report = compute_metrics(data, opt);
    out << format_report(report);

    if (!args.json_out.empty()) {
        json j;
        j["aggregate"] = summary_json(report.aggregate);
        json seqs = json::array();
        for (const auto& [name, m] : report.per_sequence) {
            json s = summary_json(m);
            s["name"] = name;
            seqs.push_back(s);
        }
        j["sequences"] = seqs;
        if (!report.per_class.empty()) {
            json classes = json::object();
            for (const auto& [cls, m] : report.per_class) classes[std::to_string(cls)] = summary_json(m);
            j["classes"] = classes;
        }
        if (report.macro) {
            j["macro"] = {{"MOTA", report.macro->mota}, {"MOTP", report.macro->motp},
                          {"MT", report.macro->mt},     {"ML", report.macro->ml},
                          {"FAF", report.macro->faf},   {"classes", report.macro->classes}};
        }
        write_text(args.json_out, j.dump(2) + "\n");
    }
    return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimArgs {
    std::string out_dir;
    std::uint64_t seed = 0;
    int objects = 10;
    int frames = 300;
    int width = 1920;
    int height = 1080;
    int classes = 1;
    int bins = 0;
    double jitter = 0.0;
    double fp_rate = 0.0;
    double fn_rate = 0.0;
    bool varied = false;
    std::vector<std::string> drifts;
    std::vector<std::string> occlusions;
    std::string class_column = "placeholder";
    std::string cpd_fixture;
    int length = 300;
    int injection = 150;
    double level = 0.9;
    double noise = 0.05;
    double collapse = 0.1;
};

std::vector<int> int_triple(const std::string& text, const char* flag) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || ptr != part.data() + part.size()) {
            throw ConfigError(std::string(flag) + ": '" + text + "' is not a:b:c");
        }
        out.push_back(v);
    }
    if (out.size() != 3) throw ConfigError(std::string(flag) + ": '" + text + "' is not a:b:c");
    return out;
}

int run_simulate(const SimArgs& args, std::ostream& out) {
    if (args.out_dir.empty()) throw ConfigError("--out-dir is required");
    const fs::path dir(args.out_dir);
    fs::create_directories(dir);

    if (!args.cpd_fixture.empty()) {
        LikelihoodSegmentSpec spec;
        if (args.cpd_fixture == "clean") spec.profile = SegmentProfile::clean;
        else if (args.cpd_fixture == "collapse") spec.profile = SegmentProfile::collapse;
        else if (args.cpd_fixture == "swap") spec.profile = SegmentProfile::swap;
        else throw ConfigError("--cpd-fixture must be clean, collapse or swap");
        spec.length = args.length;
        spec.injection_frame = args.injection;
        spec.level = args.level;
        spec.noise_sigma = args.noise;
        spec.collapse_level = args.collapse;
        spec.seed = args.seed;
        const LikelihoodSegment seg = generate_likelihood_segment(spec);
        std::string csv = "frame,likelihood\n";
        char line[64];
        for (std::size_t i = 0; i < seg.series.frames.size(); ++i) {
            std::snprintf(line, sizeof line, "%d,%.6f\n", seg.series.frames[i], seg.series.values[i]);
            csv += line;
        }
        write_text(dir / "series.csv", csv);
        json log;
        log["seed"] = args.seed;
        log["profile"] = args.cpd_fixture;
        log["injection_frame"] = seg.injection_frame ? json(*seg.injection_frame) : json(nullptr);
        write_text(dir / "injection_log.json", log.dump(2) + "\n");
        out << "wrote " << (dir / "series.csv").string() << '\n';
        return kOk;
    }

    RandomScenarioOptions opt;
    opt.objects = args.objects;
    opt.frame_count = args.frames;
    opt.image_width = args.width;
    opt.image_height = args.height;
    opt.jitter_sigma = args.jitter;
    opt.fp_rate = args.fp_rate;
    opt.fn_rate = args.fn_rate;
    opt.classes = args.classes;
    opt.full_lifetime = !args.varied;
    opt.appearance_bins = args.bins;
    opt.seed = args.seed;
    ScenarioSpec spec = random_scenario(opt);
    spec.name = dir.filename().string().empty() ? "synthetic" : dir.filename().string();
    for (const auto& d : args.drifts) {
        const auto v = int_triple(d, "--drift");
        spec.drifts.push_back({v[0], v[1], v[2]});
    }
    for (const auto& o : args.occlusions) {
        const auto v = int_triple(o, "--occlude");
        spec.occlusions.push_back({v[0], v[1], v[2]});
    }
    const Scenario sc = generate_scenario(spec);
    const ClassColumn layout = class_column(args.class_column);

    fs::create_directories(dir / "det");
    fs::create_directories(dir / "gt");
    write_detections(sc.detections, dir / "det" / "det.txt", layout);
    write_ground_truth(sc.gt, dir / "gt" / "gt.txt");
    write_sequence_info(sc.info, dir / "seqinfo.ini");
    if (args.bins > 0) write_appearance_sidecar(sc.detections, dir / "det" / "appearance.txt");

    json log;
    log["seed"] = args.seed;
    json inj = json::array();
    for (const auto& r : sc.injection_log) {
        inj.push_back({{"object", r.object},
                       {"identity", r.identity},
                       {"frame", r.frame},
                       {"target", r.target},
                       {"target_identity", r.target_identity}});
    }
    log["injections"] = inj;
    log["clutter_boxes"] = sc.clutter_count;
    log["missed_boxes"] = sc.missed_count;
    write_text(dir / "injection_log.json", log.dump(2) + "\n");
    out << "wrote " << sc.detections.size() << " detections and " << sc.gt.size()
        << " ground-truth boxes to " << dir.string() << '\n';
    return kOk;
}

// ---------------------------------------------------------------- analyze-cpd

struct CpdArgs {
    std::string series;
    std::string det;
    std::string seq_info;
    std::string appearance;
    std::string out;
    std::string out_dir;
};

LikelihoodSeries read_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    LikelihoodSeries s;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError(path + ": line " + std::to_string(lineno) + ": expected frame,likelihood", lineno);
        }
        int frame = 0;
        double value = 0.0;
        const char* a = line.data();
        const auto r1 = std::from_chars(a, a + comma, frame);
        const auto r2 = std::from_chars(a + comma + 1, a + line.size(), value);
        const bool ok = r1.ec == std::errc() && r1.ptr == a + comma && r2.ec == std::errc();
        if (!ok) {
            if (lineno == 1) continue;  // header
            throw ParseError(path + ": line " + std::to_string(lineno) + ": malformed row", lineno);
        }
        if (!s.frames.empty() && frame <= s.frames.back()) {
            throw ParseError(path + ": line " + std::to_string(lineno) + ": frames must increase", lineno);
        }
        if (!(value > 0.0 && value <= 1.0)) {
            throw ParseError(path + ": line " + std::to_string(lineno) + ": likelihood outside (0,1]", lineno);
        }
        s.frames.push_back(frame);
        s.values.push_back(value);
    }
    return s;
}

std::string cpd_csv(const LikelihoodSeries& series, const ChangePointSeries& cps) {
    std::string csv = "frame,likelihood,stage1,score,detected\n";
    std::size_t next = 0;
    char line[128];
    for (std::size_t i = 0; i < cps.frames.size(); ++i) {
        int detected = 0;
        if (next < cps.detected_points.size() && cps.detected_points[next] == cps.frames[i]) {
            detected = 1;
            ++next;
        }
        std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%.6f,%d\n", cps.frames[i], series.values[i],
                      cps.raw_outlier_scores[i], cps.change_scores[i], detected);
        csv += line;
    }
    return csv;
}

int run_analyze_cpd(const CpdArgs& args, const ConfigFlags& flags, std::ostream& out) {
    const TrackingConfig cfg = flags.resolve();
    if (!args.series.empty()) {
        const LikelihoodSeries s = read_series(args.series);
        const ChangePointSeries cps = change_point_scores(s, cfg.cpd);
        const std::string csv = cpd_csv(s, cps);
        if (args.out.empty()) out << csv;
        else write_text(args.out, csv);
        return kOk;
    }
    if (args.det.empty() || args.seq_info.empty()) {
        throw ConfigError("analyze-cpd needs --series, or --det with --seq-info");
    }
    if (args.out_dir.empty()) throw ConfigError("--out-dir is required with --det");
    const SequenceInfo info = with_path(args.seq_info, [&] { return load_sequence_info(args.seq_info); });
    DetectionFile dets = with_path(args.det, [&] { return parse_detections(fs::path(args.det)); });
    if (!args.appearance.empty()) {
        with_path(args.appearance, [&] { return attach_appearance(dets.detections, fs::path(args.appearance)); });
    }
    const TrackingOutput result = run_tracking(dets.detections, info, cfg);
    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    int written = 0;
    for (const auto& seg : result.segments) {
        const LikelihoodSeries s = seg.likelihood_series();
        if (s.frames.empty()) continue;
        const ChangePointSeries cps = change_point_scores(s, cfg.cpd);
        write_text(dir / ("segment_" + std::to_string(seg.segment_id) + ".csv"), cpd_csv(s, cps));
        ++written;
        if (!cps.detected_points.empty()) {
            out << "segment " << seg.segment_id << " (identity " << seg.identity << ", "
                << status_name(seg.status) << "): change points";
            for (int f : cps.detected_points) out << ' ' << f;
            out << '\n';
        }
    }
    out << "wrote " << written << " segment series to " << dir.string() << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-class multi-object tracker with change-point drift validation", "mcmot"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "mcmot 1.0");

    TrackArgs track_args;
    ConfigFlags track_flags;
    CLI::App* track = app.add_subcommand("track", "track one sequence of detections");
    track->add_option("--det", track_args.det, "detection file (MOT layout)")->envname("MCMOT_DET");
    track->add_option("--seq-info", track_args.seq_info, "seqinfo.ini of the sequence")
        ->envname("MCMOT_SEQ_INFO");
    track->add_option("--out", track_args.out, "result file")->envname("MCMOT_OUT");
    track->add_option("--manifest", track_args.manifest, "run manifest (default <out>.manifest.json)")
        ->envname("MCMOT_MANIFEST");
    track->add_option("--appearance", track_args.appearance, "appearance histogram sidecar")
        ->envname("MCMOT_APPEARANCE");
    track->add_option("--replay", track_args.replay, "re-run from a manifest's inputs and config")
        ->envname("MCMOT_REPLAY");
    track->add_option("--class-column", track_args.class_column,
                      "8th result column: placeholder (-1) or class")
        ->envname("MCMOT_CLASS_COLUMN");
    track_flags.attach(*track);

    EvalArgs eval_args;
    CLI::App* evaluate = app.add_subcommand("evaluate", "CLEAR-MOT metrics of results against ground truth");
    evaluate->add_option("--gt", eval_args.gt, "ground-truth file, once per sequence")->envname("MCMOT_GT");
    evaluate->add_option("--res", eval_args.res, "result file, once per sequence")->envname("MCMOT_RES");
    evaluate->add_option("--seq-info", eval_args.seq_info, "seqinfo.ini, once per sequence")
        ->envname("MCMOT_SEQ_INFO");
    evaluate->add_flag("--class-aware", eval_args.class_aware, "match and report per class")
        ->envname("MCMOT_CLASS_AWARE");
    evaluate->add_option("--iou", eval_args.iou, "IoU threshold of a match")->envname("MCMOT_IOU");
    evaluate->add_option("--jobs", eval_args.jobs, "sequences evaluated in parallel")->envname("MCMOT_JOBS");
    evaluate->add_option("--json", eval_args.json_out, "also write metrics as JSON")->envname("MCMOT_JSON");

    SimArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "write a seeded synthetic sequence");
    simulate->add_option("--out-dir", sim.out_dir, "output directory")->envname("MCMOT_OUT_DIR");
    simulate->add_option("--seed", sim.seed, "scenario seed")->envname("MCMOT_SEED");
    simulate->add_option("--objects", sim.objects, "number of objects")->envname("MCMOT_OBJECTS");
    simulate->add_option("--frames", sim.frames, "sequence length")->envname("MCMOT_FRAMES");
    simulate->add_option("--width", sim.width, "image width")->envname("MCMOT_WIDTH");
    simulate->add_option("--height", sim.height, "image height")->envname("MCMOT_HEIGHT");
    simulate->add_option("--classes", sim.classes, "number of object classes")->envname("MCMOT_CLASSES");
    simulate->add_option("--appearance-bins", sim.bins, "histogram bins (0 = none)")
        ->envname("MCMOT_APPEARANCE_BINS");
    simulate->add_option("--jitter", sim.jitter, "detection jitter sigma, pixels")->envname("MCMOT_JITTER");
    simulate->add_option("--fp-rate", sim.fp_rate, "clutter boxes per frame")->envname("MCMOT_FP_RATE");
    simulate->add_option("--fn-rate", sim.fn_rate, "per-box miss probability")->envname("MCMOT_FN_RATE");
    simulate->add_flag("--varied-lifetimes", sim.varied, "objects enter and leave mid-sequence")
        ->envname("MCMOT_VARIED_LIFETIMES");
    simulate->add_option("--drift", sim.drifts, "object:frame:target detection-stream swap")
        ->envname("MCMOT_DRIFT");
    simulate->add_option("--occlude", sim.occlusions, "object:first:last occlusion window")
        ->envname("MCMOT_OCCLUDE");
    simulate->add_option("--class-column", sim.class_column, "8th detection column: placeholder or class")
        ->envname("MCMOT_CLASS_COLUMN");
    simulate->add_option("--cpd-fixture", sim.cpd_fixture, "write a likelihood series: clean, collapse or swap")
        ->envname("MCMOT_CPD_FIXTURE");
    simulate->add_option("--length", sim.length, "likelihood series length")->envname("MCMOT_LENGTH");
    simulate->add_option("--injection-frame", sim.injection, "first frame of the injected drop")
        ->envname("MCMOT_INJECTION_FRAME");
    simulate->add_option("--level", sim.level, "likelihood level before the drop")->envname("MCMOT_LEVEL");
    simulate->add_option("--noise", sim.noise, "likelihood noise sigma")->envname("MCMOT_NOISE");
    simulate->add_option("--collapse-level", sim.collapse, "likelihood level after the drop")
        ->envname("MCMOT_COLLAPSE_LEVEL");

    CpdArgs cpd_args;
    ConfigFlags cpd_flags;
    CLI::App* analyze = app.add_subcommand("analyze-cpd", "change-point scores of likelihood series");
    analyze->add_option("--series", cpd_args.series, "frame,likelihood CSV")->envname("MCMOT_SERIES");
    analyze->add_option("--det", cpd_args.det, "detections to track first")->envname("MCMOT_DET");
    analyze->add_option("--seq-info", cpd_args.seq_info, "seqinfo.ini")->envname("MCMOT_SEQ_INFO");
    analyze->add_option("--appearance", cpd_args.appearance, "appearance sidecar")->envname("MCMOT_APPEARANCE");
    analyze->add_option("--out", cpd_args.out, "output CSV for --series (default stdout)")->envname("MCMOT_OUT");
    analyze->add_option("--out-dir", cpd_args.out_dir, "per-segment CSV directory for --det")
        ->envname("MCMOT_OUT_DIR");
    cpd_flags.attach(*analyze);

    std::vector<char*> argv;
    std::vector<std::string> storage = args;
    if (storage.empty()) storage.push_back("mcmot");
    for (auto& s : storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name());
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << "mcmot 1.0\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (track->parsed()) return run_track(track_args, track_flags, out);
        if (evaluate->parsed()) return run_evaluate(eval_args, out);
        if (simulate->parsed()) return run_simulate(sim, out);
        if (analyze->parsed()) return run_analyze_cpd(cpd_args, cpd_flags, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << '\n';
        return kIoError;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    err << "error: no subcommand\n";
    return kConfigError;
}

}  // namespace mcmot::cli
