#include "mcmot/mot_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mcmot/errors.hpp"

namespace mcmot {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

double to_real(std::string_view field, std::size_t line, const char* what) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw ParseError("line " + std::to_string(line) + ": invalid " + what + " '" +
                             std::string(field) + "'",
                         line);
    }
    return value;
}

int to_int(std::string_view field, std::size_t line, const char* what) {
    const double v = to_real(field, line, what);
    if (v != std::floor(v) || std::fabs(v) > 2e9) {
        throw ParseError("line " + std::to_string(line) + ": " + what +
                             " is not an integer: '" + std::string(field) + "'",
                         line);
    }
    return static_cast<int>(v);
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void append_fixed(std::string& line, double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    line += buf;
}

void check_record(const TrajectoryRecord& r) {
    if (r.frame < 1) throw ContractError("trajectory record with frame < 1");
    if (r.identity < 1) throw ContractError("trajectory record with identity < 1");
    if (!r.box.valid()) throw ContractError("trajectory record with invalid box");
    if (!(r.score >= 0.0 && r.score <= 1.0)) {
        throw ContractError("trajectory record score outside [0,1]");
    }
}

struct RowKey {
    int frame;
    int id;
    bool operator==(const RowKey&) const = default;
};

struct RowKeyHash {
    std::size_t operator()(const RowKey& k) const noexcept {
        return std::hash<long long>{}((static_cast<long long>(k.frame) << 32) ^
                                      static_cast<unsigned>(k.id));
    }
};

std::vector<TrajectoryRecord> parse_tracks(std::istream& in, bool ground_truth) {
    std::vector<TrajectoryRecord> records;
    std::unordered_map<RowKey, std::size_t, RowKeyHash> first_line;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) continue;
        const auto f = split_fields(line);
        if (f.size() < 6) {
            throw ParseError("line " + std::to_string(lineno) + ": expected at least 6 fields, got " +
                                 std::to_string(f.size()),
                             lineno);
        }
        TrajectoryRecord r;
        r.frame = to_int(f[0], lineno, "frame");
        r.identity = to_int(f[1], lineno, "id");
        r.box = {to_real(f[2], lineno, "bb_left"), to_real(f[3], lineno, "bb_top"),
                 to_real(f[4], lineno, "bb_width"), to_real(f[5], lineno, "bb_height")};
        if (r.frame < 1) throw ParseError("line " + std::to_string(lineno) + ": frame < 1", lineno);
        if (r.identity < 1) {
            throw ParseError("line " + std::to_string(lineno) + ": identity < 1", lineno);
        }
        if (!r.box.valid()) {
            throw ParseError("line " + std::to_string(lineno) + ": non-positive box extent", lineno);
        }
        if (ground_truth) {
            if (f.size() > 6) r.ignore = to_int(f[6], lineno, "flag") == 0;
            if (f.size() > 7) r.class_id = to_int(f[7], lineno, "class");
            if (f.size() > 8) r.score = std::clamp(to_real(f[8], lineno, "visibility"), 0.0, 1.0);
        } else {
            if (f.size() > 6) r.score = std::clamp(to_real(f[6], lineno, "conf"), 0.0, 1.0);
            if (f.size() > 7) {
                const int cls = to_int(f[7], lineno, "class");
                if (cls >= 0) r.class_id = cls;
            }
        }
        const auto [it, inserted] = first_line.try_emplace(RowKey{r.frame, r.identity}, lineno);
        if (!inserted) {
            throw ParseError("duplicate (frame " + std::to_string(r.frame) + ", id " +
                                 std::to_string(r.identity) + ") on lines " +
                                 std::to_string(it->second) + " and " + std::to_string(lineno),
                             lineno);
        }
        records.push_back(r);
    }
    if (ground_truth) {
        std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
            return a.identity != b.identity ? a.identity < b.identity : a.frame < b.frame;
        });
    } else {
        std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
            return a.frame != b.frame ? a.frame < b.frame : a.identity < b.identity;
        });
    }
    return records;
}

}  // namespace

DetectionFile parse_detections(std::istream& in, const ClassMap* class_map) {
    DetectionFile result;
    std::string line;
    std::size_t lineno = 0;
    std::unordered_map<int, int> rows_per_frame;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) continue;
        const auto f = split_fields(line);
        if (f.size() < 7) {
            throw ParseError("line " + std::to_string(lineno) + ": expected at least 7 fields, got " +
                                 std::to_string(f.size()),
                             lineno);
        }
        Detection d;
        d.frame = to_int(f[0], lineno, "frame");
        if (d.frame < 1) throw ParseError("line " + std::to_string(lineno) + ": frame < 1", lineno);
        d.box = {to_real(f[2], lineno, "bb_left"), to_real(f[3], lineno, "bb_top"),
                 to_real(f[4], lineno, "bb_width"), to_real(f[5], lineno, "bb_height")};
        d.confidence = to_real(f[6], lineno, "conf");
        if (f.size() > 7) {
            if (class_map) {
                const auto it = class_map->find(std::string(f[7]));
                if (it == class_map->end()) {
                    throw ParseError("line " + std::to_string(lineno) + ": unknown class label '" +
                                         std::string(f[7]) + "'",
                                     lineno);
                }
                d.class_id = it->second;
            } else {
                const int cls = to_int(f[7], lineno, "class");
                if (cls >= 0) d.class_id = cls;
            }
        }
        // Row order counts rejected rows too, so sidecar indices stay aligned
        // with the file as written.
        d.row_in_frame = rows_per_frame[d.frame]++;
        if (!(d.box.width > 0.0 && d.box.height > 0.0)) {
            ++result.rejected_rows;
            continue;
        }
        result.detections.push_back(std::move(d));
    }

    auto& dets = result.detections;
    if (!dets.empty()) {
        const auto [lo, hi] = std::minmax_element(
            dets.begin(), dets.end(),
            [](const Detection& a, const Detection& b) { return a.confidence < b.confidence; });
        result.raw_min_confidence = lo->confidence;
        result.raw_max_confidence = hi->confidence;
        if (result.raw_min_confidence < 0.0 || result.raw_max_confidence > 1.0) {
            result.rescaled = true;
            const double span = result.raw_max_confidence - result.raw_min_confidence;
            for (auto& d : dets) {
                d.confidence = span > 0.0 ? (d.confidence - result.raw_min_confidence) / span : 1.0;
            }
        }
    }
    std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.confidence > b.confidence;
    });
    return result;
}

DetectionFile parse_detections(const std::filesystem::path& path, const ClassMap* class_map) {
    auto in = open_in(path);
    return parse_detections(in, class_map);
}

std::size_t attach_appearance(std::vector<Detection>& detections, std::istream& in) {
    std::unordered_map<RowKey, Detection*, RowKeyHash> index;
    for (auto& d : detections) index.emplace(RowKey{d.frame, d.row_in_frame}, &d);

    std::size_t attached = 0;
    std::size_t bins = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) continue;
        const auto f = split_fields(line);
        if (f.size() < 3) {
            throw ParseError("line " + std::to_string(lineno) + ": sidecar row needs frame, index and bins",
                             lineno);
        }
        const int frame = to_int(f[0], lineno, "frame");
        const int row = to_int(f[1], lineno, "det_index");
        Histogram h;
        h.reserve(f.size() - 2);
        for (std::size_t i = 2; i < f.size(); ++i) {
            const double v = to_real(f[i], lineno, "bin");
            if (v < 0.0) throw ParseError("line " + std::to_string(lineno) + ": negative bin", lineno);
            h.push_back(v);
        }
        if (bins == 0) bins = h.size();
        if (h.size() != bins) {
            throw ParseError("line " + std::to_string(lineno) + ": histogram length differs from earlier rows",
                             lineno);
        }
        const double sum = std::accumulate(h.begin(), h.end(), 0.0);
        if (!(sum > 0.0)) throw ParseError("line " + std::to_string(lineno) + ": empty histogram", lineno);
        for (auto& v : h) v /= sum;
        const auto it = index.find(RowKey{frame, row});
        if (it == index.end()) continue;  // row belongs to a rejected detection
        it->second->appearance = std::make_shared<const Histogram>(std::move(h));
        ++attached;
    }
    return attached;
}

std::size_t attach_appearance(std::vector<Detection>& detections,
                              const std::filesystem::path& path) {
    auto in = open_in(path);
    return attach_appearance(detections, in);
}

std::vector<TrajectoryRecord> parse_ground_truth(std::istream& in) { return parse_tracks(in, true); }

std::vector<TrajectoryRecord> parse_ground_truth(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_ground_truth(in);
}

std::vector<TrajectoryRecord> parse_trajectories(std::istream& in) { return parse_tracks(in, false); }

std::vector<TrajectoryRecord> parse_trajectories(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_trajectories(in);
}

void write_trajectories(const std::vector<TrajectoryRecord>& records, std::ostream& out,
                        ClassColumn layout) {
    std::vector<const TrajectoryRecord*> order;
    order.reserve(records.size());
    for (const auto& r : records) {
        check_record(r);
        order.push_back(&r);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        return a->frame != b->frame ? a->frame < b->frame : a->identity < b->identity;
    });
    std::string line;
    for (const auto* r : order) {
        line.clear();
        line += std::to_string(r->frame);
        line += ',';
        line += std::to_string(r->identity);
        for (double v : {r->box.left, r->box.top, r->box.width, r->box.height, r->score}) {
            line += ',';
            append_fixed(line, v, 2);
        }
        line += layout == ClassColumn::class_id ? "," + std::to_string(r->class_id) : ",-1";
        line += ",-1,-1\n";
        out << line;
    }
}

void write_trajectories(const std::vector<TrajectoryRecord>& records,
                        const std::filesystem::path& path, ClassColumn layout) {
    auto out = open_out(path);
    write_trajectories(records, out, layout);
    finish_write(out, path);
}

void write_ground_truth(const std::vector<TrajectoryRecord>& records, std::ostream& out) {
    std::vector<const TrajectoryRecord*> order;
    for (const auto& r : records) {
        check_record(r);
        order.push_back(&r);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        return a->frame != b->frame ? a->frame < b->frame : a->identity < b->identity;
    });
    std::string line;
    for (const auto* r : order) {
        line.clear();
        line += std::to_string(r->frame) + ',' + std::to_string(r->identity);
        for (double v : {r->box.left, r->box.top, r->box.width, r->box.height}) {
            line += ',';
            append_fixed(line, v, 2);
        }
        line += r->ignore ? ",0," : ",1,";
        line += std::to_string(r->class_id);
        line += ',';
        append_fixed(line, r->score, 2);
        line += '\n';
        out << line;
    }
}

void write_ground_truth(const std::vector<TrajectoryRecord>& records,
                        const std::filesystem::path& path) {
    auto out = open_out(path);
    write_ground_truth(records, out);
    finish_write(out, path);
}

void write_detections(const std::vector<Detection>& detections, std::ostream& out,
                      ClassColumn layout) {
    std::string line;
    for (const auto& d : detections) {
        line.clear();
        line += std::to_string(d.frame) + ",-1";
        for (double v : {d.box.left, d.box.top, d.box.width, d.box.height}) {
            line += ',';
            append_fixed(line, v, 2);
        }
        line += ',';
        append_fixed(line, d.confidence, 4);
        line += layout == ClassColumn::class_id ? "," + std::to_string(d.class_id) : ",-1";
        line += ",-1,-1\n";
        out << line;
    }
}

void write_detections(const std::vector<Detection>& detections,
                      const std::filesystem::path& path, ClassColumn layout) {
    auto out = open_out(path);
    write_detections(detections, out, layout);
    finish_write(out, path);
}

void write_appearance_sidecar(const std::vector<Detection>& detections, std::ostream& out) {
    std::string line;
    for (const auto& d : detections) {
        if (!d.appearance) continue;
        line.clear();
        line += std::to_string(d.frame) + ',' + std::to_string(d.row_in_frame);
        for (double v : *d.appearance) {
            line += ',';
            append_fixed(line, v, 6);
        }
        line += '\n';
        out << line;
    }
}

void write_appearance_sidecar(const std::vector<Detection>& detections,
                              const std::filesystem::path& path) {
    auto out = open_out(path);
    write_appearance_sidecar(detections, out);
    finish_write(out, path);
}

SequenceInfo load_sequence_info(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("seqinfo: ") + e.what());
    }
    const pt::ptree& section = tree.get_child("Sequence", tree);

    auto require = [&](const char* key) -> const std::string& {
        const auto child = section.get_child_optional(key);
        if (!child) throw ConfigError(std::string("seqinfo: missing key ") + key);
        return child->data();
    };
    auto as_int = [](const std::string& text, const char* key) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(text, &used);
            if (used != trim(text).size()) throw std::invalid_argument(key);
            return v;
        } catch (const std::exception&) {
            throw ConfigError(std::string("seqinfo: ") + key + " is not an integer");
        }
    };

    SequenceInfo info;
    info.name = section.get<std::string>("name", "");
    info.frame_count = as_int(require("seqLength"), "seqLength");
    info.image_width = as_int(require("imWidth"), "imWidth");
    info.image_height = as_int(require("imHeight"), "imHeight");
    if (const auto rate = section.get_optional<std::string>("frameRate")) {
        try {
            info.frame_rate = std::stod(*rate);
        } catch (const std::exception&) {
            throw ConfigError("seqinfo: frameRate is not a number");
        }
    }
    if (info.frame_count < 1) throw ConfigError("seqinfo: seqLength must be >= 1");
    if (info.image_width < 1) throw ConfigError("seqinfo: imWidth must be > 0");
    if (info.image_height < 1) throw ConfigError("seqinfo: imHeight must be > 0");
    if (!(info.frame_rate > 0.0)) throw ConfigError("seqinfo: frameRate must be > 0");
    return info;
}

SequenceInfo load_sequence_info(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    auto info = load_sequence_info(in);
    if (info.name.empty()) info.name = path.parent_path().filename().string();
    return info;
}

void write_sequence_info(const SequenceInfo& info, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "[Sequence]\n"
        << "name=" << info.name << '\n'
        << "seqLength=" << info.frame_count << '\n'
        << "imWidth=" << info.image_width << '\n'
        << "imHeight=" << info.image_height << '\n'
        << "frameRate=" << info.frame_rate << '\n';
    finish_write(out, path);
}

std::vector<std::vector<Detection>> group_by_frame(const std::vector<Detection>& detections,
                                                   int frame_count) {
    int last = frame_count;
    for (const auto& d : detections) last = std::max(last, d.frame);
    std::vector<std::vector<Detection>> frames(static_cast<std::size_t>(last) + 1);
    for (const auto& d : detections) frames[static_cast<std::size_t>(d.frame)].push_back(d);
    return frames;
}

}  // namespace mcmot
