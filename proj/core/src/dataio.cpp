#include "aei/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace aei::data {

namespace {

constexpr char kFeatureMagic[4] = {'A', 'E', 'I', 'F'};
constexpr uint8_t kFeatureVersion = 1;

double interval_overlap(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

double interval_iou(double a0, double a1, double b0, double b1) {
    const double inter = interval_overlap(a0, a1, b0, b1);
    const double uni = (a1 - a0) + (b1 - b0) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::string format_seconds(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double_field(const std::string& s, const std::string& field, const std::string& path) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw DataError(path + ": cannot parse field '" + field + "' from value '" + s + "'");
    }
}

}  // namespace

int snippet_count(int64_t num_frames, int frames_per_snippet) {
    if (num_frames < 1) throw std::invalid_argument("snippet_count: num_frames must be >= 1");
    if (frames_per_snippet < 1)
        throw std::invalid_argument("snippet_count: frames_per_snippet must be >= 1");
    return static_cast<int>((num_frames + frames_per_snippet - 1) / frames_per_snippet);
}

GroundTruthLabels generate_labels(const VideoRecord& record, int T, int frames_per_snippet, int D,
                                  double boundary_ratio, double iou_min) {
    if (boundary_ratio <= 0.0 || boundary_ratio > 0.5)
        throw std::invalid_argument("generate_labels: boundary_ratio must be in (0, 0.5]");
    if (T < 1 || D < 1) throw std::invalid_argument("generate_labels: T and D must be >= 1");
    GroundTruthLabels out;
    out.T = T;
    out.D = D;
    out.start_labels.assign(static_cast<size_t>(T), 0.0);
    out.end_labels.assign(static_cast<size_t>(T), 0.0);
    out.actionness.assign(static_cast<size_t>(T) * D, 0.0);

    const double spf = frames_per_snippet / record.frame_rate;  // seconds per snippet
    const double video_len = record.duration();
    // Snippet overlap ratio threshold; the half-sample tie counts as inside.
    constexpr double kOverlapMin = 0.5 - 1e-9;

    for (const ActionSegment& seg : record.annotations) {
        double gs = seg.start, ge = seg.end;
        if (gs < 0.0 || gs >= ge)
            throw std::invalid_argument("generate_labels: invalid segment [" +
                                        std::to_string(gs) + ", " + std::to_string(ge) + "]");
        if (ge > video_len + 1e-9) {
            std::cerr << "warning: segment end " << ge << "s exceeds video duration " << video_len
                      << "s for " << record.video_id << "; clamping\n";
            ge = video_len;
            if (gs >= ge) continue;
        }
        const double region = std::max(spf, boundary_ratio * (ge - gs));
        for (int boundary = 0; boundary < 2; ++boundary) {
            const double center = boundary == 0 ? gs : ge;
            const double r0 = center - region / 2.0, r1 = center + region / 2.0;
            auto& labels = boundary == 0 ? out.start_labels : out.end_labels;
            for (int i = 0; i < T; ++i) {
                const double s0 = i * spf, s1 = (i + 1) * spf;
                if (interval_overlap(s0, s1, r0, r1) / spf >= kOverlapMin)
                    labels[static_cast<size_t>(i)] = 1.0;
            }
        }
        // Actionness grid in snippet units.
        const double seg0 = gs / spf, seg1 = ge / spf;
        for (int i = 0; i < T; ++i)
            for (int d = 1; d <= D && i + d <= T; ++d)
                if (interval_iou(i, i + d, seg0, seg1) > iou_min) out.action_at(i, d) = 1.0;
    }
    return out;
}

Dataset synth_dataset(const SynthParams& p) {
    if (p.num_videos < 1 || p.t_min < 2 || p.t_max < p.t_min || p.env_dim < 1 || p.actor_dim < 1 ||
        p.actors_min < 0 || p.actors_max < p.actors_min || p.actions_min < 1 ||
        p.actions_max < p.actions_min || p.num_classes < 1 || p.noise_level < 0.0)
        throw std::invalid_argument("synth_dataset: invalid parameter ranges");
    std::mt19937 rng(static_cast<uint32_t>(p.seed));
    std::normal_distribution<Real> gauss(0.0, 1.0);

    auto draw_center = [&](int dim, Real norm) {
        std::vector<Real> v(static_cast<size_t>(dim));
        Real n2 = 0.0;
        for (auto& x : v) {
            x = gauss(rng);
            n2 += x * x;
        }
        const Real scale = norm / std::sqrt(std::max<Real>(n2, 1e-12));
        for (auto& x : v) x *= scale;
        return v;
    };

    // Action-class clusters carry a stronger signal in the environment
    // channel than in the actor channel.
    std::vector<std::vector<Real>> env_centers, actor_centers;
    for (int c = 0; c < p.num_classes; ++c) {
        env_centers.push_back(draw_center(p.env_dim, 3.0));
        actor_centers.push_back(draw_center(p.actor_dim, 2.0));
    }
    const std::vector<Real> env_bg = draw_center(p.env_dim, 3.0);
    const std::vector<Real> actor_bg = draw_center(p.actor_dim, 2.0);

    auto noisy = [&](const std::vector<Real>& center) {
        std::vector<Real> v = center;
        for (auto& x : v) x += p.noise_level * gauss(rng);
        return v;
    };

    Dataset ds;
    const double spf = p.frames_per_snippet / p.frame_rate;
    for (int vi = 0; vi < p.num_videos; ++vi) {
        const int T = std::uniform_int_distribution<int>(p.t_min, p.t_max)(rng);
        VideoRecord rec;
        {
            char id[32];
            std::snprintf(id, sizeof(id), "video_%04d", vi);
            rec.video_id = id;
        }
        rec.num_frames = static_cast<int64_t>(T) * p.frames_per_snippet;
        rec.frame_rate = p.frame_rate;

        // Plant non-overlapping snippet-aligned segments; ends stay at most
        // at snippet T-1 so the ending boundary is representable.
        struct Planted {
            int s, e, cls;
        };
        std::vector<Planted> planted;
        const int want = std::uniform_int_distribution<int>(p.actions_min, p.actions_max)(rng);
        for (int a = 0; a < want; ++a) {
            for (int attempt = 0; attempt < 50; ++attempt) {
                const int max_dur = std::max(2, T / 3);
                const int dur = std::uniform_int_distribution<int>(2, max_dur)(rng);
                if (dur > T - 2) continue;
                const int start = std::uniform_int_distribution<int>(0, T - 1 - dur)(rng);
                const int end = start + dur;
                bool clash = false;
                for (const auto& q : planted)
                    if (start <= q.e + 1 && q.s <= end + 1) clash = true;
                if (clash) continue;
                const int cls = std::uniform_int_distribution<int>(0, p.num_classes - 1)(rng);
                planted.push_back({start, end, cls});
                break;
            }
        }
        std::sort(planted.begin(), planted.end(), [](const Planted& a, const Planted& b) {
            return a.s < b.s;
        });
        for (const auto& q : planted)
            rec.annotations.push_back(
                {q.s * spf, q.e * spf, "class_" + std::to_string(q.cls)});

        SnippetFeatures feat;
        feat.video_id = rec.video_id;
        feat.snippet_count = T;
        feat.frames_per_snippet = p.frames_per_snippet;
        feat.env_dim = p.env_dim;
        feat.actor_dim = p.actor_dim;
        for (int i = 0; i < T; ++i) {
            int cls = -1;
            for (const auto& q : planted)
                if (q.s <= i && i < q.e) cls = q.cls;
            feat.env.push_back(noisy(cls >= 0 ? env_centers[static_cast<size_t>(cls)] : env_bg));
            int n_actors = std::uniform_int_distribution<int>(p.actors_min, p.actors_max)(rng);
            if (cls >= 0 && n_actors == 0) n_actors = 1;
            std::vector<std::vector<Real>> snippet_actors;
            const int main_idx =
                n_actors > 0 ? std::uniform_int_distribution<int>(0, n_actors - 1)(rng) : -1;
            for (int a = 0; a < n_actors; ++a) {
                const bool is_main = cls >= 0 && a == main_idx;
                snippet_actors.push_back(
                    noisy(is_main ? actor_centers[static_cast<size_t>(cls)] : actor_bg));
            }
            feat.actors.push_back(std::move(snippet_actors));
        }
        ds.records.push_back(std::move(rec));
        ds.features.push_back(std::move(feat));
    }
    return ds;
}

void write_features(const std::string& path, const SnippetFeatures& f) {
    if (static_cast<int>(f.env.size()) != f.snippet_count ||
        static_cast<int>(f.actors.size()) != f.snippet_count)
        throw DataError("write_features: row counts do not match snippet_count");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("write_features: cannot open " + path);
    os.write(kFeatureMagic, 4);
    os.put(static_cast<char>(kFeatureVersion));
    std::ostringstream hdr;
    hdr << "video_id " << f.video_id << "\n"
        << "T " << f.snippet_count << "\n"
        << "delta " << f.frames_per_snippet << "\n"
        << "Ce " << f.env_dim << "\n"
        << "Ca " << f.actor_dim << "\n"
        << "actors";
    for (const auto& a : f.actors) hdr << " " << a.size();
    hdr << "\nend\n";
    const std::string h = hdr.str();
    os.write(h.data(), static_cast<std::streamsize>(h.size()));
    auto write_row = [&](const std::vector<Real>& row, int dim, const char* what) {
        if (static_cast<int>(row.size()) != dim)
            throw DataError(std::string("write_features: ") + what + " dimension mismatch in " +
                            f.video_id);
        for (Real v : row) {
            const float x = static_cast<float>(v);
            os.write(reinterpret_cast<const char*>(&x), 4);
        }
    };
    for (const auto& row : f.env) write_row(row, f.env_dim, "env");
    for (const auto& snippet : f.actors)
        for (const auto& row : snippet) write_row(row, f.actor_dim, "actor");
    if (!os) throw DataError("write_features: write failed for " + path);
}

SnippetFeatures read_features(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("read_features: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != std::string(kFeatureMagic, 4))
        throw DataError("read_features: bad magic in " + path);
    const int version = is.get();
    if (version != kFeatureVersion)
        throw DataError("read_features: unsupported version " + std::to_string(version) + " in " +
                        path);
    SnippetFeatures f;
    std::vector<int> counts;
    std::string line;
    bool seen_end = false;
    while (std::getline(is, line)) {
        if (line == "end") {
            seen_end = true;
            break;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "video_id")
            ls >> f.video_id;
        else if (key == "T")
            ls >> f.snippet_count;
        else if (key == "delta")
            ls >> f.frames_per_snippet;
        else if (key == "Ce")
            ls >> f.env_dim;
        else if (key == "Ca")
            ls >> f.actor_dim;
        else if (key == "actors") {
            int n;
            while (ls >> n) counts.push_back(n);
        } else
            throw DataError(path + ": unknown header field '" + key + "'");
        if (ls.fail() && key != "actors") throw DataError(path + ": cannot parse field '" + key + "'");
    }
    if (!seen_end) throw DataError(path + ": missing header terminator 'end'");
    if (f.snippet_count < 1) throw DataError(path + ": field 'T' must be >= 1");
    if (f.frames_per_snippet < 1) throw DataError(path + ": field 'delta' must be >= 1");
    if (f.env_dim < 1) throw DataError(path + ": field 'Ce' must be >= 1");
    if (f.actor_dim < 1) throw DataError(path + ": field 'Ca' must be >= 1");
    if (static_cast<int>(counts.size()) != f.snippet_count)
        throw DataError(path + ": field 'actors' has " + std::to_string(counts.size()) +
                        " entries, expected T=" + std::to_string(f.snippet_count));
    for (int n : counts)
        if (n < 0) throw DataError(path + ": field 'actors' contains a negative count");
    auto read_row = [&](int dim) {
        std::vector<Real> row(static_cast<size_t>(dim));
        for (auto& v : row) {
            float x = 0.0f;
            is.read(reinterpret_cast<char*>(&x), 4);
            v = static_cast<Real>(x);
        }
        if (!is) throw DataError(path + ": truncated float payload");
        return row;
    };
    for (int i = 0; i < f.snippet_count; ++i) f.env.push_back(read_row(f.env_dim));
    for (int i = 0; i < f.snippet_count; ++i) {
        std::vector<std::vector<Real>> snippet;
        for (int a = 0; a < counts[static_cast<size_t>(i)]; ++a)
            snippet.push_back(read_row(f.actor_dim));
        f.actors.push_back(std::move(snippet));
    }
    return f;
}

void write_annotations(const std::string& path, const std::vector<VideoRecord>& records) {
    std::ofstream os(path);
    if (!os) throw DataError("write_annotations: cannot open " + path);
    for (const auto& r : records)
        os << "#meta\t" << r.video_id << "\t" << r.num_frames << "\t" << format_seconds(r.frame_rate)
           << "\n";
    for (const auto& r : records)
        for (const auto& seg : r.annotations) {
            os << r.video_id << "\t" << format_seconds(seg.start) << "\t" << format_seconds(seg.end);
            if (!seg.label.empty()) os << "\t" << seg.label;
            os << "\n";
        }
}

std::vector<VideoRecord> read_annotations(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("read_annotations: cannot open " + path);
    std::vector<VideoRecord> records;
    std::map<std::string, size_t> index;
    auto record_for = [&](const std::string& id) -> VideoRecord& {
        auto it = index.find(id);
        if (it == index.end()) {
            index[id] = records.size();
            records.push_back({id, 0, 0.0, {}});
            return records.back();
        }
        return records[it->second];
    };
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields[0] == "#meta") {
            if (fields.size() != 4)
                throw DataError(path + ":" + std::to_string(lineno) + ": #meta needs 4 fields");
            VideoRecord& r = record_for(fields[1]);
            r.num_frames = static_cast<int64_t>(parse_double_field(fields[2], "num_frames", path));
            r.frame_rate = parse_double_field(fields[3], "frame_rate", path);
            if (r.num_frames < 1) throw DataError(path + ": field 'num_frames' must be >= 1");
            if (r.frame_rate <= 0.0) throw DataError(path + ": field 'frame_rate' must be positive");
            continue;
        }
        if (line[0] == '#') continue;
        if (fields.size() < 3 || fields.size() > 4)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected video_id, start_seconds, end_seconds [, label]");
        ActionSegment seg;
        seg.start = parse_double_field(fields[1], "start_seconds", path);
        seg.end = parse_double_field(fields[2], "end_seconds", path);
        if (fields.size() == 4) seg.label = fields[3];
        if (seg.start < 0.0 || seg.start >= seg.end)
            throw DataError(path + ":" + std::to_string(lineno) + ": field 'start_seconds' must satisfy 0 <= start < end");
        record_for(fields[0]).annotations.push_back(seg);
    }
    // Default timing for files without #meta lines.
    for (auto& r : records) {
        if (r.frame_rate <= 0.0) r.frame_rate = 8.0;
        if (r.num_frames < 1) {
            double max_end = 1.0;
            for (const auto& s : r.annotations) max_end = std::max(max_end, s.end);
            r.num_frames = static_cast<int64_t>(std::ceil(max_end * r.frame_rate));
        }
    }
    return records;
}

void write_proposals(const std::string& path, const std::vector<ProposalRecord>& proposals) {
    std::ofstream os(path);
    if (!os) throw DataError("write_proposals: cannot open " + path);
    for (const auto& p : proposals) {
        os << p.video_id << "\t" << format_seconds(p.start) << "\t" << format_seconds(p.end) << "\t"
           << format_seconds(p.score);
        if (!p.label.empty()) os << "\t" << p.label;
        os << "\n";
    }
}

std::vector<ProposalRecord> read_proposals(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("read_proposals: cannot open " + path);
    std::vector<ProposalRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_tabs(line);
        if (fields.size() < 4 || fields.size() > 5)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected video_id, start_seconds, end_seconds, score [, label]");
        ProposalRecord p;
        p.video_id = fields[0];
        p.start = parse_double_field(fields[1], "start_seconds", path);
        p.end = parse_double_field(fields[2], "end_seconds", path);
        p.score = parse_double_field(fields[3], "score", path);
        if (fields.size() == 5) p.label = fields[4];
        if (p.start >= p.end)
            throw DataError(path + ":" + std::to_string(lineno) + ": field 'start_seconds' must be < end_seconds");
        if (p.score < 0.0)
            throw DataError(path + ":" + std::to_string(lineno) + ": field 'score' must be >= 0");
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace aei::data
