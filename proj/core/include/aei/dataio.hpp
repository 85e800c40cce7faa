#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aei/errors.hpp"
#include "aei/tensor.hpp"

namespace aei::data {

using nn::Real;

struct ActionSegment {
    double start;  // seconds
    double end;    // seconds
    std::string label;  // empty = unlabeled
};

struct VideoRecord {
    std::string video_id;
    int64_t num_frames = 0;
    double frame_rate = 0.0;
    std::vector<ActionSegment> annotations;

    double duration() const { return static_cast<double>(num_frames) / frame_rate; }
};

/// Per-snippet environment vector plus a variable-length list of actor
/// vectors. Env rows are T x env_dim; actor lists may be empty per snippet.
struct SnippetFeatures {
    std::string video_id;
    int snippet_count = 0;          // T
    int frames_per_snippet = 0;     // delta
    int env_dim = 0;                // C_e
    int actor_dim = 0;              // C_a
    std::vector<std::vector<Real>> env;                  // T rows of env_dim
    std::vector<std::vector<std::vector<Real>>> actors;  // T lists of actor_dim rows
};

/// Label tensors for one video: starting/ending boundary labels over T
/// snippets and an actionness grid over (start snippet, duration in [1, D]).
struct GroundTruthLabels {
    int T = 0;
    int D = 0;
    std::vector<Real> start_labels;  // length T
    std::vector<Real> end_labels;    // length T
    std::vector<Real> actionness;    // T*D row-major, column j = duration j+1

    Real& action_at(int i, int d) { return actionness[static_cast<size_t>(i) * D + (d - 1)]; }
    Real action_at(int i, int d) const { return actionness[static_cast<size_t>(i) * D + (d - 1)]; }
    bool valid(int i, int d) const { return d >= 1 && d <= D && i >= 0 && i + d <= T; }
};

/// ceil(N / delta); throws std::invalid_argument on non-positive input.
int snippet_count(int64_t num_frames, int frames_per_snippet);

/// Expands each annotation's boundaries into regions of width
/// max(delta/frame_rate, boundary_ratio * segment duration) centered on the
/// boundary; a snippet is a positive iff its overlap with the region is at
/// least half the snippet length. Actionness positives require tIoU > iou_min
/// between the (start, duration) interval and the segment in snippet units.
/// Segments past the video end are clamped with a warning on stderr.
GroundTruthLabels generate_labels(const VideoRecord& record, int T, int frames_per_snippet, int D,
                                  double boundary_ratio = 0.1, double iou_min = 0.9);

struct SynthParams {
    uint64_t seed = 1;
    int num_videos = 20;
    int t_min = 16, t_max = 32;
    int env_dim = 16, actor_dim = 16;
    int actors_min = 1, actors_max = 4;
    int actions_min = 1, actions_max = 4;
    int num_classes = 3;
    int frames_per_snippet = 16;
    double frame_rate = 8.0;
    double noise_level = 0.1;
};

struct Dataset {
    std::vector<VideoRecord> records;
    std::vector<SnippetFeatures> features;
};

/// Deterministic synthetic corpus with planted, snippet-aligned action
/// segments. Inside an action, the env vector and one designated main actor
/// are drawn from an action-class cluster; everything else comes from the
/// background cluster.
Dataset synth_dataset(const SynthParams& params);

// -- feature container ("AEIF") -----------------------------------------
void write_features(const std::string& path, const SnippetFeatures& f);
SnippetFeatures read_features(const std::string& path);

// -- annotation / proposal files (TSV) -----------------------------------
// Records: video_id, start_seconds, end_seconds [, score] [, label].
// '#meta' lines carry per-video num_frames and frame_rate.
void write_annotations(const std::string& path, const std::vector<VideoRecord>& records);
std::vector<VideoRecord> read_annotations(const std::string& path);

struct ProposalRecord {
    std::string video_id;
    double start;
    double end;
    double score;
    std::string label;
};

void write_proposals(const std::string& path, const std::vector<ProposalRecord>& proposals);
std::vector<ProposalRecord> read_proposals(const std::string& path);

}  // namespace aei::data
