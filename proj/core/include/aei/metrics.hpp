#pragma once

#include <map>
#include <string>
#include <vector>

#include "aei/dataio.hpp"

namespace aei::metrics {

using data::ActionSegment;
using data::ProposalRecord;
using data::VideoRecord;

struct EvalConfig {
    std::vector<double> tiou_grid;   // AR grid, default 0.5:0.05:0.95
    std::vector<int> an_values;      // AN points reported
    int max_an = 100;                // AUC integrates AN = 1..max_an
    std::vector<double> map_grid;    // detection thresholds
    bool corpus_average = false;     // AN capping: per-video (default) or corpus

    static EvalConfig defaults();
};

std::vector<double> make_grid(double lo, double hi, double step);

/// Proposals grouped by video, each list sorted by descending score
/// (deterministic tie-breaks).
using ProposalSet = std::map<std::string, std::vector<ProposalRecord>>;
using GroundTruth = std::map<std::string, std::vector<ActionSegment>>;

ProposalSet group_proposals(std::vector<ProposalRecord> proposals);
GroundTruth group_ground_truth(const std::vector<VideoRecord>& records);

/// Average recall with AN proposals kept per video (or AN * num_videos kept
/// corpus-wide in corpus_average mode); recall averaged over the tIoU grid.
/// Throws on empty ground truth.
double ar_at_an(const ProposalSet& proposals, const GroundTruth& gt, int an,
                const std::vector<double>& tiou_grid, bool corpus_average = false);

/// AR at AN = 1..max_an.
std::vector<double> ar_curve(const ProposalSet& proposals, const GroundTruth& gt, int max_an,
                             const std::vector<double>& tiou_grid, bool corpus_average = false);

/// Trapezoid integral of the AR curve over AN normalized to [0,1], as a
/// percentage in [0, 100].
double auc_from_curve(const std::vector<double>& curve);
double auc(const ProposalSet& proposals, const GroundTruth& gt, int max_an,
           const std::vector<double>& tiou_grid, bool corpus_average = false);

/// Class-mean average precision at one tIoU threshold. Detections need class
/// labels; classes present only in proposals are flagged on stderr and
/// contribute no AP term.
double map_at_tiou(const ProposalSet& proposals, const GroundTruth& gt, double tiou);

/// Per-class AP table at one threshold (class -> AP).
std::map<std::string, double> ap_per_class(const ProposalSet& proposals, const GroundTruth& gt,
                                           double tiou);

}  // namespace aei::metrics
