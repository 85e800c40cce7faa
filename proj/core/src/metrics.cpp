#include "aei/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <stdexcept>

#include "aei/postproc.hpp"

namespace aei::metrics {

namespace {

bool rank_before(const ProposalRecord& a, const ProposalRecord& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start != b.start) return a.start < b.start;
    return (a.end - a.start) < (b.end - b.start);
}

/// Proposals kept per video after AN capping.
ProposalSet cap_proposals(const ProposalSet& proposals, int an, bool corpus_average,
                          size_t num_videos) {
    ProposalSet kept;
    if (!corpus_average) {
        for (const auto& [vid, list] : proposals) {
            auto& out = kept[vid];
            out.assign(list.begin(),
                       list.begin() + std::min<size_t>(list.size(), static_cast<size_t>(an)));
        }
        return kept;
    }
    // Corpus mode: keep the an * num_videos highest-scoring proposals overall.
    std::vector<const ProposalRecord*> all;
    for (const auto& [vid, list] : proposals)
        for (const auto& p : list) all.push_back(&p);
    std::stable_sort(all.begin(), all.end(),
                     [](const ProposalRecord* a, const ProposalRecord* b) { return rank_before(*a, *b); });
    const size_t budget = static_cast<size_t>(an) * num_videos;
    for (size_t i = 0; i < all.size() && i < budget; ++i) kept[all[i]->video_id].push_back(*all[i]);
    return kept;
}

}  // namespace

EvalConfig EvalConfig::defaults() {
    EvalConfig c;
    c.tiou_grid = make_grid(0.5, 0.95, 0.05);
    c.an_values = {1, 5, 10, 50, 100};
    c.max_an = 100;
    c.map_grid = {0.5, 0.75, 0.95};
    return c;
}

std::vector<double> make_grid(double lo, double hi, double step) {
    std::vector<double> grid;
    for (int k = 0;; ++k) {
        const double v = lo + k * step;
        if (v > hi + 1e-9) break;
        grid.push_back(v);
    }
    return grid;
}

ProposalSet group_proposals(std::vector<ProposalRecord> proposals) {
    ProposalSet out;
    for (auto& p : proposals) out[p.video_id].push_back(std::move(p));
    for (auto& [vid, list] : out) std::stable_sort(list.begin(), list.end(), rank_before);
    return out;
}

GroundTruth group_ground_truth(const std::vector<VideoRecord>& records) {
    GroundTruth out;
    for (const auto& r : records) {
        auto& list = out[r.video_id];
        list.insert(list.end(), r.annotations.begin(), r.annotations.end());
    }
    return out;
}

double ar_at_an(const ProposalSet& proposals, const GroundTruth& gt, int an,
                const std::vector<double>& tiou_grid, bool corpus_average) {
    if (an < 1) throw std::invalid_argument("ar_at_an: AN must be >= 1");
    if (tiou_grid.empty()) throw std::invalid_argument("ar_at_an: empty tIoU grid");
    size_t total_gt = 0;
    for (const auto& [vid, segs] : gt) total_gt += segs.size();
    if (total_gt == 0) throw std::invalid_argument("ar_at_an: ground truth is empty");

    const ProposalSet kept = cap_proposals(proposals, an, corpus_average, gt.size());
    double recall_sum = 0.0;
    for (double t : tiou_grid) {
        size_t recalled = 0;
        for (const auto& [vid, segs] : gt) {
            auto it = kept.find(vid);
            if (it == kept.end()) continue;
            for (const auto& seg : segs) {
                for (const auto& p : it->second) {
                    if (post::temporal_iou(p.start, p.end, seg.start, seg.end) >= t) {
                        ++recalled;
                        break;
                    }
                }
            }
        }
        recall_sum += static_cast<double>(recalled) / static_cast<double>(total_gt);
    }
    return recall_sum / static_cast<double>(tiou_grid.size());
}

std::vector<double> ar_curve(const ProposalSet& proposals, const GroundTruth& gt, int max_an,
                             const std::vector<double>& tiou_grid, bool corpus_average) {
    if (max_an < 1) throw std::invalid_argument("ar_curve: max_an must be >= 1");
    std::vector<double> curve;
    curve.reserve(static_cast<size_t>(max_an));
    for (int an = 1; an <= max_an; ++an)
        curve.push_back(ar_at_an(proposals, gt, an, tiou_grid, corpus_average));
    return curve;
}

double auc_from_curve(const std::vector<double>& curve) {
    if (curve.empty()) throw std::invalid_argument("auc_from_curve: empty curve");
    if (curve.size() == 1) return curve[0] * 100.0;
    double area = 0.0;
    for (size_t k = 1; k < curve.size(); ++k) area += 0.5 * (curve[k - 1] + curve[k]);
    return area / static_cast<double>(curve.size() - 1) * 100.0;
}

double auc(const ProposalSet& proposals, const GroundTruth& gt, int max_an,
           const std::vector<double>& tiou_grid, bool corpus_average) {
    return auc_from_curve(ar_curve(proposals, gt, max_an, tiou_grid, corpus_average));
}

std::map<std::string, double> ap_per_class(const ProposalSet& proposals, const GroundTruth& gt,
                                           double tiou) {
    std::set<std::string> gt_classes, det_classes;
    for (const auto& [vid, segs] : gt)
        for (const auto& s : segs)
            if (!s.label.empty()) gt_classes.insert(s.label);
    for (const auto& [vid, list] : proposals)
        for (const auto& p : list)
            if (!p.label.empty()) det_classes.insert(p.label);
    for (const auto& cls : det_classes)
        if (!gt_classes.count(cls))
            std::cerr << "warning: detections carry class '" << cls
                      << "' absent from ground truth; no AP term contributed\n";

    std::map<std::string, double> ap;
    for (const auto& cls : gt_classes) {
        // All detections of this class, globally sorted by score.
        std::vector<const ProposalRecord*> dets;
        for (const auto& [vid, list] : proposals)
            for (const auto& p : list)
                if (p.label == cls) dets.push_back(&p);
        std::stable_sort(dets.begin(), dets.end(), [](const ProposalRecord* a, const ProposalRecord* b) {
            return rank_before(*a, *b);
        });
        size_t npos = 0;
        std::map<std::string, std::vector<bool>> matched;  // per video, per gt segment
        std::map<std::string, std::vector<const ActionSegment*>> class_gt;
        for (const auto& [vid, segs] : gt)
            for (const auto& s : segs)
                if (s.label == cls) {
                    class_gt[vid].push_back(&s);
                    ++npos;
                }
        for (auto& [vid, segs] : class_gt) matched[vid].assign(segs.size(), false);

        std::vector<double> precision, recall;
        size_t tp = 0;
        for (size_t rank = 0; rank < dets.size(); ++rank) {
            const ProposalRecord& d = *dets[rank];
            auto it = class_gt.find(d.video_id);
            int best = -1;
            double best_iou = tiou;
            if (it != class_gt.end()) {
                for (size_t j = 0; j < it->second.size(); ++j) {
                    if (matched[d.video_id][j]) continue;
                    const double iou =
                        post::temporal_iou(d.start, d.end, it->second[j]->start, it->second[j]->end);
                    if (iou >= best_iou) {
                        best_iou = iou;
                        best = static_cast<int>(j);
                    }
                }
            }
            if (best >= 0) {
                matched[d.video_id][static_cast<size_t>(best)] = true;
                ++tp;
            }
            precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
            recall.push_back(npos > 0 ? static_cast<double>(tp) / static_cast<double>(npos) : 0.0);
        }
        // All-point interpolation: integrate max precision to the right of
        // each recall level.
        double area = 0.0;
        double prev_recall = 0.0;
        for (size_t k = 0; k < precision.size(); ++k) {
            double pmax = 0.0;
            for (size_t j = k; j < precision.size(); ++j) pmax = std::max(pmax, precision[j]);
            area += (recall[k] - prev_recall) * pmax;
            prev_recall = recall[k];
        }
        ap[cls] = npos > 0 ? area : 0.0;
    }
    return ap;
}

double map_at_tiou(const ProposalSet& proposals, const GroundTruth& gt, double tiou) {
    const auto ap = ap_per_class(proposals, gt, tiou);
    if (ap.empty()) throw std::invalid_argument("map_at_tiou: no labeled ground truth classes");
    double sum = 0.0;
    for (const auto& [cls, v] : ap) sum += v;
    return sum / static_cast<double>(ap.size());
}

}  // namespace aei::metrics
