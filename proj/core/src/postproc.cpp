#include "aei/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aei::post {

namespace {

bool rank_before(const Proposal& a, const Proposal& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start != b.start) return a.start < b.start;
    return (a.end - a.start) < (b.end - b.start);
}

}  // namespace

double temporal_iou(double a0, double a1, double b0, double b1) {
    const double inter = std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
    const double uni = (a1 - a0) + (b1 - b0) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<int> select_boundaries(const std::vector<Real>& probs, double peak_ratio) {
    if (probs.empty()) throw std::invalid_argument("select_boundaries: empty probability vector");
    const int T = static_cast<int>(probs.size());
    const Real max_p = *std::max_element(probs.begin(), probs.end());
    std::vector<int> out;
    for (int i = 0; i < T; ++i) {
        const Real left = i > 0 ? probs[static_cast<size_t>(i - 1)]
                                : -std::numeric_limits<Real>::infinity();
        const Real right = i + 1 < T ? probs[static_cast<size_t>(i + 1)]
                                     : -std::numeric_limits<Real>::infinity();
        const Real p = probs[static_cast<size_t>(i)];
        if ((p > left && p > right) || p >= peak_ratio * max_p) out.push_back(i);
    }
    return out;
}

std::vector<Proposal> pair_and_score(const std::vector<int>& starts, const std::vector<int>& ends,
                                     const bmm::BoundaryMaps& maps, int frames_per_snippet,
                                     double frame_rate, const std::string& video_id) {
    const double spf = frames_per_snippet / frame_rate;
    std::vector<Proposal> out;
    for (int s : starts) {
        if (s < 0 || s >= maps.T) throw std::invalid_argument("pair_and_score: start index out of range");
        for (int e : ends) {
            if (e < 0 || e >= maps.T) throw std::invalid_argument("pair_and_score: end index out of range");
            if (s >= e || e - s > maps.D) continue;
            const double score = maps.start_prob[static_cast<size_t>(s)] *
                                 maps.end_prob[static_cast<size_t>(e)] * maps.action_at(s, e - s);
            out.push_back({video_id, s * spf, e * spf, score, ""});
        }
    }
    return out;
}

std::vector<Proposal> nms(std::vector<Proposal> proposals, double tiou_threshold) {
    if (tiou_threshold <= 0.0 || tiou_threshold >= 1.0)
        throw std::invalid_argument("nms: threshold must be in (0,1)");
    std::stable_sort(proposals.begin(), proposals.end(), rank_before);
    std::vector<Proposal> kept;
    for (const Proposal& p : proposals) {
        bool suppressed = false;
        for (const Proposal& k : kept) {
            // Per-class suppression when labels are present.
            if (!p.label.empty() && !k.label.empty() && p.label != k.label) continue;
            if (temporal_iou(p.start, p.end, k.start, k.end) > tiou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(p);
    }
    return kept;
}

std::vector<Proposal> soft_nms(std::vector<Proposal> proposals, double sigma, double score_floor) {
    if (sigma <= 0.0) throw std::invalid_argument("soft_nms: sigma must be positive");
    std::vector<Proposal> pending = std::move(proposals);
    std::vector<Proposal> out;
    while (!pending.empty()) {
        auto best = std::min_element(pending.begin(), pending.end(), rank_before);
        Proposal picked = *best;
        pending.erase(best);
        out.push_back(picked);
        std::vector<Proposal> next;
        for (Proposal& p : pending) {
            if (!p.label.empty() && !picked.label.empty() && p.label != picked.label) {
                next.push_back(std::move(p));
                continue;
            }
            const double iou = temporal_iou(p.start, p.end, picked.start, picked.end);
            p.score *= std::exp(-(iou * iou) / sigma);
            if (p.score >= score_floor) next.push_back(std::move(p));
        }
        pending = std::move(next);
    }
    return out;
}

}  // namespace aei::post
