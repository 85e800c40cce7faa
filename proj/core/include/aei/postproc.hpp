#pragma once

#include <vector>

#include "aei/bmm.hpp"
#include "aei/dataio.hpp"

namespace aei::post {

using Proposal = data::ProposalRecord;
using nn::Real;

/// Temporal intersection-over-union of two intervals; 0 when disjoint.
double temporal_iou(double a0, double a1, double b0, double b1);

/// Indices that are strict local maxima (out-of-range neighbors count as
/// -inf) or reach peak_ratio * max(P); ascending, deduplicated.
std::vector<int> select_boundaries(const std::vector<Real>& probs, double peak_ratio = 0.5);

/// Pairs every (s, e) with s < e and e - s <= D; score is
/// P_S[s] * P_E[e] * P_A[s][e-s]. Snippet index i maps to i * delta / frame_rate
/// seconds.
std::vector<Proposal> pair_and_score(const std::vector<int>& starts, const std::vector<int>& ends,
                                     const bmm::BoundaryMaps& maps, int frames_per_snippet,
                                     double frame_rate, const std::string& video_id);

/// Greedy hard suppression; kept proposals have pairwise IoU <= threshold.
/// Deterministic order: score desc, then earlier start, then shorter span.
std::vector<Proposal> nms(std::vector<Proposal> proposals, double tiou_threshold);

/// Gaussian-decay soft suppression: every unpicked score decays by
/// exp(-IoU^2 / sigma) against the picked proposal; proposals falling below
/// score_floor are dropped. Result sorted by decayed score.
std::vector<Proposal> soft_nms(std::vector<Proposal> proposals, double sigma = 0.5,
                               double score_floor = 1e-3);

}  // namespace aei::post
