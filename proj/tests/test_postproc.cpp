#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "aei/postproc.hpp"

using namespace aei;
using namespace aei::post;
using nn::Real;

namespace {

bool rank_before(const Proposal& a, const Proposal& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start != b.start) return a.start < b.start;
    return (a.end - a.start) < (b.end - b.start);
}

std::vector<Proposal> random_proposals(std::mt19937& rng, int max_n = 8,
                                       bool with_labels = false) {
    const int n = std::uniform_int_distribution<int>(0, max_n)(rng);
    std::uniform_real_distribution<double> pos(0.0, 20.0);
    std::uniform_real_distribution<double> len(0.5, 8.0);
    std::uniform_real_distribution<double> score(0.01, 1.0);
    std::uniform_int_distribution<int> lbl(0, 1);
    std::vector<Proposal> out;
    for (int i = 0; i < n; ++i) {
        const double s = pos(rng);
        out.push_back({"v", s, s + len(rng), score(rng),
                       with_labels ? "c" + std::to_string(lbl(rng)) : ""});
    }
    return out;
}

bool same_proposal(const Proposal& a, const Proposal& b) {
    return a.video_id == b.video_id && a.start == b.start && a.end == b.end &&
           a.score == b.score && a.label == b.label;
}

}  // namespace

TEST_CASE("temporal_iou oracles") {
    CHECK(temporal_iou(0, 10, 0, 10) == doctest::Approx(1.0));
    CHECK(temporal_iou(0, 1, 5, 6) == 0.0);
    CHECK(temporal_iou(0, 2, 1, 3) == doctest::Approx(1.0 / 3.0));
    CHECK(temporal_iou(0, 1, 1, 2) == 0.0);  // touching intervals
    CHECK(temporal_iou(0, 4, 1, 3) == doctest::Approx(0.5));
}

TEST_CASE("select_boundaries: local maxima and peak ratio") {
    CHECK(select_boundaries({0.1, 0.9, 0.1}) == std::vector<int>{1});
    CHECK(select_boundaries({0.9, 0.1, 0.8}) == std::vector<int>{0, 2});
    // Plateau: no strict local max, but the ratio rule keeps the high entries.
    CHECK(select_boundaries({0.5, 0.5, 0.1}) == std::vector<int>{0, 1});
    // Single element is a local max by the -inf convention.
    CHECK(select_boundaries({0.3}) == std::vector<int>{0});
    // peak_ratio = 1.0 keeps only maxima and entries tied with the max.
    CHECK(select_boundaries({0.2, 0.6, 0.3, 0.6}, 1.0) == std::vector<int>{1, 3});
    CHECK_THROWS_AS((void)select_boundaries({}), std::invalid_argument);
}

TEST_CASE("pair_and_score: hand-computed example") {
    bmm::BoundaryMaps maps;
    maps.T = 8;
    maps.D = 8;
    maps.start_prob.assign(8, 0.1);
    maps.end_prob.assign(8, 0.1);
    maps.actionness.assign(64, 0.0);
    maps.start_prob[2] = 0.8;
    maps.end_prob[5] = 0.9;
    maps.actionness[2 * 8 + (3 - 1)] = 0.5;  // P_A[2][duration 3]

    const auto out = pair_and_score({2}, {5}, maps, 16, 8.0, "vid");
    REQUIRE(out.size() == 1);
    CHECK(out[0].video_id == "vid");
    CHECK(out[0].score == doctest::Approx(0.8 * 0.9 * 0.5).epsilon(1e-12));
    CHECK(out[0].start == doctest::Approx(2 * 2.0));  // snippet * delta / frame_rate
    CHECK(out[0].end == doctest::Approx(5 * 2.0));
}

TEST_CASE("pair_and_score: completeness over random boundary sets") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        bmm::BoundaryMaps maps;
        maps.T = std::uniform_int_distribution<int>(2, 12)(rng);
        maps.D = std::uniform_int_distribution<int>(1, maps.T)(rng);
        std::uniform_real_distribution<Real> prob(0.05, 0.95);
        maps.start_prob.resize(static_cast<size_t>(maps.T));
        maps.end_prob.resize(static_cast<size_t>(maps.T));
        for (auto& v : maps.start_prob) v = prob(rng);
        for (auto& v : maps.end_prob) v = prob(rng);
        maps.actionness.assign(static_cast<size_t>(maps.T) * maps.D, 0.0);
        for (int i = 0; i < maps.T; ++i)
            for (int d = 1; d <= maps.D && i + d <= maps.T; ++d)
                maps.actionness[static_cast<size_t>(i) * maps.D + (d - 1)] = prob(rng);

        std::vector<int> starts, ends;
        for (int i = 0; i < maps.T; ++i) {
            if (std::bernoulli_distribution(0.5)(rng)) starts.push_back(i);
            if (std::bernoulli_distribution(0.5)(rng)) ends.push_back(i);
        }
        const auto out = pair_and_score(starts, ends, maps, 16, 8.0, "v");

        size_t expected = 0;
        for (int s : starts)
            for (int e : ends)
                if (s < e && e - s <= maps.D) ++expected;
        CHECK(out.size() == expected);

        // Every valid pair appears exactly once with the product score.
        const double spf = 2.0;
        for (int s : starts)
            for (int e : ends) {
                if (!(s < e && e - s <= maps.D)) continue;
                int found = 0;
                for (const auto& p : out)
                    if (p.start == s * spf && p.end == e * spf) {
                        ++found;
                        CHECK(p.score ==
                              doctest::Approx(maps.start_prob[static_cast<size_t>(s)] *
                                              maps.end_prob[static_cast<size_t>(e)] *
                                              maps.action_at(s, e - s))
                                  .epsilon(1e-12));
                    }
                CHECK(found == 1);
            }
    }
}

TEST_CASE("nms: threshold validation") {
    CHECK_THROWS_AS((void)nms({}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)nms({}, 1.0), std::invalid_argument);
    CHECK(nms({}, 0.5).empty());
}

TEST_CASE("nms: greedy definition holds on random sets") {
    std::mt19937 rng(53);
    for (int trial = 0; trial < 500; ++trial) {
        const bool labeled = trial % 3 == 0;
        auto input = random_proposals(rng, 8, labeled);
        const double thr = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
        const auto kept = nms(input, thr);

        auto ranked = input;
        std::stable_sort(ranked.begin(), ranked.end(), rank_before);

        // (a) kept is a subsequence of the rank-sorted input
        size_t pos = 0;
        for (const auto& k : kept) {
            while (pos < ranked.size() && !same_proposal(ranked[pos], k)) ++pos;
            REQUIRE(pos < ranked.size());
            ++pos;
        }
        // (b) kept proposals of the same class never overlap past the threshold
        for (size_t i = 0; i < kept.size(); ++i)
            for (size_t j = i + 1; j < kept.size(); ++j) {
                if (!kept[i].label.empty() && !kept[j].label.empty() &&
                    kept[i].label != kept[j].label)
                    continue;
                CHECK(temporal_iou(kept[i].start, kept[i].end, kept[j].start, kept[j].end) <=
                      thr);
            }
        // (c) every dropped proposal is suppressed by an earlier-ranked kept one
        for (const auto& p : ranked) {
            bool in_kept = false;
            for (const auto& k : kept) in_kept = in_kept || same_proposal(k, p);
            if (in_kept) continue;
            bool justified = false;
            for (const auto& k : kept) {
                if (!rank_before(k, p) && !same_proposal(k, p)) continue;
                if (!p.label.empty() && !k.label.empty() && p.label != k.label) continue;
                if (temporal_iou(p.start, p.end, k.start, k.end) > thr) justified = true;
            }
            CHECK(justified);
        }
        // (d) idempotence
        const auto again = nms(kept, thr);
        REQUIRE(again.size() == kept.size());
        for (size_t i = 0; i < kept.size(); ++i) CHECK(same_proposal(again[i], kept[i]));
    }
}

TEST_CASE("nms: per-class suppression keeps overlapping different-class proposals") {
    std::vector<Proposal> input = {
        {"v", 0.0, 10.0, 0.9, "c0"},
        {"v", 0.5, 10.0, 0.8, "c1"},
        {"v", 1.0, 10.0, 0.7, "c0"},
    };
    const auto kept = nms(input, 0.5);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].label == "c0");
    CHECK(kept[1].label == "c1");
}

TEST_CASE("soft_nms: duplicate decay and monotone scores") {
    // Exact duplicate: IoU = 1, sigma = 0.5 -> decay exp(-2).
    {
        std::vector<Proposal> input = {{"v", 1.0, 3.0, 0.8, ""}, {"v", 1.0, 3.0, 0.6, ""}};
        const auto out = soft_nms(input, 0.5, 1e-6);
        REQUIRE(out.size() == 2);
        CHECK(out[0].score == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(out[1].score == doctest::Approx(0.6 * std::exp(-2.0)).epsilon(1e-9));
        CHECK(out[1].score == doctest::Approx(0.6 * 0.1353).epsilon(1e-3));
    }
    // Scores never increase; disjoint proposals keep their scores.
    std::mt19937 rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        auto input = random_proposals(rng, 8);
        const auto out = soft_nms(input, 0.5, 1e-4);
        CHECK(out.size() <= input.size());
        for (const auto& o : out) {
            bool found = false;
            for (const auto& p : input)
                if (p.video_id == o.video_id && p.start == o.start && p.end == o.end &&
                    p.label == o.label && o.score <= p.score + 1e-15)
                    found = true;
            CHECK(found);
        }
    }
    {
        std::vector<Proposal> input = {{"v", 0.0, 1.0, 0.9, ""}, {"v", 5.0, 6.0, 0.4, ""}};
        const auto out = soft_nms(input, 0.5, 1e-6);
        REQUIRE(out.size() == 2);
        CHECK(out[0].score == doctest::Approx(0.9));
        CHECK(out[1].score == doctest::Approx(0.4));
    }
    // The floor drops fully decayed proposals.
    {
        std::vector<Proposal> input = {{"v", 1.0, 3.0, 0.8, ""}, {"v", 1.0, 3.0, 0.001, ""}};
        const auto out = soft_nms(input, 0.5, 1e-3);
        CHECK(out.size() == 1);
    }
    CHECK_THROWS_AS((void)soft_nms({}, 0.0), std::invalid_argument);
}
