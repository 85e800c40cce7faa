#include <doctest.h>

#include <algorithm>
#include <random>

#include "aei/dataio.hpp"
#include "aei/metrics.hpp"
#include "aei/postproc.hpp"

using namespace aei;
using namespace aei::metrics;

namespace {

std::vector<ProposalRecord> random_proposal_list(std::mt19937& rng, int videos, int per_video) {
    std::uniform_real_distribution<double> pos(0.0, 30.0);
    std::uniform_real_distribution<double> len(0.5, 10.0);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::vector<ProposalRecord> out;
    for (int v = 0; v < videos; ++v)
        for (int i = 0; i < per_video; ++i) {
            const double s = pos(rng);
            out.push_back({"v" + std::to_string(v), s, s + len(rng), score(rng), ""});
        }
    return out;
}

std::vector<VideoRecord> random_gt(std::mt19937& rng, int videos, int max_segments) {
    std::uniform_real_distribution<double> pos(0.0, 30.0);
    std::uniform_real_distribution<double> len(0.5, 10.0);
    std::vector<VideoRecord> out;
    for (int v = 0; v < videos; ++v) {
        VideoRecord rec{"v" + std::to_string(v), 320, 8.0, {}};
        const int n = std::uniform_int_distribution<int>(1, max_segments)(rng);
        for (int i = 0; i < n; ++i) {
            const double s = pos(rng);
            rec.annotations.push_back({s, s + len(rng), ""});
        }
        out.push_back(rec);
    }
    return out;
}

}  // namespace

TEST_CASE("make_grid covers 0.5:0.05:0.95") {
    const auto grid = make_grid(0.5, 0.95, 0.05);
    REQUIRE(grid.size() == 10);
    CHECK(grid.front() == doctest::Approx(0.5));
    CHECK(grid.back() == doctest::Approx(0.95));
    for (double v : grid) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("AR hand-computed case: 0.25 over {0.5, 0.7}") {
    // Two ground truths, one matched at IoU 0.6: recall(0.5) = 0.5,
    // recall(0.7) = 0, average 0.25.
    const GroundTruth gt = {{"v", {{0.0, 10.0, ""}, {20.0, 30.0, ""}}}};
    const ProposalSet props = group_proposals({{"v", 4.0, 10.0, 0.9, ""}});
    CHECK(post::temporal_iou(4.0, 10.0, 0.0, 10.0) == doctest::Approx(0.6));
    CHECK(ar_at_an(props, gt, 10, {0.5, 0.7}) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("AP hand-computed case: 5/6") {
    // One class, two ground truths; ranked detections hit, miss, hit.
    const GroundTruth gt = {{"v", {{0.0, 10.0, "c"}, {20.0, 30.0, "c"}}}};
    const ProposalSet props = group_proposals({
        {"v", 0.0, 10.0, 0.9, "c"},   // hit
        {"v", 40.0, 50.0, 0.8, "c"},  // miss
        {"v", 20.0, 30.0, 0.7, "c"},  // hit
    });
    const auto ap = ap_per_class(props, gt, 0.5);
    REQUIRE(ap.count("c") == 1);
    CHECK(ap.at("c") == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(map_at_tiou(props, gt, 0.5) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("ground truth as proposals: AR = 1 and AUC = 100") {
    data::SynthParams sp;
    sp.seed = 9;
    sp.num_videos = 8;
    sp.actions_min = sp.actions_max = 1;  // AN = 1 must already cover everything
    const auto ds = data::synth_dataset(sp);
    const GroundTruth gt = group_ground_truth(ds.records);
    std::vector<ProposalRecord> props;
    for (const auto& rec : ds.records)
        for (const auto& seg : rec.annotations)
            props.push_back({rec.video_id, seg.start, seg.end, 1.0, ""});
    const ProposalSet grouped = group_proposals(props);
    const auto grid = make_grid(0.5, 0.95, 0.05);
    CHECK(ar_at_an(grouped, gt, 1, grid) == doctest::Approx(1.0));
    CHECK(ar_at_an(grouped, gt, 100, grid) == doctest::Approx(1.0));
    CHECK(auc(grouped, gt, 100, grid) == doctest::Approx(100.0));
}

TEST_CASE("AR@AN is monotone in AN; metrics stay in bounds") {
    std::mt19937 rng(71);
    const auto grid = make_grid(0.5, 0.95, 0.05);
    for (int trial = 0; trial < 25; ++trial) {
        const auto gt = group_ground_truth(random_gt(rng, 4, 3));
        const auto props = group_proposals(random_proposal_list(rng, 4, 12));
        const auto curve = ar_curve(props, gt, 20, grid);
        for (size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] >= curve[i - 1]);
        for (double v : curve) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        const double a = auc_from_curve(curve);
        CHECK(a >= 0.0);
        CHECK(a <= 100.0);
    }
}

TEST_CASE("recall counting matches a brute-force any-match oracle") {
    std::mt19937 rng(73);
    const std::vector<double> grid = {0.5};
    for (int trial = 0; trial < 200; ++trial) {
        const auto records = random_gt(rng, 3, 3);
        const auto gt = group_ground_truth(records);
        const auto list = random_proposal_list(rng, 3, 5);
        const auto props = group_proposals(list);

        size_t total = 0, recalled = 0;
        for (const auto& [vid, segs] : gt) {
            total += segs.size();
            for (const auto& seg : segs) {
                bool hit = false;
                for (const auto& p : list)
                    if (p.video_id == vid &&
                        post::temporal_iou(p.start, p.end, seg.start, seg.end) >= 0.5)
                        hit = true;
                recalled += hit ? 1 : 0;
            }
        }
        const double expected = static_cast<double>(recalled) / static_cast<double>(total);
        CHECK(ar_at_an(props, gt, 1000, grid) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("zero-score duplicate never changes AR below its rank") {
    std::mt19937 rng(79);
    const auto grid = make_grid(0.5, 0.95, 0.05);
    for (int trial = 0; trial < 25; ++trial) {
        const auto gt = group_ground_truth(random_gt(rng, 3, 2));
        auto list = random_proposal_list(rng, 3, 6);
        const auto base = group_proposals(list);
        auto extended = list;
        extended.push_back({list.front().video_id, list.front().start, list.front().end, 0.0, ""});
        const auto more = group_proposals(extended);
        for (int an = 1; an <= 6; ++an)
            CHECK(ar_at_an(more, gt, an, grid) ==
                  doctest::Approx(ar_at_an(base, gt, an, grid)).epsilon(1e-12));
    }
}

TEST_CASE("AUC trapezoid oracle and the single-point curve") {
    CHECK(auc_from_curve({0.7}) == doctest::Approx(70.0));
    // Recompute the trapezoid integral independently over x_k = (k-1)/(n-1).
    const std::vector<double> curve = {0.1, 0.4, 0.4, 0.9};
    double expected = 0.0;
    for (size_t k = 1; k < curve.size(); ++k)
        expected += 0.5 * (curve[k - 1] + curve[k]) * (1.0 / (curve.size() - 1));
    CHECK(auc_from_curve(curve) == doctest::Approx(expected * 100.0).epsilon(1e-12));
    CHECK(auc_from_curve(std::vector<double>(100, 1.0)) == doctest::Approx(100.0));
    CHECK_THROWS_AS((void)auc_from_curve({}), std::invalid_argument);
}

TEST_CASE("corpus-average AN capping shares one budget across videos") {
    // Video a holds the two top-scoring proposals; with AN = 1 in corpus mode
    // both land in video a and video b gets nothing.
    const GroundTruth gt = {{"a", {{0.0, 10.0, ""}}}, {"b", {{0.0, 10.0, ""}}}};
    const ProposalSet props = group_proposals({
        {"a", 0.0, 10.0, 0.9, ""},
        {"a", 0.5, 10.0, 0.8, ""},
        {"b", 0.0, 10.0, 0.1, ""},
    });
    CHECK(ar_at_an(props, gt, 1, {0.5}, /*corpus_average=*/true) == doctest::Approx(0.5));
    CHECK(ar_at_an(props, gt, 1, {0.5}, /*corpus_average=*/false) == doctest::Approx(1.0));
}

TEST_CASE("metric input validation") {
    const ProposalSet props = group_proposals({{"v", 0.0, 1.0, 0.5, ""}});
    const GroundTruth empty;
    CHECK_THROWS_AS((void)ar_at_an(props, empty, 10, {0.5}), std::invalid_argument);
    const GroundTruth gt = {{"v", {{0.0, 1.0, ""}}}};
    CHECK_THROWS_AS((void)ar_at_an(props, gt, 0, {0.5}), std::invalid_argument);
    CHECK_THROWS_AS((void)ar_at_an(props, gt, 10, {}), std::invalid_argument);
    // mAP needs labeled ground truth.
    CHECK_THROWS_AS((void)map_at_tiou(props, gt, 0.5), std::invalid_argument);
}

TEST_CASE("detection-only classes contribute no AP term") {
    const GroundTruth gt = {{"v", {{0.0, 10.0, "c0"}}}};
    const ProposalSet props = group_proposals({
        {"v", 0.0, 10.0, 0.9, "c0"},
        {"v", 15.0, 20.0, 0.8, "ghost"},  // warned, ignored
    });
    const auto ap = ap_per_class(props, gt, 0.5);
    CHECK(ap.size() == 1);
    CHECK(ap.at("c0") == doctest::Approx(1.0));
    CHECK(map_at_tiou(props, gt, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("group_proposals sorts each video by rank") {
    const auto props = group_proposals({
        {"v", 5.0, 9.0, 0.5, ""},
        {"v", 1.0, 2.0, 0.9, ""},
        {"v", 0.0, 2.0, 0.9, ""},
    });
    const auto& list = props.at("v");
    REQUIRE(list.size() == 3);
    CHECK(list[0].start == 0.0);  // score tie broken by earlier start
    CHECK(list[1].start == 1.0);
    CHECK(list[2].score == 0.5);
}
