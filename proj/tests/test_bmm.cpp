#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "aei/bmm.hpp"
#include "aei/pvr.hpp"
#include "testutil.hpp"

using namespace aei;
using namespace aei::bmm;
using nn::Graph;
using nn::NodeId;
using nn::ParamStore;
using nn::Tensor;
using testutil::random_tensor;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.env_dim = 3;
    cfg.actor_dim = 3;
    cfg.embed_dim = 4;
    cfg.mlp_hidden = 4;
    cfg.feature_dim = 6;
    cfg.base_channels = 5;
    cfg.head_hidden = 4;
    cfg.window_samples = 4;
    return cfg;
}

}  // namespace

TEST_CASE("proposal_windows: exhaustive enumeration, start-major") {
    const auto w = proposal_windows(4, 3);
    const std::vector<std::pair<int, int>> expected = {
        {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {3, 1}};
    CHECK(w == expected);

    // Monotone duration coverage: windows(T, D) is a subset of windows(T, D+1).
    for (int T : {1, 3, 7}) {
        for (int D = 1; D < T; ++D) {
            const auto small = proposal_windows(T, D);
            const auto big = proposal_windows(T, D + 1);
            const std::set<std::pair<int, int>> big_set(big.begin(), big.end());
            for (const auto& win : small) CHECK(big_set.count(win) == 1);
        }
    }
    // Every window is valid.
    for (const auto& [i, d] : proposal_windows(9, 5)) {
        CHECK(d >= 1);
        CHECK(d <= 5);
        CHECK(i + d <= 9);
    }
}

TEST_CASE("forward: shapes, probability range, duration rule") {
    const ModelConfig base = tiny_config();
    std::mt19937 rng(17);
    for (int max_dur : {0, 3, 16}) {
        ModelConfig cfg = base;
        cfg.max_duration = max_dur;
        ParamStore store;
        BmmParams p = make_bmm_params(store, cfg, rng);
        const int T = 5;
        Graph g;
        NodeId feats = g.constant(random_tensor({T, cfg.feature_dim}, rng));
        const ForwardResult r = forward(g, feats, p, cfg);
        CHECK(r.T == T);
        CHECK(r.D == (max_dur > 0 ? std::min(max_dur, T) : T));
        CHECK(g.value(r.start_prob).shape() == nn::Shape{T});
        CHECK(g.value(r.end_prob).shape() == nn::Shape{T});
        CHECK(r.windows == proposal_windows(T, r.D));
        CHECK(g.value(r.actionness).shape() ==
              nn::Shape{static_cast<int>(r.windows.size())});
        for (NodeId node : {r.start_prob, r.end_prob, r.actionness}) {
            const Tensor& v = g.value(node);
            for (int64_t i = 0; i < v.numel(); ++i) {
                CHECK(v[i] > 0.0);
                CHECK(v[i] < 1.0);
            }
        }

        const BoundaryMaps maps = extract_maps(g, r);
        for (size_t w = 0; w < r.windows.size(); ++w) {
            const auto [i, d] = r.windows[w];
            CHECK(maps.action_at(i, d) == g.value(r.actionness)[static_cast<int64_t>(w)]);
        }
        // Entries outside the valid region stay zero.
        for (int i = 0; i < r.T; ++i)
            for (int d = 1; d <= r.D; ++d)
                if (i + d > r.T) CHECK(maps.action_at(i, d) == 0.0);
    }
}

TEST_CASE("loss_aei: anchors on constant predictions") {
    // T = 2, D = 1: windows (0,1) and (1,1).
    auto build = [](Graph& g, std::vector<Real> ps, std::vector<Real> pe,
                    std::vector<Real> pa) {
        ForwardResult r;
        r.T = 2;
        r.D = 1;
        r.windows = proposal_windows(2, 1);
        r.start_prob = g.constant(Tensor({2}, std::move(ps)));
        r.end_prob = g.constant(Tensor({2}, std::move(pe)));
        r.actionness = g.constant(Tensor({2}, std::move(pa)));
        return r;
    };
    data::GroundTruthLabels labels;
    labels.T = 2;
    labels.D = 1;
    labels.start_labels = {1.0, 0.0};
    labels.end_labels = {0.0, 1.0};
    labels.actionness = {1.0, 0.0};

    // Perfect predictions: only the clamp residue remains.
    {
        Graph g;
        const auto r = build(g, {1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0});
        const Real loss = g.value(loss_aei(g, r, labels, 10.0))[0];
        CHECK(loss >= 0.0);
        CHECK(loss < 1e-4);
    }
    // Uncertain start head only: the -2 log 0.5 anchor plus clamp residue.
    {
        Graph g;
        const auto r = build(g, {0.5, 0.5}, {0.0, 1.0}, {1.0, 0.0});
        const Real loss = g.value(loss_aei(g, r, labels, 10.0))[0];
        CHECK(loss == doctest::Approx(-2.0 * std::log(0.5)).epsilon(1e-5));
    }
    // lambda scales only the MSE term.
    {
        Graph g0, g10;
        const auto r0 = build(g0, {1.0, 0.0}, {0.0, 1.0}, {0.8, 0.2});
        const auto r10 = build(g10, {1.0, 0.0}, {0.0, 1.0}, {0.8, 0.2});
        const Real l0 = g0.value(loss_aei(g0, r0, labels, 0.0))[0];
        const Real l10 = g10.value(loss_aei(g10, r10, labels, 10.0))[0];
        // MSE over the two window entries: ((0.2)^2 + (0.2)^2) / 2 = 0.04.
        CHECK(l10 - l0 == doctest::Approx(10.0 * 0.04).epsilon(1e-9));
    }
    // Shape mismatch is rejected.
    {
        Graph g;
        const auto r = build(g, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5});
        data::GroundTruthLabels wrong = labels;
        wrong.T = 3;
        CHECK_THROWS_AS((void)loss_aei(g, r, wrong, 10.0), std::invalid_argument);
    }
}

TEST_CASE("gradcheck: composed pvr -> bmm -> loss graph") {
    const ModelConfig cfg = tiny_config();
    for (uint32_t seed = 1; seed <= 3; ++seed) {
        std::mt19937 rng(seed);
        ParamStore store;
        pvr::PvrParams pp = pvr::make_pvr_params(store, cfg, rng);
        BmmParams bp = make_bmm_params(store, cfg, rng);

        data::SnippetFeatures feats;
        feats.video_id = "v";
        const int T = 6;
        feats.snippet_count = T;
        feats.frames_per_snippet = 16;
        feats.env_dim = cfg.env_dim;
        feats.actor_dim = cfg.actor_dim;
        std::uniform_real_distribution<Real> dist(-1.0, 1.0);
        std::uniform_int_distribution<int> n_actors(0, 2);
        for (int i = 0; i < T; ++i) {
            std::vector<Real> env(static_cast<size_t>(cfg.env_dim));
            for (auto& v : env) v = dist(rng);
            feats.env.push_back(env);
            std::vector<std::vector<Real>> actors;
            for (int a = n_actors(rng); a > 0; --a) {
                std::vector<Real> row(static_cast<size_t>(cfg.actor_dim));
                for (auto& v : row) v = dist(rng);
                actors.push_back(row);
            }
            feats.actors.push_back(actors);
        }

        ModelConfig run = cfg;
        run.max_duration = 4;  // T = 6, D = 4 instance
        data::VideoRecord rec{"v", static_cast<int64_t>(T) * 16, 8.0,
                              {{2.0, 8.0, ""}}};
        const auto labels = data::generate_labels(rec, T, 16, 4);

        const double err = testutil::max_rel_grad_error(store, [&](Graph& g) {
            NodeId repr = pvr::represent_video(g, feats, pp, run);
            const ForwardResult fwd = forward(g, repr, bp, run);
            return loss_aei(g, fwd, labels, run.loss_lambda);
        });
        INFO("seed " << seed);
        CHECK(err < 1e-3);
    }
}

TEST_CASE("overfit one video: boundary heads localize the planted action") {
    // One deterministic video with an action spanning snippets [3, 7).
    ModelConfig cfg = tiny_config();
    cfg.feature_dim = 16;
    cfg.base_channels = 12;
    cfg.head_hidden = 8;
    const int T = 12;
    std::mt19937 rng(2);
    ParamStore store;
    pvr::PvrParams pp = pvr::make_pvr_params(store, cfg, rng);
    BmmParams bp = make_bmm_params(store, cfg, rng);

    data::SnippetFeatures feats;
    feats.video_id = "v";
    feats.snippet_count = T;
    feats.frames_per_snippet = 16;
    feats.env_dim = cfg.env_dim;
    feats.actor_dim = cfg.actor_dim;
    for (int i = 0; i < T; ++i) {
        const bool inside = i >= 3 && i < 7;
        feats.env.push_back(inside ? std::vector<Real>{2.0, -1.0, 0.5}
                                   : std::vector<Real>{-1.0, 1.5, -0.5});
        feats.actors.push_back({{inside ? 1.0 : -1.0, 0.5, -0.25}});
    }
    const double spf = 16.0 / 8.0;
    data::VideoRecord rec{"v", static_cast<int64_t>(T) * 16, 8.0, {{3 * spf, 7 * spf, ""}}};
    const auto labels = data::generate_labels(rec, T, 16, T);

    for (int step = 0; step < 300; ++step) {
        Graph g;
        NodeId repr = pvr::represent_video(g, feats, pp, cfg);
        const ForwardResult fwd = forward(g, repr, bp, cfg);
        NodeId loss = loss_aei(g, fwd, labels, cfg.loss_lambda);
        store.zero_grad();
        g.backward(loss);
        store.adam_step(0.005);
    }

    Graph g;
    NodeId repr = pvr::represent_video(g, feats, pp, cfg);
    const ForwardResult fwd = forward(g, repr, bp, cfg);
    const BoundaryMaps maps = extract_maps(g, fwd);
    int argmax_s = 0, argmax_e = 0;
    for (int i = 1; i < T; ++i) {
        if (maps.start_prob[static_cast<size_t>(i)] > maps.start_prob[static_cast<size_t>(argmax_s)])
            argmax_s = i;
        if (maps.end_prob[static_cast<size_t>(i)] > maps.end_prob[static_cast<size_t>(argmax_e)])
            argmax_e = i;
    }
    CHECK(std::abs(argmax_s - 3) <= 1);
    CHECK(std::abs(argmax_e - 7) <= 1);
    // The actionness map peaks at the planted (start, duration) cell and is
    // low far away from it.
    CHECK(maps.action_at(3, 4) > 0.7);
    CHECK(maps.action_at(9, 2) < 0.3);
    CHECK(maps.action_at(0, 2) < 0.3);
}
