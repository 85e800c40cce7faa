#include <benchmark/benchmark.h>

#include <random>

#include "aei/bmm.hpp"
#include "aei/dataio.hpp"
#include "aei/postproc.hpp"
#include "aei/pvr.hpp"

using namespace aei;
using nn::Graph;
using nn::NodeId;
using nn::ParamStore;
using nn::Real;
using nn::Tensor;

namespace {

Tensor random_tensor(nn::Shape shape, std::mt19937& rng) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<Real> dist(-1.0, 1.0);
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
    return t;
}

model::ModelConfig default_model() {
    model::ModelConfig cfg;  // library defaults: 64/128/256/128/64
    cfg.env_dim = 64;
    cfg.actor_dim = 64;
    return cfg;
}

data::SnippetFeatures random_features(const model::ModelConfig& cfg, int T, std::mt19937& rng) {
    data::SnippetFeatures f;
    f.video_id = "bench";
    f.snippet_count = T;
    f.frames_per_snippet = 16;
    f.env_dim = cfg.env_dim;
    f.actor_dim = cfg.actor_dim;
    std::uniform_real_distribution<Real> dist(-1.0, 1.0);
    std::uniform_int_distribution<int> n_actors(0, 3);
    for (int i = 0; i < T; ++i) {
        std::vector<Real> env(static_cast<size_t>(cfg.env_dim));
        for (auto& v : env) v = dist(rng);
        f.env.push_back(env);
        std::vector<std::vector<Real>> actors;
        for (int a = n_actors(rng); a > 0; --a) {
            std::vector<Real> row(static_cast<size_t>(cfg.actor_dim));
            for (auto& v : row) v = dist(rng);
            actors.push_back(row);
        }
        f.actors.push_back(actors);
    }
    return f;
}

}  // namespace

static void BM_Conv1dForward(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    const int C = 128;
    std::mt19937 rng(1);
    Tensor x = random_tensor({T, C}, rng);
    Tensor w = random_tensor({C, C, 3}, rng);
    Tensor b = random_tensor({C}, rng);
    for (auto _ : state) {
        Graph g;
        NodeId out = g.conv1d(g.constant(x), g.constant(w), g.constant(b));
        benchmark::DoNotOptimize(g.value(out).data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(T));
}
BENCHMARK(BM_Conv1dForward)->Arg(32)->Arg(128)->Arg(512);

static void BM_WindowPool(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    std::mt19937 rng(2);
    Tensor x = random_tensor({T, 128}, rng);
    const auto windows = bmm::proposal_windows(T, T);
    for (auto _ : state) {
        Graph g;
        NodeId out = g.window_pool(g.constant(x), windows, 8);
        benchmark::DoNotOptimize(g.value(out).data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(windows.size()));
}
BENCHMARK(BM_WindowPool)->Arg(16)->Arg(32)->Arg(64);

static void BM_RepresentVideo(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    const model::ModelConfig cfg = default_model();
    std::mt19937 rng(3);
    ParamStore store;
    pvr::PvrParams p = pvr::make_pvr_params(store, cfg, rng);
    const auto feats = random_features(cfg, T, rng);
    for (auto _ : state) {
        Graph g;
        NodeId repr = pvr::represent_video(g, feats, p, cfg);
        benchmark::DoNotOptimize(g.value(repr).data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(T));
}
BENCHMARK(BM_RepresentVideo)->Arg(16)->Arg(32);

static void BM_TrainStep(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    model::ModelConfig cfg = default_model();
    cfg.max_duration = 16;
    std::mt19937 rng(4);
    ParamStore store;
    pvr::PvrParams pp = pvr::make_pvr_params(store, cfg, rng);
    bmm::BmmParams bp = bmm::make_bmm_params(store, cfg, rng);
    const auto feats = random_features(cfg, T, rng);
    data::VideoRecord rec{"bench", static_cast<int64_t>(T) * 16, 8.0,
                          {{2.0, 2.0 + T, ""}}};
    const auto labels = data::generate_labels(rec, T, 16, std::min(16, T));
    for (auto _ : state) {
        Graph g;
        NodeId repr = pvr::represent_video(g, feats, pp, cfg);
        const auto fwd = bmm::forward(g, repr, bp, cfg);
        NodeId loss = bmm::loss_aei(g, fwd, labels, cfg.loss_lambda);
        store.zero_grad();
        g.backward(loss);
        store.adam_step(1e-3);
        benchmark::DoNotOptimize(g.value(loss)[0]);
    }
}
BENCHMARK(BM_TrainStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_Nms(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> pos(0.0, 100.0);
    std::uniform_real_distribution<double> len(0.5, 10.0);
    std::uniform_real_distribution<double> score(0.01, 1.0);
    std::vector<post::Proposal> props;
    for (int i = 0; i < n; ++i) {
        const double s = pos(rng);
        props.push_back({"v", s, s + len(rng), score(rng), ""});
    }
    for (auto _ : state) {
        auto kept = post::nms(props, 0.5);
        benchmark::DoNotOptimize(kept.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_Nms)->Arg(100)->Arg(1000);

static void BM_SoftNms(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> pos(0.0, 100.0);
    std::uniform_real_distribution<double> len(0.5, 10.0);
    std::uniform_real_distribution<double> score(0.01, 1.0);
    std::vector<post::Proposal> props;
    for (int i = 0; i < n; ++i) {
        const double s = pos(rng);
        props.push_back({"v", s, s + len(rng), score(rng), ""});
    }
    for (auto _ : state) {
        auto kept = post::soft_nms(props, 0.5, 1e-4);
        benchmark::DoNotOptimize(kept.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_SoftNms)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
