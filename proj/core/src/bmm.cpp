#include "aei/bmm.hpp"

#include <iostream>
#include <stdexcept>

namespace aei::bmm {

BmmParams make_bmm_params(ParamStore& store, const ModelConfig& cfg, std::mt19937& rng) {
    BmmParams p;
    const int cf = cfg.feature_dim, cb = cfg.base_channels, hh = cfg.head_hidden;
    p.conv1_w = &store.create("bmm.conv1.w", {cb, cf, 3}, cf * 3, rng);
    p.conv1_b = &store.create_zeros("bmm.conv1.b", {cb});
    p.conv2_w = &store.create("bmm.conv2.w", {cb, cb, 3}, cb * 3, rng);
    p.conv2_b = &store.create_zeros("bmm.conv2.b", {cb});
    p.start_conv_w = &store.create("bmm.start_conv.w", {hh, cb, 3}, cb * 3, rng);
    p.start_conv_b = &store.create_zeros("bmm.start_conv.b", {hh});
    p.start_out_w = &store.create("bmm.start_out.w", {1, hh, 1}, hh, rng);
    p.start_out_b = &store.create_zeros("bmm.start_out.b", {1});
    p.end_conv_w = &store.create("bmm.end_conv.w", {hh, cb, 3}, cb * 3, rng);
    p.end_conv_b = &store.create_zeros("bmm.end_conv.b", {hh});
    p.end_out_w = &store.create("bmm.end_out.w", {1, hh, 1}, hh, rng);
    p.end_out_b = &store.create_zeros("bmm.end_out.b", {1});
    p.prop_w1 = &store.create("bmm.prop.w1", {cb, hh}, cb, rng);
    p.prop_b1 = &store.create_zeros("bmm.prop.b1", {hh});
    p.prop_w2 = &store.create("bmm.prop.w2", {hh, 1}, hh, rng);
    p.prop_b2 = &store.create_zeros("bmm.prop.b2", {1});
    return p;
}

NodeId base_module(Graph& g, NodeId feats, const BmmParams& p) {
    NodeId h = g.relu(g.conv1d(feats, g.param(*p.conv1_w), g.param(*p.conv1_b)));
    return g.relu(g.conv1d(h, g.param(*p.conv2_w), g.param(*p.conv2_b)));
}

std::pair<NodeId, NodeId> temporal_eval(Graph& g, NodeId hidden, const BmmParams& p) {
    const int T = g.value(hidden).rows();
    NodeId hs = g.relu(g.conv1d(hidden, g.param(*p.start_conv_w), g.param(*p.start_conv_b)));
    NodeId ps = g.sigmoid(g.reshape(g.conv1d(hs, g.param(*p.start_out_w), g.param(*p.start_out_b)), {T}));
    NodeId he = g.relu(g.conv1d(hidden, g.param(*p.end_conv_w), g.param(*p.end_conv_b)));
    NodeId pe = g.sigmoid(g.reshape(g.conv1d(he, g.param(*p.end_out_w), g.param(*p.end_out_b)), {T}));
    return {ps, pe};
}

std::vector<std::pair<int, int>> proposal_windows(int T, int D) {
    std::vector<std::pair<int, int>> windows;
    for (int i = 0; i < T; ++i)
        for (int d = 1; d <= D && i + d <= T; ++d) windows.emplace_back(i, d);
    return windows;
}

NodeId proposal_eval(Graph& g, NodeId hidden, int D, const BmmParams& p, int samples) {
    if (D < 1) throw std::invalid_argument("proposal_eval: D must be >= 1");
    const int T = g.value(hidden).rows();
    const auto windows = proposal_windows(T, D);
    NodeId pooled = g.window_pool(hidden, windows, samples);  // {W, C_b}
    NodeId h = g.relu(g.add(g.matmul(pooled, g.param(*p.prop_w1)), g.param(*p.prop_b1)));
    NodeId out = g.add(g.matmul(h, g.param(*p.prop_w2)), g.param(*p.prop_b2));
    return g.sigmoid(g.reshape(out, {static_cast<int>(windows.size())}));
}

ForwardResult forward(Graph& g, NodeId feats, const BmmParams& p, const ModelConfig& cfg) {
    ForwardResult r;
    r.T = g.value(feats).rows();
    r.D = cfg.max_duration > 0 ? std::min(cfg.max_duration, r.T) : r.T;
    NodeId hidden = base_module(g, feats, p);
    auto [ps, pe] = temporal_eval(g, hidden, p);
    r.start_prob = ps;
    r.end_prob = pe;
    r.windows = proposal_windows(r.T, r.D);
    r.actionness = proposal_eval(g, hidden, r.D, p, cfg.window_samples);
    return r;
}

BoundaryMaps extract_maps(const Graph& g, const ForwardResult& r) {
    BoundaryMaps maps;
    maps.T = r.T;
    maps.D = r.D;
    maps.start_prob = g.value(r.start_prob).vec();
    maps.end_prob = g.value(r.end_prob).vec();
    maps.actionness.assign(static_cast<size_t>(r.T) * r.D, 0.0);
    const auto& pa = g.value(r.actionness);
    for (size_t w = 0; w < r.windows.size(); ++w) {
        const auto [i, d] = r.windows[w];
        maps.actionness[static_cast<size_t>(i) * r.D + (d - 1)] = pa[static_cast<int64_t>(w)];
    }
    return maps;
}

NodeId loss_aei(Graph& g, const ForwardResult& r, const data::GroundTruthLabels& labels,
                Real lambda) {
    if (labels.T != r.T || labels.D != r.D)
        throw std::invalid_argument("loss_aei: label tensor shape (" + std::to_string(labels.T) +
                                    "," + std::to_string(labels.D) + ") does not match maps (" +
                                    std::to_string(r.T) + "," + std::to_string(r.D) + ")");
    std::vector<Real> window_labels;
    window_labels.reserve(r.windows.size());
    for (const auto& [i, d] : r.windows) window_labels.push_back(labels.action_at(i, d));

    auto warn_degenerate = [](const std::vector<Real>& l, const char* name) {
        int64_t pos = 0;
        for (Real v : l) pos += v > 0.5 ? 1 : 0;
        if (pos == 0 || pos == static_cast<int64_t>(l.size()))
            std::cerr << "warning: " << name
                      << " labels are all-" << (pos == 0 ? "negative" : "positive")
                      << "; dropping the degenerate term\n";
    };
    warn_degenerate(labels.start_labels, "start");
    warn_degenerate(labels.end_labels, "end");
    warn_degenerate(window_labels, "actionness");

    NodeId l_start = g.weighted_bll_loss(r.start_prob, labels.start_labels);
    NodeId l_end = g.weighted_bll_loss(r.end_prob, labels.end_labels);
    NodeId l_action = g.weighted_bll_loss(r.actionness, window_labels);
    if (lambda != 0.0)
        l_action = g.add(l_action, g.scale(g.mse_loss(r.actionness, window_labels), lambda));
    return g.add(g.add(l_start, l_end), l_action);
}

}  // namespace aei::bmm
