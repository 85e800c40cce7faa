#include "aei/pvr.hpp"

#include <algorithm>
#include <stdexcept>

namespace aei::pvr {

PvrParams make_pvr_params(ParamStore& store, const ModelConfig& cfg, std::mt19937& rng) {
    if (cfg.env_dim < 1 || cfg.actor_dim < 1)
        throw std::invalid_argument("make_pvr_params: env_dim and actor_dim must be set");
    PvrParams p;
    p.mlp_env = model::make_mlp_params(store, "pvr.mlp_env", cfg.env_dim, cfg.mlp_hidden,
                                       cfg.embed_dim, rng);
    p.mlp_actor = model::make_mlp_params(store, "pvr.mlp_actor", cfg.actor_dim, cfg.mlp_hidden,
                                         cfg.embed_dim, rng);
    p.no_actor = &store.create("pvr.no_actor", {cfg.actor_dim}, cfg.actor_dim, rng);
    p.aam_attn = model::make_attn_params(store, "pvr.aam_attn", cfg.actor_dim, rng);
    p.proj_env_w = &store.create("pvr.proj_env.w", {cfg.env_dim, cfg.feature_dim}, cfg.env_dim, rng);
    p.proj_env_b = &store.create_zeros("pvr.proj_env.b", {cfg.feature_dim});
    p.proj_actor_w =
        &store.create("pvr.proj_actor.w", {cfg.actor_dim, cfg.feature_dim}, cfg.actor_dim, rng);
    p.proj_actor_b = &store.create_zeros("pvr.proj_actor.b", {cfg.feature_dim});
    p.inter_attn = model::make_attn_params(store, "pvr.inter_attn", cfg.feature_dim, rng);
    return p;
}

std::vector<bool> select_mask(const std::vector<Real>& scores, bool select_all) {
    const size_t n = scores.size();
    std::vector<bool> mask(n, false);
    if (n == 0) return mask;
    if (select_all) {
        std::fill(mask.begin(), mask.end(), true);
        return mask;
    }
    const Real tau = 1.0 / static_cast<Real>(n);
    bool any = false;
    for (size_t i = 0; i < n; ++i) {
        mask[i] = scores[i] >= tau - 1e-9;
        any = any || mask[i];
    }
    if (!any) {  // unreachable for exact softmax; guard against rounding
        const auto best = std::max_element(scores.begin(), scores.end());
        mask[static_cast<size_t>(best - scores.begin())] = true;
    }
    return mask;
}

AamOutput aam(Graph& g, NodeId env, NodeId actors, const PvrParams& p, const ModelConfig& cfg) {
    AamOutput out;
    if (actors < 0) {
        out.fused = g.param(*p.no_actor);
        return out;
    }
    const int n_actors = g.value(actors).rows();
    if (n_actors == 0) throw std::invalid_argument("aam: actor matrix must be non-empty (use -1)");

    NodeId env_emb = model::mlp(g, g.reshape(env, {1, cfg.env_dim}), p.mlp_env);     // {1,E}
    NodeId actor_emb = model::mlp(g, actors, p.mlp_actor);                           // {N,E}
    // score_i = || actor_emb_i (+) env_emb ||_2, softmax-normalized
    NodeId cat = g.concat(actor_emb, g.broadcast_row(env_emb, n_actors), 1);         // {N,2E}
    NodeId scores = g.softmax(g.l2_norm(cat));                                       // {N}

    out.scores = g.value(scores).vec();
    out.threshold = 1.0 / static_cast<Real>(n_actors);
    out.selected = select_mask(out.scores, cfg.no_selection);

    std::vector<int> idx;
    for (int i = 0; i < n_actors; ++i)
        if (out.selected[static_cast<size_t>(i)]) idx.push_back(i);

    // Score-weighted selected features: the hard mask itself carries no
    // gradient, but the weights keep the scoring MLPs in the training path.
    NodeId sel = g.gather_rows(actors, idx);
    NodeId sel_scores = g.reshape(
        g.gather_rows(g.reshape(scores, {n_actors, 1}), idx), {static_cast<int>(idx.size())});
    NodeId weights = g.scale(g.div_scalar(sel_scores, g.sum_all(sel_scores)),
                             static_cast<Real>(idx.size()));
    NodeId weighted = g.rowwise_scale(sel, weights);  // {k, C_a}

    NodeId fused_seq =
        cfg.no_fusion ? weighted : model::self_attention(g, weighted, p.aam_attn, cfg.attn_heads);
    out.fused = g.mean_pool(fused_seq, 0);  // {C_a}
    return out;
}

NodeId interaction(Graph& g, NodeId env, NodeId actor_repr, const PvrParams& p,
                   const ModelConfig& cfg) {
    NodeId env_row = g.add(g.matmul(g.reshape(env, {1, cfg.env_dim}), g.param(*p.proj_env_w)),
                           g.param(*p.proj_env_b));
    NodeId act_row =
        g.add(g.matmul(g.reshape(actor_repr, {1, cfg.actor_dim}), g.param(*p.proj_actor_w)),
              g.param(*p.proj_actor_b));
    NodeId seq = g.concat(env_row, act_row, 0);  // {2, C_f}
    return g.mean_pool(model::self_attention(g, seq, p.inter_attn, cfg.attn_heads), 0);
}

NodeId represent_video(Graph& g, const data::SnippetFeatures& features, const PvrParams& p,
                       const ModelConfig& cfg) {
    if (features.snippet_count < 1)
        throw std::invalid_argument("represent_video: empty snippet sequence");
    if (features.env_dim != cfg.env_dim || features.actor_dim != cfg.actor_dim)
        throw aei::DataError("represent_video: feature dims (" + std::to_string(features.env_dim) +
                             "," + std::to_string(features.actor_dim) +
                             ") do not match model config (" + std::to_string(cfg.env_dim) + "," +
                             std::to_string(cfg.actor_dim) + ")");
    std::vector<NodeId> rows;
    rows.reserve(static_cast<size_t>(features.snippet_count));
    for (int i = 0; i < features.snippet_count; ++i) {
        NodeId env = g.constant(nn::Tensor({cfg.env_dim}, features.env[static_cast<size_t>(i)]));
        const auto& snippet_actors = features.actors[static_cast<size_t>(i)];
        NodeId actors = -1;
        if (!snippet_actors.empty()) {
            nn::Tensor mat({static_cast<int>(snippet_actors.size()), cfg.actor_dim});
            for (size_t a = 0; a < snippet_actors.size(); ++a)
                std::copy(snippet_actors[a].begin(), snippet_actors[a].end(),
                          mat.data() + static_cast<int64_t>(a) * cfg.actor_dim);
            actors = g.constant(std::move(mat));
        }

        NodeId env_row = g.add(g.matmul(g.reshape(env, {1, cfg.env_dim}), g.param(*p.proj_env_w)),
                               g.param(*p.proj_env_b));
        if (cfg.environment_only) {
            rows.push_back(g.reshape(env_row, {cfg.feature_dim}));
            continue;
        }
        NodeId actor_repr = aam(g, env, actors, p, cfg).fused;
        NodeId act_row =
            g.add(g.matmul(g.reshape(actor_repr, {1, cfg.actor_dim}), g.param(*p.proj_actor_w)),
                  g.param(*p.proj_actor_b));
        if (cfg.actors_only) {
            rows.push_back(g.reshape(act_row, {cfg.feature_dim}));
        } else if (cfg.no_interaction) {
            rows.push_back(g.reshape(g.scale(g.add(env_row, act_row), 0.5), {cfg.feature_dim}));
        } else {
            NodeId seq = g.concat(env_row, act_row, 0);
            rows.push_back(
                g.mean_pool(model::self_attention(g, seq, p.inter_attn, cfg.attn_heads), 0));
        }
    }
    return g.concat_rows(rows);
}

}  // namespace aei::pvr
