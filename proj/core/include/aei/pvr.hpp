#pragma once

#include <vector>

#include "aei/dataio.hpp"
#include "aei/model.hpp"

namespace aei::pvr {

using model::AttnParams;
using model::MlpParams;
using model::ModelConfig;
using nn::Graph;
using nn::NodeId;
using nn::ParamStore;
using nn::Parameter;
using nn::Real;

struct PvrParams {
    MlpParams mlp_env;    // environment embedding for actor scoring
    MlpParams mlp_actor;  // actor embedding for actor scoring
    Parameter* no_actor;  // learned fallback for actor-less snippets
    AttnParams aam_attn;  // fusion over selected actor features
    Parameter* proj_env_w;
    Parameter* proj_env_b;
    Parameter* proj_actor_w;
    Parameter* proj_actor_b;
    AttnParams inter_attn;  // environment/actor interaction
};

PvrParams make_pvr_params(ParamStore& store, const ModelConfig& cfg, std::mt19937& rng);

struct AamOutput {
    NodeId fused = -1;          // {actor_dim}
    std::vector<Real> scores;   // softmax-normalized, one per actor
    Real threshold = 0.0;       // 1 / N_B
    std::vector<bool> selected;
};

/// Threshold rule on softmax scores: keep score >= 1/N (tiny tolerance for
/// floating-point ties). The softmax maximum is always >= the mean, so the
/// result is never empty for N >= 1.
std::vector<bool> select_mask(const std::vector<Real>& scores, bool select_all = false);

/// Adaptive attention over one snippet's actors. `actors` is a {N_B, C_a}
/// constant node, or -1 when the snippet has no actors (the learned no-actor
/// embedding is returned).
AamOutput aam(Graph& g, NodeId env, NodeId actors, const PvrParams& p, const ModelConfig& cfg);

/// Fuses the environment vector and the actor representation into one
/// snippet feature of dimension feature_dim.
NodeId interaction(Graph& g, NodeId env, NodeId actor_repr, const PvrParams& p,
                   const ModelConfig& cfg);

/// Applies aam + interaction per snippet; returns {T, feature_dim}. Honors
/// the ablation flags in cfg.
NodeId represent_video(Graph& g, const data::SnippetFeatures& features, const PvrParams& p,
                       const ModelConfig& cfg);

}  // namespace aei::pvr
