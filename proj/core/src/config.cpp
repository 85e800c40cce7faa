#include "aei/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "aei/errors.hpp"

namespace aei::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("config: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_string(ss.str());
}

KeyValueFile KeyValueFile::parse_string(const std::string& text) {
    KeyValueFile kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw DataError("config line " + std::to_string(lineno) + ": empty key");
        kv.values_[key] = value;
    }
    return kv;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
}

double KeyValueFile::get_double(const std::string& key, double dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw DataError("config: key '" + key + "' is not a number: " + it->second);
    }
}

int KeyValueFile::get_int(const std::string& key, int dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        throw DataError("config: key '" + key + "' is not an integer: " + it->second);
    }
}

bool KeyValueFile::get_bool(const std::string& key, bool dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw DataError("config: key '" + key + "' is not a boolean: " + it->second);
}

std::vector<double> KeyValueFile::get_double_list(const std::string& key,
                                                  std::vector<double> dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    std::vector<double> out;
    std::istringstream is(it->second);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        try {
            out.push_back(std::stod(trim(tok)));
        } catch (const std::exception&) {
            throw DataError("config: key '" + key + "' has a non-numeric entry: " + tok);
        }
    }
    if (out.empty()) throw DataError("config: key '" + key + "' is an empty list");
    return out;
}

std::vector<int> KeyValueFile::get_int_list(const std::string& key, std::vector<int> dflt) const {
    auto doubles = get_double_list(key, {});
    if (doubles.empty()) return dflt;
    std::vector<int> out;
    for (double v : doubles) out.push_back(static_cast<int>(v));
    return out;
}

RunConfig RunConfig::from_file(const KeyValueFile& kv) {
    RunConfig c;
    c.frames_per_snippet = kv.get_int("data.delta", c.frames_per_snippet);
    c.boundary_ratio = kv.get_double("data.boundary_ratio", c.boundary_ratio);
    c.actionness_iou = kv.get_double("data.actionness_iou", c.actionness_iou);
    c.model.max_duration = kv.get_int("data.max_duration", c.model.max_duration);

    c.model.embed_dim = kv.get_int("model.embed_dim", c.model.embed_dim);
    c.model.mlp_hidden = kv.get_int("model.mlp_hidden", c.model.mlp_hidden);
    c.model.feature_dim = kv.get_int("model.feature_dim", c.model.feature_dim);
    c.model.base_channels = kv.get_int("model.base_channels", c.model.base_channels);
    c.model.head_hidden = kv.get_int("model.head_hidden", c.model.head_hidden);
    c.model.attn_heads = kv.get_int("model.attention_heads", c.model.attn_heads);
    c.model.window_samples = kv.get_int("model.window_samples", c.model.window_samples);
    c.model.loss_lambda = kv.get_double("loss.lambda", c.model.loss_lambda);
    c.model.environment_only = kv.get_bool("ablate.environment_only", false);
    c.model.actors_only = kv.get_bool("ablate.actors_only", false);
    c.model.no_interaction = kv.get_bool("ablate.no_interaction", false);
    c.model.no_selection = kv.get_bool("ablate.no_selection", false);
    c.model.no_fusion = kv.get_bool("ablate.no_fusion", false);

    c.learning_rate = kv.get_double("train.lr", c.learning_rate);
    c.train_steps = kv.get_int("train.steps", c.train_steps);
    c.seed = static_cast<uint64_t>(kv.get_int("train.seed", static_cast<int>(c.seed)));

    const std::string method = kv.get_string("suppress.method", "soft-nms");
    if (method == "nms")
        c.suppression = Suppression::kNms;
    else if (method == "soft-nms")
        c.suppression = Suppression::kSoftNms;
    else
        throw DataError("config: suppress.method must be nms or soft-nms, got " + method);
    c.nms_threshold = kv.get_double("suppress.nms_threshold", c.nms_threshold);
    c.soft_nms_sigma = kv.get_double("suppress.soft_sigma", c.soft_nms_sigma);
    c.soft_nms_floor = kv.get_double("suppress.score_floor", c.soft_nms_floor);
    c.peak_ratio = kv.get_double("postproc.peak_ratio", c.peak_ratio);

    c.eval = metrics::EvalConfig::defaults();
    c.eval.tiou_grid = kv.get_double_list("eval.tiou_grid", c.eval.tiou_grid);
    c.eval.an_values = kv.get_int_list("eval.an_list", c.eval.an_values);
    c.eval.max_an = kv.get_int("eval.max_an", c.eval.max_an);
    c.eval.map_grid = kv.get_double_list("eval.map_grid", c.eval.map_grid);
    c.eval.corpus_average = kv.get_string("eval.an_mode", "per-video") == "corpus";

    c.synth.seed = c.seed;
    c.synth.num_videos = kv.get_int("synth.num_videos", c.synth.num_videos);
    c.synth.t_min = kv.get_int("synth.t_min", c.synth.t_min);
    c.synth.t_max = kv.get_int("synth.t_max", c.synth.t_max);
    c.synth.env_dim = kv.get_int("synth.env_dim", c.synth.env_dim);
    c.synth.actor_dim = kv.get_int("synth.actor_dim", c.synth.actor_dim);
    c.synth.actors_min = kv.get_int("synth.actors_min", c.synth.actors_min);
    c.synth.actors_max = kv.get_int("synth.actors_max", c.synth.actors_max);
    c.synth.actions_min = kv.get_int("synth.actions_min", c.synth.actions_min);
    c.synth.actions_max = kv.get_int("synth.actions_max", c.synth.actions_max);
    c.synth.num_classes = kv.get_int("synth.num_classes", c.synth.num_classes);
    c.synth.noise_level = kv.get_double("synth.noise_level", c.synth.noise_level);
    c.synth.frames_per_snippet = c.frames_per_snippet;
    c.synth.frame_rate = kv.get_double("synth.frame_rate", c.synth.frame_rate);
    return c;
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
    std::vector<std::pair<std::string, std::string>> out;
    auto put = [&](const std::string& k, const std::string& v) { out.emplace_back(k, v); };
    put("data.delta", std::to_string(frames_per_snippet));
    put("data.boundary_ratio", fmt(boundary_ratio));
    put("data.actionness_iou", fmt(actionness_iou));
    put("data.max_duration", std::to_string(model.max_duration));
    put("model.embed_dim", std::to_string(model.embed_dim));
    put("model.mlp_hidden", std::to_string(model.mlp_hidden));
    put("model.feature_dim", std::to_string(model.feature_dim));
    put("model.base_channels", std::to_string(model.base_channels));
    put("model.head_hidden", std::to_string(model.head_hidden));
    put("model.attention_heads", std::to_string(model.attn_heads));
    put("model.window_samples", std::to_string(model.window_samples));
    put("loss.lambda", fmt(model.loss_lambda));
    put("ablate.environment_only", model.environment_only ? "true" : "false");
    put("ablate.actors_only", model.actors_only ? "true" : "false");
    put("ablate.no_interaction", model.no_interaction ? "true" : "false");
    put("ablate.no_selection", model.no_selection ? "true" : "false");
    put("ablate.no_fusion", model.no_fusion ? "true" : "false");
    put("train.lr", fmt(learning_rate));
    put("train.steps", std::to_string(train_steps));
    put("train.seed", std::to_string(seed));
    put("suppress.method", suppression == Suppression::kNms ? "nms" : "soft-nms");
    put("suppress.nms_threshold", fmt(nms_threshold));
    put("suppress.soft_sigma", fmt(soft_nms_sigma));
    put("suppress.score_floor", fmt(soft_nms_floor));
    put("postproc.peak_ratio", fmt(peak_ratio));
    {
        std::string grid;
        for (double v : eval.tiou_grid) grid += (grid.empty() ? "" : ",") + fmt(v);
        put("eval.tiou_grid", grid);
        std::string ans;
        for (int v : eval.an_values) ans += (ans.empty() ? "" : ",") + std::to_string(v);
        put("eval.an_list", ans);
        std::string maps;
        for (double v : eval.map_grid) maps += (maps.empty() ? "" : ",") + fmt(v);
        put("eval.map_grid", maps);
    }
    put("eval.max_an", std::to_string(eval.max_an));
    put("eval.an_mode", eval.corpus_average ? "corpus" : "per-video");
    put("synth.num_videos", std::to_string(synth.num_videos));
    put("synth.t_min", std::to_string(synth.t_min));
    put("synth.t_max", std::to_string(synth.t_max));
    put("synth.env_dim", std::to_string(synth.env_dim));
    put("synth.actor_dim", std::to_string(synth.actor_dim));
    put("synth.actors_min", std::to_string(synth.actors_min));
    put("synth.actors_max", std::to_string(synth.actors_max));
    put("synth.actions_min", std::to_string(synth.actions_min));
    put("synth.actions_max", std::to_string(synth.actions_max));
    put("synth.num_classes", std::to_string(synth.num_classes));
    put("synth.noise_level", fmt(synth.noise_level));
    put("synth.frame_rate", fmt(synth.frame_rate));
    return out;
}

}  // namespace aei::config
