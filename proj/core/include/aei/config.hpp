#pragma once

#include <map>
#include <string>
#include <vector>

#include "aei/dataio.hpp"
#include "aei/metrics.hpp"
#include "aei/model.hpp"

namespace aei::config {

/// Flat key = value file with dotted section keys; '#' starts a comment.
class KeyValueFile {
public:
    static KeyValueFile parse_file(const std::string& path);
    static KeyValueFile parse_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string get_string(const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& key, double dflt) const;
    int get_int(const std::string& key, int dflt) const;
    bool get_bool(const std::string& key, bool dflt) const;
    std::vector<double> get_double_list(const std::string& key, std::vector<double> dflt) const;
    std::vector<int> get_int_list(const std::string& key, std::vector<int> dflt) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

enum class Suppression { kNms, kSoftNms };

struct RunConfig {
    model::ModelConfig model;
    data::SynthParams synth;
    metrics::EvalConfig eval;

    int frames_per_snippet = 16;  // delta
    double boundary_ratio = 0.1;
    double actionness_iou = 0.9;

    double learning_rate = 0.001;
    int train_steps = 500;
    uint64_t seed = 1;

    Suppression suppression = Suppression::kSoftNms;
    double nms_threshold = 0.5;
    double soft_nms_sigma = 0.5;
    double soft_nms_floor = 1e-3;
    double peak_ratio = 0.5;

    /// Resolves a parsed file (or empty file) against the defaults above.
    static RunConfig from_file(const KeyValueFile& kv);

    /// Every resolved key, for embedding in reports.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

}  // namespace aei::config
