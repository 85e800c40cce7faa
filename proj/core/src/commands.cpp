#include "aei/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "aei/metrics.hpp"
#include "aei/postproc.hpp"

namespace aei::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_config_echo(std::ostream& os, const RunConfig& cfg) {
    for (const auto& [k, v] : cfg.echo()) os << "# config " << k << " = " << v << "\n";
}

model::ModelConfig resolve_model_config(const RunConfig& cfg, const data::Dataset& dataset) {
    if (dataset.features.empty()) throw DataError("dataset has no feature files");
    model::ModelConfig mc = cfg.model;
    mc.env_dim = dataset.features.front().env_dim;
    mc.actor_dim = dataset.features.front().actor_dim;
    for (const auto& f : dataset.features)
        if (f.env_dim != mc.env_dim || f.actor_dim != mc.actor_dim)
            throw DataError("dataset mixes feature dimensions (" + f.video_id + ")");
    return mc;
}

void write_dataset(const std::string& dir, const data::Dataset& ds) {
    fs::create_directories(dir + "/features");
    data::write_annotations(dir + "/annotations.tsv", ds.records);
    for (const auto& f : ds.features) write_features(dir + "/features/" + f.video_id + ".aeif", f);
}

}  // namespace

Model make_model(nn::ParamStore& store, const model::ModelConfig& cfg, std::mt19937& rng) {
    Model m;
    m.pvr = pvr::make_pvr_params(store, cfg, rng);
    m.bmm = bmm::make_bmm_params(store, cfg, rng);
    return m;
}

data::Dataset load_dataset(const std::string& data_dir, const RunConfig& cfg) {
    (void)cfg;
    data::Dataset ds;
    ds.records = data::read_annotations(data_dir + "/annotations.tsv");
    std::sort(ds.records.begin(), ds.records.end(),
              [](const data::VideoRecord& a, const data::VideoRecord& b) {
                  return a.video_id < b.video_id;
              });
    for (const auto& r : ds.records)
        ds.features.push_back(data::read_features(data_dir + "/features/" + r.video_id + ".aeif"));
    return ds;
}

std::vector<nn::Real> train_model(const RunConfig& cfg, const data::Dataset& dataset,
                                  nn::ParamStore& store, const Model& model) {
    if (dataset.records.empty()) throw DataError("train: empty dataset");
    const model::ModelConfig mc = resolve_model_config(cfg, dataset);
    std::vector<nn::Real> losses;
    losses.reserve(static_cast<size_t>(cfg.train_steps));
    for (int step = 0; step < cfg.train_steps; ++step) {
        const size_t vi = static_cast<size_t>(step) % dataset.records.size();
        const auto& record = dataset.records[vi];
        const auto& feats = dataset.features[vi];
        nn::Graph g;
        nn::NodeId repr = pvr::represent_video(g, feats, model.pvr, mc);
        bmm::ForwardResult fwd = bmm::forward(g, repr, model.bmm, mc);
        const auto labels =
            data::generate_labels(record, fwd.T, feats.frames_per_snippet, fwd.D,
                                  cfg.boundary_ratio, cfg.actionness_iou);
        nn::NodeId loss = bmm::loss_aei(g, fwd, labels, mc.loss_lambda);
        losses.push_back(g.value(loss)[0]);
        store.zero_grad();
        g.backward(loss);
        store.adam_step(cfg.learning_rate);
    }
    return losses;
}

std::vector<data::ProposalRecord> infer_proposals(const RunConfig& cfg,
                                                  const data::Dataset& dataset,
                                                  nn::ParamStore& store, const Model& model) {
    (void)store;
    const model::ModelConfig mc = resolve_model_config(cfg, dataset);
    std::vector<data::ProposalRecord> all;
    for (size_t vi = 0; vi < dataset.records.size(); ++vi) {
        const auto& feats = dataset.features[vi];
        nn::Graph g;
        nn::NodeId repr = pvr::represent_video(g, feats, model.pvr, mc);
        bmm::ForwardResult fwd = bmm::forward(g, repr, model.bmm, mc);
        bmm::BoundaryMaps maps = bmm::extract_maps(g, fwd);
        const auto starts = post::select_boundaries(maps.start_prob, cfg.peak_ratio);
        const auto ends = post::select_boundaries(maps.end_prob, cfg.peak_ratio);
        auto proposals = post::pair_and_score(starts, ends, maps, feats.frames_per_snippet,
                                              dataset.records[vi].frame_rate, feats.video_id);
        proposals = cfg.suppression == config::Suppression::kNms
                        ? post::nms(std::move(proposals), cfg.nms_threshold)
                        : post::soft_nms(std::move(proposals), cfg.soft_nms_sigma,
                                         cfg.soft_nms_floor);
        all.insert(all.end(), proposals.begin(), proposals.end());
    }
    return all;
}

void cmd_synth(const RunConfig& cfg, const std::string& out_dir) {
    data::SynthParams train_params = cfg.synth;
    data::SynthParams val_params = cfg.synth;
    val_params.seed = cfg.synth.seed + 1000003;  // disjoint stream for the validation split
    val_params.num_videos = std::max(1, cfg.synth.num_videos / 4);
    write_dataset(out_dir + "/train", data::synth_dataset(train_params));
    write_dataset(out_dir + "/val", data::synth_dataset(val_params));
}

void cmd_train(const RunConfig& cfg, const std::string& data_dir,
               const std::string& out_checkpoint) {
    const data::Dataset dataset = load_dataset(data_dir, cfg);
    const model::ModelConfig mc = resolve_model_config(cfg, dataset);
    std::mt19937 rng(static_cast<uint32_t>(cfg.seed));
    nn::ParamStore store;
    const Model model = make_model(store, mc, rng);
    const auto losses = train_model(cfg, dataset, store, model);
    store.save(out_checkpoint);
    std::ofstream log(out_checkpoint + ".loss.csv");
    if (!log) throw DataError("cmd_train: cannot open loss log for " + out_checkpoint);
    log << "step,loss\n";
    for (size_t i = 0; i < losses.size(); ++i) log << i + 1 << "," << fmt6(losses[i]) << "\n";
}

void cmd_infer(const RunConfig& cfg, const std::string& checkpoint, const std::string& data_dir,
               const std::string& out_proposals) {
    const data::Dataset dataset = load_dataset(data_dir, cfg);
    const model::ModelConfig mc = resolve_model_config(cfg, dataset);
    std::mt19937 rng(static_cast<uint32_t>(cfg.seed));
    nn::ParamStore store;
    const Model model = make_model(store, mc, rng);
    store.load(checkpoint);
    data::write_proposals(out_proposals, infer_proposals(cfg, dataset, store, model));
}

void cmd_eval(const RunConfig& cfg, const std::string& proposals_path,
              const std::string& annotations_path, const std::string& out_report) {
    const auto proposals = metrics::group_proposals(data::read_proposals(proposals_path));
    const auto records = data::read_annotations(annotations_path);
    const auto gt = metrics::group_ground_truth(records);

    std::ofstream os(out_report);
    if (!os) throw DataError("cmd_eval: cannot open " + out_report);
    write_config_echo(os, cfg);
    for (int an : cfg.eval.an_values)
        os << "AR@AN\tAN=" << an << "\t"
           << fmt6(metrics::ar_at_an(proposals, gt, an, cfg.eval.tiou_grid,
                                     cfg.eval.corpus_average))
           << "\n";
    const auto curve =
        metrics::ar_curve(proposals, gt, cfg.eval.max_an, cfg.eval.tiou_grid,
                          cfg.eval.corpus_average);
    os << "AUC\tmax_AN=" << cfg.eval.max_an << "\t" << fmt6(metrics::auc_from_curve(curve)) << "\n";

    bool labeled = false;
    for (const auto& [vid, list] : proposals)
        for (const auto& p : list) labeled = labeled || !p.label.empty();
    if (labeled) {
        double sum = 0.0;
        for (double t : cfg.eval.map_grid) {
            const double v = metrics::map_at_tiou(proposals, gt, t);
            sum += v;
            os << "mAP\ttIoU=" << t << "\t" << fmt6(v) << "\n";
            for (const auto& [cls, ap] : metrics::ap_per_class(proposals, gt, t))
                os << "AP\ttIoU=" << t << ",class=" << cls << "\t" << fmt6(ap) << "\n";
        }
        os << "mAP\tmean\t" << fmt6(sum / static_cast<double>(cfg.eval.map_grid.size())) << "\n";
    }

    std::ofstream curve_os(out_report + ".ar_curve.csv");
    if (!curve_os) throw DataError("cmd_eval: cannot open AR curve CSV for " + out_report);
    curve_os << "AN,AR\n";
    for (size_t i = 0; i < curve.size(); ++i) curve_os << i + 1 << "," << fmt6(curve[i]) << "\n";
}

void cmd_ablate(const RunConfig& cfg, const std::string& data_dir,
                const std::string& out_report) {
    const data::Dataset train_set = load_dataset(data_dir + "/train", cfg);
    const data::Dataset val_set = load_dataset(data_dir + "/val", cfg);
    const auto gt = metrics::group_ground_truth(val_set.records);

    struct Variant {
        const char* name;
        void (*apply)(model::ModelConfig&);
    };
    const Variant variants[] = {
        {"full", [](model::ModelConfig&) {}},
        {"environment_only", [](model::ModelConfig& m) { m.environment_only = true; }},
        {"actors_only", [](model::ModelConfig& m) { m.actors_only = true; }},
        {"no_interaction", [](model::ModelConfig& m) { m.no_interaction = true; }},
        {"no_selection", [](model::ModelConfig& m) { m.no_selection = true; }},
        {"no_fusion", [](model::ModelConfig& m) { m.no_fusion = true; }},
    };

    std::ofstream os(out_report);
    if (!os) throw DataError("cmd_ablate: cannot open " + out_report);
    write_config_echo(os, cfg);
    os << "variant\tseed\tAR@10\n";
    for (const auto& variant : variants) {
        double best = 0.0;
        for (uint64_t s = 0; s < 3; ++s) {
            RunConfig run = cfg;
            run.seed = cfg.seed + s;
            variant.apply(run.model);
            const model::ModelConfig mc = resolve_model_config(run, train_set);
            std::mt19937 rng(static_cast<uint32_t>(run.seed));
            nn::ParamStore store;
            const Model model = make_model(store, mc, rng);
            RunConfig train_cfg = run;
            train_cfg.model = mc;
            train_model(train_cfg, train_set, store, model);
            const auto proposals =
                metrics::group_proposals(infer_proposals(train_cfg, val_set, store, model));
            const double ar = metrics::ar_at_an(proposals, gt, 10, run.eval.tiou_grid,
                                                run.eval.corpus_average);
            os << variant.name << "\t" << run.seed << "\t" << fmt6(ar) << "\n";
            best = std::max(best, ar);
        }
        os << variant.name << "\tbest\t" << fmt6(best) << "\n";
    }
}

}  // namespace aei::cli
