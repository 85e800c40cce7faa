#pragma once

#include <string>
#include <vector>

#include "aei/bmm.hpp"
#include "aei/config.hpp"
#include "aei/dataio.hpp"
#include "aei/pvr.hpp"

namespace aei::cli {

using config::RunConfig;

/// PVR + BMM parameter handles over one store.
struct Model {
    pvr::PvrParams pvr;
    bmm::BmmParams bmm;
};

Model make_model(nn::ParamStore& store, const model::ModelConfig& cfg, std::mt19937& rng);

/// Reads annotations.tsv plus features/<video_id>.aeif from a dataset
/// directory; records and features share index order (sorted by video_id).
data::Dataset load_dataset(const std::string& data_dir, const RunConfig& cfg);

/// Full-video training steps (one video per step, cycling) with Adam.
/// Returns the per-step losses.
std::vector<nn::Real> train_model(const RunConfig& cfg, const data::Dataset& dataset,
                                  nn::ParamStore& store, const Model& model);

/// Boundary selection, pairing and suppression over every video; output is
/// ordered by video_id, then descending score.
std::vector<data::ProposalRecord> infer_proposals(const RunConfig& cfg,
                                                  const data::Dataset& dataset,
                                                  nn::ParamStore& store, const Model& model);

// -- file-level commands (the CLI surface) --------------------------------
void cmd_synth(const RunConfig& cfg, const std::string& out_dir);
void cmd_train(const RunConfig& cfg, const std::string& data_dir,
               const std::string& out_checkpoint);
void cmd_infer(const RunConfig& cfg, const std::string& checkpoint, const std::string& data_dir,
               const std::string& out_proposals);
void cmd_eval(const RunConfig& cfg, const std::string& proposals_path,
              const std::string& annotations_path, const std::string& out_report);
/// Trains and scores the spectator/AAM ablation variants on
/// data_dir/{train,val}; best-of-three-seeds AR@10 per variant.
void cmd_ablate(const RunConfig& cfg, const std::string& data_dir,
                const std::string& out_report);

}  // namespace aei::cli
