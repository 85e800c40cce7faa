// Command-line front end: synth | train | infer | eval | ablate.
// Exit codes: 0 ok, 1 usage, 2 data error, 3 runtime error.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aei/commands.hpp"
#include "aei/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    int seed = -1;
    std::string suppression;
    std::string an_list;
    std::string tiou_list;
};

aei::config::RunConfig resolve_config(const CommonArgs& args) {
    aei::config::KeyValueFile kv;
    if (!args.config_path.empty()) kv = aei::config::KeyValueFile::parse_file(args.config_path);
    if (args.seed >= 0) kv.set("train.seed", std::to_string(args.seed));
    if (!args.suppression.empty()) kv.set("suppress.method", args.suppression);
    if (!args.an_list.empty()) kv.set("eval.an_list", args.an_list);
    if (!args.tiou_list.empty()) kv.set("eval.tiou_grid", args.tiou_list);
    return aei::config::RunConfig::from_file(kv);
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key = value config file");
    cmd->add_option("--seed", args.seed, "overrides train.seed");
    cmd->add_option("--suppression", args.suppression, "nms or soft-nms")
        ->check(CLI::IsMember({"nms", "soft-nms"}));
    cmd->add_option("--an-list", args.an_list, "comma-separated AN values");
    cmd->add_option("--tiou-list", args.tiou_list, "comma-separated tIoU grid");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"actor/environment interaction pipeline for temporal action proposals"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string data_dir, out_path, checkpoint, proposals, annotations;

    auto* synth = app.add_subcommand("synth", "generate a synthetic train/val dataset");
    add_common(synth, args);
    synth->add_option("--out", out_path, "output dataset directory")->required();

    auto* train = app.add_subcommand("train", "train a model and save a checkpoint");
    add_common(train, args);
    train->add_option("--data-dir", data_dir, "dataset directory (annotations.tsv + features/)")
        ->required();
    train->add_option("--out", out_path, "output checkpoint path")->required();

    auto* infer = app.add_subcommand("infer", "run inference and write proposals");
    add_common(infer, args);
    infer->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
    infer->add_option("--data-dir", data_dir, "dataset directory")->required();
    infer->add_option("--out", out_path, "output proposal file")->required();

    auto* evalc = app.add_subcommand("eval", "score proposals against annotations");
    add_common(evalc, args);
    evalc->add_option("--proposals", proposals, "proposal file")->required();
    evalc->add_option("--annotations", annotations, "annotation file")->required();
    evalc->add_option("--out", out_path, "output report path")->required();

    auto* ablate = app.add_subcommand("ablate", "compare spectator/AAM configurations");
    add_common(ablate, args);
    ablate->add_option("--data-dir", data_dir, "dataset directory with train/ and val/")
        ->required();
    ablate->add_option("--out", out_path, "output comparison table")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = resolve_config(args);
        if (synth->parsed()) aei::cli::cmd_synth(cfg, out_path);
        if (train->parsed()) aei::cli::cmd_train(cfg, data_dir, out_path);
        if (infer->parsed()) aei::cli::cmd_infer(cfg, checkpoint, data_dir, out_path);
        if (evalc->parsed()) aei::cli::cmd_eval(cfg, proposals, annotations, out_path);
        if (ablate->parsed()) aei::cli::cmd_ablate(cfg, data_dir, out_path);
    } catch (const aei::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
