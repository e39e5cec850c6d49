// Command-line front end: train, unlearn, attack, verify-bound, report.
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "feduhb/config.hpp"
#include "feduhb/errors.hpp"
#include "feduhb/orchestrator.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string data_dir;
};

feduhb::ExperimentConfig load(const CommonArgs& args) {
  feduhb::ExperimentConfig cfg = feduhb::load_config(args.config_path);
  if (args.seed) {
    cfg.seed = *args.seed;
    cfg.federated.seed = *args.seed;
    cfg.unlearning.seed = *args.seed;
  }
  if (cfg.dataset.kind == "idx" && cfg.dataset.dir.empty()) {
    if (!args.data_dir.empty()) {
      cfg.dataset.dir = args.data_dir;
    } else if (const char* env = std::getenv("FEDUHB_DATA_DIR")) {
      cfg.dataset.dir = env;
    } else {
      throw feduhb::ConfigError(
          "idx dataset needs dataset.dir, --data-dir or FEDUHB_DATA_DIR");
    }
  }
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--threads", args.threads, "worker threads for client updates");
  cmd->add_option("--data-dir", args.data_dir, "directory with IDX files");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated unlearning simulator"};
  app.require_subcommand(1);

  CommonArgs train_args;
  std::string train_out;
  CLI::App* train = app.add_subcommand("train", "run federated training");
  add_common(train, train_args);
  train->add_option("--out", train_out, "output directory")->required();

  CommonArgs unlearn_args;
  std::string unlearn_out, unlearn_method, unlearn_history;
  CLI::App* unlearn = app.add_subcommand("unlearn", "unlearn the target clients");
  add_common(unlearn, unlearn_args);
  unlearn
      ->add_option("--method", unlearn_method,
                   "feduhb | retrain | federaser | fedrecover (default: config)")
      ->default_val("");
  unlearn->add_option("--history", unlearn_history, "training output directory");
  unlearn->add_option("--out", unlearn_out, "output directory")->required();

  CommonArgs attack_args;
  std::string attack_kind, attack_pre, attack_post, attack_out;
  CLI::App* attack = app.add_subcommand("attack", "measure unlearning efficacy");
  add_common(attack, attack_args);
  attack->add_option("--kind", attack_kind, "mia | backdoor")->required();
  attack->add_option("--pre", attack_pre, "pre-unlearning checkpoint")->required();
  attack->add_option("--post", attack_post, "post-unlearning checkpoint")->required();
  attack->add_option("--out", attack_out, "output JSON report")->required();

  CommonArgs verify_args;
  std::string verify_out;
  CLI::App* verify = app.add_subcommand("verify-bound",
                                        "check the divergence bound numerically");
  add_common(verify, verify_args);
  verify->add_option("--out", verify_out, "output CSV")->required();

  std::string report_out;
  std::vector<std::string> report_dirs;
  double report_acc_threshold = 0.85;
  double report_loss_threshold = 1e-6;
  CLI::App* report = app.add_subcommand("report", "merge run directories into tables");
  report->add_option("--out", report_out, "output directory")->required();
  report->add_option("--acc-threshold", report_acc_threshold,
                     "accuracy threshold for rounds.csv");
  report->add_option("--loss-threshold", report_loss_threshold,
                     "loss threshold for rounds.csv");
  report->add_option("dirs", report_dirs, "completed run directories")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      const feduhb::ExperimentConfig cfg = load(train_args);
      feduhb::run_experiment(cfg, {"train"}, train_out, train_args.threads);
    } else if (unlearn->parsed()) {
      feduhb::ExperimentConfig cfg = load(unlearn_args);
      if (!unlearn_method.empty()) cfg.method = unlearn_method;
      const feduhb::ExperimentContext ctx = feduhb::build_context(cfg);
      std::optional<fs::path> history;
      if (!unlearn_history.empty()) history = fs::path(unlearn_history) / "history.bin";
      feduhb::run_unlearn_stage(ctx, cfg.method, history, unlearn_out,
                                unlearn_args.threads);
      const std::vector<std::string> stages{"unlearn"};
      feduhb::write_manifest(cfg, stages, unlearn_out);
    } else if (attack->parsed()) {
      const feduhb::ExperimentConfig cfg = load(attack_args);
      const feduhb::ExperimentContext ctx = feduhb::build_context(cfg);
      feduhb::run_attack_stage(ctx, attack_kind, attack_pre, attack_post, attack_out);
    } else if (verify->parsed()) {
      const feduhb::ExperimentConfig cfg = load(verify_args);
      const feduhb::ExperimentContext ctx = feduhb::build_context(cfg);
      feduhb::run_verify_stage(ctx, verify_out);
    } else if (report->parsed()) {
      std::vector<fs::path> dirs(report_dirs.begin(), report_dirs.end());
      feduhb::emit_report(dirs, report_out, report_acc_threshold, report_loss_threshold);
    }
  } catch (const feduhb::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
