#include "feduhb/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "feduhb/errors.hpp"

namespace feduhb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Dataset take_subset(const Dataset& d, std::span<const std::size_t> indices) {
  Dataset out;
  out.feature_dim = d.feature_dim;
  out.num_classes = d.num_classes;
  out.rows = d.rows;
  out.cols = d.cols;
  out.features.reserve(indices.size() * d.feature_dim);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto x = d.example(i);
    out.features.insert(out.features.end(), x.begin(), x.end());
    out.labels.push_back(d.labels[i]);
  }
  return out;
}

Dataset limited(Dataset d, std::size_t limit) {
  if (limit == 0 || limit >= d.num_examples()) return d;
  d.features.resize(limit * d.feature_dim);
  d.labels.resize(limit);
  return d;
}

std::string unlearn_csv(const UnlearnResult& result) {
  std::string csv = "round,delta,sigma,stopped,test_loss,test_acc\n";
  for (const UnlearnRoundLog& row : result.log) {
    csv += std::to_string(row.round) + "," + fmt_double(row.delta) + "," +
           fmt_double(row.sigma) + "," + (row.stopped ? "1" : "0") + "," +
           fmt_double(row.test_loss) + "," + fmt_double(row.test_accuracy) + "\n";
  }
  return csv;
}

}  // namespace

Evaluator ExperimentContext::train_evaluator() const {
  if (is_image()) {
    const ModelSpec spec = model;
    const Dataset* test_set = &test;
    return [spec, test_set](const ParamVector& w) {
      std::vector<std::size_t> all(test_set->num_examples());
      std::iota(all.begin(), all.end(), std::size_t{0});
      return EvalResult{loss(spec, w, *test_set, all), accuracy(spec, w, *test_set)};
    };
  }
  const QuadraticProblem* p = &problem;
  return [p](const ParamVector& w) {
    return EvalResult{p->global_loss(w), std::nan("")};
  };
}

Evaluator ExperimentContext::unlearn_evaluator() const {
  if (is_image()) return train_evaluator();
  const QuadraticProblem* p = &remaining_problem;
  return [p](const ParamVector& w) {
    return EvalResult{p->global_loss(w), std::nan("")};
  };
}

ParamVector ExperimentContext::initial_model() const {
  return init_params(model, RngStream(cfg.seed, StreamPurpose::kModelInit));
}

ParamVector ExperimentContext::unlearn_initial_model() const {
  return init_params(model, RngStream(cfg.seed, StreamPurpose::kUnlearnInit));
}

ExperimentContext build_context(const ExperimentConfig& cfg) {
  ExperimentContext ctx;
  ctx.cfg = cfg;
  const std::size_t num_clients = cfg.federated.num_clients;

  std::set<std::size_t> targets(cfg.federated.target_clients.begin(),
                                cfg.federated.target_clients.end());

  if (cfg.dataset.kind == "quadratic") {
    ctx.problem = gen_quadratic(num_clients, cfg.dataset.dim, cfg.dataset.mu,
                                cfg.dataset.lipschitz,
                                RngStream(cfg.seed, StreamPurpose::kDataGen));
    ctx.model = ModelSpec{ModelKind::kQuadratic, cfg.dataset.dim, 0, 0};
    for (std::size_t c = 0; c < num_clients; ++c) {
      ctx.access_counters.push_back(std::make_shared<std::atomic<std::uint64_t>>(0));
      ctx.clients.push_back(
          std::make_unique<QuadraticClient>(c, ctx.problem, c, ctx.access_counters[c]));
    }
    std::vector<std::size_t> remaining;
    for (std::size_t c = 0; c < num_clients; ++c) {
      if (!targets.contains(c)) remaining.push_back(c);
    }
    ctx.remaining_ids = remaining;
    ctx.remaining_problem = ctx.problem.restrict(remaining);
  } else {
    if (cfg.dataset.kind == "synthetic_images") {
      auto [train, test] = gen_synthetic_images(cfg.dataset.synthetic, cfg.seed);
      ctx.train = std::move(train);
      ctx.test = std::move(test);
    } else {
      const fs::path dir = cfg.dataset.dir;
      ctx.train = limited(load_idx(dir / "train-images-idx3-ubyte",
                                   dir / "train-labels-idx1-ubyte"),
                          cfg.dataset.limit_train);
      ctx.test = limited(load_idx(dir / "t10k-images-idx3-ubyte",
                                  dir / "t10k-labels-idx1-ubyte"),
                         cfg.dataset.limit_test);
    }
    ctx.partition = partition_iid(ctx.train, num_clients,
                                  RngStream(cfg.seed, StreamPurpose::kPartition));
    if (cfg.backdoor.enabled) {
      for (std::size_t c : cfg.federated.target_clients) {
        const auto poisoned = inject_backdoor(
            ctx.train, ctx.partition.client_shards[c], cfg.backdoor.trigger,
            RngStream(cfg.seed, StreamPurpose::kTrigger, c));
        ctx.poisoned_examples.insert(ctx.poisoned_examples.end(), poisoned.begin(),
                                     poisoned.end());
      }
    }
    ctx.model = cfg.model;
    ctx.model.input_dim = ctx.train.feature_dim;
    ctx.model.num_classes = ctx.train.num_classes;

    for (std::size_t c = 0; c < num_clients; ++c) {
      ctx.access_counters.push_back(std::make_shared<std::atomic<std::uint64_t>>(0));
      ctx.clients.push_back(std::make_unique<ClassifierClient>(
          c, ctx.model, ctx.train, ctx.partition.client_shards[c],
          ctx.access_counters[c]));
    }
    std::vector<std::size_t> target_union;
    for (std::size_t c : cfg.federated.target_clients) {
      target_union.insert(target_union.end(), ctx.partition.client_shards[c].begin(),
                          ctx.partition.client_shards[c].end());
    }
    std::sort(target_union.begin(), target_union.end());
    ctx.target_train = take_subset(ctx.train, target_union);
    for (std::size_t c = 0; c < num_clients; ++c) {
      if (!targets.contains(c)) ctx.remaining_ids.push_back(c);
    }
  }

  for (const auto& client : ctx.clients) ctx.all_clients.push_back(client.get());
  for (std::size_t id : ctx.remaining_ids) {
    ctx.remaining_clients.push_back(ctx.clients[id].get());
  }
  return ctx;
}

void run_train_stage(const ExperimentContext& ctx, const fs::path& out_dir,
                     std::size_t threads) {
  fs::create_directories(out_dir);
  const auto [log, history] = run_training(ctx.cfg.federated, ctx.all_clients,
                                           ctx.initial_model(), ctx.train_evaluator(),
                                           threads);

  std::string metrics = "round,test_loss,test_acc\n";
  std::string timing = "round,wall_ms\n";
  std::vector<ModelRecord> checkpoints;
  ParamVector w = history.empty() ? log.final_model : history.front().global_model_before;
  for (const RoundMetrics& m : log.rounds) {
    metrics += std::to_string(m.round) + "," + fmt_double(m.test_loss) + "," +
               fmt_double(m.test_accuracy) + "\n";
    timing += std::to_string(m.round) + "," + fmt_double(m.wall_ms) + "\n";
  }
  for (const RoundRecord& r : history) {
    checkpoints.push_back(
        {r.round, add_scaled(r.global_model_before, 1.0, r.aggregate_update)});
  }
  write_text(out_dir / "metrics.csv", metrics);
  write_text(out_dir / "timing.csv", timing);
  write_model_records(out_dir / "checkpoints.bin", checkpoints);
  save_history(out_dir / "history.bin", history);
  save_model(out_dir / "pre_model.bin", ctx.cfg.federated.global_rounds, log.final_model);
}

UnlearnResult run_unlearn_stage(const ExperimentContext& ctx, const std::string& method,
                                const std::optional<fs::path>& history_file,
                                const fs::path& out_dir, std::size_t threads) {
  fs::create_directories(out_dir);
  const Evaluator evaluator = ctx.unlearn_evaluator();

  UnlearnResult result;
  if (method == "feduhb" || method == "retrain") {
    const ParamVector init = ctx.unlearn_initial_model();
    result = method == "feduhb"
                 ? run_feduhb(ctx.remaining_clients, init, ctx.cfg.unlearning, evaluator,
                              threads)
                 : run_retrain(ctx.remaining_clients, init, ctx.cfg.unlearning, evaluator,
                               threads);
  } else if (method == "federaser" || method == "fedrecover") {
    if (!history_file) {
      throw ConfigError(method + " needs a training history (--history)");
    }
    const std::vector<RoundRecord> history = load_history(*history_file);
    if (method == "federaser") {
      result = run_federaser(history, ctx.remaining_clients, ctx.cfg.unlearning,
                             evaluator, threads);
    } else {
      result = run_fedrecover_lbfgs(history, ctx.remaining_ids,
                                    ctx.cfg.federated.learning_rate, ctx.cfg.unlearning,
                                    evaluator);
    }
  } else {
    throw ConfigError("unknown unlearning method '" + method + "'");
  }

  write_text(out_dir / ("unlearn_" + method + ".csv"), unlearn_csv(result));
  save_model(out_dir / ("post_model_" + method + ".bin"), result.rounds_used,
             result.final_model);
  return result;
}

void run_attack_stage(const ExperimentContext& ctx, const std::string& kind,
                      const fs::path& pre_model_path, const fs::path& post_model_path,
                      const fs::path& out_json) {
  if (!ctx.is_image()) throw ConfigError("attack metrics need an image dataset");
  const ParamVector pre = load_model(pre_model_path);
  const ParamVector post = load_model(post_model_path);

  json report;
  report["kind"] = kind;
  if (kind == "mia") {
    const ShadowAttackModel attack =
        train_shadow_attack(ctx.model, pre, ctx.target_train, ctx.test,
                            RngStream(ctx.cfg.seed, StreamPurpose::kAttack));
    const MIAReport pre_report = misr(attack, ctx.model, pre, ctx.target_train);
    const MIAReport post_report = misr(attack, ctx.model, post, ctx.target_train);
    report["attack_train_accuracy"] = attack.train_accuracy;
    report["pre"] = {{"misr", pre_report.misr},
                     {"member_classified", pre_report.member_classified},
                     {"total", pre_report.total}};
    report["post"] = {{"misr", post_report.misr},
                      {"member_classified", post_report.member_classified},
                      {"total", post_report.total}};
  } else if (kind == "backdoor") {
    const BackdoorReport pre_report = asr(ctx.model, pre, ctx.test, ctx.cfg.backdoor.trigger);
    const BackdoorReport post_report =
        asr(ctx.model, post, ctx.test, ctx.cfg.backdoor.trigger);
    report["pre"] = {{"asr", pre_report.asr},
                     {"clean_accuracy", pre_report.clean_accuracy},
                     {"eligible", pre_report.eligible},
                     {"hits", pre_report.hits}};
    report["post"] = {{"asr", post_report.asr},
                      {"clean_accuracy", post_report.clean_accuracy},
                      {"eligible", post_report.eligible},
                      {"hits", post_report.hits}};
  } else {
    throw ConfigError("attack kind must be mia or backdoor");
  }
  write_text(out_json, report.dump(2) + "\n");
}

BoundTrajectory run_verify_stage(const ExperimentContext& ctx, const fs::path& out_csv) {
  if (ctx.is_image()) {
    throw ConfigError("verify-bound runs on quadratic problems (report-only elsewhere)");
  }
  const QuadraticProblem& problem = ctx.remaining_problem;
  const double alpha = ctx.cfg.unlearning.alpha;
  const double beta = ctx.cfg.unlearning.beta;

  RngStream init_rng(ctx.cfg.seed, StreamPurpose::kUnlearnInit);
  ParamVector heavy_init(problem.dim());
  for (std::size_t i = 0; i < heavy_init.dim(); ++i) {
    heavy_init[i] = init_rng.uniform(-1.0, 1.0);
  }
  ParamVector retrain_init = heavy_init;
  if (ctx.cfg.verify.distinct_inits) {
    RngStream other(ctx.cfg.seed, StreamPurpose::kUnlearnInit, 1);
    for (std::size_t i = 0; i < retrain_init.dim(); ++i) {
      retrain_init[i] = other.uniform(-1.0, 1.0);
    }
  }
  const BoundTrajectory trace =
      divergence_trace(problem, alpha, beta, ctx.cfg.verify.rounds, heavy_init,
                       retrain_init);

  std::string csv = "t,gap,bound,rho,limit\n";
  for (std::size_t t = 0; t < trace.gap.size(); ++t) {
    csv += std::to_string(t) + "," + fmt_double(trace.gap[t]) + "," +
           fmt_double(trace.bound[t]) + "," + fmt_double(trace.rho) + "," +
           fmt_double(trace.limit) + "\n";
  }
  write_text(out_csv, csv);
  return trace;
}

RunManifest write_manifest(const ExperimentConfig& cfg,
                           std::span<const std::string> stages, const fs::path& out_dir) {
  RunManifest manifest;
  manifest.code_version = kCodeVersion;
  manifest.config_hash = config_hash(cfg);
  manifest.seed = cfg.seed;
  manifest.created_utc = utc_now();
  manifest.stages.assign(stages.begin(), stages.end());

  std::vector<std::string> files{"manifest.json"};
  for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), out_dir).generic_string();
    if (rel != "manifest.json") files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  manifest.files = files;

  json j;
  j["code_version"] = manifest.code_version;
  j["config_hash"] = manifest.config_hash;
  j["seed"] = manifest.seed;
  j["created_utc"] = manifest.created_utc;
  j["stages"] = manifest.stages;
  j["files"] = manifest.files;
  write_text(out_dir / "manifest.json", j.dump(2) + "\n");
  return manifest;
}

RunManifest run_experiment(const ExperimentConfig& cfg, std::vector<std::string> stages,
                           const fs::path& out_dir, std::size_t threads) {
  if (stages.empty()) {
    stages = cfg.dataset.kind == "quadratic"
                 ? std::vector<std::string>{"train", "unlearn", "verify-bound"}
                 : std::vector<std::string>{"train", "unlearn", "attack"};
  }
  for (const std::string& s : stages) {
    if (s != "train" && s != "unlearn" && s != "attack" && s != "verify-bound") {
      throw ConfigError("unknown stage '" + s + "'");
    }
  }
  fs::create_directories(out_dir);
  const ExperimentContext ctx = build_context(cfg);
  write_text(out_dir / "config.json", canonical_text(cfg));

  const auto has = [&](const char* s) {
    return std::find(stages.begin(), stages.end(), s) != stages.end();
  };

  if (has("train")) run_train_stage(ctx, out_dir, threads);
  if (has("unlearn")) {
    std::optional<fs::path> history;
    if (fs::exists(out_dir / "history.bin")) history = out_dir / "history.bin";
    run_unlearn_stage(ctx, cfg.method, history, out_dir, threads);
  }
  if (has("attack")) {
    if (!ctx.is_image()) {
      throw ConfigError("attack stage needs an image dataset");
    }
    const fs::path pre = out_dir / "pre_model.bin";
    const fs::path post = out_dir / ("post_model_" + cfg.method + ".bin");
    run_attack_stage(ctx, "mia", pre, post, out_dir / ("attack_mia_" + cfg.method + ".json"));
    if (cfg.backdoor.enabled) {
      run_attack_stage(ctx, "backdoor", pre, post,
                       out_dir / ("attack_backdoor_" + cfg.method + ".json"));
    }
  }
  if (has("verify-bound")) run_verify_stage(ctx, out_dir / "bound.csv");
  return write_manifest(cfg, stages, out_dir);
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (first) {
      table.header = fields;
      first = false;
    } else {
      table.rows.push_back(fields);
    }
  }
  return table;
}

std::size_t column(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return i;
  }
  throw FormatError("merge error: no column '" + name + "'");
}

}  // namespace

void emit_report(std::span<const fs::path> run_dirs, const fs::path& out_dir,
                 double accuracy_threshold, double loss_threshold) {
  if (run_dirs.empty()) throw ConfigError("report: need at least one run directory");
  fs::create_directories(out_dir);

  std::string curves = "run,method,round,test_loss,test_acc\n";
  std::string rounds = "run,method,criterion,threshold,rounds\n";
  std::string attacks = "method,misr,asr,clean_acc\n";

  for (const fs::path& dir : run_dirs) {
    const std::string run = dir.filename().string();

    std::map<std::string, fs::path> curve_files;
    if (fs::exists(dir / "metrics.csv")) curve_files["train"] = dir / "metrics.csv";
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.starts_with("unlearn_") && name.ends_with(".csv")) {
        curve_files[name.substr(8, name.size() - 12)] = entry.path();
      }
    }

    for (const auto& [method, file] : curve_files) {
      const CsvTable table = read_csv(file);
      const std::size_t round_col = column(table, "round");
      const std::size_t loss_col = column(table, "test_loss");
      const std::size_t acc_col = column(table, "test_acc");
      std::size_t acc_rounds = 0, loss_rounds = 0;
      bool acc_hit = false, loss_hit = false;
      std::size_t executed = 0;
      for (const auto& row : table.rows) {
        curves += run + "," + method + "," + row[round_col] + "," + row[loss_col] + "," +
                  row[acc_col] + "\n";
        ++executed;
        const double acc = std::strtod(row[acc_col].c_str(), nullptr);
        const double l = std::strtod(row[loss_col].c_str(), nullptr);
        if (!acc_hit && acc >= accuracy_threshold) {
          acc_rounds = executed;
          acc_hit = true;
        }
        if (!loss_hit && l <= loss_threshold) {
          loss_rounds = executed;
          loss_hit = true;
        }
      }
      rounds += run + "," + method + ",accuracy," + fmt_double(accuracy_threshold) + "," +
                (acc_hit ? std::to_string(acc_rounds) : "-") + "\n";
      rounds += run + "," + method + ",loss," + fmt_double(loss_threshold) + "," +
                (loss_hit ? std::to_string(loss_rounds) : "-") + "\n";
    }

    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (!name.starts_with("attack_mia_") || !name.ends_with(".json")) continue;
      const std::string method = name.substr(11, name.size() - 16);
      std::ifstream in(entry.path());
      json mia;
      in >> mia;
      double asr_value = std::nan("");
      double clean = std::nan("");
      const fs::path backdoor_path = dir / ("attack_backdoor_" + method + ".json");
      if (fs::exists(backdoor_path)) {
        std::ifstream bd_in(backdoor_path);
        json bd;
        bd_in >> bd;
        asr_value = bd["post"]["asr"].get<double>();
        clean = bd["post"]["clean_accuracy"].get<double>();
      }
      attacks += method + "," + fmt_double(mia["post"]["misr"].get<double>()) + "," +
                 fmt_double(asr_value) + "," + fmt_double(clean) + "\n";
    }
  }

  write_text(out_dir / "report.csv", curves);
  write_text(out_dir / "rounds.csv", rounds);
  write_text(out_dir / "attacks.csv", attacks);
}

}  // namespace feduhb
