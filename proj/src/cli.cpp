#include "cograph/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "cograph/errors.hpp"
#include "cograph/pipeline.hpp"

namespace cograph {

namespace {

// Flag values collected per subcommand; unset optionals leave the config
// file's values (or the built-in defaults) in force.
struct Args {
  std::string config;
  std::string out;
  std::optional<std::int64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::int64_t> C, K, L, episodes;
  std::optional<std::string> strategy;
};

void add_common(CLI::App* cmd, Args& args) {
  cmd->add_option("--config", args.config, "key=value config file");
  cmd->add_option("--out", args.out, "run directory")->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
}

void add_mode(CLI::App* cmd, Args& args) {
  cmd->add_option("--mode", args.mode,
                  "pre-training ablation: full, no_gscl, no_gecl or none");
}

void add_episode_shape(CLI::App* cmd, Args& args) {
  cmd->add_option("--C", args.C, "classes per episode");
  cmd->add_option("--K", args.K, "support shots per class");
  cmd->add_option("--L", args.L, "query cap per class");
  cmd->add_option("--strategy", args.strategy,
                  "episode class sampling: random or on_top");
}

KvConfig build_config(const Args& args) {
  KvConfig cfg = args.config.empty() ? KvConfig()
                                     : KvConfig::parse_file(args.config);
  if (args.seed) cfg.set("seed", std::to_string(*args.seed));
  if (args.mode) cfg.set("mode", *args.mode);
  if (args.C) cfg.set("C", std::to_string(*args.C));
  if (args.K) cfg.set("K", std::to_string(*args.K));
  if (args.L) cfg.set("L", std::to_string(*args.L));
  if (args.episodes) cfg.set("eval_episodes", std::to_string(*args.episodes));
  if (args.strategy) cfg.set("strategy", *args.strategy);
  return cfg;
}

RunPaths run_paths(const Args& args) { return RunPaths{args.out}; }

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "cograph: heterogeneous word/entity graphs, contrastive pre-training "
      "and episodic few-shot document classification"};
  app.require_subcommand(1);

  Args args;

  CLI::App* synth =
      app.add_subcommand("synth", "generate a synthetic labeled corpus");
  add_common(synth, args);

  CLI::App* build = app.add_subcommand(
      "build-graphs", "build one word/entity graph per document");
  add_common(build, args);

  CLI::App* pretrain = app.add_subcommand(
      "pretrain", "contrastive pre-training over graphs and patient history");
  add_common(pretrain, args);
  add_mode(pretrain, args);

  CLI::App* train = app.add_subcommand(
      "train", "episodic few-shot training on the frequent classes");
  add_common(train, args);
  add_mode(train, args);
  add_episode_shape(train, args);

  CLI::App* eval = app.add_subcommand(
      "eval", "episodic evaluation on the rare classes");
  add_common(eval, args);
  add_episode_shape(eval, args);
  eval->add_option("--episodes", args.episodes, "number of test episodes");

  CLI::App* report = app.add_subcommand(
      "report", "tabulate finished evaluations and write the sweep CSV");
  add_common(report, args);

  CLI::App* exportemb = app.add_subcommand(
      "export-embeddings", "write test-class graph embeddings as TSV");
  add_common(exportemb, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    KvConfig cfg = build_config(args);
    RunPaths run = run_paths(args);

    if (synth->parsed()) {
      stage_synth(cfg, run);
      std::cout << "synth: wrote " << run.corpus() << " and " << run.gazetteer()
                << "\n";
    } else if (build->parsed()) {
      stage_build_graphs(cfg, run);
      std::cout << "build-graphs: wrote " << run.vocab() << " and "
                << run.graphs_dir() << "/\n";
    } else if (pretrain->parsed()) {
      PretrainSummary s = stage_pretrain(cfg, run);
      if (!s.warning.empty()) std::cerr << "warning: " << s.warning << "\n";
      if (s.trained) {
        char line[128];
        std::snprintf(line, sizeof line,
                      "pretrain: %zu epochs, final L_total=%.6f\n",
                      s.losses.size(),
                      s.losses.empty() ? 0.0 : s.losses.back().l_total);
        std::cout << line << "pretrain: wrote " << run.pretrain_checkpoint()
                  << "\n";
      } else {
        std::cout << "pretrain: skipped (mode none)\n";
      }
    } else if (train->parsed()) {
      TrainSummary s = stage_train(cfg, run);
      char line[128];
      std::snprintf(line, sizeof line,
                    "train: best val acc %.4f at epoch %zu/%zu\n",
                    s.best_val_acc, s.best_epoch, s.epochs);
      std::cout << line << "train: wrote " << run.fewshot_checkpoint() << "\n";
    } else if (eval->parsed()) {
      EvalSummary s = stage_eval(cfg, run);
      char line[160];
      std::snprintf(line, sizeof line,
                    "eval: C=%zu K=%zu episodes=%zu acc=%.4f (±%.4f) "
                    "macro_f1=%.4f\n",
                    s.C, s.K, s.n_episodes, s.mean.acc, s.stderr_.acc,
                    s.mean.f1);
      std::cout << line;
    } else if (report->parsed()) {
      stage_report(run, std::cout);
      std::cout << "report: wrote " << run.report_txt() << " and "
                << run.ksweep_csv() << "\n";
    } else if (exportemb->parsed()) {
      stage_export_embeddings(cfg, run);
      std::cout << "export-embeddings: wrote " << run.embeddings_tsv() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cograph
