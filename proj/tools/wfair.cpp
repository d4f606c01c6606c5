// wfair: prepare data, train, post-process, evaluate, sweep and report.

#include <iostream>

#include "CLI11.hpp"
#include "wfair/bench.hpp"
#include "wfair/error.hpp"

namespace bench = wfair::bench;

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein-1 fair classification benchmarks"};
  app.require_subcommand(1);

  std::string out = "wfair_work";
  std::string dataset;
  std::string data_dir;
  std::string config;
  std::uint64_t seed = 0;
  bool no_verify = false;

  const auto common = [&](CLI::App* cmd, bool need_dataset) {
    cmd->add_option("--out", out, "workspace root")->capture_default_str();
    auto* d = cmd->add_option("--dataset", dataset, "adult, german, bank, crime or synthetic");
    if (need_dataset) d->required();
  };

  auto* prepare = app.add_subcommand("prepare", "encode raw files into train/test snapshots");
  common(prepare, true);
  prepare->add_option("--data-dir", data_dir, "raw data directory (default: $WFAIR_DATA_DIR, else ./data)");
  prepare->add_option("--seed", seed, "split seed")->capture_default_str();
  prepare->add_flag("--no-verify", no_verify, "skip SHA-256 checks of known raw files");

  auto* train = app.add_subcommand("train", "fit the penalized model on a prepared snapshot");
  common(train, true);
  train->add_option("--config", config, "key = value config file (defaults otherwise)");
  std::optional<std::uint64_t> train_seed;
  train->add_option("--seed", train_seed, "override the config seed");
  std::string run;
  train->add_option("--run", run, "run name (default derived from the config)");

  auto* post = app.add_subcommand("postprocess", "quantile-match model beliefs onto a common target");
  common(post, true);
  bench::PostprocessOptions popt;
  std::string target = "barycenter";
  std::string model;
  post->add_option("--model", model, "model file or run name")->required();
  post->add_option("--target", target, "barycenter or pooled")->capture_default_str();
  post->add_option("--bins", popt.bins, "quantile bins")->capture_default_str()->check(CLI::PositiveNumber);
  post->add_option("--resolution", popt.resolution, "barycenter atoms")->capture_default_str()->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("evaluate", "compute the metrics row for a model or beliefs file");
  common(eval, true);
  bench::EvaluateOptions eopt;
  std::string beliefs;
  auto* eval_model = eval->add_option("--model", model, "model file or run name");
  eval->add_option("--beliefs", beliefs, "beliefs file from postprocess")->excludes(eval_model);
  eval->add_option("--split", eopt.split, "train or test")->capture_default_str()->check(CLI::IsMember({"train", "test"}));
  bool no_append = false;
  eval->add_flag("--no-append", no_append, "do not write to the results store");

  auto* sweep = app.add_subcommand("sweep", "train every configuration of a grid");
  common(sweep, true);
  bench::SweepOptions sopt;
  std::string grid;
  sweep->add_option("--grid", grid, "grid file (built-in default grid otherwise)");
  sweep->add_option("--config", grid, "alias of --grid");
  sweep->add_option("--data-dir", data_dir, "raw data directory");
  sweep->add_option("--seed", sopt.seeds, "seeds to run, replacing the grid's list")->delimiter(',');
  sweep->add_option("--jobs", sopt.jobs, "concurrent runs")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_flag("--no-verify", no_verify, "skip SHA-256 checks of known raw files");

  auto* report = app.add_subcommand("report", "write tables and trade-off curves from the results store");
  common(report, false);
  std::optional<double> budget;
  report->add_option("--err-budget", budget, "only select configs with mean Err-.5 within this bound");

  CLI11_PARSE(app, argc, argv);
  const bench::Workspace ws{out};

  try {
    if (*prepare) {
      bench::cmd_prepare(ws, {dataset, wfair::resolve_data_dir(data_dir), seed, !no_verify}, std::cout);
    } else if (*train) {
      bench::cmd_train(ws, {dataset, config, train_seed, run}, std::cout);
    } else if (*post) {
      popt.dataset = dataset;
      popt.model = model;
      popt.target = wfair::post_target_from_string(target);
      bench::cmd_postprocess(ws, popt, std::cout);
    } else if (*eval) {
      eopt.dataset = dataset;
      eopt.model = model;
      eopt.beliefs = beliefs;
      eopt.append = !no_append;
      bench::cmd_evaluate(ws, eopt, std::cerr);
    } else if (*sweep) {
      sopt.dataset = dataset;
      sopt.grid = grid;
      sopt.data_dir = wfair::resolve_data_dir(data_dir);
      sopt.verify_checksums = !no_verify;
      bench::cmd_sweep(ws, sopt, std::cout);
    } else if (*report) {
      bench::cmd_report(ws, {budget}, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "wfair: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
