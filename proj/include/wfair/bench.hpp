#pragma once

// File formats and commands behind the `wfair` executable.
//
// Everything lives under one workspace root (the --out directory):
//
//   <root>/<dataset>/train.csv, test.csv      encoded snapshots
//   <root>/<dataset>/manifest.txt             PipelineReport::describe() + seed
//   <root>/<dataset>/models/<run>.model       parameters + config
//   <root>/<dataset>/models/<run>.trajectory.csv
//   <root>/<dataset>/beliefs/<run>-<target>.csv
//   <root>/<dataset>/sweep.csv                every sweep run, incl. failures
//   <root>/results.csv, results.manifest      append-only results store
//   <root>/report/...                         tables and curves
//
// docs/FORMATS.md shows each file byte for byte.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wfair/data_pipeline.hpp"
#include "wfair/fairness_metrics.hpp"
#include "wfair/logistic_model.hpp"
#include "wfair/penalized_trainer.hpp"
#include "wfair/post_processor.hpp"

namespace wfair::bench {

namespace fs = std::filesystem;

// ---- key = value text ------------------------------------------------------

// Lines of `key = value`; '#' starts a comment; blank lines ignored.
// Duplicate keys are an error.
std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& source);

// Every TrainConfig field may appear; unknown keys are an error, absent keys
// keep their defaults.
TrainConfig parse_config(const std::string& text, const std::string& source = "config");
TrainConfig load_config(const fs::path& path);
std::string format_config(const TrainConfig& cfg);

// Config identity without the seed, so runs differing only by seed aggregate.
// With beta = 0 only the mode matters.
std::string config_key(const TrainConfig& cfg);
std::string hash_key(const std::string& key);
std::string config_hash(const TrainConfig& cfg);

// Comma-separated value lists per TrainConfig field, plus sweep options.
struct SweepGrid {
  std::vector<double> alpha = {0.0, 0.5};
  std::vector<double> beta = {1e-2, 3e-2, 1e-1, 3e-1, 1, 3, 10, 30, 100};
  std::vector<double> eta = {1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<std::size_t> steps = {80000};
  std::vector<std::size_t> refresh = {0};
  std::vector<std::size_t> resolution = {100};
  std::vector<FeatureMode> mode = {FeatureMode::full};
  std::vector<std::uint64_t> seed = {0};
  std::size_t log_every = 100;
  std::optional<double> err_budget;
  std::size_t bins = 100;

  // Cartesian product in field order, seed varying fastest.
  std::vector<TrainConfig> expand() const;
};

SweepGrid parse_grid(const std::string& text, const std::string& source = "grid");
SweepGrid load_grid(const fs::path& path);

// ---- model and trajectory files --------------------------------------------

struct ModelFile {
  std::string dataset;
  std::size_t d = 0;
  std::size_t k = 0;
  TrainConfig config;
  ModelParams params;
};

void save_model(const fs::path& path, const ModelFile& model);
ModelFile load_model(const fs::path& path);

void write_trajectory(const fs::path& path, const std::vector<TrajectoryPoint>& points);
std::vector<TrajectoryPoint> read_trajectory(const fs::path& path);

// ---- beliefs files ----------------------------------------------------------

struct BeliefRow {
  std::string split;
  std::size_t row = 0;
  int group = 0;
  int y = 0;
  double original = 0.0;
  double adjusted = 0.0;
};

struct BeliefsFile {
  std::string dataset;
  std::string model;
  // Hyperparameters and split seed of the model the beliefs came from.
  std::string model_params;
  std::uint64_t seed = 0;
  std::string target;
  std::size_t bins = 0;
  std::vector<BeliefRow> rows;
};

void write_beliefs(const fs::path& path, const BeliefsFile& file);
BeliefsFile read_beliefs(const fs::path& path);

// ---- results store ----------------------------------------------------------

struct MetricsRow {
  std::string dataset;
  std::string split;
  std::string method;
  std::string run;
  std::string config_hash;
  std::string params;  // "key=value;..." hyperparameters without the seed
  std::uint64_t seed = 0;
  MetricSummary metrics;
};

inline constexpr const char* kUnconstrained = "Unconstrained";
inline constexpr const char* kPenalty = "Wass-1 Penalty";
inline constexpr const char* kPostProcess = "Wass-1 Post-Process";
inline constexpr const char* kPostProcessPooled = "Wass-1 Post-Process pooled";

// Metrics must be finite, errors in [0,1], disparities nonnegative.
void validate_row(const MetricsRow& row);

std::string results_header();
std::string format_row(const MetricsRow& row);
MetricsRow parse_row(const std::string& line);

// Appends under an exclusive lock on <store>.lock; also records each
// config hash in the sibling .manifest file once.
void append_results(const fs::path& store, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_results(const fs::path& store);

// ---- commands ---------------------------------------------------------------

struct Workspace {
  fs::path root = "wfair_work";

  fs::path dataset_dir(const std::string& dataset) const { return root / dataset; }
  fs::path models_dir(const std::string& dataset) const { return root / dataset / "models"; }
  fs::path beliefs_dir(const std::string& dataset) const { return root / dataset / "beliefs"; }
  fs::path results() const { return root / "results.csv"; }
  fs::path report_dir() const { return root / "report"; }
};

struct PreparedSplit {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
};

// Row-wise metrics of `beliefs` against `data`.
MetricSummary evaluate_beliefs(std::span<const double> beliefs, const Dataset& data);

// `synthetic` is built in: five groups, 1500 train / 500 test rows.
PreparedSplit synthetic_split(std::uint64_t seed);

struct PrepareOptions {
  std::string dataset;
  fs::path data_dir;
  std::uint64_t seed = 0;
  bool verify_checksums = true;
};
// Returns the manifest path.
fs::path cmd_prepare(const Workspace& ws, const PrepareOptions& opt, std::ostream& log);

PreparedSplit load_prepared(const Workspace& ws, const std::string& dataset);

struct TrainOutcome {
  std::string run;
  fs::path model;
  fs::path trajectory;
  BaselineFit baseline;
  TrainResult result;
};
// With beta = 0 the model is the unconstrained fit itself.
TrainOutcome train_run(const PreparedSplit& data, const std::string& dataset, const TrainConfig& cfg,
                       const Workspace& ws, const std::string& run, const BaselineFit* baseline = nullptr);

struct TrainOptions {
  std::string dataset;
  fs::path config;
  std::optional<std::uint64_t> seed;
  std::string run;
};
TrainOutcome cmd_train(const Workspace& ws, const TrainOptions& opt, std::ostream& log);

struct PostprocessOptions {
  std::string dataset;
  fs::path model;
  PostTarget target = PostTarget::barycenter;
  std::size_t bins = 100;
  std::size_t resolution = 100;
};
// Fits the quantile maps on training beliefs and applies them to both splits.
BeliefsFile postprocess(const PreparedSplit& data, const std::string& dataset, const ModelParams& params,
                        const std::string& model_name, const PostprocessOptions& opt);
fs::path cmd_postprocess(const Workspace& ws, const PostprocessOptions& opt, std::ostream& log);

struct EvaluateOptions {
  std::string dataset;
  fs::path model;
  fs::path beliefs;
  std::string split = "test";
  bool append = true;
};
MetricsRow cmd_evaluate(const Workspace& ws, const EvaluateOptions& opt, std::ostream& log);

struct SweepOptions {
  std::string dataset;
  fs::path grid;
  fs::path data_dir;
  std::size_t jobs = 1;
  bool verify_checksums = true;
  std::vector<std::uint64_t> seeds;  // replaces the grid's seed list when not empty
};

struct SweepRun {
  TrainConfig config;
  std::string run;
  std::string status = "ok";
  MetricSummary test;
  MetricSummary train;
};

struct SweepOutcome {
  std::vector<SweepRun> runs;
  std::vector<MetricsRow> rows;
  // Config hash picked by lowest mean test SPDD (within the Err-.5 budget).
  std::optional<std::string> selected;
};
SweepOutcome run_sweep(const Workspace& ws, const std::string& dataset, const SweepGrid& grid,
                       const fs::path& data_dir, std::size_t jobs, bool verify_checksums, std::ostream& log);
SweepOutcome cmd_sweep(const Workspace& ws, const SweepOptions& opt, std::ostream& log);

// Aggregate over seeds of one (dataset, split, method, config) cell.
struct TableRow {
  std::string method;
  std::string config_hash;
  std::string params;
  std::size_t seeds = 0;
  std::vector<double> mean;  // err_05, err_exp, dd_05, sdd, spdd, spdd_unordered, pseudo_spdd
  std::vector<double> sd;
};

// Every aggregated cell on the test split, per dataset.
std::map<std::string, std::vector<TableRow>> aggregate(const std::vector<MetricsRow>& rows,
                                                       const std::string& split = "test");
// Per method, the cell with the lowest mean SPDD whose mean Err-.5 is within budget.
std::vector<TableRow> select_best(const std::vector<TableRow>& cells, std::optional<double> err_budget);

struct ReportOptions {
  std::optional<double> err_budget;
};
// Returns the files written.
std::vector<fs::path> cmd_report(const Workspace& ws, const ReportOptions& opt, std::ostream& log);

}  // namespace wfair::bench
