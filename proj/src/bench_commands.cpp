#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "wfair/bench.hpp"
#include "wfair/error.hpp"

namespace wfair::bench {

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), "failed writing " + path.string());
}

std::string method_for(const TrainConfig& cfg) {
  std::string m = cfg.beta == 0.0 ? kUnconstrained : kPenalty;
  if (cfg.mode == FeatureMode::blind) m += " (blind)";
  return m;
}

std::string default_run(const TrainConfig& cfg) {
  const std::string prefix = cfg.beta == 0.0 ? "unconstrained-" : "penalty-";
  return prefix + config_hash(cfg).substr(0, 8) + "-s" + std::to_string(cfg.seed);
}

std::string post_key(const std::string& model_params, PostTarget target, std::size_t bins) {
  return "model=" + model_params + ";target=" + to_string(target) + ";bins=" + std::to_string(bins);
}

const Dataset& pick_split(const PreparedSplit& data, const std::string& split) {
  if (split == "train") return data.train;
  if (split == "test") return data.test;
  throw Error("unknown split '" + split + "' (expected train or test)");
}

MetricsRow model_row(const std::string& dataset, const std::string& split, const std::string& run,
                     const TrainConfig& cfg, std::uint64_t seed, const MetricSummary& m) {
  MetricsRow row;
  row.dataset = dataset;
  row.split = split;
  row.method = method_for(cfg);
  row.run = run;
  row.params = config_key(cfg);
  row.config_hash = hash_key(row.params);
  row.seed = seed;
  row.metrics = m;
  return row;
}

MetricsRow beliefs_row(const BeliefsFile& file, const std::string& split, const std::string& run) {
  std::vector<double> adjusted;
  std::vector<int> labels;
  std::vector<int> groups;
  for (const auto& r : file.rows) {
    if (r.split != split) continue;
    adjusted.push_back(r.adjusted);
    labels.push_back(r.y);
    groups.push_back(r.group);
  }
  require(!adjusted.empty(), "beliefs file has no rows for split '" + split + "'");
  const PostTarget target = post_target_from_string(file.target);
  MetricsRow row;
  row.dataset = file.dataset;
  row.split = split;
  row.method = target == PostTarget::pooled ? kPostProcessPooled : kPostProcess;
  row.run = run;
  row.params = post_key(file.model_params, target, file.bins);
  row.config_hash = hash_key(row.params);
  row.seed = file.seed;
  row.metrics = summarize(adjusted, labels, groups);
  return row;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index is handled
// exactly once; fn must not throw.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

Dataset synthetic_population(std::size_t n, std::uint64_t seed) {
  constexpr int kGroups = 5;
  constexpr std::size_t kDim = 6;
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset data;
  data.n = n;
  data.d = kDim;
  data.k = 1;
  for (std::size_t j = 0; j < kDim; ++j) data.feature_names.push_back("f" + std::to_string(j));
  data.attribute_names = {"g"};
  for (std::size_t r = 0; r < n; ++r) {
    const int g = static_cast<int>(r % kGroups);
    double z = 0.8 * (g - 2);
    for (std::size_t j = 0; j < kDim; ++j) {
      const double v = normal(rng) + 0.4 * g;
      data.x.push_back(v);
      z += (j % 2 ? -0.6 : 0.8) * v;
    }
    data.a.push_back(g);
    data.y.push_back(unit(rng) < sigmoid(z) ? 1 : 0);
    data.group_of.push_back(g);
  }
  data.finalize();
  return data;
}

PreparedSplit prepare_split(const std::string& dataset, const fs::path& data_dir, std::uint64_t seed, bool verify) {
  if (dataset == "synthetic") return synthetic_split(seed);
  auto prepared = prepare_dataset(dataset, data_dir, seed, verify);
  return {std::move(prepared.train), std::move(prepared.test), seed};
}

std::uint64_t manifest_seed(const fs::path& manifest) {
  std::ifstream in(manifest);
  require(static_cast<bool>(in), "no prepared snapshot: " + manifest.string() + " is missing (run `wfair prepare`)");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("seed = ", 0) == 0) return std::stoull(line.substr(7));
  }
  throw Error(manifest.string() + ": missing seed");
}

fs::path resolve_model(const Workspace& ws, const std::string& dataset, const fs::path& model) {
  if (fs::exists(model)) return model;
  const fs::path named = ws.models_dir(dataset) / (model.string() + ".model");
  require(fs::exists(named), "model not found: " + model.string());
  return named;
}

std::string run_name(const fs::path& model) {
  std::string stem = model.filename().string();
  if (stem.size() > 6 && stem.ends_with(".model")) stem.resize(stem.size() - 6);
  return stem;
}

constexpr const char* kMetricNames[] = {"err_05", "err_exp", "dd_05", "sdd", "spdd", "spdd_unordered", "pseudo_spdd"};
constexpr const char* kMetricTitles[] = {"Err-.5", "Err-Exp", "DD-.5", "SDD", "SPDD", "SPDD/2", "pseudo-SPDD"};

std::vector<double> metric_values(const MetricSummary& m) {
  return {m.err_05, m.err_exp, m.dd_05, m.sdd, m.spdd, m.spdd_unordered, m.pseudo_spdd};
}

int method_rank(const std::string& method) {
  static const std::vector<std::string> order = {
      kUnconstrained, std::string(kUnconstrained) + " (blind)", kPenalty, std::string(kPenalty) + " (blind)",
      kPostProcess,   kPostProcessPooled};
  const auto it = std::find(order.begin(), order.end(), method);
  return static_cast<int>(it - order.begin());
}

std::string cell(double mean, double sd, std::size_t seeds) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(4) << mean;
  if (seeds > 1) o << " ± " << sd;
  return o.str();
}

std::string table_csv(const std::vector<TableRow>& rows) {
  std::ostringstream o;
  o << "method,config_hash,params,seeds";
  for (const char* name : kMetricNames) o << ',' << name << ',' << name << "_sd";
  o << '\n';
  for (const auto& r : rows) {
    o << r.method << ',' << r.config_hash << ',' << r.params << ',' << r.seeds;
    for (std::size_t c = 0; c < r.mean.size(); ++c) o << ',' << shortest(r.mean[c]) << ',' << shortest(r.sd[c]);
    o << '\n';
  }
  return o.str();
}

// Display width counting each UTF-8 sequence once.
std::size_t width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string table_text(const std::string& dataset, const std::vector<TableRow>& rows) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> head = {"Method"};
  head.insert(head.end(), std::begin(kMetricTitles), std::end(kMetricTitles));
  head.push_back("seeds");
  grid.push_back(head);
  for (const auto& r : rows) {
    std::vector<std::string> line = {r.method};
    for (std::size_t c = 0; c < r.mean.size(); ++c) line.push_back(cell(r.mean[c], r.sd[c], r.seeds));
    line.push_back(std::to_string(r.seeds));
    grid.push_back(line);
  }
  std::vector<std::size_t> widths(head.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], width(line[c]));
  }
  std::ostringstream o;
  o << dataset << " (test split)\n";
  for (std::size_t l = 0; l < grid.size(); ++l) {
    for (std::size_t c = 0; c < grid[l].size(); ++c) {
      const std::string pad(widths[c] - width(grid[l][c]), ' ');
      if (c == 0) {
        o << grid[l][c] << pad;
      } else {
        o << "  " << pad << grid[l][c];
      }
    }
    o << '\n';
    if (l == 0) {
      std::size_t total = 0;
      for (std::size_t w : widths) total += w + 2;
      o << std::string(total - 2, '-') << '\n';
    }
  }
  o << '\n';
  for (const auto& r : rows) o << r.method << ": " << r.params << '\n';
  return o.str();
}

}  // namespace

MetricSummary evaluate_beliefs(std::span<const double> beliefs, const Dataset& data) {
  require(beliefs.size() == data.n, "belief count does not match the dataset");
  return summarize(beliefs, data.y, data.group_of);
}

PreparedSplit synthetic_split(std::uint64_t seed) {
  const Dataset all = synthetic_population(2000, seed);
  auto [train, test] = split(all, 1500, 500, seed);
  return {std::move(train), std::move(test), seed};
}

fs::path cmd_prepare(const Workspace& ws, const PrepareOptions& opt, std::ostream& log) {
  PreparedData prepared;
  if (opt.dataset == "synthetic") {
    auto s = synthetic_split(opt.seed);
    prepared.train = std::move(s.train);
    prepared.test = std::move(s.test);
    auto& r = prepared.report;
    r.dataset = "synthetic";
    r.raw_rows = prepared.train.n + prepared.test.n;
    r.raw_train_rows = prepared.train.n;
    r.raw_test_rows = prepared.test.n;
    r.train_rows = prepared.train.n;
    r.test_rows = prepared.test.n;
    r.d = prepared.train.d;
    r.k = prepared.train.k;
    r.train_group_sizes = prepared.train.group_sizes;
  } else {
    prepared = prepare_dataset(opt.dataset, opt.data_dir, opt.seed, opt.verify_checksums);
  }
  const fs::path dir = ws.dataset_dir(opt.dataset);
  fs::create_directories(dir);
  write_snapshot(prepared.train, dir / "train.csv");
  write_snapshot(prepared.test, dir / "test.csv");
  const fs::path manifest = dir / "manifest.txt";
  write_text(manifest, prepared.report.describe() + "seed = " + std::to_string(opt.seed) + '\n');
  for (const auto& note : prepared.report.notes) log << "note: " << note << '\n';
  log << "prepared " << opt.dataset << ": " << prepared.train.n << " train / " << prepared.test.n
      << " test rows, d = " << prepared.train.d << ", " << prepared.train.group_sizes.size() << " groups -> "
      << manifest.string() << '\n';
  return manifest;
}

PreparedSplit load_prepared(const Workspace& ws, const std::string& dataset) {
  const fs::path dir = ws.dataset_dir(dataset);
  PreparedSplit out;
  out.seed = manifest_seed(dir / "manifest.txt");
  out.train = read_snapshot(dir / "train.csv");
  out.test = read_snapshot(dir / "test.csv");
  return out;
}

TrainOutcome train_run(const PreparedSplit& data, const std::string& dataset, const TrainConfig& cfg,
                       const Workspace& ws, const std::string& run, const BaselineFit* baseline) {
  cfg.validate();
  TrainOutcome out;
  out.run = run.empty() ? default_run(cfg) : run;
  out.baseline = baseline != nullptr ? *baseline : fit_baseline(data.train, cfg.mode);
  if (cfg.beta == 0.0) {
    TrainConfig still = cfg;
    still.steps = 0;
    out.result = train(data.train, still, out.baseline.params, &data.test);
  } else {
    out.result = train(data.train, cfg, out.baseline.params, &data.test);
  }
  const fs::path dir = ws.models_dir(dataset);
  out.model = dir / (out.run + ".model");
  out.trajectory = dir / (out.run + ".trajectory.csv");
  save_model(out.model, {dataset, data.train.d, data.train.k, cfg, out.result.params});
  write_trajectory(out.trajectory, out.result.trajectory);
  return out;
}

TrainOutcome cmd_train(const Workspace& ws, const TrainOptions& opt, std::ostream& log) {
  TrainConfig cfg = opt.config.empty() ? TrainConfig{} : load_config(opt.config);
  const PreparedSplit data = load_prepared(ws, opt.dataset);
  if (opt.seed) cfg.seed = *opt.seed;
  if (cfg.seed != data.seed) {
    log << "warning: seed " << cfg.seed << " differs from the snapshot split seed " << data.seed
        << "; the split was fixed by `wfair prepare`, recording seed " << data.seed << '\n';
    cfg.seed = data.seed;
  }
  auto out = train_run(data, opt.dataset, cfg, ws, opt.run);
  const auto& last = out.result.trajectory.back();
  log << "trained " << out.run << " (" << method_for(cfg) << ", " << cfg.steps << " steps): test Err-.5 "
      << last.err_05 << ", SDD " << last.sdd << ", SPDD " << last.spdd << " -> " << out.model.string() << '\n';
  return out;
}

BeliefsFile postprocess(const PreparedSplit& data, const std::string& dataset, const ModelParams& params,
                        const std::string& model_name, const PostprocessOptions& opt) {
  const auto train_b = beliefs(params, data.train);
  const auto test_b = beliefs(params, data.test);
  const auto reference = GroupedBeliefs::from_individuals(train_b, data.train.group_of);
  const auto target = post_target(reference, opt.target, opt.resolution);
  const auto map = QuantileMap::fit(reference, target, QuantileBins::make(opt.bins));

  BeliefsFile file;
  file.dataset = dataset;
  file.model = model_name;
  file.seed = data.seed;
  file.target = to_string(opt.target);
  file.bins = opt.bins;
  const auto emit = [&](const std::string& split, const Dataset& d, const std::vector<double>& b) {
    const auto adjusted = map.apply(b, d.group_of);
    for (std::size_t r = 0; r < d.n; ++r) file.rows.push_back({split, r, d.group_of[r], d.y[r], b[r], adjusted[r]});
  };
  emit("train", data.train, train_b);
  emit("test", data.test, test_b);
  return file;
}

fs::path cmd_postprocess(const Workspace& ws, const PostprocessOptions& opt, std::ostream& log) {
  const fs::path model_path = resolve_model(ws, opt.dataset, opt.model);
  const ModelFile model = load_model(model_path);
  if (model.dataset != opt.dataset) {
    log << "warning: model was trained on '" << model.dataset << "', post-processing on '" << opt.dataset << "'\n";
  }
  const PreparedSplit data = load_prepared(ws, opt.dataset);
  const std::string name = run_name(model_path);
  BeliefsFile file = postprocess(data, opt.dataset, model.params, name, opt);
  file.model_params = config_key(model.config);
  const fs::path out = ws.beliefs_dir(opt.dataset) / (name + "-" + to_string(opt.target) + ".csv");
  write_beliefs(out, file);
  log << "post-processed " << name << " onto the " << to_string(opt.target) << " target with " << opt.bins
      << " bins -> " << out.string() << '\n';
  return out;
}

MetricsRow cmd_evaluate(const Workspace& ws, const EvaluateOptions& opt, std::ostream& log) {
  require(opt.model.empty() != opt.beliefs.empty(), "evaluate needs exactly one of --model or --beliefs");
  if (opt.split == "train") log << "warning: evaluating on the training split the model was fitted on\n";
  MetricsRow row;
  if (!opt.model.empty()) {
    const fs::path path = resolve_model(ws, opt.dataset, opt.model);
    const ModelFile model = load_model(path);
    if (model.dataset != opt.dataset) {
      log << "warning: model was trained on '" << model.dataset << "', evaluating on '" << opt.dataset << "'\n";
    }
    const PreparedSplit data = load_prepared(ws, opt.dataset);
    const Dataset& d = pick_split(data, opt.split);
    model.params.validate(d.d, d.k);
    row = model_row(opt.dataset, opt.split, run_name(path), model.config, data.seed,
                    evaluate_beliefs(beliefs(model.params, d), d));
  } else {
    const BeliefsFile file = read_beliefs(opt.beliefs);
    if (file.dataset != opt.dataset) {
      log << "warning: beliefs were produced on '" << file.dataset << "', evaluating as '" << opt.dataset << "'\n";
    }
    std::string run = opt.beliefs.filename().string();
    if (run.ends_with(".csv")) run.resize(run.size() - 4);
    row = beliefs_row(file, opt.split, run);
    row.dataset = opt.dataset;
  }
  validate_row(row);
  if (opt.append) append_results(ws.results(), {row});
  log << results_header() << '\n' << format_row(row) << '\n';
  return row;
}

SweepOutcome run_sweep(const Workspace& ws, const std::string& dataset, const SweepGrid& grid,
                       const fs::path& data_dir, std::size_t jobs, bool verify_checksums, std::ostream& log) {
  const auto configs = grid.expand();
  require(!configs.empty(), "sweep grid is empty");
  std::mutex log_mutex;

  std::map<std::uint64_t, PreparedSplit> splits;
  for (const auto& c : configs) {
    if (!splits.count(c.seed)) splits.emplace(c.seed, prepare_split(dataset, data_dir, c.seed, verify_checksums));
  }

  // Unconstrained fit per (seed, mode); every penalized run starts from it.
  std::vector<std::pair<std::uint64_t, FeatureMode>> bases;
  for (const auto& c : configs) {
    if (std::find(bases.begin(), bases.end(), std::pair{c.seed, c.mode}) == bases.end()) bases.emplace_back(c.seed, c.mode);
  }
  std::vector<std::optional<TrainOutcome>> base_runs(bases.size());
  std::vector<std::string> base_errors(bases.size());
  parallel_for(bases.size(), jobs, [&](std::size_t i) {
    TrainConfig c;
    c.beta = 0.0;
    c.seed = bases[i].first;
    c.mode = bases[i].second;
    c.log_every = grid.log_every;
    try {
      base_runs[i] = train_run(splits.at(c.seed), dataset, c, ws, "");
    } catch (const std::exception& e) {
      base_errors[i] = e.what();
    }
  });
  const auto base_of = [&](const TrainConfig& c) -> std::size_t {
    return static_cast<std::size_t>(std::find(bases.begin(), bases.end(), std::pair{c.seed, c.mode}) - bases.begin());
  };

  SweepOutcome out;
  out.runs.resize(configs.size());
  parallel_for(configs.size(), jobs, [&](std::size_t i) {
    SweepRun& run = out.runs[i];
    run.config = configs[i];
    run.run = default_run(run.config);
    const std::size_t b = base_of(run.config);
    try {
      require(base_runs[b].has_value(), "unconstrained fit failed: " + base_errors[b]);
      const PreparedSplit& data = splits.at(run.config.seed);
      const auto t = train_run(data, dataset, run.config, ws, run.run, &base_runs[b]->baseline);
      run.test = evaluate_beliefs(beliefs(t.result.params, data.test), data.test);
      run.train = evaluate_beliefs(beliefs(t.result.params, data.train), data.train);
    } catch (const std::exception& e) {
      run.status = sanitize(std::string("failed: ") + e.what());
    }
    const std::lock_guard lock(log_mutex);
    log << "[" << (i + 1) << "/" << configs.size() << "] " << run.run << " " << config_key(run.config) << " seed "
        << run.config.seed << ": " << run.status;
    if (run.status == "ok") log << ", test Err-.5 " << run.test.err_05 << ", SPDD " << run.test.spdd;
    log << std::endl;
  });

  // Rows in grid order so the store does not depend on scheduling.
  for (std::size_t b = 0; b < bases.size(); ++b) {
    if (!base_runs[b]) {
      log << "unconstrained fit for seed " << bases[b].first << " failed: " << base_errors[b] << '\n';
      continue;
    }
    const auto& t = *base_runs[b];
    const PreparedSplit& data = splits.at(bases[b].first);
    TrainConfig c;
    c.beta = 0.0;
    c.seed = bases[b].first;
    c.mode = bases[b].second;
    for (const char* split : {"test", "train"}) {
      const Dataset& d = pick_split(data, split);
      out.rows.push_back(model_row(dataset, split, t.run, c, c.seed, evaluate_beliefs(beliefs(t.result.params, d), d)));
    }
    for (PostTarget target : {PostTarget::barycenter, PostTarget::pooled}) {
      PostprocessOptions popt;
      popt.dataset = dataset;
      popt.target = target;
      popt.bins = grid.bins;
      BeliefsFile file = postprocess(data, dataset, t.result.params, t.run, popt);
      file.model_params = config_key(c);
      const std::string name = t.run + "-" + to_string(target);
      write_beliefs(ws.beliefs_dir(dataset) / (name + ".csv"), file);
      for (const char* split : {"test", "train"}) out.rows.push_back(beliefs_row(file, split, name));
    }
  }
  for (const auto& run : out.runs) {
    if (run.status != "ok") continue;
    out.rows.push_back(model_row(dataset, "test", run.run, run.config, run.config.seed, run.test));
    out.rows.push_back(model_row(dataset, "train", run.run, run.config, run.config.seed, run.train));
  }

  // Selection: lowest mean test SPDD over seeds among penalized configs.
  std::vector<MetricsRow> penalized;
  for (const auto& r : out.rows) {
    if (r.method.rfind(kPenalty, 0) == 0) penalized.push_back(r);
  }
  const auto cells = aggregate(penalized, "test");
  if (const auto it = cells.find(dataset); it != cells.end()) {
    const auto best = select_best(it->second, grid.err_budget);
    const TableRow* pick = nullptr;
    for (const auto& b : best) {
      if (pick == nullptr || b.mean[4] < pick->mean[4]) pick = &b;
    }
    if (pick != nullptr) {
      out.selected = pick->config_hash;
      log << "selected " << pick->params << " (" << pick->method << "): mean test Err-.5 " << pick->mean[0]
          << ", SDD " << pick->mean[3] << ", SPDD " << pick->mean[4] << " over " << pick->seeds << " seed(s)\n";
    }
  }
  if (!out.selected) log << "no penalized configuration met the selection rule\n";

  std::ostringstream csv;
  csv << "config_hash,run,seed,status,alpha,beta,eta,steps,refresh,resolution,mode,log_every";
  for (const char* split : {"test", "train"}) {
    for (const char* name : kMetricNames) csv << ',' << split << '_' << name;
  }
  csv << ",selected\n";
  for (const auto& run : out.runs) {
    const auto& c = run.config;
    const std::string hash = config_hash(c);
    csv << hash << ',' << run.run << ',' << c.seed << ',' << run.status << ',' << shortest(c.alpha) << ','
        << shortest(c.beta) << ',' << shortest(c.eta) << ',' << c.steps << ',' << c.refresh << ',' << c.resolution
        << ',' << to_string(c.mode) << ',' << c.log_every;
    for (const auto* m : {&run.test, &run.train}) {
      for (double v : metric_values(*m)) csv << ',' << (run.status == "ok" ? shortest(v) : std::string());
    }
    csv << ',' << (out.selected && *out.selected == hash ? 1 : 0) << '\n';
  }
  write_text(ws.dataset_dir(dataset) / "sweep.csv", csv.str());
  return out;
}

SweepOutcome cmd_sweep(const Workspace& ws, const SweepOptions& opt, std::ostream& log) {
  SweepGrid grid = opt.grid.empty() ? SweepGrid{} : load_grid(opt.grid);
  if (!opt.seeds.empty()) grid.seed = opt.seeds;
  auto out = run_sweep(ws, opt.dataset, grid, opt.data_dir, opt.jobs, opt.verify_checksums, log);
  append_results(ws.results(), out.rows);
  std::size_t failed = 0;
  for (const auto& r : out.runs) failed += r.status != "ok";
  log << "sweep finished: " << out.runs.size() << " runs, " << failed << " failed, " << out.rows.size()
      << " rows appended to " << ws.results().string() << '\n';
  return out;
}

std::map<std::string, std::vector<TableRow>> aggregate(const std::vector<MetricsRow>& rows, const std::string& split) {
  // (dataset, method, hash) -> seed -> metrics; a later row for the same seed
  // replaces an earlier one.
  std::map<std::tuple<std::string, std::string, std::string>, std::map<std::uint64_t, const MetricsRow*>> cells;
  for (const auto& r : rows) {
    if (r.split == split) cells[{r.dataset, r.method, r.config_hash}][r.seed] = &r;
  }
  std::map<std::string, std::vector<TableRow>> out;
  for (const auto& [key, by_seed] : cells) {
    TableRow t;
    t.method = std::get<1>(key);
    t.config_hash = std::get<2>(key);
    t.params = by_seed.begin()->second->params;
    t.seeds = by_seed.size();
    t.mean.assign(7, 0.0);
    t.sd.assign(7, 0.0);
    for (const auto& [seed, row] : by_seed) {
      const auto v = metric_values(row->metrics);
      for (std::size_t c = 0; c < 7; ++c) t.mean[c] += v[c] / static_cast<double>(t.seeds);
    }
    if (t.seeds > 1) {
      for (const auto& [seed, row] : by_seed) {
        const auto v = metric_values(row->metrics);
        for (std::size_t c = 0; c < 7; ++c) t.sd[c] += (v[c] - t.mean[c]) * (v[c] - t.mean[c]);
      }
      for (double& s : t.sd) s = std::sqrt(s / static_cast<double>(t.seeds - 1));
    }
    out[std::get<0>(key)].push_back(std::move(t));
  }
  for (auto& [dataset, list] : out) {
    std::stable_sort(list.begin(), list.end(), [](const TableRow& a, const TableRow& b) {
      const int ra = method_rank(a.method);
      const int rb = method_rank(b.method);
      if (ra != rb) return ra < rb;
      if (a.method != b.method) return a.method < b.method;
      return a.params < b.params;
    });
  }
  return out;
}

std::vector<TableRow> select_best(const std::vector<TableRow>& cells, std::optional<double> err_budget) {
  std::vector<TableRow> best;
  for (const auto& c : cells) {
    if (err_budget && c.mean[0] > *err_budget) continue;
    auto it = std::find_if(best.begin(), best.end(), [&](const TableRow& b) { return b.method == c.method; });
    if (it == best.end()) {
      best.push_back(c);
    } else if (c.mean[4] < it->mean[4]) {
      *it = c;
    }
  }
  std::stable_sort(best.begin(), best.end(),
                   [](const TableRow& a, const TableRow& b) { return method_rank(a.method) < method_rank(b.method); });
  return best;
}

std::vector<fs::path> cmd_report(const Workspace& ws, const ReportOptions& opt, std::ostream& log) {
  const auto rows = read_results(ws.results());
  require(!rows.empty(), "results store " + ws.results().string() + " is empty");
  const auto cells = aggregate(rows, "test");
  require(!cells.empty(), "results store has no test-split rows");
  std::vector<fs::path> written;
  const fs::path dir = ws.report_dir();
  for (const auto& [dataset, list] : cells) {
    const auto best = select_best(list, opt.err_budget);
    const fs::path table = dir / (dataset + "_table.csv");
    const fs::path text = dir / (dataset + "_table.txt");
    const fs::path grid = dir / (dataset + "_grid.csv");
    write_text(table, table_csv(best));
    write_text(text, table_text(dataset, best));
    write_text(grid, table_csv(list));
    written.insert(written.end(), {table, text, grid});

    const fs::path models = ws.models_dir(dataset);
    if (!fs::is_directory(models)) continue;
    std::vector<fs::path> trajectories;
    for (const auto& entry : fs::directory_iterator(models)) {
      if (entry.path().filename().string().ends_with(".trajectory.csv")) trajectories.push_back(entry.path());
    }
    std::sort(trajectories.begin(), trajectories.end());
    for (const auto& path : trajectories) {
      std::string run = path.filename().string();
      run.resize(run.size() - std::string(".trajectory.csv").size());
      std::ostringstream o;
      o << "step,err_exp,sdd,spdd\n";
      for (const auto& p : read_trajectory(path)) {
        o << p.step << ',' << shortest(p.err_exp) << ',' << shortest(p.sdd) << ',' << shortest(p.spdd) << '\n';
      }
      const fs::path curve = dir / "curves" / dataset / (run + ".csv");
      write_text(curve, o.str());
      written.push_back(curve);
    }
  }
  for (const auto& [dataset, list] : cells) {
    std::ifstream in(dir / (dataset + "_table.txt"));
    log << in.rdbuf();
  }
  log << "wrote " << written.size() << " report files under " << dir.string() << '\n';
  return written;
}

}  // namespace wfair::bench
