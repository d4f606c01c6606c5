// Acceptance suite: one PASS/FAIL line per criterion.
//
//   wfair_acceptance            run every criterion
//   wfair_acceptance 1 4 13     run a subset
//
// Criteria 9-11 read raw data from $WFAIR_DATA_DIR (default ./data) and write
// their workspaces under the current directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wfair/bench.hpp"
#include "wfair/data_pipeline.hpp"
#include "wfair/empirical_ot.hpp"
#include "wfair/error.hpp"
#include "wfair/fairness_metrics.hpp"
#include "wfair/logistic_model.hpp"
#include "wfair/penalized_trainer.hpp"
#include "wfair/post_processor.hpp"

using namespace wfair;
namespace bench = wfair::bench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed check once per message kind, keeps the first example.
  void check(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail << "first failure: " << what << "; ";
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::vector<double> distinct_samples(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v;
  while (v.size() < n) {
    v = oracle::uniform_samples(rng, n);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

double max_gap(double a, double b, double current) { return std::max(current, std::abs(a - b)); }

// Structural checks on one coupling; returns false on the first violation.
bool coupling_ok(const EmpiricalDist& b, const EmpiricalDist& c) {
  const auto cp = optimal_coupling(b, c);
  if (cp.entries.size() > b.size() + c.size() - 1) return false;
  std::vector<double> rows(b.size(), 0.0), cols(c.size(), 0.0);
  for (const auto& e : cp.entries) {
    rows[e.row] += e.mass;
    cols[e.col] += e.mass;
  }
  for (double r : rows) {
    if (std::abs(r - b.atom_mass()) > 1e-12) return false;
  }
  for (double v : cols) {
    if (std::abs(v - c.atom_mass()) > 1e-12) return false;
  }
  return true;
}

// Pairs shared by criteria 1-3.
struct OtFuzz {
  std::vector<std::pair<std::vector<double>, std::vector<double>>> equal, unequal, large;
};

const OtFuzz& ot_fuzz() {
  static const OtFuzz fuzz = [] {
    OtFuzz f;
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> six(1, 6), four(1, 4), big(1, 1000);
    for (int t = 0; t < 500; ++t) {
      const std::size_t n = six(rng);
      f.equal.emplace_back(t % 3 == 0 ? oracle::tied_samples(rng, n) : oracle::uniform_samples(rng, n),
                           oracle::uniform_samples(rng, n));
    }
    for (int t = 0; t < 200; ++t) {
      std::size_t nb = four(rng), nc = four(rng);
      while (nc == nb) nc = four(rng);
      f.unequal.emplace_back(oracle::uniform_samples(rng, nb),
                             t % 2 ? oracle::tied_samples(rng, nc) : oracle::uniform_samples(rng, nc));
    }
    for (int t = 0; t < 1000; ++t) {
      const std::size_t nb = big(rng), nc = big(rng);
      f.large.emplace_back(t % 4 == 0 ? oracle::tied_samples(rng, nb) : oracle::uniform_samples(rng, nb),
                           t % 5 == 0 ? oracle::tied_samples(rng, nc) : oracle::uniform_samples(rng, nc));
    }
    return f;
  }();
  return fuzz;
}

void criterion1(Outcome& o) {
  const auto start = Clock::now();
  const auto& f = ot_fuzz();
  double gap_perm = 0.0, gap_lp = 0.0;
  for (const auto& [b, c] : f.equal) {
    const double w = wasserstein1(make_dist(b), make_dist(c));
    gap_perm = max_gap(w, oracle::permutation_w1(b, c), gap_perm);
  }
  for (const auto& [b, c] : f.unequal) {
    const double w = wasserstein1(make_dist(b), make_dist(c));
    gap_lp = max_gap(w, oracle::assignment_w1(b, c), gap_lp);
  }
  const double elapsed = seconds_since(start);
  o.check(gap_perm <= 1e-12, "permutation oracle gap " + sci(gap_perm));
  o.check(gap_lp <= 1e-10, "LP oracle gap " + sci(gap_lp));
  o.check(elapsed < 10.0, "runtime " + fmt(elapsed, 1) + " s");
  o.detail << "500 equal-size max gap " << sci(gap_perm) << ", 200 unequal-size max gap " << sci(gap_lp) << ", "
           << fmt(elapsed, 2) << " s";
}

void criterion2(Outcome& o) {
  double g_td = 0.0, g_flip = 0.0, g_q = 0.0;
  for (const auto& [bs, cs] : ot_fuzz().large) {
    const auto b = make_dist(bs);
    const auto c = make_dist(cs);
    const double w = wasserstein1(b, c);
    g_td = max_gap(w, threshold_disparity(b, c), g_td);
    g_flip = max_gap(w, expected_flip_cost(b, c), g_flip);
    g_q = max_gap(w, wasserstein1_quantile_form(b, c), g_q);
  }
  o.check(g_td <= 1e-10, "threshold disparity gap " + sci(g_td));
  o.check(g_flip <= 1e-10, "flip cost gap " + sci(g_flip));
  o.check(g_q <= 1e-10, "quantile form gap " + sci(g_q));
  o.detail << "1000 instances, max gaps: threshold " << sci(g_td) << ", flip " << sci(g_flip) << ", quantile "
           << sci(g_q);
}

void criterion3(Outcome& o) {
  std::size_t count = 0;
  const auto& f = ot_fuzz();
  for (const auto* set : {&f.equal, &f.unequal, &f.large}) {
    for (const auto& [b, c] : *set) {
      o.check(coupling_ok(make_dist(b), make_dist(c)), "coupling #" + std::to_string(count));
      ++count;
    }
  }
  o.detail << count << " couplings checked for marginals and at most n_b + n_c - 1 entries";
}

void criterion4(Outcome& o) {
  std::mt19937_64 rng(104);
  std::uniform_int_distribution<std::size_t> groups(2, 5), size(1, 6), cand(1, 40);
  std::size_t compared = 0;
  double worst = -1e300;
  for (int t = 0; t < 100; ++t) {
    std::vector<EmpiricalDist> dists;
    std::vector<double> w;
    std::size_t res = 1;
    const std::size_t m = groups(rng);
    for (std::size_t a = 0; a < m; ++a) {
      const std::size_t n = size(rng);
      dists.push_back(make_dist(t % 2 ? oracle::tied_samples(rng, n) : oracle::uniform_samples(rng, n)));
      w.push_back(oracle::uniform_samples(rng, 1, 0.1, 1.0)[0]);
      res = std::lcm(res, n);
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= total;
    const double cost = barycenter_cost(dists, w, barycenter(dists, w, res));
    for (const auto& d : dists) {
      const double other = barycenter_cost(dists, w, d);
      worst = std::max(worst, cost - other);
      o.check(cost <= other + 1e-9, "an input distribution beats the barycenter");
      ++compared;
    }
    for (int q = 0; q < 1000; ++q) {
      const double other = barycenter_cost(dists, w, make_dist(oracle::uniform_samples(rng, cand(rng))));
      worst = std::max(worst, cost - other);
      o.check(cost <= other + 1e-9, "a random target beats the barycenter");
      ++compared;
    }
  }
  o.detail << "100 instances, " << compared << " comparisons, max(cost - alternative) = " << sci(worst);
}

void criterion5(Outcome& o) {
  std::mt19937_64 rng(105);
  std::uniform_int_distribution<std::size_t> size(1, 300);
  double gap = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto b = t % 3 == 0 ? oracle::tied_samples(rng, size(rng)) : oracle::uniform_samples(rng, size(rng));
    const auto c = t % 4 == 0 ? oracle::tied_samples(rng, size(rng)) : oracle::uniform_samples(rng, size(rng));
    gap = max_gap(oracle::cdf_gap_integral(b, c), oracle::quantile_gap_integral(b, c), gap);
  }
  o.check(gap <= 1e-10, "integral gap " + sci(gap));
  o.detail << "500 pairs, max |int|F-G| - int|F^-1 - G^-1|| = " << sci(gap);
}

void criterion6(Outcome& o) {
  std::mt19937_64 rng(106);
  std::normal_distribution<double> normal(0.0, 0.8);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::uniform_int_distribution<std::size_t> n_dist(4, 50), d_dist(1, 5), atoms(1, 20);
  std::uniform_int_distribution<int> g_dist(1, 4);
  int tested = 0;
  double worst = 0.0;
  for (int t = 0; tested < 100 && t < 2000; ++t) {
    const auto data = fixture::synthetic(n_dist(rng), d_dist(rng), g_dist(rng), 6000 + t);
    const auto mode = t % 2 ? FeatureMode::blind : FeatureMode::full;
    auto p = ModelParams::zeros(data.d, data.k, mode);
    for (auto& v : p.theta) v = normal(rng);
    std::vector<double> a(atoms(rng));
    for (auto& v : a) v = unit(rng);
    const auto bary = make_dist(a);
    const auto s = beliefs(p, data);
    bool near_tie = false;
    for (double sv : s) {
      for (double b : bary.atoms()) near_tie = near_tie || std::abs(sv - b) < 1e-4;
    }
    if (near_tie) continue;
    ++tested;
    TrainConfig cfg;
    cfg.alpha = (t % 3) / 2.0;
    cfg.beta = 0.5 + 3.0 * unit(rng);
    cfg.mode = mode;
    const auto g = penalized_grad(p, data, cfg, bary);
    const double h = 1e-6;
    double diff = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      auto up = p;
      auto down = p;
      up.theta[j] += h;
      down.theta[j] -= h;
      const double fd = (penalized_objective(up, data, cfg, bary) - penalized_objective(down, data, cfg, bary)) / (2 * h);
      diff += (g[j] - fd) * (g[j] - fd);
      norm += fd * fd;
    }
    const double rel = std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
    worst = std::max(worst, rel);
    o.check(rel <= 1e-4, "relative error " + sci(rel) + " on instance " + std::to_string(t));
  }
  o.check(tested == 100, "only " + std::to_string(tested) + " tie-free instances");
  o.detail << tested << " instances, max ||g - fd|| / ||fd|| = " << sci(worst);
}

void criterion7(Outcome& o) {
  std::mt19937_64 rng(107);
  std::uniform_int_distribution<int> groups(1, 6);
  std::uniform_int_distribution<std::size_t> size(1, 80);
  double worst = -1e300;
  for (int t = 0; t < 200; ++t) {
    std::map<int, std::vector<double>> g;
    const int m = groups(rng);
    for (int a = 0; a < m; ++a) g[a * 3] = t % 2 ? oracle::tied_samples(rng, size(rng)) : oracle::uniform_samples(rng, size(rng));
    const auto gb = GroupedBeliefs::from_groups(g);
    const auto bary = barycenter(gb.distributions(), gb.weight_vector(), 100);
    const double exact = spdd_exact(gb);
    const double bound = pseudo_spdd(gb, bary);
    worst = std::max(worst, exact - bound);
    o.check(exact <= bound + 1e-12, "SPDD " + fmt(exact, 6) + " above pseudo-SPDD " + fmt(bound, 6));
  }
  o.detail << "200 fixtures, max(SPDD - pseudo-SPDD) = " << sci(worst);
}

// Quantile functions of the three population groups.
double population_quantile(int group, double t) {
  switch (group) {
    case 0:
      return 0.6 * t;
    case 1:
      return 0.2 + 0.7 * t;
    default:
      return t * t;
  }
}

void criterion8(Outcome& o) {
  // Equal weights, so the population barycenter quantile is the pointwise
  // median of the three quantile functions.
  constexpr int kPieces = 200000;
  double population = 0.0;
  for (int i = 0; i < kPieces; ++i) {
    const double t = (i + 0.5) / kPieces;
    double q[3] = {population_quantile(0, t), population_quantile(1, t), population_quantile(2, t)};
    std::sort(q, q + 3);
    population += (std::abs(q[0] - q[1]) + std::abs(q[2] - q[1])) / 3.0 / kPieces;
  }
  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<double> w(3, 1.0 / 3.0);
  std::vector<double> medians;
  for (std::size_t n : {50, 100, 200, 400, 800, 1600}) {
    std::vector<double> deviations;
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<EmpiricalDist> dists;
      for (int g = 0; g < 3; ++g) {
        std::vector<double> s(n);
        for (auto& v : s) v = population_quantile(g, unit(rng));
        dists.push_back(make_dist(s));
      }
      const double cost = barycenter_cost(dists, w, barycenter(dists, w, n));
      deviations.push_back(std::abs(cost - population));
    }
    std::sort(deviations.begin(), deviations.end());
    medians.push_back(0.5 * (deviations[9] + deviations[10]));
  }
  o.detail << "population cost " << fmt(population, 6) << ", median |deviation| by n:";
  for (double m : medians) o.detail << ' ' << sci(m);
  for (std::size_t i = 1; i < medians.size(); ++i) o.check(medians[i] <= medians[i - 1], "median rose at step " + std::to_string(i));
}

// ---- reproduction criteria ---------------------------------------------------

fs::path data_dir() { return resolve_data_dir(""); }

const bench::TableRow* cell(const std::vector<bench::TableRow>& rows, const std::string& method) {
  for (const auto& r : rows) {
    if (r.method == method) return &r;
  }
  return nullptr;
}

std::string describe(const bench::TableRow& r) {
  std::ostringstream o;
  o << r.method << " Err-.5 " << fmt(r.mean[0]) << " SDD " << fmt(r.mean[3]) << " SPDD " << fmt(r.mean[4])
    << " (unordered " << fmt(r.mean[5]) << ")";
  if (r.seeds > 1) o << " over " << r.seeds << " seeds";
  return o.str();
}

void criterion9(Outcome& o) {
  const auto start = Clock::now();
  const bench::Workspace ws{"acceptance_german"};
  fs::remove_all(ws.root);
  bench::SweepGrid grid;
  grid.alpha = {0.0, 0.5};
  grid.beta = {10, 30, 100};
  grid.eta = {1e-2, 1e-1};
  grid.steps = {20000};
  grid.seed = {0, 1, 2, 3, 4};
  grid.log_every = 1000;
  grid.err_budget = 0.35;
  std::ostringstream log;
  const auto out = bench::run_sweep(ws, "german", grid, data_dir(), 1, true, log);
  const auto cells = bench::aggregate(out.rows, "test").at("german");
  const double elapsed = seconds_since(start);

  const auto* base = cell(cells, bench::kUnconstrained);
  o.check(base != nullptr, "no Unconstrained cell");
  if (base == nullptr) return;
  o.detail << describe(*base) << "; ";
  o.check(std::abs(base->mean[0] - 0.248) <= 0.03, "Unconstrained Err-.5 " + fmt(base->mean[0]));

  const bench::TableRow* best = nullptr;
  for (const auto& c : cells) {
    if (c.config_hash == out.selected.value_or("")) best = &c;
  }
  o.check(best != nullptr, "no penalized configuration within Err-.5 <= 0.35");
  if (best != nullptr) {
    o.detail << "selected " << best->params << ": " << describe(*best) << "; ";
    o.check(best->mean[3] <= 0.02, "selected SDD " + fmt(best->mean[3]));
    o.check(best->mean[0] <= 0.35, "selected Err-.5 " + fmt(best->mean[0]));
  }
  o.check(elapsed < 300.0, "runtime " + fmt(elapsed, 0) + " s");
  o.detail << out.runs.size() << " runs in " << fmt(elapsed, 0) << " s";
}

std::string pipeline_diagnostics(const std::string& dataset) {
  try {
    const auto p = prepare_dataset(dataset, data_dir(), 0, true);
    const auto& r = p.report;
    std::ostringstream o;
    o << "pipeline: raw " << r.raw_rows << ", dropped missing " << r.dropped_missing << ", malformed "
      << r.dropped_malformed << ", filtered " << r.dropped_filtered << ", unseen categories " << r.unseen_categories
      << ", train/test " << r.train_rows << "/" << r.test_rows << ", d " << r.d << " (reference " << r.expected_d
      << ")";
    for (const auto& note : r.notes) o << "; " << note;
    return o.str();
  } catch (const std::exception& e) {
    return std::string("pipeline: ") + e.what();
  }
}

// Full-length runs; the reduced grid keeps the sweep under two hours.
constexpr std::size_t kAdultSteps = 80000;

void criterion10(Outcome& o) {
  const auto start = Clock::now();
  const bench::Workspace ws{"acceptance_adult"};
  fs::remove_all(ws.root);
  bench::SweepGrid grid;
  grid.alpha = {0.0};
  grid.beta = {10, 30, 100};
  grid.eta = {1e-3, 1e-2};
  grid.steps = {kAdultSteps};
  grid.seed = {0};
  grid.log_every = 1000;
  grid.err_budget = 0.25;
  std::ostringstream log;
  const auto out = bench::run_sweep(ws, "adult", grid, data_dir(), 1, true, log);
  const auto cells = bench::aggregate(out.rows, "test").at("adult");
  const double elapsed = seconds_since(start);

  const auto* base = cell(cells, bench::kUnconstrained);
  const auto* post = cell(cells, bench::kPostProcess);
  o.check(base != nullptr && post != nullptr, "missing Unconstrained or Post-Process cell");
  if (base == nullptr || post == nullptr) return;
  o.detail << describe(*base) << "; " << describe(*post) << "; ";
  // Reference SPDD values count unordered pairs.
  o.check(std::abs(base->mean[0] - 0.142) <= 0.015, "Unconstrained Err-.5 " + fmt(base->mean[0]));
  o.check(std::abs(base->mean[5] - 0.806) <= 0.08, "Unconstrained SPDD " + fmt(base->mean[5]));
  o.check(post->mean[5] <= 0.12, "Post-Process SPDD " + fmt(post->mean[5]));
  o.check(post->mean[0] <= 0.22, "Post-Process Err-.5 " + fmt(post->mean[0]));

  const auto best = bench::select_best(cells, grid.err_budget);
  const auto* penalty = cell(best, bench::kPenalty);
  o.check(penalty != nullptr, "no penalized configuration within Err-.5 <= 0.25");
  if (penalty != nullptr) {
    o.detail << "selected " << penalty->params << ": " << describe(*penalty) << "; ";
    o.check(penalty->mean[5] <= 0.10, "Penalty SPDD " + fmt(penalty->mean[5]));
  }
  for (const auto& r : out.runs) o.check(r.status == "ok", r.run + " " + r.status);
  o.check(elapsed < 7200.0, "runtime " + fmt(elapsed, 0) + " s");
  o.detail << out.runs.size() << " runs in " << fmt(elapsed, 0) << " s";
  if (!o.pass) o.detail << "; " << pipeline_diagnostics("adult");
}

void criterion11(Outcome& o) {
  const auto prepared = prepare_dataset("adult", data_dir(), 0, true);
  TrainConfig cfg;
  cfg.alpha = 0.0;
  cfg.beta = 100.0;
  cfg.eta = 1e-2;
  cfg.steps = 10000;
  cfg.log_every = 10000;
  const auto base = fit_baseline(prepared.train, cfg.mode);
  const auto r = train(prepared.train, cfg, base.params);
  const auto& first = r.trajectory.front().group_w1;
  const auto& last = r.trajectory.back().group_w1;
  o.detail << "per-group W1 to the barycenter, initial -> final:";
  for (const auto& [g, w0] : first) {
    const double w1 = last.at(g);
    o.detail << " g" << g << ' ' << fmt(w0) << "->" << fmt(w1);
    o.check(w1 <= 0.1 * w0, "group " + std::to_string(g) + " kept " + fmt(100 * w1 / w0, 1) + "%");
  }
}

void criterion12(Outcome& o) {
  const bench::Workspace ws{"acceptance_synthetic"};
  fs::remove_all(ws.root);
  const auto data = bench::synthetic_split(0);
  TrainConfig cfg;
  cfg.alpha = 0.0;
  cfg.beta = 10.0;
  cfg.eta = 0.05;
  cfg.steps = 4000;
  cfg.log_every = 100;
  const auto out = bench::train_run(data, "synthetic", cfg, ws, "fig2");
  const auto points = bench::read_trajectory(out.trajectory);
  o.check(points.size() == 41, std::to_string(points.size()) + " trajectory points");
  for (std::size_t i = 1; i < points.size(); ++i) o.check(points[i].step > points[i - 1].step, "step index not increasing");
  for (const auto& p : points) {
    o.check(std::isfinite(p.sdd) && std::isfinite(p.spdd) && std::isfinite(p.err_exp), "non-finite series value");
  }
  if (points.empty()) return;
  o.check(points.back().spdd < points.front().spdd, "SPDD did not decrease");
  o.detail << "synthetic 5-group stand-in (Bank unavailable), " << points.size() << " points, SPDD "
           << fmt(points.front().spdd) << " -> " << fmt(points.back().spdd) << ", Err-Exp "
           << fmt(points.front().err_exp) << " -> " << fmt(points.back().err_exp);
}

void criterion13(Outcome& o) {
  std::mt19937_64 rng(113);
  std::uniform_int_distribution<int> groups(1, 4);
  std::uniform_int_distribution<std::size_t> size(1, 60), bins(1, 120);
  std::size_t transport_checks = 0;
  double transport_gap = 0.0;
  for (int t = 0; t < 500; ++t) {
    const int m = groups(rng);
    const bool equal_sizes = t % 2 == 0;
    const std::size_t common = size(rng);
    std::map<int, std::vector<double>> raw;
    for (int a = 0; a < m; ++a) {
      const std::size_t n = equal_sizes ? common : size(rng);
      raw[a] = t % 5 == 4 ? oracle::tied_samples(rng, n) : distinct_samples(rng, n);
    }
    const auto g = GroupedBeliefs::from_groups(raw);
    const auto target_kind = t % 3 == 0 ? PostTarget::pooled : PostTarget::barycenter;
    const auto target = post_target(g, target_kind);
    const auto b = QuantileBins::make(bins(rng));

    const auto once = quantile_match(g, target, b);
    const auto twice = quantile_match(once, target, b);
    o.check(once.groups() == twice.groups(), "not idempotent on fixture " + std::to_string(t));

    const auto map = QuantileMap::fit(g, target, b);
    for (const auto& [a, s] : raw) {
      std::vector<double> sorted = s;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 1; i < sorted.size(); ++i) {
        o.check(map.apply(a, sorted[i - 1]) <= map.apply(a, sorted[i]), "not monotone on fixture " + std::to_string(t));
      }
      for (int q = 0; q < 20; ++q) {
        const auto pair = oracle::uniform_samples(rng, 2);
        const double lo = std::min(pair[0], pair[1]);
        const double hi = std::max(pair[0], pair[1]);
        o.check(map.apply(a, lo) <= map.apply(a, hi), "not monotone off-sample on fixture " + std::to_string(t));
      }
    }

    // B = N on equal-size groups with distinct beliefs.
    if (equal_sizes && t % 5 != 4) {
      const auto exact = QuantileBins::make(common);
      const auto matched = quantile_match(g, target, exact);
      std::vector<double> resample;
      for (std::size_t i = 1; i <= common; ++i) resample.push_back(group_quantile(target.atoms(), i, exact));
      const auto resampled = make_dist(resample);
      for (const auto& [a, s] : raw) {
        const auto& mapped = matched.groups().at(a);
        double moved = 0.0;
        for (std::size_t r = 0; r < s.size(); ++r) moved += std::abs(s[r] - mapped[r]);
        moved /= static_cast<double>(s.size());
        const double w = wasserstein1(make_dist(s), resampled);
        transport_gap = std::max(transport_gap, std::abs(moved - w));
        o.check(std::abs(moved - w) <= 1e-9, "transport cost gap " + sci(std::abs(moved - w)));
        ++transport_checks;
      }
    }
  }
  o.detail << "500 fixtures: monotone, idempotent; " << transport_checks
           << " B = N groups, max |mean move - W1| = " << sci(transport_gap);
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "OT oracle equivalence", criterion1},
      {2, "three-way W1 equality", criterion2},
      {3, "coupling structure", criterion3},
      {4, "barycenter optimality", criterion4},
      {5, "CDF and quantile integrals agree", criterion5},
      {6, "penalized gradient vs finite differences", criterion6},
      {7, "pseudo-SPDD bound", criterion7},
      {8, "barycenter cost convergence trend", criterion8},
      {9, "German reproduction", criterion9},
      {10, "Adult reproduction", criterion10},
      {11, "Adult group histograms reach the barycenter", criterion11},
      {12, "trade-off trajectory", criterion12},
      {13, "post-processor properties", criterion13},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    const auto start = Clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "error: " << e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  #" << c.id << " " << c.title << " (" << fmt(seconds_since(start), 1)
              << " s): " << o.detail.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
