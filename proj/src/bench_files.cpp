#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "wfair/bench.hpp"
#include "wfair/error.hpp"

namespace wfair::bench {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string digits17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error(what + ": '" + s + "' is not a number");
  return v;
}

template <class Int>
Int parse_int(const std::string& s, const std::string& what) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error(what + ": '" + s + "' is not an integer");
  return v;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), "failed writing " + path.string());
}

void set_config_field(TrainConfig& cfg, const std::string& key, const std::string& value, const std::string& where) {
  const std::string what = where + ": " + key;
  if (key == "alpha") {
    cfg.alpha = parse_double(value, what);
  } else if (key == "beta") {
    cfg.beta = parse_double(value, what);
  } else if (key == "eta") {
    cfg.eta = parse_double(value, what);
  } else if (key == "steps") {
    cfg.steps = parse_int<std::size_t>(value, what);
  } else if (key == "refresh") {
    cfg.refresh = parse_int<std::size_t>(value, what);
  } else if (key == "resolution") {
    cfg.resolution = parse_int<std::size_t>(value, what);
  } else if (key == "mode") {
    cfg.mode = feature_mode_from_string(value);
  } else if (key == "seed") {
    cfg.seed = parse_int<std::uint64_t>(value, what);
  } else if (key == "log_every") {
    cfg.log_every = parse_int<std::size_t>(value, what);
  } else {
    throw Error(where + ": unknown key '" + key + "'");
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

constexpr const char* kTrajectoryColumns = "step,err_05,err_exp,dd_05,sdd,spdd,pseudo_spdd,objective";

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& source) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), source + ":" + std::to_string(line_no) + ": empty key");
    require(out.emplace(key, value).second, source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return out;
}

TrainConfig parse_config(const std::string& text, const std::string& source) {
  TrainConfig cfg;
  for (const auto& [key, value] : parse_key_values(text, source)) set_config_field(cfg, key, value, source);
  cfg.validate();
  return cfg;
}

TrainConfig load_config(const fs::path& path) { return parse_config(read_text(path), path.string()); }

std::string format_config(const TrainConfig& cfg) {
  std::ostringstream o;
  o << "alpha = " << shortest(cfg.alpha) << '\n';
  o << "beta = " << shortest(cfg.beta) << '\n';
  o << "eta = " << shortest(cfg.eta) << '\n';
  o << "steps = " << cfg.steps << '\n';
  o << "refresh = " << cfg.refresh << '\n';
  o << "resolution = " << cfg.resolution << '\n';
  o << "mode = " << to_string(cfg.mode) << '\n';
  o << "seed = " << cfg.seed << '\n';
  o << "log_every = " << cfg.log_every << '\n';
  return o.str();
}

std::string config_key(const TrainConfig& cfg) {
  if (cfg.beta == 0.0) return std::string("mode=") + to_string(cfg.mode);
  std::ostringstream o;
  o << "alpha=" << shortest(cfg.alpha) << ";beta=" << shortest(cfg.beta) << ";eta=" << shortest(cfg.eta)
    << ";steps=" << cfg.steps << ";refresh=" << cfg.refresh << ";resolution=" << cfg.resolution
    << ";mode=" << to_string(cfg.mode);
  return o.str();
}

std::string hash_key(const std::string& key) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(key)));
  return buf;
}

std::string config_hash(const TrainConfig& cfg) { return hash_key(config_key(cfg)); }

std::vector<TrainConfig> SweepGrid::expand() const {
  std::vector<TrainConfig> out;
  for (double a : alpha) {
    for (double b : beta) {
      for (double e : eta) {
        for (std::size_t m : steps) {
          for (std::size_t k : refresh) {
            for (std::size_t r : resolution) {
              for (FeatureMode md : mode) {
                for (std::uint64_t s : seed) {
                  TrainConfig c;
                  c.alpha = a;
                  c.beta = b;
                  c.eta = e;
                  c.steps = m;
                  c.refresh = k;
                  c.resolution = r;
                  c.mode = md;
                  c.seed = s;
                  c.log_every = log_every;
                  c.validate();
                  out.push_back(c);
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

SweepGrid parse_grid(const std::string& text, const std::string& source) {
  SweepGrid grid;
  for (const auto& [key, value] : parse_key_values(text, source)) {
    const auto items = split(value, ',');
    require(!items.empty() && std::none_of(items.begin(), items.end(), [](const auto& s) { return s.empty(); }),
            source + ": empty entry in '" + key + "'");
    const std::string what = source + ": " + key;
    const auto doubles = [&] {
      std::vector<double> v;
      for (const auto& s : items) v.push_back(parse_double(s, what));
      return v;
    };
    const auto sizes = [&] {
      std::vector<std::size_t> v;
      for (const auto& s : items) v.push_back(parse_int<std::size_t>(s, what));
      return v;
    };
    if (key == "alpha") {
      grid.alpha = doubles();
    } else if (key == "beta") {
      grid.beta = doubles();
    } else if (key == "eta") {
      grid.eta = doubles();
    } else if (key == "steps") {
      grid.steps = sizes();
    } else if (key == "refresh") {
      grid.refresh = sizes();
    } else if (key == "resolution") {
      grid.resolution = sizes();
    } else if (key == "mode") {
      grid.mode.clear();
      for (const auto& s : items) grid.mode.push_back(feature_mode_from_string(s));
    } else if (key == "seed") {
      grid.seed.clear();
      for (const auto& s : items) grid.seed.push_back(parse_int<std::uint64_t>(s, what));
    } else if (key == "log_every") {
      require(items.size() == 1, what + " takes one value");
      grid.log_every = parse_int<std::size_t>(items[0], what);
    } else if (key == "err_budget") {
      require(items.size() == 1, what + " takes one value");
      grid.err_budget = parse_double(items[0], what);
    } else if (key == "bins") {
      require(items.size() == 1, what + " takes one value");
      grid.bins = parse_int<std::size_t>(items[0], what);
      require(grid.bins >= 1, what + " must be positive");
    } else {
      throw Error(source + ": unknown key '" + key + "'");
    }
  }
  grid.expand();
  return grid;
}

SweepGrid load_grid(const fs::path& path) { return parse_grid(read_text(path), path.string()); }

void save_model(const fs::path& path, const ModelFile& model) {
  model.params.validate(model.d, model.k);
  std::ostringstream o;
  o << "wfair-model 1\n";
  o << "dataset " << model.dataset << '\n';
  o << "mode " << to_string(model.params.mode) << '\n';
  o << "d " << model.d << '\n';
  o << "k " << model.k << '\n';
  std::istringstream cfg(format_config(model.config));
  std::string line;
  while (std::getline(cfg, line)) {
    const auto eq = line.find(" = ");
    o << "config." << line.substr(0, eq) << ' ' << line.substr(eq + 3) << '\n';
  }
  o << "theta " << model.params.theta.size() << '\n';
  for (double v : model.params.theta) o << digits17(v) << '\n';
  write_text(path, o.str());
}

ModelFile load_model(const fs::path& path) {
  std::istringstream in(read_text(path));
  const std::string where = path.string();
  std::string line;
  require(std::getline(in, line) && trim(line) == "wfair-model 1", where + ": not a version 1 model file");
  ModelFile model;
  std::string config_text;
  bool have_mode = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto space = line.find(' ');
    require(space != std::string::npos, where + ": malformed line '" + line + "'");
    const std::string key = line.substr(0, space);
    const std::string value = trim(line.substr(space + 1));
    if (key == "dataset") {
      model.dataset = value;
    } else if (key == "mode") {
      model.params.mode = feature_mode_from_string(value);
      have_mode = true;
    } else if (key == "d") {
      model.d = parse_int<std::size_t>(value, where + ": d");
    } else if (key == "k") {
      model.k = parse_int<std::size_t>(value, where + ": k");
    } else if (key.rfind("config.", 0) == 0) {
      config_text += key.substr(7) + " = " + value + '\n';
    } else if (key == "theta") {
      const auto count = parse_int<std::size_t>(value, where + ": theta");
      for (std::size_t j = 0; j < count; ++j) {
        require(static_cast<bool>(std::getline(in, line)), where + ": truncated parameter list");
        model.params.theta.push_back(parse_double(trim(line), where + ": theta"));
      }
    } else {
      throw Error(where + ": unknown field '" + key + "'");
    }
  }
  require(have_mode, where + ": missing mode");
  model.config = parse_config(config_text, where);
  model.params.validate(model.d, model.k);
  return model;
}

void write_trajectory(const fs::path& path, const std::vector<TrajectoryPoint>& points) {
  std::set<int> groups;
  for (const auto& p : points) {
    for (const auto& [id, w] : p.group_w1) groups.insert(id);
  }
  std::ostringstream o;
  o << kTrajectoryColumns;
  for (int g : groups) o << ",w1_g" << g;
  o << '\n';
  for (const auto& p : points) {
    o << p.step << ',' << shortest(p.err_05) << ',' << shortest(p.err_exp) << ',' << shortest(p.dd_05) << ','
      << shortest(p.sdd) << ',' << shortest(p.spdd) << ',' << shortest(p.pseudo_spdd) << ',' << shortest(p.objective);
    for (int g : groups) {
      const auto it = p.group_w1.find(g);
      o << ',' << (it == p.group_w1.end() ? std::string() : shortest(it->second));
    }
    o << '\n';
  }
  write_text(path, o.str());
}

std::vector<TrajectoryPoint> read_trajectory(const fs::path& path) {
  std::istringstream in(read_text(path));
  const std::string where = path.string();
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), where + ": empty trajectory");
  const auto header = split(trim(line), ',');
  const auto fixed = split(kTrajectoryColumns, ',');
  require(header.size() >= fixed.size() && std::equal(fixed.begin(), fixed.end(), header.begin()),
          where + ": unexpected trajectory header");
  std::vector<int> groups;
  for (std::size_t c = fixed.size(); c < header.size(); ++c) {
    require(header[c].rfind("w1_g", 0) == 0, where + ": unexpected column '" + header[c] + "'");
    groups.push_back(parse_int<int>(header[c].substr(4), where));
  }
  std::vector<TrajectoryPoint> points;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    require(f.size() == header.size(), where + ": row width differs from header");
    TrajectoryPoint p;
    p.step = parse_int<std::size_t>(f[0], where);
    p.err_05 = parse_double(f[1], where);
    p.err_exp = parse_double(f[2], where);
    p.dd_05 = parse_double(f[3], where);
    p.sdd = parse_double(f[4], where);
    p.spdd = parse_double(f[5], where);
    p.pseudo_spdd = parse_double(f[6], where);
    p.objective = parse_double(f[7], where);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (!f[fixed.size() + g].empty()) p.group_w1[groups[g]] = parse_double(f[fixed.size() + g], where);
    }
    points.push_back(std::move(p));
  }
  return points;
}

void write_beliefs(const fs::path& path, const BeliefsFile& file) {
  std::ostringstream o;
  o << "# dataset=" << file.dataset << '\n';
  o << "# model=" << file.model << '\n';
  o << "# model_params=" << file.model_params << '\n';
  o << "# seed=" << file.seed << '\n';
  o << "# target=" << file.target << '\n';
  o << "# bins=" << file.bins << '\n';
  o << "split,row,group,y,original,adjusted\n";
  for (const auto& r : file.rows) {
    o << r.split << ',' << r.row << ',' << r.group << ',' << r.y << ',' << shortest(r.original) << ','
      << shortest(r.adjusted) << '\n';
  }
  write_text(path, o.str());
}

BeliefsFile read_beliefs(const fs::path& path) {
  std::istringstream in(read_text(path));
  const std::string where = path.string();
  BeliefsFile file;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("#", 0) == 0) {
      const auto eq = line.find('=');
      require(eq != std::string::npos, where + ": malformed metadata line");
      const std::string key = trim(line.substr(1, eq - 1));
      const std::string value = trim(line.substr(eq + 1));
      if (key == "dataset") file.dataset = value;
      if (key == "model") file.model = value;
      if (key == "model_params") file.model_params = value;
      if (key == "seed") file.seed = parse_int<std::uint64_t>(value, where + ": seed");
      if (key == "target") file.target = value;
      if (key == "bins") file.bins = parse_int<std::size_t>(value, where + ": bins");
      continue;
    }
    if (!header) {
      require(line == "split,row,group,y,original,adjusted", where + ": unexpected beliefs header");
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    require(f.size() == 6, where + ": beliefs row needs 6 fields");
    BeliefRow r;
    r.split = f[0];
    r.row = parse_int<std::size_t>(f[1], where);
    r.group = parse_int<int>(f[2], where);
    r.y = parse_int<int>(f[3], where);
    r.original = parse_double(f[4], where);
    r.adjusted = parse_double(f[5], where);
    file.rows.push_back(r);
  }
  require(header, where + ": missing beliefs header");
  return file;
}

void validate_row(const MetricsRow& row) {
  const auto& m = row.metrics;
  for (double v : {m.err_05, m.err_exp, m.dd_05, m.sdd, m.spdd, m.spdd_unordered, m.pseudo_spdd}) {
    require(std::isfinite(v), "metrics row for " + row.run + " has a non-finite value");
    require(v >= 0.0, "metrics row for " + row.run + " has a negative value");
  }
  require(m.err_05 <= 1.0 && m.err_exp <= 1.0, "metrics row for " + row.run + " has an error above 1");
  for (const auto* s : {&row.dataset, &row.split, &row.method, &row.run, &row.params}) {
    require(s->find_first_of(",\n") == std::string::npos, "metrics row field contains a separator: " + *s);
  }
}

std::string results_header() {
  return "dataset,split,method,run,config_hash,params,seed,err_05,err_exp,dd_05,sdd,spdd,spdd_unordered,pseudo_spdd";
}

std::string format_row(const MetricsRow& row) {
  const auto& m = row.metrics;
  std::ostringstream o;
  o << row.dataset << ',' << row.split << ',' << row.method << ',' << row.run << ',' << row.config_hash << ','
    << row.params << ',' << row.seed << ',' << shortest(m.err_05) << ',' << shortest(m.err_exp) << ','
    << shortest(m.dd_05) << ',' << shortest(m.sdd) << ',' << shortest(m.spdd) << ',' << shortest(m.spdd_unordered)
    << ',' << shortest(m.pseudo_spdd);
  return o.str();
}

MetricsRow parse_row(const std::string& line) {
  const auto f = split(line, ',');
  require(f.size() == 14, "results row needs 14 fields: " + line);
  MetricsRow r;
  r.dataset = f[0];
  r.split = f[1];
  r.method = f[2];
  r.run = f[3];
  r.config_hash = f[4];
  r.params = f[5];
  r.seed = parse_int<std::uint64_t>(f[6], "results seed");
  auto& m = r.metrics;
  m.err_05 = parse_double(f[7], "results");
  m.err_exp = parse_double(f[8], "results");
  m.dd_05 = parse_double(f[9], "results");
  m.sdd = parse_double(f[10], "results");
  m.spdd = parse_double(f[11], "results");
  m.spdd_unordered = parse_double(f[12], "results");
  m.pseudo_spdd = parse_double(f[13], "results");
  return r;
}

namespace {

// Exclusive advisory lock held for the lifetime of the object.
class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    require(fd_ >= 0, "cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw Error("cannot lock " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace

void append_results(const fs::path& store, const std::vector<MetricsRow>& rows) {
  for (const auto& r : rows) validate_row(r);
  if (store.has_parent_path()) fs::create_directories(store.parent_path());
  const FileLock lock(fs::path(store.string() + ".lock"));

  const bool fresh = !fs::exists(store) || fs::file_size(store) == 0;
  std::ofstream out(store, std::ios::binary | std::ios::app);
  require(static_cast<bool>(out), "cannot append to " + store.string());
  if (fresh) out << results_header() << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
  out.flush();
  require(static_cast<bool>(out), "failed appending to " + store.string());

  auto manifest_path = store;
  manifest_path.replace_extension(".manifest");
  std::set<std::string> known;
  if (fs::exists(manifest_path)) {
    std::istringstream in(read_text(manifest_path));
    std::string line;
    while (std::getline(in, line)) known.insert(line.substr(0, line.find(' ')));
  }
  std::ofstream manifest(manifest_path, std::ios::binary | std::ios::app);
  for (const auto& r : rows) {
    if (known.insert(r.config_hash).second) manifest << r.config_hash << ' ' << r.params << '\n';
  }
  require(static_cast<bool>(manifest), "failed appending to " + manifest_path.string());
}

std::vector<MetricsRow> read_results(const fs::path& store) {
  require(fs::exists(store), "results store " + store.string() + " does not exist");
  std::istringstream in(read_text(store));
  std::string line;
  std::vector<MetricsRow> rows;
  bool header = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (header) {
      require(line == results_header(), store.string() + ": unexpected results header");
      header = false;
      continue;
    }
    rows.push_back(parse_row(line));
  }
  return rows;
}

}  // namespace wfair::bench
