#include "wfair/data_pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "wfair/error.hpp"

namespace wfair {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == delimiter && !quoted) {
      out.push_back(unquote(trim(field)));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(unquote(trim(field)));
  return out;
}

double to_number(const std::string& field, const std::string& column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw Error("column '" + column + "': '" + field + "' is not a number");
  }
  return v;
}

std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Linear-interpolation quantile of sorted values at level p in [0,1].
double interpolated_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::size_t RawTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  require(it != columns.end(), "no column named '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

RawTable parse_csv(const std::string& text, const CsvSchema& schema) {
  RawTable table;
  table.columns = schema.columns;
  const std::set<std::string> missing(schema.missing_tokens.begin(), schema.missing_tokens.end());

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = schema.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no <= schema.skip_lines) continue;
    const std::string body = trim(line);
    if (body.empty()) continue;
    auto fields = split_fields(body, schema.delimiter);
    if (header_pending) {
      header_pending = false;
      if (table.columns.empty()) {
        table.columns = fields;
      } else if (fields.size() != table.columns.size()) {
        throw Error("schema error: header has " + std::to_string(fields.size()) + " columns, schema expects " +
                    std::to_string(table.columns.size()));
      }
      continue;
    }
    if (table.columns.empty()) throw Error("schema error: no column names and no header row");
    if (fields.size() != table.columns.size()) {
      if (schema.on_malformed == MalformedRows::error) {
        throw Error("malformed row at line " + std::to_string(line_no) + ": expected " +
                    std::to_string(table.columns.size()) + " fields, got " + std::to_string(fields.size()));
      }
      ++table.dropped_malformed;
      table.malformed_lines.push_back(line_no);
      continue;
    }
    const bool has_missing =
        std::any_of(fields.begin(), fields.end(), [&](const std::string& f) { return missing.count(f) > 0; });
    if (has_missing) {
      ++table.dropped_missing;
      continue;
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str(), schema);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void EncodingSpec::validate(const std::vector<std::string>& raw_columns) const {
  std::map<std::string, int> seen;
  std::size_t labels = 0;
  for (const auto& c : columns) {
    require(std::find(raw_columns.begin(), raw_columns.end(), c.column) != raw_columns.end(),
            "encoding names unknown column '" + c.column + "'");
    require(++seen[c.column] == 1, "column '" + c.column + "' has more than one directive");
    if (c.kind == Directive::label) ++labels;
    if (c.kind == Directive::quantile_bin) require(c.bins >= 1, "column '" + c.column + "' needs at least one bin");
    if (c.kind == Directive::sensitive && c.levels.empty() && c.edges.empty()) {
      require(c.bins >= 1, "column '" + c.column + "' needs at least one group");
    }
  }
  for (const auto& name : raw_columns) require(seen.count(name) == 1, "column '" + name + "' has no directive");
  require(labels == 1, "encoding needs exactly one label column");
}

std::vector<double> quantile_edges(std::vector<double> values, std::size_t bins) {
  require(bins >= 1, "quantile bin count must be positive");
  require(!values.empty(), "quantile edges of an empty column");
  std::sort(values.begin(), values.end());
  std::vector<double> edges;
  for (std::size_t b = 1; b < bins; ++b) {
    edges.push_back(interpolated_quantile(values, static_cast<double>(b) / static_cast<double>(bins)));
  }
  return edges;
}

std::size_t bin_of(double v, const std::vector<double>& edges) {
  return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
}

Encoder Encoder::fit(const RawTable& train, const EncodingSpec& spec) {
  spec.validate(train.columns);
  require(!train.rows.empty(), "cannot fit an encoding on an empty table");
  Encoder enc;
  for (const auto& d : spec.columns) {
    Column col;
    col.index = train.column_index(d.column);
    col.directive = d;
    enc.columns_.push_back(std::move(col));
  }

  // Rows outside the sensitive levels take no part in fitting.
  std::vector<const std::vector<std::string>*> kept;
  for (const auto& row : train.rows) {
    bool keep = true;
    for (const auto& col : enc.columns_) {
      const auto& lv = col.directive.levels;
      if (col.directive.kind == Directive::sensitive && !lv.empty() &&
          std::find(lv.begin(), lv.end(), row[col.index]) == lv.end()) {
        keep = false;
      }
    }
    if (keep) kept.push_back(&row);
  }
  require(!kept.empty(), "no training rows left after sensitive-level filtering");

  const auto numbers = [&](const Column& col) {
    std::vector<double> v;
    v.reserve(kept.size());
    for (const auto* row : kept) v.push_back(to_number((*row)[col.index], col.directive.column));
    return v;
  };

  for (auto& col : enc.columns_) {
    const auto& d = col.directive;
    switch (d.kind) {
      case Directive::one_hot: {
        std::set<std::string> vocab;
        for (const auto* row : kept) vocab.insert((*row)[col.index]);
        col.vocabulary.assign(vocab.begin(), vocab.end());
        for (const auto& v : col.vocabulary) enc.feature_names_.push_back(d.column + "=" + v);
        break;
      }
      case Directive::quantile_bin:
        col.edges = quantile_edges(numbers(col), d.bins);
        for (std::size_t b = 0; b < d.bins; ++b) enc.feature_names_.push_back(d.column + "#q" + std::to_string(b));
        break;
      case Directive::center: {
        const auto v = numbers(col);
        col.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        enc.feature_names_.push_back(d.column);
        break;
      }
      case Directive::passthrough:
        numbers(col);
        enc.feature_names_.push_back(d.column);
        break;
      case Directive::sensitive:
        if (d.levels.empty()) col.edges = d.edges.empty() ? quantile_edges(numbers(col), d.bins) : d.edges;
        enc.attribute_names_.push_back(d.column);
        break;
      case Directive::label:
        if (d.positive.empty()) {
          require(d.label_quantile > 0.0 && d.label_quantile < 1.0,
                  "label column '" + d.column + "' needs positive tokens or a quantile in (0,1)");
          auto v = numbers(col);
          std::sort(v.begin(), v.end());
          col.label_cut = interpolated_quantile(v, d.label_quantile);
        }
        break;
      case Directive::drop:
        break;
    }
  }
  return enc;
}

Encoder::Output Encoder::apply(const RawTable& table) const {
  Output out;
  auto& data = out.data;
  data.d = feature_names_.size();
  data.k = attribute_names_.size();
  data.feature_names = feature_names_;
  data.attribute_names = attribute_names_;

  std::vector<double> xrow;
  std::vector<int> arow;
  for (const auto& row : table.rows) {
    require(row.size() == table.columns.size(), "row width differs from the table's columns");
    xrow.clear();
    arow.clear();
    int label = -1;
    bool filtered = false;
    std::size_t unseen = 0;
    for (const auto& col : columns_) {
      const auto& d = col.directive;
      const std::string& field = row[col.index];
      switch (d.kind) {
        case Directive::one_hot: {
          const auto it = std::lower_bound(col.vocabulary.begin(), col.vocabulary.end(), field);
          const bool known = it != col.vocabulary.end() && *it == field;
          if (!known) ++unseen;
          for (std::size_t v = 0; v < col.vocabulary.size(); ++v) {
            xrow.push_back(known && v == static_cast<std::size_t>(it - col.vocabulary.begin()) ? 1.0 : 0.0);
          }
          break;
        }
        case Directive::quantile_bin: {
          const std::size_t b = bin_of(to_number(field, d.column), col.edges);
          for (std::size_t i = 0; i < d.bins; ++i) xrow.push_back(i == b ? 1.0 : 0.0);
          break;
        }
        case Directive::center:
          xrow.push_back(to_number(field, d.column) - col.mean);
          break;
        case Directive::passthrough:
          xrow.push_back(to_number(field, d.column));
          break;
        case Directive::sensitive:
          if (!d.levels.empty()) {
            const auto it = std::find(d.levels.begin(), d.levels.end(), field);
            if (it == d.levels.end()) {
              filtered = true;
              arow.push_back(0);
            } else {
              arow.push_back(static_cast<int>(it - d.levels.begin()));
            }
          } else {
            arow.push_back(static_cast<int>(bin_of(to_number(field, d.column), col.edges)));
          }
          break;
        case Directive::label:
          if (!d.positive.empty()) {
            label = std::find(d.positive.begin(), d.positive.end(), field) != d.positive.end() ? 1 : 0;
          } else {
            label = to_number(field, d.column) > col.label_cut ? 1 : 0;
          }
          break;
        case Directive::drop:
          break;
      }
    }
    if (filtered) {
      ++out.filtered_rows;
      continue;
    }
    out.unseen_categories += unseen;
    data.x.insert(data.x.end(), xrow.begin(), xrow.end());
    data.a.insert(data.a.end(), arow.begin(), arow.end());
    data.y.push_back(label);
    ++data.n;
  }
  data.group_of.assign(data.n, 0);
  data.finalize();
  return out;
}

std::pair<Encoder::Output, Encoder::Output> encode(const RawTable& train, const RawTable& test,
                                                   const EncodingSpec& spec) {
  require(train.columns == test.columns, "train and test tables have different columns");
  const auto enc = Encoder::fit(train, spec);
  return {enc.apply(train), enc.apply(test)};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, std::size_t n_train,
                                                                            std::size_t n_test, std::uint64_t seed) {
  require(n_train <= n && n_test <= n - n_train,
          "split sizes " + std::to_string(n_train) + " + " + std::to_string(n_test) + " exceed " + std::to_string(n) +
              " rows");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Explicit Fisher-Yates: std::shuffle's draw pattern is implementation-defined.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
  const auto [tr, te] = split_indices(data.n, n_train, n_test, seed);
  return {data.subset(tr), data.subset(te)};
}

void build_groups(Dataset& data, const std::string& recipe) {
  std::vector<int> expected;
  const auto attr = [&](std::size_t r, std::size_t j) { return data.a[r * data.k + j]; };
  std::function<int(std::size_t)> group;
  if (recipe == "adult") {
    require(data.k == 2, "adult groups need (race, sex) attributes");
    group = [&](std::size_t r) { return 2 * attr(r, 0) + attr(r, 1); };
    expected = {0, 1, 2, 3};
  } else if (recipe == "german") {
    require(data.k == 1, "german groups need one age attribute");
    group = [&](std::size_t r) { return attr(r, 0); };
    expected = {0, 1};
  } else if (recipe == "bank") {
    require(data.k == 1, "bank groups need one age attribute");
    group = [&](std::size_t r) { return attr(r, 0); };
    expected = {0, 1, 2, 3, 4};
  } else if (recipe == "crime") {
    require(data.k >= 1 && data.k < 31, "crime groups need between 1 and 30 attributes");
    group = [&](std::size_t r) {
      int mask = 0;
      for (std::size_t j = 0; j < data.k; ++j) mask |= (attr(r, j) > 0 ? 1 : 0) << j;
      return mask;
    };
  } else if (recipe == "single") {
    group = [](std::size_t) { return 0; };
  } else if (recipe == "attribute") {
    require(data.k >= 1, "attribute groups need at least one attribute");
    group = [&](std::size_t r) { return attr(r, 0); };
  } else {
    throw Error("unknown group recipe '" + recipe + "'");
  }
  for (std::size_t r = 0; r < data.n; ++r) data.group_of[r] = group(r);
  data.group_sizes.clear();
  for (int g : data.group_of) ++data.group_sizes[g];
  std::string empty;
  for (int g : expected) {
    if (data.group_sizes.count(g) == 0) empty += (empty.empty() ? "" : ", ") + std::to_string(g);
  }
  require(empty.empty(), recipe + ": empty group(s) after filtering: " + empty);
  data.validate();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  require(ctx != nullptr && EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1, "sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

std::string PipelineReport::describe() const {
  std::ostringstream o;
  o << "dataset = " << dataset << '\n';
  o << "raw_rows = " << raw_rows << '\n';
  o << "raw_train_rows = " << raw_train_rows << '\n';
  o << "raw_test_rows = " << raw_test_rows << '\n';
  o << "dropped_missing = " << dropped_missing << '\n';
  o << "dropped_malformed = " << dropped_malformed << '\n';
  o << "dropped_filtered = " << dropped_filtered << '\n';
  o << "unseen_categories = " << unseen_categories << '\n';
  o << "train_rows = " << train_rows << '\n';
  o << "test_rows = " << test_rows << '\n';
  o << "d = " << d << '\n';
  if (expected_d != 0) o << "expected_d = " << expected_d << '\n';
  o << "k = " << k << '\n';
  o << "groups = " << train_group_sizes.size() << '\n';
  for (const auto& [id, size] : train_group_sizes) {
    o << "group." << id << " = " << size;
    if (const auto it = group_names.find(id); it != group_names.end()) o << ' ' << it->second;
    o << '\n';
  }
  for (const auto& [file, sum] : checksums) o << "sha256." << file << " = " << sum << '\n';
  for (const auto& note : notes) o << "note = " << note << '\n';
  return o.str();
}

const std::vector<std::string>& dataset_names() {
  static const std::vector<std::string> names = {"adult", "german", "bank", "crime"};
  return names;
}

std::vector<std::string> raw_files(const std::string& name) {
  if (name == "adult") return {"adult/adult.data", "adult/adult.test"};
  if (name == "german") return {"german/german.data"};
  if (name == "bank") return {"bank/bank-additional-full.csv"};
  if (name == "crime") return {"crime/communities.data"};
  throw Error("unknown dataset '" + name + "' (expected adult, german, bank or crime)");
}

std::filesystem::path resolve_data_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("WFAIR_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "data";
}

namespace {

const std::map<std::string, std::string>& known_checksums() {
  static const std::map<std::string, std::string> sums = {
      {"adult/adult.data", "5b00264637dbfec36bdeaab5676b0b309ff9eb788d63554ca0a249491c86603d"},
      {"adult/adult.test", "a2a9044bc167a35b2361efbabec64e89d69ce82d9790d2980119aac5fd7e9c05"},
      {"german/german.data", "b21f3d81db8071257d5ff1deaeba1fd4303b62712e6fcc9715c7a86202cb5871"},
  };
  return sums;
}

struct Recipe {
  CsvSchema schema;
  EncodingSpec spec;
  std::string groups;
  std::size_t expected_d = 0;
  std::size_t n_train = 0;  // seeded split sizes; 0 for a predefined split
  std::size_t n_test = 0;
  std::map<int, std::string> group_names;
};

ColumnDirective col(std::string name, Directive kind) {
  ColumnDirective d;
  d.column = std::move(name);
  d.kind = kind;
  return d;
}

Recipe adult_recipe() {
  Recipe r;
  r.schema.columns = {"age",          "workclass",    "fnlwgt",       "education",    "education-num",
                      "marital-status", "occupation", "relationship", "race",         "sex",
                      "capital-gain", "capital-loss", "hours-per-week", "native-country", "income"};
  for (const char* c : {"age", "fnlwgt", "education-num", "capital-gain", "capital-loss", "hours-per-week"}) {
    r.spec.columns.push_back(col(c, Directive::quantile_bin));
  }
  for (const char* c : {"workclass", "education", "marital-status", "occupation", "relationship", "native-country"}) {
    r.spec.columns.push_back(col(c, Directive::one_hot));
  }
  auto race = col("race", Directive::sensitive);
  race.levels = {"Black", "White"};
  auto sex = col("sex", Directive::sensitive);
  sex.levels = {"Female", "Male"};
  auto label = col("income", Directive::label);
  label.positive = {">50K", ">50K."};
  r.spec.columns.insert(r.spec.columns.end(), {race, sex, label});
  r.groups = "adult";
  r.expected_d = 122;
  r.group_names = {{0, "black-female"}, {1, "black-male"}, {2, "white-female"}, {3, "white-male"}};
  return r;
}

Recipe german_recipe() {
  Recipe r;
  r.schema.delimiter = ' ';
  r.schema.columns = {"status",   "duration", "history",   "purpose",     "amount",    "savings",  "employment",
                      "rate",     "personal", "debtors",   "residence",   "property",  "age",      "plans",
                      "housing",  "credits",  "job",       "liable",      "telephone", "foreign",  "class"};
  for (const auto& c : r.schema.columns) {
    if (c == "duration" || c == "amount") {
      r.spec.columns.push_back(col(c, Directive::quantile_bin));
    } else if (c == "age") {
      auto age = col(c, Directive::sensitive);
      age.edges = {30.0};
      r.spec.columns.push_back(age);
    } else if (c == "class") {
      auto label = col(c, Directive::label);
      label.positive = {"1"};
      r.spec.columns.push_back(label);
    } else {
      r.spec.columns.push_back(col(c, Directive::one_hot));
    }
  }
  r.groups = "german";
  r.n_train = 670;
  r.n_test = 330;
  r.group_names = {{0, "age<=30"}, {1, "age>30"}};
  return r;
}

Recipe bank_recipe() {
  Recipe r;
  r.schema.delimiter = ';';
  r.schema.has_header = true;
  r.schema.missing_tokens = {};
  r.schema.columns = {"age",      "job",      "marital",        "education",      "default",   "housing",
                      "loan",     "contact",  "month",          "day_of_week",    "duration",  "campaign",
                      "pdays",    "previous", "poutcome",       "emp.var.rate",   "cons.price.idx",
                      "cons.conf.idx", "euribor3m", "nr.employed", "y"};
  for (const auto& c : r.schema.columns) {
    if (c == "age") {
      auto age = col(c, Directive::sensitive);
      age.bins = 5;
      r.spec.columns.push_back(age);
    } else if (c == "y") {
      auto label = col(c, Directive::label);
      label.positive = {"yes"};
      r.spec.columns.push_back(label);
    } else if (c == "duration" || c == "pdays") {
      r.spec.columns.push_back(col(c, Directive::drop));
    } else if (c == "cons.price.idx" || c == "cons.conf.idx" || c == "euribor3m" || c == "nr.employed") {
      r.spec.columns.push_back(col(c, Directive::center));
    } else if (c == "campaign" || c == "previous" || c == "emp.var.rate") {
      r.spec.columns.push_back(col(c, Directive::passthrough));
    } else {
      r.spec.columns.push_back(col(c, Directive::one_hot));
    }
  }
  r.groups = "bank";
  r.expected_d = 60;
  r.n_train = 32950;
  r.n_test = 8238;
  r.group_names = {{0, "age-q1"}, {1, "age-q2"}, {2, "age-q3"}, {3, "age-q4"}, {4, "age-q5"}};
  return r;
}

// Columns 0-4 are identifiers, 7-10 the race fractions, 127 the crime rate.
// Columns holding any missing value are dropped once the file is read.
Recipe crime_recipe() {
  Recipe r;
  r.schema.missing_tokens = {};
  for (int c = 0; c < 128; ++c) r.schema.columns.push_back("c" + std::to_string(c));
  const std::map<int, std::string> names = {{7, "racepctblack"}, {8, "racePctWhite"}, {9, "racePctAsian"},
                                            {10, "racePctHisp"}, {127, "ViolentCrimesPerPop"}};
  for (const auto& [c, name] : names) r.schema.columns[static_cast<std::size_t>(c)] = name;
  for (int c = 0; c < 128; ++c) {
    const auto& name = r.schema.columns[static_cast<std::size_t>(c)];
    if (c < 5) {
      r.spec.columns.push_back(col(name, Directive::drop));
    } else if (c >= 7 && c <= 10) {
      auto race = col(name, Directive::sensitive);
      race.bins = 2;
      r.spec.columns.push_back(race);
    } else if (c == 127) {
      auto label = col(name, Directive::label);
      label.label_quantile = 0.7;
      r.spec.columns.push_back(label);
    } else {
      r.spec.columns.push_back(col(name, Directive::passthrough));
    }
  }
  r.groups = "crime";
  r.n_train = 1495;
  r.n_test = 499;
  return r;
}

Recipe recipe_for(const std::string& name) {
  if (name == "adult") return adult_recipe();
  if (name == "german") return german_recipe();
  if (name == "bank") return bank_recipe();
  if (name == "crime") return crime_recipe();
  throw Error("unknown dataset '" + name + "' (expected adult, german, bank or crime)");
}

RawTable take_rows(const RawTable& table, const std::vector<std::size_t>& rows) {
  RawTable out;
  out.columns = table.columns;
  for (std::size_t r : rows) out.rows.push_back(table.rows[r]);
  return out;
}

// Switches to `drop` every column in which a '?' appears, then removes no rows.
void drop_incomplete_columns(const RawTable& table, EncodingSpec& spec, PipelineReport& report) {
  std::size_t dropped = 0;
  for (auto& d : spec.columns) {
    if (d.kind == Directive::drop) continue;
    const std::size_t c = table.column_index(d.column);
    const bool incomplete =
        std::any_of(table.rows.begin(), table.rows.end(), [&](const auto& row) { return row[c] == "?"; });
    if (incomplete) {
      require(d.kind == Directive::passthrough, "column '" + d.column + "' has missing values");
      d.kind = Directive::drop;
      ++dropped;
    }
  }
  report.notes.push_back("dropped " + std::to_string(dropped) + " columns with missing values");
}

}  // namespace

PreparedData prepare_dataset(const std::string& name, const std::filesystem::path& data_dir, std::uint64_t seed,
                             bool verify_checksums) {
  Recipe recipe = recipe_for(name);
  PreparedData out;
  auto& report = out.report;
  report.dataset = name;
  report.expected_d = recipe.expected_d;
  report.group_names = recipe.group_names;

  const auto files = raw_files(name);
  for (const auto& rel : files) {
    const auto path = data_dir / rel;
    require(std::filesystem::exists(path),
            "missing raw file " + path.string() + " (run tools/fetch_data.py or set WFAIR_DATA_DIR)");
    const std::string sum = sha256_file(path);
    if (verify_checksums) {
      const auto it = known_checksums().find(rel);
      if (it != known_checksums().end() && it->second != sum) {
        throw Error("checksum mismatch for " + path.string() + ": expected " + it->second + ", got " + sum);
      }
    }
    report.checksums.emplace_back(rel, sum);
  }

  RawTable train_raw;
  RawTable test_raw;
  if (name == "adult") {
    train_raw = load_csv(data_dir / files[0], recipe.schema);
    CsvSchema test_schema = recipe.schema;
    test_schema.skip_lines = 1;
    test_raw = load_csv(data_dir / files[1], test_schema);
    report.raw_train_rows = train_raw.rows.size() + train_raw.dropped_missing + train_raw.dropped_malformed;
    report.raw_test_rows = test_raw.rows.size() + test_raw.dropped_missing + test_raw.dropped_malformed;
    report.dropped_missing = train_raw.dropped_missing + test_raw.dropped_missing;
    report.dropped_malformed = train_raw.dropped_malformed + test_raw.dropped_malformed;
  } else {
    const RawTable all = load_csv(data_dir / files[0], recipe.schema);
    if (name == "crime") drop_incomplete_columns(all, recipe.spec, report);
    report.dropped_missing = all.dropped_missing;
    report.dropped_malformed = all.dropped_malformed;
    const auto [tr, te] = split_indices(all.rows.size(), recipe.n_train, recipe.n_test, seed);
    train_raw = take_rows(all, tr);
    test_raw = take_rows(all, te);
    report.raw_train_rows = tr.size();
    report.raw_test_rows = te.size();
    if (all.rows.size() != recipe.n_train + recipe.n_test) {
      report.notes.push_back(std::to_string(all.rows.size() - recipe.n_train - recipe.n_test) +
                             " usable rows left out of the split");
    }
  }
  report.raw_rows = report.raw_train_rows + report.raw_test_rows;

  auto [train, test] = encode(train_raw, test_raw, recipe.spec);
  report.dropped_filtered = train.filtered_rows + test.filtered_rows;
  report.unseen_categories = train.unseen_categories + test.unseen_categories;
  build_groups(train.data, recipe.groups);
  build_groups(test.data, recipe.groups);

  if (name == "crime") {
    // Test rows whose threshold pattern never occurs in training have no group to be compared with.
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < test.data.n; ++r) {
      if (train.data.group_sizes.count(test.data.group_of[r]) != 0) keep.push_back(r);
    }
    if (keep.size() != test.data.n) {
      report.notes.push_back(std::to_string(test.data.n - keep.size()) +
                             " test rows with a group pattern absent from training dropped");
      report.dropped_filtered += test.data.n - keep.size();
      test.data = test.data.subset(keep);
    }
  }

  report.train_rows = train.data.n;
  report.test_rows = test.data.n;
  report.d = train.data.d;
  report.k = train.data.k;
  report.train_group_sizes = train.data.group_sizes;
  if (report.expected_d != 0 && report.d != report.expected_d) {
    report.notes.push_back("feature count " + std::to_string(report.d) + " differs from the reference " +
                           std::to_string(report.expected_d));
  }
  out.train = std::move(train.data);
  out.test = std::move(test.data);
  return out;
}

void write_snapshot(const Dataset& data, const std::filesystem::path& path) {
  data.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), "cannot write " + path.string());
  const auto checked = [](const std::string& name) {
    require(name.find_first_of(",\n\r") == std::string::npos, "column name '" + name + "' contains a separator");
    return name;
  };
  out << "group,y";
  for (std::size_t j = 0; j < data.k; ++j) {
    out << ",a:" << checked(j < data.attribute_names.size() ? data.attribute_names[j] : "a" + std::to_string(j));
  }
  for (std::size_t j = 0; j < data.d; ++j) {
    out << ",x:" << checked(j < data.feature_names.size() ? data.feature_names[j] : "x" + std::to_string(j));
  }
  out << '\n';
  for (std::size_t r = 0; r < data.n; ++r) {
    out << data.group_of[r] << ',' << data.y[r];
    for (int v : data.attributes(r)) out << ',' << v;
    for (double v : data.features(r)) out << ',' << format_number(v);
    out << '\n';
  }
  require(static_cast<bool>(out), "failed writing " + path.string());
}

Dataset read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), path.string() + ": empty snapshot");
  const auto header = split_fields(line, ',');
  require(header.size() >= 2 && header[0] == "group" && header[1] == "y", path.string() + ": not a dataset snapshot");
  Dataset data;
  for (std::size_t c = 2; c < header.size(); ++c) {
    if (header[c].rfind("a:", 0) == 0) {
      require(data.d == 0, path.string() + ": attribute column after feature columns");
      data.attribute_names.push_back(header[c].substr(2));
      ++data.k;
    } else if (header[c].rfind("x:", 0) == 0) {
      data.feature_names.push_back(header[c].substr(2));
      ++data.d;
    } else {
      throw Error(path.string() + ": unexpected column '" + header[c] + "'");
    }
  }
  std::size_t line_no = 1;
  const auto parse_int = [&](const std::string& f) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    require(ec == std::errc() && ptr == f.data() + f.size(),
            path.string() + ": line " + std::to_string(line_no) + ": bad integer '" + f + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line, ',');
    require(fields.size() == header.size(), path.string() + ": line " + std::to_string(line_no) + " has " +
                                                std::to_string(fields.size()) + " fields, expected " +
                                                std::to_string(header.size()));
    data.group_of.push_back(parse_int(fields[0]));
    data.y.push_back(parse_int(fields[1]));
    for (std::size_t j = 0; j < data.k; ++j) data.a.push_back(parse_int(fields[2 + j]));
    for (std::size_t j = 0; j < data.d; ++j) data.x.push_back(to_number(fields[2 + data.k + j], header[2 + data.k + j]));
    ++data.n;
  }
  data.finalize();
  return data;
}

}  // namespace wfair
