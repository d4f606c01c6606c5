#pragma once

// Ingestion of the UCI benchmark files into encoded Datasets.
//
// Every recipe follows the same path: load raw rows, drop rows with missing
// fields, split (predefined for Adult, seeded otherwise), fit the encoder on
// the training split only, then encode both splits and assign groups.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wfair/dataset.hpp"

namespace wfair {

enum class MalformedRows { error, drop };

struct CsvSchema {
  std::vector<std::string> columns;
  char delimiter = ',';
  bool has_header = false;
  std::size_t skip_lines = 0;
  std::vector<std::string> missing_tokens = {"?"};
  MalformedRows on_malformed = MalformedRows::error;
};

struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::size_t dropped_missing = 0;
  std::size_t dropped_malformed = 0;
  // Line numbers (1-based) of rows dropped as malformed.
  std::vector<std::size_t> malformed_lines;

  std::size_t column_index(const std::string& name) const;
};

// Fields are trimmed and stripped of surrounding double quotes. Blank lines
// are ignored. Rows containing a missing token are dropped and counted.
RawTable load_csv(const std::filesystem::path& path, const CsvSchema& schema);
RawTable parse_csv(const std::string& text, const CsvSchema& schema);

enum class Directive { one_hot, quantile_bin, center, passthrough, sensitive, label, drop };

struct ColumnDirective {
  std::string column;
  Directive kind = Directive::passthrough;
  // quantile_bin: number of equal-mass bins. sensitive: quantile groups when
  // neither `levels` nor `edges` is given (2 = split at the median).
  std::size_t bins = 5;
  // label: raw tokens meaning class 1 ...
  std::vector<std::string> positive;
  // ... or, when in (0,1), class 1 iff the value exceeds this training quantile.
  double label_quantile = 0.0;
  // sensitive, categorical: ordered levels; rows with any other value are filtered.
  std::vector<std::string> levels;
  // sensitive, numeric: fixed cut points (value > edge moves up a level).
  std::vector<double> edges;
};

struct EncodingSpec {
  std::vector<ColumnDirective> columns;

  void validate(const std::vector<std::string>& raw_columns) const;
};

// Vocabularies, bin edges, label cut-offs and sensitive levels learned from a
// training table.
class Encoder {
 public:
  static Encoder fit(const RawTable& train, const EncodingSpec& spec);

  struct Output {
    Dataset data;  // group_of left zero; see build_groups
    std::size_t filtered_rows = 0;
    std::size_t unseen_categories = 0;
  };

  // Unseen categories encode as an all-zero one-hot block and are counted.
  Output apply(const RawTable& table) const;

  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<std::string>& attribute_names() const noexcept { return attribute_names_; }
  std::size_t width() const noexcept { return feature_names_.size(); }

 private:
  struct Column {
    std::size_t index = 0;
    ColumnDirective directive;
    std::vector<std::string> vocabulary;
    std::vector<double> edges;
    double mean = 0.0;
    double label_cut = 0.0;
  };
  std::vector<Column> columns_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> attribute_names_;
};

// Interior quantile edges (linear interpolation) for `bins` equal-mass bins.
std::vector<double> quantile_edges(std::vector<double> values, std::size_t bins);
// Number of edges strictly below v, so ties land in the lower bin.
std::size_t bin_of(double v, const std::vector<double>& edges);

// Fits the encoder on `train` and applies it to both tables.
std::pair<Encoder::Output, Encoder::Output> encode(const RawTable& train, const RawTable& test,
                                                   const EncodingSpec& spec);

// Seeded Fisher-Yates permutation split into (train, test) row lists.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, std::size_t n_train,
                                                                            std::size_t n_test, std::uint64_t seed);
std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t n_train, std::size_t n_test, std::uint64_t seed);

struct PipelineReport {
  std::string dataset;
  std::size_t raw_rows = 0;
  // Raw rows assigned to each split, before any row was dropped.
  std::size_t raw_train_rows = 0;
  std::size_t raw_test_rows = 0;
  std::size_t dropped_missing = 0;
  std::size_t dropped_malformed = 0;
  std::size_t dropped_filtered = 0;
  std::size_t unseen_categories = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  std::size_t expected_d = 0;
  std::map<int, std::size_t> train_group_sizes;
  std::map<int, std::string> group_names;
  std::vector<std::pair<std::string, std::string>> checksums;
  std::vector<std::string> notes;

  std::string describe() const;
};

struct PreparedData {
  Dataset train;
  Dataset test;
  PipelineReport report;
};

// adult, german, bank, crime.
const std::vector<std::string>& dataset_names();

// Raw files for `name` relative to the data directory.
std::vector<std::string> raw_files(const std::string& name);

// Data directory from an explicit flag, else WFAIR_DATA_DIR, else "data".
std::filesystem::path resolve_data_dir(const std::string& flag);

// Runs the full recipe. With verify_checksums, raw files with a known
// SHA-256 must match it.
PreparedData prepare_dataset(const std::string& name, const std::filesystem::path& data_dir, std::uint64_t seed,
                             bool verify_checksums = true);

// Group ids assigned from sensitive attributes, per dataset:
//   adult  race(Black=0, White=1) * 2 + sex(Female=0, Male=1)
//   german age > 30
//   bank   age quintile 0..4
//   crime  bitmask of race fractions above their training medians
// Rows are relabelled in place; groups that end up empty raise an error
// naming the group.
void build_groups(Dataset& data, const std::string& recipe);

std::string sha256_file(const std::filesystem::path& path);

// Column-ordered CSV snapshot: group,y,<attribute columns>,<feature columns>
// with shortest round-trip decimal values.
void write_snapshot(const Dataset& data, const std::filesystem::path& path);
Dataset read_snapshot(const std::filesystem::path& path);

}  // namespace wfair
