#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdafc/dataset.hpp"
#include "sdafc/federation.hpp"

namespace sdafc {

/// Where the experiment data comes from: a CSV on disk or one of the
/// built-in generated toys ("toy2", "toy4", "toy-skew").
struct DatasetSpec {
  std::string kind = "toy2";
  std::string path;
  std::optional<int> label_column;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<std::string> methods{"sda-fc-km"};
  std::vector<double> p_grid{0.0};
  std::vector<double> rates{0.0};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int k = 2;
  int m = 2;
  double fuzzy_degree = 1.1;
  SdaFcOptions sda;
  BaselineOptions baseline;
  std::string out_dir = "results";
  bool dump_synthetic = false;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

/// One row of the results CSV.
struct RunRecord {
  std::string dataset;
  std::string method;
  double p = 0.0;
  double rate = 0.0;
  std::uint64_t seed = 0;
  int k = 0;
  int m = 0;
  double fuzzy_degree = 1.1;
  double nmi = 0.0;
  double kappa = 0.0;
  double wall_time_s = 0.0;
  int uploads = 0;
  int broadcasts = 0;
  std::string error;

  bool ok() const { return error.empty(); }
};

/// Instantiate the dataset; generated toys are seeded so each experiment
/// seed sees a fresh draw of the same distribution.
LabeledDataset make_dataset(const DatasetSpec& spec, std::uint64_t seed);

/// One grid cell, reproducible from exactly these arguments.
RunRecord run_cell(const ExperimentConfig& cfg, const LabeledDataset& ds,
                   const std::string& method, double p, double rate,
                   std::uint64_t seed);

/// Cartesian product methods x p x rates x seeds, canonical order. Run
/// errors become failed rows; the grid continues.
std::vector<RunRecord> run_grid(const ExperimentConfig& cfg);

extern const char* kResultsCsvHeader;
void write_results_csv(const std::vector<RunRecord>& rows,
                       const std::string& path);
std::vector<RunRecord> read_results_csv(const std::string& path);

/// Per-(dataset, method, p) mean NMI and Kappa tables plus, per metric, a
/// count row: in how many (dataset, p) cells each method beats its
/// same-family rival (sda-fc-km vs k-fed, sda-fc-fcm vs ffcm).
std::string summarize(const std::vector<RunRecord>& rows);

/// CSV "rate,mean_nmi,mean_kappa,runs" over rows of one dataset + method.
std::string emit_failure_curve(const std::vector<RunRecord>& rows,
                               const std::string& dataset,
                               const std::string& method);

}  // namespace sdafc
