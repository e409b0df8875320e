#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdafc/errors.hpp"
#include "sdafc/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sdafc::ParseError("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_run(const std::string& config_path, const std::string& dataset,
            const std::vector<std::string>& methods,
            const std::vector<double>& p, const std::vector<double>& rates,
            const std::vector<std::uint64_t>& seeds, int k, int m,
            double fuzzy_degree, const std::string& out, int parallel_clients,
            bool dump_synthetic, const std::string& synthesizer,
            int gan_epochs) {
  sdafc::ExperimentConfig cfg;
  if (!config_path.empty())
    cfg = sdafc::config_from_json(read_file(config_path));

  // CLI flags override file values.
  if (!dataset.empty()) {
    if (dataset.size() > 4 && dataset.substr(dataset.size() - 4) == ".csv") {
      cfg.dataset.kind = "csv";
      cfg.dataset.path = dataset;
    } else {
      cfg.dataset.kind = dataset;
    }
  }
  if (!methods.empty()) cfg.methods = methods;
  if (!p.empty()) cfg.p_grid = p;
  if (!rates.empty()) cfg.rates = rates;
  if (!seeds.empty()) cfg.seeds = seeds;
  if (k > 0) cfg.k = k;
  if (m > 0) cfg.m = m;
  if (fuzzy_degree > 0) cfg.fuzzy_degree = fuzzy_degree;
  if (!out.empty()) cfg.out_dir = out;
  if (parallel_clients > 0) cfg.sda.parallel_clients = parallel_clients;
  if (dump_synthetic) cfg.dump_synthetic = true;
  if (!synthesizer.empty())
    cfg.sda.synthesizer = synthesizer == "gmm" ? sdafc::SynthesizerKind::Gmm
                                               : sdafc::SynthesizerKind::Gan;
  if (gan_epochs > 0) cfg.sda.gan.epochs = gan_epochs;

  // Round-trip through JSON so validation applies to overridden values too.
  cfg = sdafc::config_from_json(sdafc::config_to_json(cfg));

  const auto rows = sdafc::run_grid(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string results = cfg.out_dir + "/results.csv";
  sdafc::write_results_csv(rows, results);
  {
    std::ofstream cfg_out(cfg.out_dir + "/config.json");
    cfg_out << sdafc::config_to_json(cfg) << "\n";
  }
  int failed = 0;
  for (const auto& r : rows)
    if (!r.ok()) ++failed;
  std::cout << rows.size() << " run(s) written to " << results;
  if (failed) std::cout << " (" << failed << " failed)";
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated clustering experiment runner"};
  app.require_subcommand(1);

  // run
  std::string config_path, dataset, out, synthesizer;
  std::vector<std::string> methods;
  std::vector<double> p, rates;
  std::vector<std::uint64_t> seeds;
  int k = 0, m = 0, parallel_clients = 0, gan_epochs = 0;
  double fuzzy_degree = 0;
  bool dump_synthetic = false;
  auto* run = app.add_subcommand("run", "execute an experiment grid");
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--dataset", dataset,
                  "toy2 | toy4 | toy-skew | path to a CSV");
  run->add_option("--methods", methods,
                  "sda-fc-km sda-fc-fcm k-fed ffcm km-central fcm-central "
                  "oracle");
  run->add_option("--p", p, "non-IID levels in [0,1]");
  run->add_option("--rates", rates, "disconnection rates in [0,1]");
  run->add_option("--seeds", seeds, "experiment seeds");
  run->add_option("--k", k, "number of clusters");
  run->add_option("--m", m, "number of clients");
  run->add_option("--fuzzy-degree", fuzzy_degree, "FCM fuzzy degree");
  run->add_option("--out", out, "output directory");
  run->add_option("--parallel-clients", parallel_clients,
                  "client training threads");
  run->add_flag("--dump-synthetic", dump_synthetic,
                "write each synthetic dataset as CSV");
  run->add_option("--synthesizer", synthesizer, "gan | gmm");
  run->add_option("--gan-epochs", gan_epochs, "GAN training epochs");

  // summarize
  std::string results_path;
  auto* summ = app.add_subcommand("summarize", "print mean-metric tables");
  summ->add_option("results", results_path, "results.csv")->required();

  // failure-curve
  std::string fc_results, fc_dataset, fc_method, fc_out;
  auto* fc = app.add_subcommand("failure-curve",
                                "rate vs mean metrics for one method");
  fc->add_option("results", fc_results, "results.csv")->required();
  fc->add_option("--dataset", fc_dataset, "dataset name")->required();
  fc->add_option("--method", fc_method, "method name")->required();
  fc->add_option("--out", fc_out, "output CSV (default stdout)");

  // gen-toy
  std::string toy_kind = "toy2", toy_out = "toy.csv";
  std::uint64_t toy_seed = 1;
  auto* gen = app.add_subcommand("gen-toy", "write a generated toy dataset");
  gen->add_option("--dataset", toy_kind, "toy2 | toy4 | toy-skew");
  gen->add_option("--seeds", toy_seed, "generation seed");
  gen->add_option("--out", toy_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, dataset, methods, p, rates, seeds, k, m,
                     fuzzy_degree, out, parallel_clients, dump_synthetic,
                     synthesizer, gan_epochs);
    if (summ->parsed()) {
      std::cout << sdafc::summarize(sdafc::read_results_csv(results_path));
      return 0;
    }
    if (fc->parsed()) {
      const auto csv = sdafc::emit_failure_curve(
          sdafc::read_results_csv(fc_results), fc_dataset, fc_method);
      if (fc_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream f(fc_out);
        f << csv;
      }
      return 0;
    }
    if (gen->parsed()) {
      sdafc::DatasetSpec spec;
      spec.kind = toy_kind;
      sdafc::write_csv(sdafc::make_dataset(spec, toy_seed), toy_out);
      std::cout << "wrote " << toy_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
