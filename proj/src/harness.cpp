#include "sdafc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sdafc/errors.hpp"
#include "sdafc/metrics.hpp"
#include "sdafc/partition.hpp"
#include "sdafc/rng.hpp"

namespace sdafc {

namespace {

const std::set<std::string> kKnownMethods = {
    "sda-fc-km", "sda-fc-fcm", "k-fed",  "ffcm",
    "km-central", "fcm-central", "oracle"};

std::uint64_t double_bits(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  return bits;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

LabeledDataset make_blobs(const std::string& name,
                          const std::vector<GmComponent>& comps, int per,
                          std::uint64_t seed) {
  GaussianMixtureSpec spec;
  spec.components = comps;
  spec.counts.assign(comps.size(), per);
  spec.seed = seed;
  auto ds = generate_gaussian_mixture(spec);
  ds.name = name;
  return ds;
}

GmComponent comp(double mx, double my, double sx, double sy) {
  GmComponent c;
  c.mean = Vector(2);
  c.mean << mx, my;
  c.stddev = Vector(2);
  c.stddev << sx, sy;
  return c;
}

}  // namespace

LabeledDataset make_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  const std::uint64_t ds_seed = derive_seed(seed, {0x647374ULL});
  if (spec.kind == "csv") {
    auto ds = load_csv(spec.path, spec.label_column);
    ds.name = std::filesystem::path(spec.path).stem().string();
    return ds;
  }
  if (spec.kind == "toy2")
    return make_blobs("toy2",
                      {comp(-5, 0, 0.5, 0.5), comp(5, 0, 0.5, 0.5)}, 200,
                      ds_seed);
  if (spec.kind == "toy4")
    return make_blobs("toy4",
                      {comp(5, 0, 0.5, 0.5), comp(-5, 0, 0.5, 0.5),
                       comp(0, 5, 0.5, 0.5), comp(0, -5, 0.5, 0.5)},
                      150, ds_seed);
  if (spec.kind == "toy-skew")
    // Two overlapping elongated clusters in one quadrant; splitting along a
    // non-cluster-aligned diagonal makes purely local clustering misleading.
    return make_blobs("toy-skew",
                      {comp(9.6, 1.9, 3.15, 0.45), comp(9.65, 5.5, 0.35, 0.35)},
                      300, ds_seed);
  throw DomainError("unknown dataset kind: " + spec.kind);
}

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  if (j.contains("dataset")) {
    const auto& d = j["dataset"];
    if (d.is_string()) {
      cfg.dataset.kind = d.get<std::string>();
    } else {
      cfg.dataset.kind = d.value("kind", cfg.dataset.kind);
      cfg.dataset.path = d.value("path", cfg.dataset.path);
      if (d.contains("label_column"))
        cfg.dataset.label_column = d["label_column"].get<int>();
    }
  }
  if (j.contains("methods"))
    cfg.methods = j["methods"].get<std::vector<std::string>>();
  if (j.contains("p")) cfg.p_grid = j["p"].get<std::vector<double>>();
  if (j.contains("rates")) cfg.rates = j["rates"].get<std::vector<double>>();
  if (j.contains("seeds"))
    cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  cfg.k = j.value("k", cfg.k);
  cfg.m = j.value("m", cfg.m);
  cfg.fuzzy_degree = j.value("fuzzy_degree", cfg.fuzzy_degree);
  cfg.out_dir = j.value("out", cfg.out_dir);
  cfg.dump_synthetic = j.value("dump_synthetic", cfg.dump_synthetic);
  if (j.contains("gan")) {
    const auto& g = j["gan"];
    cfg.sda.gan.epochs = g.value("epochs", cfg.sda.gan.epochs);
    cfg.sda.gan.batch_size = g.value("batch_size", cfg.sda.gan.batch_size);
    cfg.sda.gan.learning_rate =
        g.value("learning_rate", cfg.sda.gan.learning_rate);
    cfg.sda.gan.latent.noise_dim =
        g.value("noise_dim", cfg.sda.gan.latent.noise_dim);
    if (g.contains("gen_hidden"))
      cfg.sda.gan.gen_hidden = g["gen_hidden"].get<std::vector<int>>();
    if (g.contains("disc_hidden"))
      cfg.sda.gan.disc_hidden = g["disc_hidden"].get<std::vector<int>>();
  }
  if (j.contains("synthesizer")) {
    const auto s = j["synthesizer"].get<std::string>();
    if (s == "gan")
      cfg.sda.synthesizer = SynthesizerKind::Gan;
    else if (s == "gmm")
      cfg.sda.synthesizer = SynthesizerKind::Gmm;
    else
      throw DomainError("unknown synthesizer: " + s);
  }
  cfg.sda.parallel_clients =
      j.value("parallel_clients", cfg.sda.parallel_clients);
  cfg.baseline.k_local = j.value("k_local", cfg.baseline.k_local);
  cfg.baseline.weighted_server =
      j.value("weighted_server", cfg.baseline.weighted_server);

  if (cfg.methods.empty() || cfg.p_grid.empty() || cfg.rates.empty() ||
      cfg.seeds.empty())
    throw DomainError("methods, p, rates and seeds must all be non-empty");
  for (const auto& mth : cfg.methods)
    if (!kKnownMethods.count(mth)) throw DomainError("unknown method: " + mth);
  for (double p : cfg.p_grid)
    if (p < 0.0 || p > 1.0) throw DomainError("p outside [0,1]");
  for (double r : cfg.rates)
    if (r < 0.0 || r > 1.0) throw DomainError("rate outside [0,1]");
  if (cfg.k < 1) throw DomainError("k must be >= 1");
  if (cfg.m < 1) throw DomainError("m must be >= 1");
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["dataset"] = {{"kind", cfg.dataset.kind}, {"path", cfg.dataset.path}};
  if (cfg.dataset.label_column)
    j["dataset"]["label_column"] = *cfg.dataset.label_column;
  j["methods"] = cfg.methods;
  j["p"] = cfg.p_grid;
  j["rates"] = cfg.rates;
  j["seeds"] = cfg.seeds;
  j["k"] = cfg.k;
  j["m"] = cfg.m;
  j["fuzzy_degree"] = cfg.fuzzy_degree;
  j["out"] = cfg.out_dir;
  j["dump_synthetic"] = cfg.dump_synthetic;
  j["gan"] = {{"epochs", cfg.sda.gan.epochs},
              {"batch_size", cfg.sda.gan.batch_size},
              {"learning_rate", cfg.sda.gan.learning_rate},
              {"noise_dim", cfg.sda.gan.latent.noise_dim},
              {"gen_hidden", cfg.sda.gan.gen_hidden},
              {"disc_hidden", cfg.sda.gan.disc_hidden}};
  j["synthesizer"] =
      cfg.sda.synthesizer == SynthesizerKind::Gan ? "gan" : "gmm";
  j["parallel_clients"] = cfg.sda.parallel_clients;
  j["k_local"] = cfg.baseline.k_local;
  j["weighted_server"] = cfg.baseline.weighted_server;
  return j.dump(2);
}

RunRecord run_cell(const ExperimentConfig& cfg, const LabeledDataset& ds,
                   const std::string& method, double p, double rate,
                   std::uint64_t seed) {
  RunRecord rec;
  rec.dataset = ds.name;
  rec.method = method;
  rec.p = p;
  rec.rate = rate;
  rec.seed = seed;
  rec.k = cfg.k;
  rec.m = cfg.m;
  rec.fuzzy_degree = cfg.fuzzy_degree;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    MethodResult result;
    if (method == "km-central" || method == "fcm-central") {
      result = run_centralized(
          ds, method == "km-central" ? ClusterVariant::Km : ClusterVariant::Fcm,
          cfg.k, cfg.fuzzy_degree, seed);
    } else if (method == "oracle") {
      result = run_oracle(ds, cfg.k, seed);
    } else {
      const auto partition = partition_noniid(
          ds, p, cfg.m, derive_seed(seed, {0x706172ULL, double_bits(p)}));
      const auto mask = sample_connection_mask(
          cfg.m, rate, derive_seed(seed, {0x6d736bULL, double_bits(rate)}));
      if (method == "sda-fc-km" || method == "sda-fc-fcm") {
        SdaFcOptions opts = cfg.sda;
        opts.fuzzy_degree = cfg.fuzzy_degree;
        result = run_sda_fc(ds, partition, mask,
                            method == "sda-fc-km" ? ClusterVariant::Km
                                                  : ClusterVariant::Fcm,
                            opts, cfg.k, seed);
        if (cfg.dump_synthetic && result.synthetic) {
          LabeledDataset dump;
          dump.features = *result.synthetic;
          std::ostringstream name;
          name << cfg.out_dir << "/synthetic_" << ds.name << "_" << method
               << "_p" << p << "_r" << rate << "_s" << seed << ".csv";
          std::filesystem::create_directories(cfg.out_dir);
          write_csv(dump, name.str());
        }
      } else if (method == "k-fed") {
        BaselineOptions opts = cfg.baseline;
        opts.fuzzy_degree = cfg.fuzzy_degree;
        result = run_kfed(ds, partition, mask, cfg.k, opts, seed);
      } else if (method == "ffcm") {
        BaselineOptions opts = cfg.baseline;
        opts.fuzzy_degree = cfg.fuzzy_degree;
        result = run_ffcm(ds, partition, mask, cfg.k, opts, seed);
      } else {
        throw DomainError("unknown method: " + method);
      }
    }
    const auto report =
        evaluate(true_labels_for(ds, result), result.assignment);
    rec.nmi = report.nmi;
    rec.kappa = report.kappa;
    rec.uploads = result.trace.uploads_count;
    rec.broadcasts = result.trace.broadcasts_count;
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rec;
}

std::vector<RunRecord> run_grid(const ExperimentConfig& cfg) {
  std::vector<RunRecord> rows;
  std::map<std::uint64_t, LabeledDataset> cache;
  for (const auto& method : cfg.methods)
    for (double p : cfg.p_grid)
      for (double rate : cfg.rates)
        for (std::uint64_t seed : cfg.seeds) {
          auto it = cache.find(seed);
          if (it == cache.end())
            it = cache.emplace(seed, make_dataset(cfg.dataset, seed)).first;
          rows.push_back(run_cell(cfg, it->second, method, p, rate, seed));
        }
  return rows;
}

const char* kResultsCsvHeader =
    "dataset,method,p,rate,seed,k,m,fuzzy_degree,nmi,kappa,wall_time_s,"
    "uploads,broadcasts,error";

void write_results_csv(const std::vector<RunRecord>& rows,
                       const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << kResultsCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.method << ',' << fmt(r.p) << ','
        << fmt(r.rate) << ',' << r.seed << ',' << r.k << ',' << r.m << ','
        << fmt(r.fuzzy_degree) << ',';
    if (r.ok())
      out << fmt(r.nmi) << ',' << fmt(r.kappa);
    else
      out << ',';
    out << ',' << fmt(r.wall_time_s) << ',' << r.uploads << ','
        << r.broadcasts << ',';
    // Commas inside error messages would break the fixed schema.
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out << err << "\n";
  }
}

std::vector<RunRecord> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (line != kResultsCsvHeader)
    throw ParseError(path + ":1: unexpected header");

  std::vector<RunRecord> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    f.push_back(cur);
    if (f.size() != 14)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected 14 fields, got " + std::to_string(f.size()));
    RunRecord r;
    try {
      r.dataset = f[0];
      r.method = f[1];
      r.p = std::stod(f[2]);
      r.rate = std::stod(f[3]);
      r.seed = std::stoull(f[4]);
      r.k = std::stoi(f[5]);
      r.m = std::stoi(f[6]);
      r.fuzzy_degree = std::stod(f[7]);
      r.error = f[13];
      if (r.ok()) {
        r.nmi = std::stod(f[8]);
        r.kappa = std::stod(f[9]);
      }
      r.wall_time_s = std::stod(f[10]);
      r.uploads = std::stoi(f[11]);
      r.broadcasts = std::stoi(f[12]);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": malformed numeric field");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");
  return rows;
}

namespace {

struct CellStats {
  double nmi_sum = 0.0, kappa_sum = 0.0;
  int n = 0;
};

const std::vector<std::pair<std::string, std::string>> kRivals = {
    {"sda-fc-km", "k-fed"}, {"sda-fc-fcm", "ffcm"}};

}  // namespace

std::string summarize(const std::vector<RunRecord>& rows) {
  if (rows.empty()) throw EmptyInputError("no rows to summarize");

  // cell key: dataset -> method -> p
  std::map<std::string, std::map<std::string, std::map<double, CellStats>>> g;
  std::set<double> ps;
  std::set<std::string> methods;
  int failed = 0;
  for (const auto& r : rows) {
    if (!r.ok()) {
      ++failed;
      continue;
    }
    auto& cell = g[r.dataset][r.method][r.p];
    cell.nmi_sum += r.nmi;
    cell.kappa_sum += r.kappa;
    ++cell.n;
    ps.insert(r.p);
    methods.insert(r.method);
  }

  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);

  auto emit_metric = [&](const std::string& title, bool use_nmi) {
    out << "== " << title << " (mean per cell) ==\n";
    for (const auto& [dsname, per_method] : g) {
      out << "dataset: " << dsname << "\n";
      out << "  method";
      for (double p : ps) out << "\tp=" << p;
      out << "\truns\n";
      for (const auto& [method, per_p] : per_method) {
        out << "  " << method;
        int runs = 0;
        for (double p : ps) {
          auto it = per_p.find(p);
          if (it == per_p.end()) {
            out << "\t-";
          } else {
            const auto& c = it->second;
            out << "\t" << (use_nmi ? c.nmi_sum : c.kappa_sum) / c.n;
            runs += c.n;
          }
        }
        out << "\t" << runs << "\n";
      }
    }
    // Head-to-head count: cells where a method beats its same-family rival.
    std::map<std::string, int> count;
    for (const auto& [a, b] : kRivals) {
      if (!methods.count(a) || !methods.count(b)) continue;
      count[a] = 0;
      count[b] = 0;
      for (const auto& [dsname, per_method] : g) {
        auto ia = per_method.find(a);
        auto ib = per_method.find(b);
        if (ia == per_method.end() || ib == per_method.end()) continue;
        for (double p : ps) {
          auto ca = ia->second.find(p);
          auto cb = ib->second.find(p);
          if (ca == ia->second.end() || cb == ib->second.end()) continue;
          const double va =
              (use_nmi ? ca->second.nmi_sum : ca->second.kappa_sum) /
              ca->second.n;
          const double vb =
              (use_nmi ? cb->second.nmi_sum : cb->second.kappa_sum) /
              cb->second.n;
          if (va > vb)
            ++count[a];
          else if (vb > va)
            ++count[b];
        }
      }
    }
    if (!count.empty()) {
      out << "  count:";
      for (const auto& [mth, c] : count) out << " " << mth << "=" << c;
      out << "\n";
    }
    out << "\n";
  };

  emit_metric("NMI", true);
  emit_metric("Kappa", false);
  if (failed > 0) out << failed << " failed run(s) excluded\n";
  return out.str();
}

std::string emit_failure_curve(const std::vector<RunRecord>& rows,
                               const std::string& dataset,
                               const std::string& method) {
  std::map<double, CellStats> by_rate;
  for (const auto& r : rows) {
    if (!r.ok() || r.dataset != dataset || r.method != method) continue;
    auto& c = by_rate[r.rate];
    c.nmi_sum += r.nmi;
    c.kappa_sum += r.kappa;
    ++c.n;
  }
  if (by_rate.empty())
    throw EmptyInputError("no rows match dataset=" + dataset +
                          " method=" + method);

  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << "rate,mean_nmi,mean_kappa,runs\n";
  for (const auto& [rate, c] : by_rate)
    out << rate << ',' << c.nmi_sum / c.n << ',' << c.kappa_sum / c.n << ','
        << c.n << "\n";
  return out.str();
}

}  // namespace sdafc
