#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sdafc/clustering.hpp"
#include "sdafc/harness.hpp"
#include "sdafc/metrics.hpp"
#include "sdafc/partition.hpp"

namespace py = pybind11;
using namespace sdafc;

PYBIND11_MODULE(_sdafc, mod) {
  mod.doc() = "federated clustering core";

  py::class_<LabeledDataset>(mod, "Dataset")
      .def_readonly("name", &LabeledDataset::name)
      .def_readonly("k_true", &LabeledDataset::k_true)
      .def_property_readonly(
          "features", [](const LabeledDataset& ds) { return ds.features; })
      .def_property_readonly("labels",
                             [](const LabeledDataset& ds) {
                               return ds.labels ? py::cast(*ds.labels)
                                                : py::none().cast<py::object>();
                             })
      .def("__len__", [](const LabeledDataset& ds) { return ds.n(); });

  mod.def(
      "make_dataset",
      [](const std::string& kind, std::uint64_t seed, const std::string& path,
         std::optional<int> label_column) {
        DatasetSpec spec;
        spec.kind = kind;
        spec.path = path;
        spec.label_column = label_column;
        return make_dataset(spec, seed);
      },
      py::arg("kind"), py::arg("seed") = 1, py::arg("path") = "",
      py::arg("label_column") = std::nullopt);

  mod.def(
      "kmeans",
      [](const Matrix& x, int k, std::uint64_t seed, int restarts) {
        auto res = kmeans_fit_best(x, k, seed, restarts);
        return py::make_tuple(res.model.centroids, res.assignment,
                              res.inertia);
      },
      py::arg("x"), py::arg("k"), py::arg("seed") = 1,
      py::arg("restarts") = 10);

  mod.def(
      "fcm",
      [](const Matrix& x, int k, double fuzzy_degree, std::uint64_t seed) {
        auto res = fcm_fit(x, k, fuzzy_degree, seed);
        return py::make_tuple(res.model.centroids, res.membership.weights,
                              res.objective);
      },
      py::arg("x"), py::arg("k"), py::arg("fuzzy_degree") = 1.1,
      py::arg("seed") = 1);

  mod.def("nmi",
          [](const std::vector<int>& a, const std::vector<int>& b) {
            return nmi(contingency(a, b));
          });
  mod.def("kappa", [](const std::vector<int>& a, const std::vector<int>& b) {
    const auto res = kappa(contingency(a, b));
    return py::make_tuple(res.kappa, res.mapping);
  });

  mod.def(
      "run_method",
      [](const LabeledDataset& ds, const std::string& method, double p,
         double rate, std::uint64_t seed, int k, int m, double fuzzy_degree,
         const std::string& synthesizer, int gan_epochs,
         int parallel_clients) {
        ExperimentConfig cfg;
        cfg.k = k;
        cfg.m = m;
        cfg.fuzzy_degree = fuzzy_degree;
        cfg.sda.synthesizer = synthesizer == "gmm" ? SynthesizerKind::Gmm
                                                   : SynthesizerKind::Gan;
        if (gan_epochs > 0) cfg.sda.gan.epochs = gan_epochs;
        cfg.sda.parallel_clients = parallel_clients;
        const auto rec = run_cell(cfg, ds, method, p, rate, seed);
        py::dict out;
        out["method"] = rec.method;
        out["nmi"] = rec.nmi;
        out["kappa"] = rec.kappa;
        out["uploads"] = rec.uploads;
        out["broadcasts"] = rec.broadcasts;
        out["error"] = rec.error;
        return out;
      },
      py::arg("dataset"), py::arg("method"), py::arg("p") = 0.0,
      py::arg("rate") = 0.0, py::arg("seed") = 1, py::arg("k") = 2,
      py::arg("m") = 2, py::arg("fuzzy_degree") = 1.1,
      py::arg("synthesizer") = "gan", py::arg("gan_epochs") = 0,
      py::arg("parallel_clients") = 1);

  mod.def("run_grid_json", [](const std::string& config_json) {
    const auto rows = run_grid(config_from_json(config_json));
    py::list out;
    for (const auto& r : rows) {
      py::dict d;
      d["dataset"] = r.dataset;
      d["method"] = r.method;
      d["p"] = r.p;
      d["rate"] = r.rate;
      d["seed"] = r.seed;
      d["nmi"] = r.nmi;
      d["kappa"] = r.kappa;
      d["uploads"] = r.uploads;
      d["broadcasts"] = r.broadcasts;
      d["error"] = r.error;
      out.append(d);
    }
    return out;
  });
}
