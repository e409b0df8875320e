#include "sdafc/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sdafc/errors.hpp"
#include "sdafc/rng.hpp"

namespace sdafc {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' ||
                         *(end - 1) == '\r')) --end;
  if (begin == end) return false;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace

Matrix MinMaxScale::transform(const Matrix& x) const {
  Matrix out = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    out.col(j) = (x.col(j).array() - lo(j)) / range(j);
  return out;
}

Matrix MinMaxScale::inverse(const Matrix& x) const {
  Matrix out = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    out.col(j) = x.col(j).array() * range(j) + lo(j);
  return out;
}

MinMaxScale fit_minmax(const Matrix& x) {
  MinMaxScale s;
  s.lo = x.colwise().minCoeff();
  Vector hi = x.colwise().maxCoeff();
  s.range = (hi - s.lo).cwiseMax(0.0);
  for (Eigen::Index j = 0; j < s.range.size(); ++j)
    if (s.range(j) == 0.0) s.range(j) = 1.0;
  return s;
}

LabeledDataset load_csv(const std::string& path,
                        std::optional<int> label_column) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);

  std::vector<std::vector<double>> rows;
  std::vector<long> raw_labels;
  std::size_t arity = 0;
  int line_no = 0;
  bool first_data_row = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_fields(line);
    if (first_data_row) {
      // Header auto-detection: any non-numeric field means header row.
      double tmp;
      bool numeric = true;
      for (const auto& f : fields)
        if (!parse_double(f, tmp)) numeric = false;
      if (!numeric) continue;  // skip header
      arity = fields.size();
      first_data_row = false;
    }
    if (fields.size() != arity)
      throw ParseError("ragged row at line " + std::to_string(line_no) +
                       ": expected " + std::to_string(arity) + " fields, got " +
                       std::to_string(fields.size()));
    if (label_column &&
        (*label_column < 0 || *label_column >= static_cast<int>(arity)))
      throw ParseError("label column " + std::to_string(*label_column) +
                       " out of range for " + std::to_string(arity) +
                       " columns");
    std::vector<double> feat;
    feat.reserve(arity);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v;
      if (!parse_double(fields[j], v))
        throw ParseError("non-numeric field '" + fields[j] + "' at line " +
                         std::to_string(line_no));
      if (label_column && static_cast<int>(j) == *label_column)
        raw_labels.push_back(std::lround(v));
      else
        feat.push_back(v);
    }
    rows.push_back(std::move(feat));
  }
  if (rows.empty()) throw EmptyInputError("no data rows in " + path);

  LabeledDataset ds;
  ds.name = path;
  ds.features.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];

  if (label_column) {
    // Remap to contiguous ids in order of first appearance.
    std::map<long, int> remap;
    std::vector<int> labels;
    labels.reserve(raw_labels.size());
    for (long raw : raw_labels) {
      auto [it, inserted] =
          remap.emplace(raw, static_cast<int>(remap.size()));
      labels.push_back(it->second);
    }
    ds.labels = std::move(labels);
    ds.k_true = static_cast<int>(remap.size());
  }
  return ds;
}

void write_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  char buf[64];
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (Eigen::Index j = 0; j < ds.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.features(i, j));
      out << buf;
      if (j + 1 < ds.dim() || ds.has_labels()) out << ',';
    }
    if (ds.has_labels()) out << (*ds.labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

LabeledDataset generate_gaussian_mixture(const GaussianMixtureSpec& spec) {
  if (spec.components.empty())
    throw EmptyInputError("gaussian mixture spec has no components");
  const auto k = spec.components.size();
  double wsum = 0.0;
  for (const auto& c : spec.components) {
    wsum += c.weight;
    if ((c.stddev.array() <= 0.0).any())
      throw DomainError("component standard deviations must be positive");
  }
  const bool counted = !spec.counts.empty();
  if (counted && spec.counts.size() != k)
    throw DomainError("counts must match component count");
  if (!counted && std::abs(wsum - 1.0) > 1e-9)
    throw DomainError("component weights must sum to 1");

  const Eigen::Index d = spec.components[0].mean.size();
  Rng rng(spec.seed);

  std::vector<int> component_of;
  if (counted) {
    for (std::size_t c = 0; c < k; ++c)
      component_of.insert(component_of.end(),
                          static_cast<std::size_t>(spec.counts[c]),
                          static_cast<int>(c));
  } else {
    std::vector<double> cum(k);
    double acc = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      acc += spec.components[c].weight / wsum;
      cum[c] = acc;
    }
    for (int i = 0; i < spec.total_n; ++i) {
      const double u = rng.uniform();
      int c = 0;
      while (c + 1 < static_cast<int>(k) &&
             u > cum[static_cast<std::size_t>(c)]) ++c;
      component_of.push_back(c);
    }
  }
  if (component_of.empty()) throw EmptyInputError("mixture with zero samples");

  LabeledDataset ds;
  ds.name = "gaussian_mixture";
  ds.k_true = static_cast<int>(k);
  ds.features.resize(static_cast<Eigen::Index>(component_of.size()), d);
  std::vector<int> labels;
  labels.reserve(component_of.size());
  for (std::size_t i = 0; i < component_of.size(); ++i) {
    const auto& comp = spec.components[static_cast<std::size_t>(component_of[i])];
    for (Eigen::Index j = 0; j < d; ++j)
      ds.features(static_cast<Eigen::Index>(i), j) =
          comp.mean(j) + comp.stddev(j) * rng.normal();
    labels.push_back(component_of[i]);
  }
  ds.labels = std::move(labels);
  return ds;
}

LabeledDataset normalize_minmax(const LabeledDataset& ds) {
  if (ds.n() < 1) throw EmptyInputError("cannot normalize empty dataset");
  LabeledDataset out = ds;
  const MinMaxScale s = fit_minmax(ds.features);
  out.features = s.transform(ds.features);
  return out;
}

}  // namespace sdafc
