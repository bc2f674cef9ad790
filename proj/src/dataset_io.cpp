#include "qsl/dataset_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace qsl {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

[[noreturn]] void fail(const std::string& path, std::size_t line_no,
                       const std::string& what) {
  throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_feature(const std::string& token, const std::string& path,
                     std::size_t line_no) {
  if (token.empty()) fail(path, line_no, "empty feature field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || errno == ERANGE)
    fail(path, line_no, "malformed feature value '" + token + "'");
  if (!std::isfinite(v))
    fail(path, line_no, "feature value '" + token + "' is not finite");
  return v;
}

LabelId parse_label(const std::string& token, const std::string& path,
                    std::size_t line_no) {
  if (token == "?") return kUnlabeled;
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  if (token.empty() || end != token.c_str() + token.size() || errno == ERANGE ||
      v < 1 || v > 1000000)
    fail(path, line_no,
         "label must be an integer >= 1 or '?', got '" + token + "'");
  return static_cast<LabelId>(v);
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open for reading");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "label")
    throw DataError(path +
                    ":1: header must be feature columns followed by 'label'");
  const std::size_t dim = header.size() - 1;

  std::vector<std::vector<double>> features;
  std::vector<LabelId> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != dim + 1)
      fail(path, line_no,
           "expected " + std::to_string(dim + 1) + " fields, got " +
               std::to_string(fields.size()));
    std::vector<double> row(dim);
    for (std::size_t c = 0; c < dim; ++c)
      row[c] = parse_feature(fields[c], path, line_no);
    features.push_back(std::move(row));
    labels.push_back(parse_label(fields[dim], path, line_no));
  }
  if (features.empty()) throw DataError(path + ": no data rows");

  // Stable labeled-first reorder.
  std::vector<std::size_t> order;
  order.reserve(features.size());
  for (std::size_t r = 0; r < features.size(); ++r)
    if (labels[r] != kUnlabeled) order.push_back(r);
  const Eigen::Index labeled = static_cast<Eigen::Index>(order.size());
  for (std::size_t r = 0; r < features.size(); ++r)
    if (labels[r] == kUnlabeled) order.push_back(r);

  PointMatrix points(static_cast<Eigen::Index>(features.size()),
                     static_cast<Eigen::Index>(dim));
  std::vector<LabelId> out_labels(features.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t src = order[r];
    for (std::size_t c = 0; c < dim; ++c)
      points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          features[src][c];
    out_labels[r] = labels[src];
  }
  return Dataset(std::move(points), std::move(out_labels), labeled);
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  for (Eigen::Index c = 0; c < ds.dim(); ++c) out << 'f' << (c + 1) << ',';
  out << "label\n";
  char buf[64];
  for (Eigen::Index r = 0; r < ds.size(); ++r) {
    for (Eigen::Index c = 0; c < ds.dim(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.points()(r, c));
      out << buf << ',';
    }
    const LabelId z = ds.label(r);
    if (z == kUnlabeled)
      out << "?\n";
    else
      out << z << '\n';
  }
  if (!out) throw DataError(path + ": write failed");
}

}  // namespace qsl
