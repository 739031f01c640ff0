#include "nmlab/datasets.hpp"

#include "nmlab/errors.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace nmlab {

using Eigen::Index;
using json = nlohmann::json;

void validate(const Dataset& d) {
  if (d.size() == 0) throw InvalidInput("dataset is empty");
  if (d.dim() == 0) throw InvalidInput("dataset has zero input dimension");
  if (d.y.size() != d.size())
    throw InvalidInput("dataset has " + std::to_string(d.size()) + " inputs but " +
                       std::to_string(d.y.size()) + " labels");
  if (!d.x.allFinite() || !d.y.allFinite()) throw InvalidInput("dataset contains non-finite values");
  if (d.task == Task::Classification) {
    for (Index i = 0; i < d.size(); ++i) {
      if (d.y[i] != 0.0 && d.y[i] != 1.0)
        throw InvalidInput("classification label of point " + std::to_string(i) + " is not 0 or 1");
    }
  }
}

Dataset make_dataset(Task task, Eigen::MatrixXd x, Eigen::VectorXd y) {
  Dataset d{task, std::move(x), std::move(y)};
  validate(d);
  return d;
}

namespace {

Dataset classification_2d(std::initializer_list<std::array<double, 3>> rows) {
  Eigen::MatrixXd x(static_cast<Index>(rows.size()), 2);
  Eigen::VectorXd y(static_cast<Index>(rows.size()));
  Index i = 0;
  for (const auto& r : rows) {
    x(i, 0) = r[0];
    x(i, 1) = r[1];
    y[i] = r[2];
    ++i;
  }
  return make_dataset(Task::Classification, std::move(x), std::move(y));
}

Dataset regression_1d(std::initializer_list<std::array<double, 2>> rows) {
  Eigen::MatrixXd x(static_cast<Index>(rows.size()), 1);
  Eigen::VectorXd y(static_cast<Index>(rows.size()));
  Index i = 0;
  for (const auto& r : rows) {
    x(i, 0) = r[0];
    y[i] = r[1];
    ++i;
  }
  return make_dataset(Task::Regression, std::move(x), std::move(y));
}

constexpr std::array<std::pair<BuiltinDataset, std::string_view>, 6> kNames{{
    {BuiltinDataset::Sigmoid10, "sigmoid10"},
    {BuiltinDataset::D1, "d1"},
    {BuiltinDataset::D2, "d2"},
    {BuiltinDataset::D3, "d3"},
    {BuiltinDataset::Xor, "xor"},
    {BuiltinDataset::FXor, "fxor"},
}};

std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Dataset builtin(BuiltinDataset which) {
  switch (which) {
    case BuiltinDataset::Sigmoid10:
      return classification_2d({{2.8, 0.4, 1},
                                {3.1, 4.3, 1},
                                {0.1, -3.4, 1},
                                {-4.2, -3.3, 1},
                                {-0.5, 0.2, 1},
                                {-2.7, -0.4, 0},
                                {-3.0, -4.3, 0},
                                {-0.1, 3.4, 0},
                                {4.2, 3.2, 0},
                                {0.4, -0.1, 0}});
    case BuiltinDataset::D1:
      return regression_1d({{5, 2}, {4, 1}, {3, 0}, {1, -3}, {-1, 3}});
    case BuiltinDataset::D2:
      return regression_1d({{-1, 5}, {0, 0}, {1, -1}, {10, -3}, {11, -4}, {12, -5}});
    case BuiltinDataset::D3:
      return regression_1d({{-1, 3}, {0, 0}, {1, -1}, {10, -3}, {11, -4}, {12, -6}});
    case BuiltinDataset::Xor:
      return classification_2d({{0, 0, 1}, {1, 1, 1}, {0, 1, 0}, {1, 0, 0}});
    case BuiltinDataset::FXor:
      return classification_2d({{1.0, 0.0, 1}, {0.2, 0.6, 1}, {0.0, 1.0, 0}, {0.6, 0.2, 0}});
  }
  throw InvalidInput("unknown builtin dataset");
}

std::string_view builtin_name(BuiltinDataset which) {
  for (const auto& [id, name] : kNames)
    if (id == which) return name;
  return "unknown";
}

std::optional<BuiltinDataset> builtin_from_name(std::string_view name) {
  for (const auto& [id, n] : kNames)
    if (n == name) return id;
  return std::nullopt;
}

Dataset parse_dataset_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("malformed dataset JSON at " + line_context(text, e.byte > 0 ? e.byte - 1 : 0) +
                     ": " + e.what());
  }
  try {
    if (!doc.is_object()) throw ParseError("dataset JSON must be an object");
    const std::string task_name = doc.at("task").get<std::string>();
    Task task;
    if (task_name == "classification")
      task = Task::Classification;
    else if (task_name == "regression")
      task = Task::Regression;
    else
      throw ParseError("unknown task \"" + task_name + "\"");

    const auto dim = doc.at("d").get<Index>();
    const auto& points = doc.at("points");
    if (!points.is_array()) throw ParseError("\"points\" must be an array");
    if (dim < 1) throw ParseError("\"d\" must be at least 1");

    Eigen::MatrixXd x(static_cast<Index>(points.size()), dim);
    Eigen::VectorXd y(static_cast<Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      const auto& xs = p.at("x");
      if (!xs.is_array() || static_cast<Index>(xs.size()) != dim)
        throw ParseError("point " + std::to_string(i) + ": \"x\" has " + std::to_string(xs.size()) +
                         " coordinates, expected " + std::to_string(dim));
      for (Index j = 0; j < dim; ++j) x(static_cast<Index>(i), j) = xs[static_cast<std::size_t>(j)].get<double>();
      y[static_cast<Index>(i)] = p.at("y").get<double>();
    }
    Dataset d{task, std::move(x), std::move(y)};
    try {
      validate(d);
    } catch (const InvalidInput& e) {
      throw ParseError(std::string("invalid dataset: ") + e.what());
    }
    return d;
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset JSON does not match schema: ") + e.what());
  }
}

std::string dataset_to_json(const Dataset& d) {
  json doc;
  doc["task"] = d.task == Task::Classification ? "classification" : "regression";
  doc["d"] = d.dim();
  json points = json::array();
  for (Index i = 0; i < d.size(); ++i) {
    json xs = json::array();
    for (Index j = 0; j < d.dim(); ++j) xs.push_back(d.x(i, j));
    points.push_back({{"x", std::move(xs)}, {"y", d.y[i]}});
  }
  doc["points"] = std::move(points);
  return doc.dump(2) + "\n";
}

Dataset load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open dataset file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset_json(buf.str());
}

void save_json(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset file " + path.string());
  out << dataset_to_json(d);
}

double compensated_sum(const Eigen::Ref<const Eigen::VectorXd>& values) {
  double sum = 0.0, carry = 0.0;
  for (Index i = 0; i < values.size(); ++i) {
    const double v = values[i];
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

double mean_label(const Dataset& d) {
  if (d.y.size() == 0) throw InvalidInput("mean of an empty dataset");
  return compensated_sum(d.y) / static_cast<double>(d.y.size());
}

std::vector<Index> input_group(const Dataset& d, Index r) {
  std::vector<Index> group;
  for (Index p = 0; p < d.size(); ++p) {
    bool same = true;
    for (Index j = 0; j < d.dim() && same; ++j)
      same = std::bit_cast<std::uint64_t>(d.x(p, j)) == std::bit_cast<std::uint64_t>(d.x(r, j));
    if (same) group.push_back(p);
  }
  return group;
}

Decency is_decent(const Dataset& d) {
  Decency out;
  if (d.size() == 0) return out;
  out.global_mean = mean_label(d);
  const double band = 1e-12 * (1.0 + std::abs(out.global_mean));
  for (Index r = 0; r < d.size(); ++r) {
    const auto group = input_group(d, r);
    Eigen::VectorXd labels(static_cast<Index>(group.size()));
    for (std::size_t k = 0; k < group.size(); ++k) labels[static_cast<Index>(k)] = d.y[group[k]];
    const double gm = compensated_sum(labels) / static_cast<double>(group.size());
    if (std::abs(gm - out.global_mean) > band) {
      out.decent = true;
      out.witness = r;
      out.group_mean = gm;
      return out;
    }
  }
  return out;
}

}  // namespace nmlab
