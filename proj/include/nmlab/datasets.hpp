#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nmlab {

enum class Task { Classification, Regression };

/// Finite set of (x, y) pairs, one input per row of `x`.
struct Dataset {
  Task task = Task::Regression;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }

  bool operator==(const Dataset& other) const {
    return task == other.task && x.rows() == other.x.rows() && x.cols() == other.x.cols() &&
           y.size() == other.y.size() && x == other.x && y == other.y;
  }
};

/// Throws InvalidInput unless the dataset is nonempty, finite, consistently
/// shaped, and (for classification) labelled with 0/1 only.
void validate(const Dataset& d);

Dataset make_dataset(Task task, Eigen::MatrixXd x, Eigen::VectorXd y);

enum class BuiltinDataset { Sigmoid10, D1, D2, D3, Xor, FXor };

Dataset builtin(BuiltinDataset which);
std::string_view builtin_name(BuiltinDataset which);
std::optional<BuiltinDataset> builtin_from_name(std::string_view name);

// JSON interchange:
//   {"task": "classification"|"regression", "d": <int>,
//    "points": [{"x": [...], "y": <float>}, ...]}
// Doubles are written in shortest round-trip form.
Dataset parse_dataset_json(std::string_view text);
std::string dataset_to_json(const Dataset& d);
Dataset load_json(const std::filesystem::path& path);
void save_json(const Dataset& d, const std::filesystem::path& path);

/// Neumaier-compensated sum.
double compensated_sum(const Eigen::Ref<const Eigen::VectorXd>& values);

double mean_label(const Dataset& d);

struct Decency {
  bool decent = false;
  std::optional<Eigen::Index> witness;  // first point whose input group mean differs
  double group_mean = 0.0;              // mean label of the witness group
  double global_mean = 0.0;
};

/// Points are grouped by bitwise-equal inputs; group means are compared with
/// the global mean under a band of 1e-12 * (1 + |global mean|).
Decency is_decent(const Dataset& d);

/// Indices of all points whose input equals x_r coordinate-wise (bitwise).
std::vector<Eigen::Index> input_group(const Dataset& d, Eigen::Index r);

}  // namespace nmlab
