#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nmlab {

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A ReLU pre-activation sits on (or within tolerance of) its kink, so the
/// loss is not twice differentiable there.
struct NonSmoothPoint : std::runtime_error {
  NonSmoothPoint(std::size_t point, std::size_t unit, std::size_t layer = 1)
      : std::runtime_error("datapoint " + std::to_string(point) +
                           " lies on the activation boundary of unit " +
                           std::to_string(unit) + " in layer " +
                           std::to_string(layer)),
        point_index(point),
        unit_index(unit),
        layer_index(layer) {}

  std::size_t point_index;
  std::size_t unit_index;
  std::size_t layer_index;
};

struct UnsupportedConfiguration : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotDecent : std::runtime_error {
  NotDecent() : std::runtime_error("dataset is not decent: every input group has the global label mean") {}
};

struct ArchitectureError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nmlab
