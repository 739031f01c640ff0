#pragma once

// Every literal weight vector the verifiers use, with the printed values kept
// next to the readings actually evaluated. Audit this file against the source
// text in one pass.

#include "nmlab/tinynet.hpp"

#include <array>

namespace nmlab::constants {

// ---------------------------------------------------------------------------
// 2-2-1 sigmoid network on the ten-point "figure 8" dataset.
//
// The source labels first-layer weights w_{i,j} with i the input and j the
// hidden unit: its model reads sigma(w_{0,0} x_0 + w_{0,1} x_1 + b_0) for the
// first unit as printed, but the values only form a critical point when
// unit j receives (w_{0,j}, w_{1,j}). Printed values are stored by their
// printed label; `sigmoid221_from_printed` applies the input-major reading.

struct PrintedSigmoid221 {
  double w00, w01, w10, w11, b0, b1, v0, v1, c;
};

// "is a local minimum of the error surface", loss 0.577738, accuracy 0.4.
inline constexpr PrintedSigmoid221 kHatW{1.05954587,  -0.05625762, -0.03749863, 1.09518945, -0.050686,
                                         -0.06894291, 3.76921058,  -3.72139955, -0.0148436};

// Lower-loss witness, loss 0.381913, accuracy 0.8. The label w_{0,0} is
// printed twice; the second occurrence (0.50532424) is taken as w_{0,1}.
inline constexpr PrintedSigmoid221 kW0{5.67526388, 0.50532424, -68.69289398, -5.17422295, 3.23905253,
                                       0.24047163, -44.49337769, 45.87974167, -0.69310206};

// "yet another suboptimal point", loss 0.475135, accuracy 0.7. Two values are
// printed without '=' ("w_{1,1} -3.51257443", "v_1-15.02632332"); both are
// read as the value of that label.
inline constexpr PrintedSigmoid221 kRemarkPoint{22.3641243,   -12.53928375, -44.85849762,
                                                -3.51257443,  -35.75595093, -23.58968163,
                                                15.43178844,  -15.02632332, -0.40546528};

// Hessian spectrum listed for the local minimum, ascending.
inline constexpr std::array<double, 9> kHatWSpectrum{
    0.0007787149706922058, 0.09566127257833993, 0.17377316232140827, 0.2206386654308471, 0.4155934900503221,
    0.924604414747995,     3.80355680178619,    4.572940690876952,   6.39109880722351};

inline constexpr double kHatWLoss = 0.577738;
inline constexpr double kHatWLikelihood = 0.561166;
inline constexpr double kHatWAccuracy = 0.4;
inline constexpr double kW0Loss = 0.381913;
inline constexpr double kW0Likelihood = 0.682555;
inline constexpr double kW0Accuracy = 0.8;
inline constexpr double kRemarkLoss = 0.475135;
inline constexpr double kRemarkLikelihood = 0.621801;
inline constexpr double kRemarkAccuracy = 0.7;

/// Input-major reading: hidden unit j gets (w_{0,j}, w_{1,j}).
inline Sigmoid221Params sigmoid221_from_printed(const PrintedSigmoid221& p) {
  return {p.w00, p.w10, p.b0, p.w01, p.w11, p.b1, p.v0, p.v1, p.c};
}

/// Unit-major reading: hidden unit i gets (w_{i,0}, w_{i,1}).
inline Sigmoid221Params sigmoid221_unit_major(const PrintedSigmoid221& p) {
  return {p.w00, p.w01, p.b0, p.w10, p.w11, p.b1, p.v0, p.v1, p.c};
}

// ---------------------------------------------------------------------------
// 1-m-1 ReLU regression.

inline ReluRegParams relu_reg(std::initializer_list<double> w, std::initializer_list<double> b,
                              std::initializer_list<double> v, double c) {
  ReluRegParams p;
  p.w = Eigen::Map<const Eigen::VectorXd>(w.begin(), static_cast<Eigen::Index>(w.size()));
  p.b = Eigen::Map<const Eigen::VectorXd>(b.begin(), static_cast<Eigen::Index>(b.size()));
  p.v = Eigen::Map<const Eigen::VectorXd>(v.begin(), static_cast<Eigen::Index>(v.size()));
  p.c = c;
  return p;
}

// One unit on D1: local minimum (1, -3, 1, 0) with loss 18, and the
// comparison point (-7, -4, 1, 0) with loss 14. Argument order in the source
// is (w, b, v, c).
inline ReluRegParams prop1_minimum() { return relu_reg({1.0}, {-3.0}, {1.0}, 0.0); }
inline ReluRegParams prop1_lower() { return relu_reg({-7.0}, {-4.0}, {1.0}, 0.0); }

// Two units on D2. As printed, the "perfect fit" point has its second unit
// off on every datapoint. Flipping the second input weight to +1 gives the
// perfect fit; the same flip is applied to the suboptimal point.
inline ReluRegParams prop2_global_printed() { return relu_reg({-5.0, -1.0}, {1.0, -8.0}, {1.0, -1.0}, -1.0); }
inline ReluRegParams prop2_suboptimal_printed() {
  return relu_reg({-3.0, -1.0}, {4.0 + 1.0 / 3.0, -10.0}, {1.0, -1.0}, -3.0);
}
inline ReluRegParams prop2_global_corrected() { return relu_reg({-5.0, 1.0}, {1.0, -8.0}, {1.0, -1.0}, -1.0); }
inline ReluRegParams prop2_suboptimal_corrected() {
  return relu_reg({-3.0, 1.0}, {4.0 + 1.0 / 3.0, -10.0}, {1.0, -1.0}, -3.0);
}

// Three units on D3: the better minimum (loss 1/6) and the worse one (2/3).
inline ReluRegParams prop3_better() {
  return relu_reg({-1.5, -1.5, 1.5}, {1.0, 0.0, -13.0 - 1.0 / 6.0}, {1.0, 1.0, -1.0}, -1.0);
}
inline ReluRegParams prop3_worse() {
  return relu_reg({-2.0, 1.0, 1.0}, {3.0 + 2.0 / 3.0, -10.0, -11.0}, {1.0, -1.0, -1.0}, -3.0);
}

}  // namespace nmlab::constants
