#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "specgeo/linalg.hpp"

namespace specgeo {

/// A matrix-valued field over real coordinates.
using MatrixField = std::function<MatrixXd(const VectorXd&)>;

/// Second-order central differences: out[mu] = d f / d q^mu at q.
template <class Field>
std::vector<MatrixXd> central_gradient(const Field& f, const VectorXd& q,
                                       double h) {
  std::vector<MatrixXd> out;
  out.reserve(static_cast<std::size_t>(q.size()));
  for (Eigen::Index mu = 0; mu < q.size(); ++mu) {
    VectorXd plus = q, minus = q;
    plus(mu) += h;
    minus(mu) -= h;
    out.push_back((f(plus) - f(minus)) / (2.0 * h));
  }
  return out;
}

/// Residuals of one check at step h and h/2. For an O(h^2) truncation error
/// the ratio approaches 4. Below `floor` the residual carries no truncation
/// signal (the identity is exact for the field) and no ratio is reported.
struct Convergence {
  double residual = 0.0;
  double residual_half = 0.0;
  std::optional<double> ratio;
};

inline constexpr double kRichardsonFloor = 1e-10;

inline Convergence richardson(double residual, double residual_half,
                              double floor = kRichardsonFloor) {
  Convergence c{residual, residual_half, std::nullopt};
  if (residual_half > floor && residual > floor)
    c.ratio = residual / residual_half;
  return c;
}

}  // namespace specgeo
