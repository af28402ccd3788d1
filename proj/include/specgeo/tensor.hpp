#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "specgeo/charts.hpp"
#include "specgeo/linalg.hpp"

namespace specgeo {

enum class Frame { affine, holomorphic };

/// Index layout:
///   endomorphism (a, b)     = T^a_b
///   bilinear     (mu, nu)   = T_{mu nu}
///   connection   (a, mu, nu) = Gamma^a_{mu nu}; for nabla J, (nabla_mu J)^a_nu
///   cubic        (mu, nu, rho)
enum class TensorKind { endomorphism, bilinear, connection, cubic };

inline int rank_of(TensorKind k) {
  return (k == TensorKind::endomorphism || k == TensorKind::bilinear) ? 2 : 3;
}

struct TensorSample {
  Frame frame = Frame::affine;
  TensorKind kind = TensorKind::bilinear;
  int dim = 0;
  std::vector<double> components;
  std::optional<ChartPoint> point;

  static TensorSample zeros(TensorKind kind, int dim) {
    TensorSample t;
    t.kind = kind;
    t.dim = dim;
    std::size_t size = static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
    if (rank_of(kind) == 3) size *= static_cast<std::size_t>(dim);
    t.components.assign(size, 0.0);
    return t;
  }

  static TensorSample from_matrix(TensorKind kind, const MatrixXd& m) {
    if (rank_of(kind) != 2 || m.rows() != m.cols())
      throw std::invalid_argument("from_matrix needs a square rank-2 kind");
    TensorSample t = zeros(kind, static_cast<int>(m.rows()));
    for (int a = 0; a < t.dim; ++a)
      for (int b = 0; b < t.dim; ++b) t(a, b) = m(a, b);
    return t;
  }

  /// Rank-3 tensor from slices: slices[mu](a, nu) stored at (a, mu, nu).
  static TensorSample from_slices(TensorKind kind,
                                  const std::vector<MatrixXd>& slices) {
    const int d = static_cast<int>(slices.size());
    TensorSample t = zeros(kind, d);
    for (int mu = 0; mu < d; ++mu)
      for (int a = 0; a < d; ++a)
        for (int nu = 0; nu < d; ++nu)
          t(a, mu, nu) = slices[static_cast<std::size_t>(mu)](a, nu);
    return t;
  }

  int rank() const { return rank_of(kind); }

  double& operator()(int a, int b) {
    return components[static_cast<std::size_t>(a * dim + b)];
  }
  double operator()(int a, int b) const {
    return components[static_cast<std::size_t>(a * dim + b)];
  }
  double& operator()(int a, int b, int c) {
    return components[static_cast<std::size_t>((a * dim + b) * dim + c)];
  }
  double operator()(int a, int b, int c) const {
    return components[static_cast<std::size_t>((a * dim + b) * dim + c)];
  }

  MatrixXd matrix() const {
    if (rank() != 2) throw std::logic_error("matrix() on a rank-3 tensor");
    MatrixXd m(dim, dim);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) m(a, b) = (*this)(a, b);
    return m;
  }

  /// Inverse of from_slices: slice(mu)(a, nu) = T(a, mu, nu).
  MatrixXd slice(int mu) const {
    MatrixXd m(dim, dim);
    for (int a = 0; a < dim; ++a)
      for (int nu = 0; nu < dim; ++nu) m(a, nu) = (*this)(a, mu, nu);
    return m;
  }

  std::vector<MatrixXd> slices() const {
    std::vector<MatrixXd> out;
    for (int mu = 0; mu < dim; ++mu) out.push_back(slice(mu));
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : components) m = std::max(m, std::abs(v));
    return m;
  }

  TensorSample& operator-=(const TensorSample& o) {
    for (std::size_t k = 0; k < components.size(); ++k)
      components[k] -= o.components[k];
    return *this;
  }
  friend TensorSample operator-(TensorSample a, const TensorSample& b) {
    return a -= b;
  }
};

}  // namespace specgeo
