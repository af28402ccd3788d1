#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

namespace specgeo {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Counts of positive, negative and (numerically) zero eigenvalues.
struct Signature {
  int positive = 0;
  int negative = 0;
  int zero = 0;

  friend bool operator==(const Signature&, const Signature&) = default;
};

inline Signature signature_of(const VectorXd& eigenvalues, double zero_tol) {
  Signature s;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    const double v = eigenvalues(k);
    if (std::abs(v) < zero_tol) {
      ++s.zero;
    } else if (v > 0) {
      ++s.positive;
    } else {
      ++s.negative;
    }
  }
  return s;
}

inline VectorXd symmetric_eigenvalues(const MatrixXd& m) {
  const MatrixXd sym = 0.5 * (m + m.transpose());
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(sym, Eigen::EigenvaluesOnly)
      .eigenvalues();
}

inline VectorXd hermitian_eigenvalues(const MatrixXcd& m) {
  const MatrixXcd herm = 0.5 * (m + m.adjoint());
  return Eigen::SelfAdjointEigenSolver<MatrixXcd>(herm, Eigen::EigenvaluesOnly)
      .eigenvalues();
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

/// Scale-free invertibility test: |det| compared against the product of row
/// norms (Hadamard's bound), so uniformly rescaling a row does not flip the
/// verdict.
struct InvertibilityVerdict {
  double det = 0.0;
  double scale = 0.0;
  bool invertible = false;
};

inline InvertibilityVerdict relative_invertibility(const MatrixXd& m,
                                                   double tol) {
  InvertibilityVerdict v;
  v.det = m.determinant();
  v.scale = 1.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) v.scale *= m.row(r).norm();
  v.invertible = v.scale > 0.0 && std::abs(v.det) > tol * v.scale;
  return v;
}

/// The constant complex structure on (Re z, Im z): d/da -> d/db, d/db -> -d/da.
inline MatrixXd standard_complex_structure(int n) {
  MatrixXd j = MatrixXd::Zero(2 * n, 2 * n);
  j.block(n, 0, n, n) = MatrixXd::Identity(n, n);
  j.block(0, n, n, n) = -MatrixXd::Identity(n, n);
  return j;
}

}  // namespace specgeo
