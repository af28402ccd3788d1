#pragma once

// Structures on N = T*M in induced coordinates (q, p): q are the affine
// coordinates of the base, p the conjugate momenta. The flat connection has
// no Christoffel symbols in q, so its horizontal space is span{d/dq} and the
// vertical space span{d/dp}.

#include <optional>
#include <vector>

#include "specgeo/geometry.hpp"

namespace specgeo {

struct BundlePoint {
  ChartPoint base;
  VectorXd p;

  int base_dim() const { return 2 * base.n(); }
  VectorXd coordinates() const {
    VectorXd out(2 * base_dim());
    out << base.q(), p;
    return out;
  }
};

/// A 4n x 4n endomorphism in the (H, V) = (T_pM, T*_pM) block splitting.
struct BundleEndomorphism {
  MatrixXd matrix;

  int base_dim() const { return static_cast<int>(matrix.rows() / 2); }
  MatrixXd block(int r, int c) const {
    const int d = base_dim();
    return matrix.block(r * d, c * d, d, d);
  }
  static BundleEndomorphism from_blocks(const MatrixXd& hh, const MatrixXd& hv,
                                        const MatrixXd& vh, const MatrixXd& vv) {
    const auto d = hh.rows();
    BundleEndomorphism e;
    e.matrix.resize(2 * d, 2 * d);
    e.matrix << hh, hv, vh, vv;
    return e;
  }
  /// |J^2 - sign I|
  double square_residual(double sign) const {
    return max_abs(matrix * matrix -
                   sign * MatrixXd::Identity(matrix.rows(), matrix.cols()));
  }
};

/// Columns are the horizontal lifts of d/dq^mu at xi. Without A this is the
/// coordinate splitting; for the connection nabla + A the lift of v picks up
/// the vertical part A^xi_v = xi(A_v .).
inline MatrixXd horizontal_frame(const BundlePoint& xi,
                                 const TensorSample* A = nullptr) {
  const int d = xi.base_dim();
  MatrixXd frame = MatrixXd::Zero(2 * d, d);
  frame.topRows(d) = MatrixXd::Identity(d, d);
  if (A)
    for (int mu = 0; mu < d; ++mu)
      frame.block(d, mu, d, 1) = A->slice(mu).transpose() * xi.p;
  return frame;
}

/// Largest deviation of J1 H from H, measured as the vertical defect of
/// J1 (v + A^xi_v) against the lift of Jv.
inline double horizontal_invariance_residual(const BundlePoint& xi,
                                             const MatrixXd& J,
                                             const TensorSample& A) {
  const int d = xi.base_dim();
  const MatrixXd frame = horizontal_frame(xi, &A);
  const MatrixXd vert = frame.bottomRows(d);  // column mu: A^xi_{e_mu}
  return max_abs(J.transpose() * vert - vert * J);
}

/// J1 = diag(J, J*), (J* eta)(X) = eta(JX).
inline BundleEndomorphism j1_from(const MatrixXd& J) {
  const auto d = J.rows();
  return BundleEndomorphism::from_blocks(J, MatrixXd::Zero(d, d),
                                         MatrixXd::Zero(d, d), J.transpose());
}

inline BundleEndomorphism j1_at(const BundlePoint& xi) {
  return j1_from(complex_structure_matrix(xi.base));
}

/// rho as the map X -> rho(X, .), matrix W^T; throws if it is not invertible.
/// A form whose entries are all below tol (relative to the unit scale of
/// omega) counts as zero even when its round-off residue is well conditioned.
inline MatrixXd rho_map(const MatrixXd& form, double tol) {
  const MatrixXd R = form.transpose();
  if (max_abs(R) <= tol || !relative_invertibility(R, tol).invertible)
    throw DegenerateForm("selected 2-form is degenerate");
  return R;
}

/// J2 = [[0, -rho^-1], [rho, 0]].
inline BundleEndomorphism j2_from(const MatrixXd& form, double tol) {
  const MatrixXd R = rho_map(form, tol);
  const auto d = R.rows();
  return BundleEndomorphism::from_blocks(MatrixXd::Zero(d, d), -R.inverse(), R,
                                         MatrixXd::Zero(d, d));
}

inline BundleEndomorphism j2_at(const BundlePoint& xi, FormPart rho,
                                double tol) {
  return j2_from(form_part(complex_structure_matrix(xi.base), xi.base.n(), rho),
                 tol);
}

/// g_N = diag(g, g^-1).
inline MatrixXd g_N_from(const KaehlerMetric& m) {
  if (m.degenerate) throw DegenerateForm("g is degenerate at this point");
  const auto d = m.g.rows();
  MatrixXd out = MatrixXd::Zero(2 * d, 2 * d);
  out.topLeftCorner(d, d) = m.g;
  out.bottomRightCorner(d, d) = m.g.inverse();
  return out;
}

inline MatrixXd g_N_at(const BundlePoint& xi, double tol) {
  return g_N_from(kaehler_metric(xi.base, tol));
}

/// |J^T gN J - gN|
inline double orthogonality_residual(const MatrixXd& gN,
                                     const BundleEndomorphism& J) {
  return max_abs(J.matrix.transpose() * gN * J.matrix - gN);
}

struct QuaternionRelations {
  // rho = omega11 (hyper-Hermitian branch)
  std::optional<double> anticommutator;  // |J1 J2 + J2 J1|
  std::optional<double> j3_square;       // |J3^2 + I|
  // rho = omega' (para branch)
  std::optional<double> para_commutator;  // |[J1, J2]|
  std::optional<double> para_j3_square;   // |J3^2 - I|
  // full omega against the block formulas
  double commutator_formula = 0.0;
  double anticommutator_formula = 0.0;
};

/// Block formulas for J2 built from the full omega:
///   [J1, J2] = 2 J1 [[0, -s11], [r11, 0]],  {J1, J2} = 2 J1 [[0, -s'], [r', 0]]
/// with s = rho^-1 split into J*-invariant and anti-invariant parts.
inline QuaternionRelations quaternion_relations(const MatrixXd& J, int n,
                                                double tol) {
  QuaternionRelations q;
  const BundleEndomorphism j1 = j1_from(J);
  const auto d = J.rows();
  const MatrixXd Z = MatrixXd::Zero(d, d);

  const MatrixXd w = symplectic_matrix(n);
  const HodgeSplit split = hodge_split(J, w);
  const BundleEndomorphism j2 = j2_from(w, tol);
  const MatrixXd sigma = w.transpose().inverse();
  const MatrixXd s11 = 0.5 * (sigma + J * sigma * J.transpose());
  const MatrixXd sp = 0.5 * (sigma - J * sigma * J.transpose());
  const MatrixXd r11 = split.omega11.transpose();
  const MatrixXd rp = split.omega_prime.transpose();
  const MatrixXd comm = j1.matrix * j2.matrix - j2.matrix * j1.matrix;
  const MatrixXd anti = j1.matrix * j2.matrix + j2.matrix * j1.matrix;
  const MatrixXd comm_formula =
      2.0 * j1.matrix * BundleEndomorphism::from_blocks(Z, -s11, r11, Z).matrix;
  const MatrixXd anti_formula =
      2.0 * j1.matrix * BundleEndomorphism::from_blocks(Z, -sp, rp, Z).matrix;
  q.commutator_formula = max_abs(comm - comm_formula);
  q.anticommutator_formula = max_abs(anti - anti_formula);

  try {
    const BundleEndomorphism h = j2_from(split.omega11, tol);
    q.anticommutator = max_abs(j1.matrix * h.matrix + h.matrix * j1.matrix);
    const BundleEndomorphism j3{j1.matrix * h.matrix};
    q.j3_square = j3.square_residual(-1.0);
  } catch (const DegenerateForm&) {
  }
  try {
    const BundleEndomorphism h = j2_from(split.omega_prime, tol);
    q.para_commutator = max_abs(j1.matrix * h.matrix - h.matrix * j1.matrix);
    const BundleEndomorphism j3{j1.matrix * h.matrix};
    q.para_j3_square = j3.square_residual(1.0);
  } catch (const DegenerateForm&) {
  }
  return q;
}

// ---------------------------------------------------------------------------
// Fields over N and the Nijenhuis tensor

/// An endomorphism field over the 4n bundle coordinates.
using BundleField = MatrixField;

inline BundleField j1_field(const AffineChart& chart) {
  return [&chart](const VectorXd& x) {
    const auto d = x.size() / 2;
    return j1_from(complex_structure_matrix(neighbor_point(chart, x.head(d))))
        .matrix;
  };
}

inline BundleField j2_field(const AffineChart& chart, FormPart rho) {
  const int n = chart.spec().n;
  const double tol = chart.spec().tol;
  return [&chart, n, rho, tol](const VectorXd& x) {
    const auto d = x.size() / 2;
    const MatrixXd J = complex_structure_matrix(neighbor_point(chart, x.head(d)));
    return j2_from(form_part(J, n, rho), tol).matrix;
  };
}

/// N^a_{ij} = N_J(e_i, e_j)^a for constant coordinate fields:
/// J^b_i d_b J^a_j - J^b_j d_b J^a_i + J^a_b (d_j J^b_i - d_i J^b_j).
/// Stored as a connection-shaped tensor (a, i, j).
inline TensorSample nijenhuis_tensor(const MatrixXd& J,
                                     const std::vector<MatrixXd>& dJ) {
  const int d = static_cast<int>(J.rows());
  TensorSample t = TensorSample::zeros(TensorKind::connection, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      VectorXd v = VectorXd::Zero(d);
      for (int b = 0; b < d; ++b) {
        v += J(b, i) * dJ[static_cast<std::size_t>(b)].col(j);
        v -= J(b, j) * dJ[static_cast<std::size_t>(b)].col(i);
      }
      v += J * (dJ[static_cast<std::size_t>(j)].col(i) -
                dJ[static_cast<std::size_t>(i)].col(j));
      for (int a = 0; a < d; ++a) {
        t(a, i, j) = v(a);
        t(a, j, i) = -v(a);
      }
    }
  return t;
}

inline TensorSample nijenhuis(const BundleField& field, const VectorXd& x,
                              double h) {
  return nijenhuis_tensor(field(x), central_gradient(field, x, h));
}

struct J2Nijenhuis {
  TensorSample N;
  double max_component = 0.0;
  double closed_form_max = 0.0;
  /// max over q-index pairs of |(J2 N(d_qi, d_qj))_p - closed form|
  double discrepancy = 0.0;
};

/// J2 N_{J2}(d_qi, d_qj) = sum_k (rho_{jk,i} - rho_{ik,j}) d_pk, with the
/// right side from finite differences of the form coefficients.
inline J2Nijenhuis j2_nijenhuis(const AffineChart& chart, const BundlePoint& xi,
                                FormPart rho, double h) {
  const VectorXd x = xi.coordinates();
  const BundleField field = j2_field(chart, rho);
  J2Nijenhuis r;
  const MatrixXd J2 = field(x);
  r.N = nijenhuis(field, x, h);
  r.max_component = r.N.max_abs();
  const int d = xi.base_dim();
  const std::vector<MatrixXd> drho =
      central_gradient(form_field(chart, rho), xi.base.q(), h);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      VectorXd nij(2 * d);
      for (int a = 0; a < 2 * d; ++a) nij(a) = r.N(a, i, j);
      const VectorXd lhs = J2 * nij;
      for (int k = 0; k < d; ++k) {
        const double closed = drho[static_cast<std::size_t>(i)](j, k) -
                              drho[static_cast<std::size_t>(j)](i, k);
        r.closed_form_max = std::max(r.closed_form_max, std::abs(closed));
        r.discrepancy = std::max(r.discrepancy, std::abs(lhs(d + k) - closed));
      }
      for (int k = 0; k < d; ++k)
        r.discrepancy = std::max(r.discrepancy, std::abs(lhs(k)));
    }
  return r;
}

struct OmegaAlpha {
  std::array<MatrixXd, 3> forms;
  std::array<double, 3> skew_residual{};
  std::array<double, 3> closedness{};
};

/// omega_alpha = g_N J_alpha for J1, J2 (rho = omega11) and J3 = J1 J2.
inline std::array<MatrixXd, 3> omega_alpha_at(const MatrixXd& J, int n,
                                              double tol) {
  const HodgeSplit split = hodge_split(J, symplectic_matrix(n));
  const MatrixXd gN = g_N_from(kaehler_metric(J, split.omega11, tol));
  const MatrixXd j1 = j1_from(J).matrix;
  const MatrixXd j2 = j2_from(split.omega11, tol).matrix;
  return {gN * j1, gN * j2, gN * j1 * j2};
}

inline OmegaAlpha omega_alpha_forms(const AffineChart& chart,
                                    const BundlePoint& xi, double h) {
  const int n = chart.spec().n;
  const double tol = chart.spec().tol;
  OmegaAlpha r;
  r.forms = omega_alpha_at(complex_structure_matrix(xi.base), n, tol);
  for (std::size_t a = 0; a < 3; ++a) {
    r.skew_residual[a] = max_abs(r.forms[a] + r.forms[a].transpose());
    const MatrixField field = [&chart, n, tol, a](const VectorXd& x) {
      const auto d = x.size() / 2;
      return omega_alpha_at(
          complex_structure_matrix(neighbor_point(chart, x.head(d))), n, tol)[a];
    };
    r.closedness[a] = exterior_derivative_residual(
        central_gradient(field, xi.coordinates(), h));
  }
  return r;
}

}  // namespace specgeo
