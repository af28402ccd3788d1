#pragma once

// Intrinsic tensors in the affine frame (d/dx, d/dy). The flat connection has
// vanishing Christoffel symbols there, so every covariant derivative of a
// tensor field is a plain partial derivative in q = (x, y).

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "specgeo/charts.hpp"
#include "specgeo/error.hpp"
#include "specgeo/finite_difference.hpp"
#include "specgeo/tensor.hpp"

namespace specgeo {

// ---------------------------------------------------------------------------
// Pointwise algebra

/// omega = 2 sum dx^i ^ dy_i, dx ^ dy = dx (x) dy - dy (x) dx.
inline MatrixXd symplectic_matrix(int n) {
  MatrixXd w = MatrixXd::Zero(2 * n, 2 * n);
  w.block(0, n, n, n) = 2.0 * MatrixXd::Identity(n, n);
  w.block(n, 0, n, n) = -2.0 * MatrixXd::Identity(n, n);
  return w;
}

inline TensorSample symplectic_form_affine(const ChartPoint& p) {
  TensorSample t =
      TensorSample::from_matrix(TensorKind::bilinear, symplectic_matrix(p.n()));
  t.point = p;
  return t;
}

/// J pushed through the chart: Jac J_std Jac^-1.
inline MatrixXd complex_structure_matrix(const ChartPoint& p) {
  return p.jac * standard_complex_structure(p.n()) * p.jac_inv;
}

inline TensorSample complex_structure_affine(const ChartPoint& p) {
  TensorSample t = TensorSample::from_matrix(TensorKind::endomorphism,
                                             complex_structure_matrix(p));
  t.point = p;
  return t;
}

/// The bilinear form b(J., J.).
inline MatrixXd j_transform(const MatrixXd& b, const MatrixXd& J) {
  return J.transpose() * b * J;
}

struct HodgeSplit {
  MatrixXd omega11;
  MatrixXd omega_prime;
  /// max of |omega11(J.,J.) - omega11| and |omega'(J.,J.) + omega'|
  double invariance_residual = 0.0;
};

inline HodgeSplit hodge_split(const MatrixXd& J, const MatrixXd& omega) {
  HodgeSplit s;
  s.omega11 = 0.5 * (omega + j_transform(omega, J));
  s.omega_prime = omega - s.omega11;
  s.invariance_residual =
      std::max(max_abs(j_transform(s.omega11, J) - s.omega11),
               max_abs(j_transform(s.omega_prime, J) + s.omega_prime));
  return s;
}

struct KaehlerMetric {
  MatrixXd g;
  VectorXd eigenvalues;
  Signature signature;
  bool degenerate = false;
  double symmetry_residual = 0.0;
  double hermitian_residual = 0.0;  // |g(J.,J.) - g|
};

/// g = omega11(J., .). Degeneracy is reported, not thrown: indefinite and
/// degenerate metrics are legitimate outputs.
inline KaehlerMetric kaehler_metric(const MatrixXd& J, const MatrixXd& omega11,
                                    double tol) {
  KaehlerMetric m;
  m.g = J.transpose() * omega11;
  m.symmetry_residual = max_abs(m.g - m.g.transpose());
  m.hermitian_residual = max_abs(j_transform(m.g, J) - m.g);
  m.eigenvalues = symmetric_eigenvalues(m.g);
  const double scale = std::max(1.0, m.eigenvalues.cwiseAbs().maxCoeff());
  m.signature = signature_of(m.eigenvalues, tol * scale);
  m.degenerate = m.signature.zero > 0;
  return m;
}

inline KaehlerMetric kaehler_metric(const ChartPoint& p, double tol) {
  const MatrixXd J = complex_structure_matrix(p);
  return kaehler_metric(J, hodge_split(J, symplectic_matrix(p.n())).omega11,
                        tol);
}

// ---------------------------------------------------------------------------
// Fields over the affine coordinates

/// Chart point at a finite-difference neighbor; leaving the regular domain
/// means the step was too large for this sample.
inline ChartPoint neighbor_point(const AffineChart& chart, const VectorXd& q) {
  try {
    return chart.at(q);
  } catch (const NotRegular& e) {
    throw StepTooLarge(std::string("neighbor left the regular domain: ") +
                       e.what());
  } catch (const EvaluationError& e) {
    throw StepTooLarge(std::string("neighbor left the domain: ") + e.what());
  }
}

inline MatrixField complex_structure_field(const AffineChart& chart) {
  return [&chart](const VectorXd& q) {
    return complex_structure_matrix(neighbor_point(chart, q));
  };
}

enum class FormPart { full, omega11, omega_prime };

inline std::string_view to_string(FormPart f) {
  switch (f) {
    case FormPart::full: return "omega";
    case FormPart::omega11: return "omega11";
    case FormPart::omega_prime: return "omegaprime";
  }
  return "omega";
}

inline MatrixXd form_part(const MatrixXd& J, int n, FormPart part) {
  const MatrixXd w = symplectic_matrix(n);
  if (part == FormPart::full) return w;
  const HodgeSplit s = hodge_split(J, w);
  return part == FormPart::omega11 ? s.omega11 : s.omega_prime;
}

inline MatrixField form_field(const AffineChart& chart, FormPart part) {
  const int n = chart.spec().n;
  return [&chart, n, part](const VectorXd& q) {
    return form_part(complex_structure_matrix(neighbor_point(chart, q)), n,
                     part);
  };
}

inline MatrixField metric_field(const AffineChart& chart) {
  const double tol = chart.spec().tol;
  return [&chart, tol](const VectorXd& q) {
    return kaehler_metric(neighbor_point(chart, q), tol).g;
  };
}

// ---------------------------------------------------------------------------
// nabla J and the connection family

/// (nabla_mu J)^a_nu = dJ^a_nu / dq^mu by central differences.
inline TensorSample nabla_J(const MatrixField& J, const VectorXd& q, double h) {
  return TensorSample::from_slices(TensorKind::connection,
                                   central_gradient(J, q, h));
}

inline TensorSample nabla_J(const AffineChart& chart, const ChartPoint& p,
                            double h) {
  TensorSample t = nabla_J(complex_structure_field(chart), p.q(), h);
  t.point = p;
  return t;
}

/// Exact nabla J from the second derivatives of F:
/// d_s J = [d_s Jac Jac^-1, J] on the (a, b) coordinates, then
/// d/dq^mu = sum_s (Jac^-1)_{s mu} d_s.
inline TensorSample nabla_J_analytic(const ChartPoint& p) {
  const int n = p.n();
  if (p.jets.order < 2)
    throw std::invalid_argument("nabla_J_analytic needs second-order jets");
  const MatrixXd J = complex_structure_matrix(p);
  std::vector<MatrixXd> ds(static_cast<std::size_t>(2 * n));
  for (int k = 0; k < n; ++k) {
    MatrixXcd dk(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dk(i, j) = p.jets.d2F[static_cast<std::size_t>(i)](j, k);
    MatrixXd da = MatrixXd::Zero(2 * n, 2 * n);
    MatrixXd db = MatrixXd::Zero(2 * n, 2 * n);
    da.block(n, 0, n, n) = dk.real();
    da.block(n, n, n, n) = -dk.imag();
    db.block(n, 0, n, n) = -dk.imag();
    db.block(n, n, n, n) = -dk.real();
    const MatrixXd xa = da * p.jac_inv;
    const MatrixXd xb = db * p.jac_inv;
    ds[static_cast<std::size_t>(k)] = xa * J - J * xa;
    ds[static_cast<std::size_t>(n + k)] = xb * J - J * xb;
  }
  std::vector<MatrixXd> dq;
  for (int mu = 0; mu < 2 * n; ++mu) {
    MatrixXd acc = MatrixXd::Zero(2 * n, 2 * n);
    for (int s = 0; s < 2 * n; ++s)
      acc += p.jac_inv(s, mu) * ds[static_cast<std::size_t>(s)];
    dq.push_back(acc);
  }
  TensorSample t = TensorSample::from_slices(TensorKind::connection, dq);
  t.point = p;
  return t;
}

/// Alternation over the lower pair: T^a_{mu nu} - T^a_{nu mu}.
inline TensorSample alternate(const TensorSample& t) {
  TensorSample out = TensorSample::zeros(t.kind, t.dim);
  out.frame = t.frame;
  out.point = t.point;
  for (int a = 0; a < t.dim; ++a)
    for (int mu = 0; mu < t.dim; ++mu)
      for (int nu = 0; nu < t.dim; ++nu)
        out(a, mu, nu) = t(a, mu, nu) - t(a, nu, mu);
  return out;
}

struct Residual {
  TensorSample tensor;
  double residual = 0.0;
};

inline Residual d_nabla_J(const TensorSample& nablaJ) {
  Residual r{alternate(nablaJ), 0.0};
  r.residual = r.tensor.max_abs();
  return r;
}

/// Left-multiplies every slice: out(., mu, .) = c * m * t(., mu, .).
inline TensorSample left_multiply(const MatrixXd& m, const TensorSample& t,
                                  double c = 1.0) {
  std::vector<MatrixXd> slices;
  for (int mu = 0; mu < t.dim; ++mu) slices.push_back(c * m * t.slice(mu));
  TensorSample out = TensorSample::from_slices(t.kind, slices);
  out.frame = t.frame;
  out.point = t.point;
  return out;
}

inline MatrixXd exp_theta_J(const MatrixXd& J, double theta) {
  return std::cos(theta) * MatrixXd::Identity(J.rows(), J.cols()) +
         std::sin(theta) * J;
}

struct ThetaFamily {
  double theta = 0.0;
  TensorSample A;
  TensorSample torsion;
};

/// A^theta = -sin(theta) e^{theta J} nabla J; the flat connection is
/// torsionfree, so T^theta = alt(A^theta).
inline ThetaFamily theta_connection(const MatrixXd& J,
                                    const TensorSample& nablaJ, double theta) {
  ThetaFamily f;
  f.theta = theta;
  f.A = left_multiply(exp_theta_J(J, theta), nablaJ, -std::sin(theta));
  f.torsion = alternate(f.A);
  return f;
}

/// alt(A^theta) assembled the other way round: -sin(theta) e^{theta J} d J.
inline TensorSample torsion_from_dJ(const MatrixXd& J,
                                    const TensorSample& nablaJ, double theta) {
  return left_multiply(exp_theta_J(J, theta), d_nabla_J(nablaJ).tensor,
                       -std::sin(theta));
}

/// (nabla^theta_mu J) = d_mu J + [A^theta_mu, J], alternated over (mu, nu).
inline Residual theta_d_J(const MatrixXd& J, const TensorSample& nablaJ,
                          double theta) {
  const ThetaFamily f = theta_connection(J, nablaJ, theta);
  std::vector<MatrixXd> slices;
  for (int mu = 0; mu < nablaJ.dim; ++mu) {
    const MatrixXd a = f.A.slice(mu);
    slices.push_back(nablaJ.slice(mu) + a * J - J * a);
  }
  Residual r{alternate(TensorSample::from_slices(TensorKind::connection, slices)),
             0.0};
  r.residual = r.tensor.max_abs();
  return r;
}

/// Gamma^(J) = -J nabla J.
inline TensorSample conjugate_connection(const MatrixXd& J,
                                         const TensorSample& nablaJ) {
  return left_multiply(J, nablaJ, -1.0);
}

struct ComplexConnection {
  TensorSample gamma;  // Gamma^D = -1/2 J nabla J
  TensorSample DJ;
  double residual = 0.0;
};

inline ComplexConnection complex_connection_D(const MatrixXd& J,
                                              const TensorSample& nablaJ) {
  ComplexConnection c;
  c.gamma = left_multiply(J, nablaJ, -0.5);
  std::vector<MatrixXd> slices;
  for (int mu = 0; mu < nablaJ.dim; ++mu) {
    const MatrixXd g = c.gamma.slice(mu);
    slices.push_back(nablaJ.slice(mu) + g * J - J * g);
  }
  c.DJ = TensorSample::from_slices(TensorKind::connection, slices);
  c.residual = c.DJ.max_abs();
  return c;
}

/// Condition (AJ) for A = nabla - D = 1/2 J nabla J:
/// xi(A_X J Y) = xi(A_{JX} Y) for random covectors xi and all frame X, Y.
inline double aj_condition_residual(const MatrixXd& J,
                                    const TensorSample& nablaJ,
                                    std::uint64_t seed, int covectors = 20) {
  const TensorSample A = left_multiply(J, nablaJ, 0.5);
  const int d = nablaJ.dim;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < covectors; ++k) {
    VectorXd xi(d);
    for (int a = 0; a < d; ++a) xi(a) = uni(rng);
    // row mu: the covector A^xi_{d_mu}
    MatrixXd axi(d, d);
    for (int mu = 0; mu < d; ++mu) axi.row(mu) = xi.transpose() * A.slice(mu);
    const MatrixXd lhs = axi * J;                // A^xi_X o J
    const MatrixXd rhs = J.transpose() * axi;    // A^xi_{JX}
    worst = std::max(worst, max_abs(lhs - rhs));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Metric derivatives (special Kaehler case)

inline KaehlerMetric require_nondegenerate(const ChartPoint& p, double tol) {
  KaehlerMetric m = kaehler_metric(p, tol);
  if (m.degenerate) throw DegenerateForm("g is degenerate at this point");
  return m;
}

/// out(mu, nu, rho) = d_mu g_{nu rho}.
inline TensorSample metric_derivative(const AffineChart& chart,
                                      const ChartPoint& p, double h) {
  const std::vector<MatrixXd> dg = central_gradient(metric_field(chart), p.q(), h);
  const int d = static_cast<int>(dg.size());
  TensorSample t = TensorSample::zeros(TensorKind::cubic, d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu)
      for (int rho = 0; rho < d; ++rho)
        t(mu, nu, rho) = dg[static_cast<std::size_t>(mu)](nu, rho);
  t.point = p;
  return t;
}

inline double total_symmetry_residual(const TensorSample& c) {
  double worst = 0.0;
  for (int a = 0; a < c.dim; ++a)
    for (int b = 0; b < c.dim; ++b)
      for (int e = 0; e < c.dim; ++e) {
        const double v = c(a, b, e);
        for (double w : {c(a, e, b), c(b, a, e), c(b, e, a), c(e, a, b),
                         c(e, b, a)})
          worst = std::max(worst, std::abs(v - w));
      }
  return worst;
}

struct NablaG {
  TensorSample dg;
  double symmetry_residual = 0.0;
};

inline NablaG nabla_g(const AffineChart& chart, const ChartPoint& p, double h) {
  require_nondegenerate(p, chart.spec().tol);
  NablaG r;
  r.dg = metric_derivative(chart, p, h);
  r.symmetry_residual = total_symmetry_residual(r.dg);
  return r;
}

/// Gamma^rho_{mu nu} = 1/2 g^{rho sigma}(d_mu g_{sigma nu} + d_nu g_{sigma mu}
/// - d_sigma g_{mu nu}) from a derivative tensor dg(mu, nu, rho).
inline TensorSample christoffel(const MatrixXd& g, const TensorSample& dg) {
  const int d = dg.dim;
  const MatrixXd ginv = g.inverse();
  TensorSample t = TensorSample::zeros(TensorKind::connection, d);
  for (int rho = 0; rho < d; ++rho)
    for (int mu = 0; mu < d; ++mu)
      for (int nu = 0; nu < d; ++nu) {
        double acc = 0.0;
        for (int s = 0; s < d; ++s)
          acc += ginv(rho, s) *
                 (dg(mu, s, nu) + dg(nu, s, mu) - dg(s, mu, nu));
        t(rho, mu, nu) = 0.5 * acc;
      }
  t.point = dg.point;
  return t;
}

struct LeviCivita {
  TensorSample gamma_lc;
  TensorSample gamma_D;
  double residual = 0.0;
};

inline LeviCivita levi_civita(const AffineChart& chart, const ChartPoint& p,
                              double h) {
  const KaehlerMetric m = require_nondegenerate(p, chart.spec().tol);
  LeviCivita r;
  r.gamma_lc = christoffel(m.g, metric_derivative(chart, p, h));
  const MatrixXd J = complex_structure_matrix(p);
  r.gamma_D = complex_connection_D(J, nabla_J(chart, p, h)).gamma;
  r.residual = (r.gamma_lc - r.gamma_D).max_abs();
  return r;
}

/// d_mu g_{nu rho} - (Gamma^(J))^sigma_{mu rho} g_{nu sigma}.
inline double g_duality_check(const AffineChart& chart, const ChartPoint& p,
                              double h) {
  const KaehlerMetric m = require_nondegenerate(p, chart.spec().tol);
  const TensorSample dg = metric_derivative(chart, p, h);
  const TensorSample conj =
      conjugate_connection(complex_structure_matrix(p), nabla_J(chart, p, h));
  const int d = dg.dim;
  double worst = 0.0;
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu)
      for (int rho = 0; rho < d; ++rho) {
        double acc = dg(mu, nu, rho);
        for (int s = 0; s < d; ++s) acc -= conj(s, mu, rho) * m.g(nu, s);
        worst = std::max(worst, std::abs(acc));
      }
  return worst;
}

struct GEquIdentity {
  MatrixXd g_gamma;           // Re phi^* gamma in the affine frame
  double gequ_residual = 0.0;          // |2 g(., J.) - (omega + omega(J., J.))|
  double kaehler_form_residual = 0.0;  // |omega - g(., J.)|
};

inline GEquIdentity g_equ_identity(const ChartPoint& p, double tol) {
  const GammaPullback pull = gamma_pullback_from_jets(p.jets, tol);
  if (!pull.nondegenerate)
    throw DegenerateForm("phi^* gamma is degenerate at this point");
  GEquIdentity r;
  r.g_gamma = p.jac_inv.transpose() * gamma_metric_real(pull) * p.jac_inv;
  const MatrixXd J = complex_structure_matrix(p);
  const MatrixXd w = symplectic_matrix(p.n());
  r.gequ_residual = max_abs(2.0 * r.g_gamma * J - (w + j_transform(w, J)));
  r.kaehler_form_residual = max_abs(w - r.g_gamma * J);
  return r;
}

// ---------------------------------------------------------------------------
// Exterior derivatives of 2-form fields

/// (d b)_{abc} = d_a b_bc + d_b b_ca + d_c b_ab; returns the max component.
inline double exterior_derivative_residual(const std::vector<MatrixXd>& db) {
  const int d = static_cast<int>(db.size());
  double worst = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      for (int c = b + 1; c < d; ++c) {
        const double v = db[static_cast<std::size_t>(a)](b, c) +
                         db[static_cast<std::size_t>(b)](c, a) +
                         db[static_cast<std::size_t>(c)](a, b);
        worst = std::max(worst, std::abs(v));
      }
  return worst;
}

inline double form_closedness(const AffineChart& chart, const ChartPoint& p,
                              FormPart part, double h) {
  return exterior_derivative_residual(
      central_gradient(form_field(chart, part), p.q(), h));
}

// ---------------------------------------------------------------------------
// Conic homogeneity

struct ConicReport {
  double homogeneity = 0.0;
  double euler = 0.0;  // prepotential only
  double scale = 1.0;  // 1 + |F(z)|
  double residual() const { return std::max(homogeneity, euler); }
  bool passed(double tol) const { return residual() <= tol * scale; }
};

inline ConicReport conic_checks(const ManifoldSpec& spec, const VectorXcd& z,
                                const std::vector<cplx>& lambdas) {
  ConicReport r;
  if (spec.kind == Kind::prepotential) {
    const Expression& F = spec.components.front();
    const HoloJet jet = eval_jet(F, z, 1);
    const cplx f = jet.value();
    r.scale = 1.0 + std::abs(f);
    for (const cplx& l : lambdas) {
      const VectorXcd lz = l * z;
      r.homogeneity =
          std::max(r.homogeneity, std::abs(evaluate(F, lz) - l * l * f));
    }
    cplx euler = -2.0 * f;
    for (int i = 0; i < spec.n; ++i) euler += z(i) * jet.d(i);
    r.euler = std::abs(euler);
  } else {
    VectorXcd f(spec.n);
    for (int i = 0; i < spec.n; ++i)
      f(i) = evaluate(spec.components[static_cast<std::size_t>(i)], z);
    r.scale = 1.0 + f.cwiseAbs().maxCoeff();
    for (const cplx& l : lambdas) {
      const VectorXcd lz = l * z;
      for (int i = 0; i < spec.n; ++i)
        r.homogeneity = std::max(
            r.homogeneity,
            std::abs(evaluate(spec.components[static_cast<std::size_t>(i)], lz) -
                     l * f(i)));
    }
  }
  return r;
}

}  // namespace specgeo
