#pragma once

// Extrinsic construction: a holomorphic 1-form alpha = sum F_i dz^i viewed as
// an immersion U -> T*C^n, its real special coordinates x = Re z, y = Re F,
// regularity and Lagrangian classification, and the Newton inversion of the
// real chart.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "specgeo/error.hpp"
#include "specgeo/expr.hpp"
#include "specgeo/linalg.hpp"

namespace specgeo {

enum class Kind { prepotential, one_form };

inline std::string_view to_string(Kind k) {
  return k == Kind::prepotential ? "prepotential" : "one_form";
}

/// The input datum of a run.
struct ManifoldSpec {
  std::string name;
  int n = 1;
  Kind kind = Kind::prepotential;
  /// One expression F for a prepotential, n expressions F_1..F_n otherwise.
  std::vector<Expression> components;
  std::vector<std::string> sources;
  std::vector<VectorXcd> sample_points;
  double fd_step = 1e-5;
  double tol = 1e-6;
  bool conic = false;
  std::vector<double> theta_samples;  // radians
  std::vector<cplx> lambda_samples;
  std::vector<VectorXd> fibers;  // momenta, length 2n each
  std::set<std::string> expected_fail;
  bool expected_skip = false;
  std::map<std::string, double> tolerances;
  std::uint64_t seed = 20020101;

  void validate() const {
    if (n < 1) throw SpecInvalid("n must be positive");
    const std::size_t want = kind == Kind::prepotential ? 1 : static_cast<std::size_t>(n);
    if (components.size() != want)
      throw SpecInvalid("expected " + std::to_string(want) +
                        " component expression(s), got " +
                        std::to_string(components.size()));
    for (const auto& c : components)
      if (c.empty() || c.vars() != n)
        throw SpecInvalid("component expression has wrong dimension");
    if (!(fd_step > 0.0)) throw SpecInvalid("fd_step must be > 0");
    if (!(tol > 0.0)) throw SpecInvalid("tol must be > 0");
    for (const auto& z : sample_points)
      if (z.size() != n) throw SpecInvalid("sample point has wrong dimension");
    for (const auto& p : fibers)
      if (p.size() != 2 * n) throw SpecInvalid("fiber point must have length 2n");
    for (const auto& l : lambda_samples)
      if (l == cplx(0.0)) throw SpecInvalid("lambda samples must be nonzero");
    for (const auto& [id, t] : tolerances)
      if (!(t >= 0.0)) throw SpecInvalid("tolerance for " + id + " must be >= 0");
  }
};

/// Jets of the 1-form components F_i at a point: values, Jacobian
/// dF(i, j) = dF_i/dz^j and, when requested, second derivatives
/// d2F[i](j, k) = d^2 F_i / dz^j dz^k.
struct ComponentJets {
  int order = 0;
  VectorXcd F;
  MatrixXcd dF;
  std::vector<MatrixXcd> d2F;
  cplx potential{};  // F itself for a prepotential
};

/// Evaluates the 1-form components. A prepotential is lowered to its
/// gradient at jet level, so downstream code sees a single path.
inline ComponentJets component_jets(const ManifoldSpec& spec,
                                    const VectorXcd& z, int order) {
  if (order < 0 || order > 2)
    throw std::invalid_argument("component jet order must be in 0..2");
  const int n = spec.n;
  ComponentJets out;
  out.order = order;
  out.F.resize(n);
  if (order >= 1) out.dF.resize(n, n);
  if (order >= 2) out.d2F.assign(static_cast<std::size_t>(n), MatrixXcd(n, n));
  if (spec.kind == Kind::prepotential) {
    const HoloJet jet = eval_jet(spec.components.front(), z, order + 1);
    out.potential = jet.value();
    for (int i = 0; i < n; ++i) {
      out.F(i) = jet.d(i);
      for (int j = 0; order >= 1 && j < n; ++j) {
        out.dF(i, j) = jet.d(i, j);
        for (int k = 0; order >= 2 && k < n; ++k)
          out.d2F[static_cast<std::size_t>(i)](j, k) = jet.d(i, j, k);
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const HoloJet jet =
          eval_jet(spec.components[static_cast<std::size_t>(i)], z, order);
      out.F(i) = jet.value();
      for (int j = 0; order >= 1 && j < n; ++j) {
        out.dF(i, j) = jet.d(j);
        for (int k = 0; order >= 2 && k < n; ++k)
          out.d2F[static_cast<std::size_t>(i)](j, k) = jet.d(j, k);
      }
    }
  }
  return out;
}

/// V = T*C^n with Omega = sum dz^i ^ dw_i, tau = conjugation and
/// gamma = sqrt(-1) Omega(., tau .).
struct AmbientSpace {
  int n = 1;
  MatrixXcd omega;  // Omega(u, v) = u^T omega v
  MatrixXcd gamma;  // gamma(u, v) = v^H gamma u, Hermitian

  explicit AmbientSpace(int dim) : n(dim) {
    omega = MatrixXcd::Zero(2 * n, 2 * n);
    omega.block(0, n, n, n) = MatrixXcd::Identity(n, n);
    omega.block(n, 0, n, n) = -MatrixXcd::Identity(n, n);
    // i u^T omega conj(v) = v^H (i omega^T) u
    gamma = cplx(0.0, 1.0) * omega.transpose();
  }

  static VectorXcd tau(const VectorXcd& v) { return v.conjugate(); }

  cplx Omega(const VectorXcd& u, const VectorXcd& v) const {
    return (u.transpose() * omega * v)(0, 0);
  }

  cplx gamma_form(const VectorXcd& u, const VectorXcd& v) const {
    return cplx(0.0, 1.0) * Omega(u, tau(v));
  }

  Signature gamma_signature() const {
    return signature_of(hermitian_eigenvalues(gamma), 1e-12);
  }
};

/// phi(z) = (z, F_1(z), ..., F_n(z)).
inline VectorXcd immersion_phi(const ManifoldSpec& spec, const VectorXcd& z) {
  const ComponentJets jets = component_jets(spec, z, 0);
  VectorXcd out(2 * spec.n);
  out << z, jets.F;
  return out;
}

struct Regularity {
  MatrixXd im_dF;  // Im dF_i/dz^j
  InvertibilityVerdict verdict;
  bool regular() const { return verdict.invertible; }
};

inline Regularity regularity_from_jets(const ComponentJets& jets, double tol) {
  Regularity r;
  r.im_dF = jets.dF.imag();
  r.verdict = relative_invertibility(r.im_dF, tol);
  return r;
}

inline Regularity regularity_matrix(const ManifoldSpec& spec,
                                    const VectorXcd& z) {
  return regularity_from_jets(component_jets(spec, z, 1), spec.tol);
}

struct LagrangianVerdict {
  bool lagrangian = false;
  double residual = 0.0;
};

inline LagrangianVerdict is_lagrangian(const ManifoldSpec& spec,
                                       const VectorXcd& z) {
  if (spec.kind == Kind::prepotential) return {true, 0.0};
  const MatrixXcd dF = component_jets(spec, z, 1).dF;
  const double residual = max_abs(dF - dF.transpose());
  return {residual <= spec.tol, residual};
}

/// A point of M with its real special coordinates and chart Jacobian
/// D(x, y)/D(a, b), z = a + i b.
struct ChartPoint {
  VectorXcd z;
  ComponentJets jets;
  VectorXd x;
  VectorXd y;
  MatrixXd jac;
  MatrixXd jac_inv;

  int n() const { return static_cast<int>(z.size()); }
  VectorXd q() const {
    VectorXd out(2 * n());
    out << x, y;
    return out;
  }
};

/// Jacobian of (x, y) over (a, b): [[I, 0], [Re dF, -Im dF]] by Cauchy-Riemann.
inline MatrixXd chart_jacobian(const MatrixXcd& dF) {
  const auto n = dF.rows();
  MatrixXd jac = MatrixXd::Zero(2 * n, 2 * n);
  jac.block(0, 0, n, n) = MatrixXd::Identity(n, n);
  jac.block(n, 0, n, n) = dF.real();
  jac.block(n, n, n, n) = -dF.imag();
  return jac;
}

inline ChartPoint chart_point(const ManifoldSpec& spec, const VectorXcd& z,
                              int jet_order = 2) {
  ChartPoint p;
  p.z = z;
  p.jets = component_jets(spec, z, std::max(jet_order, 1));
  const Regularity reg = regularity_from_jets(p.jets, spec.tol);
  if (!reg.regular())
    throw NotRegular("Im dF_i/dz^j is singular (det " +
                     std::to_string(reg.verdict.det) + ")");
  p.x = z.real();
  p.y = p.jets.F.real();
  p.jac = chart_jacobian(p.jets.dF);
  p.jac_inv = p.jac.inverse();
  return p;
}

struct NewtonOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;
  double blowup = 1e6;
};

/// Solves Re z = x, Re F(z) = y for z by damped Newton iteration on the real
/// chart map, starting from z0. Iterates past `tolerance` until the residual
/// stops improving so callers get full working precision.
inline VectorXcd invert_special_coordinates(const ManifoldSpec& spec,
                                            const VectorXd& x,
                                            const VectorXd& y,
                                            const VectorXcd& z0,
                                            const NewtonOptions& opt = {}) {
  const int n = spec.n;
  VectorXd target(2 * n);
  target << x, y;
  auto residual_at = [&](const VectorXcd& z, const ComponentJets& jets) {
    VectorXd r(2 * n);
    r << z.real(), jets.F.real();
    return VectorXd(r - target);
  };
  const double scale = 1.0 + target.cwiseAbs().maxCoeff();

  VectorXcd z = z0;
  ComponentJets jets = component_jets(spec, z, 1);
  VectorXd r = residual_at(z, jets);
  double rnorm = r.cwiseAbs().maxCoeff();
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (!std::isfinite(rnorm) || rnorm > opt.blowup)
      throw NewtonDiverged("Newton residual blew up");
    if (rnorm <= 4 * std::numeric_limits<double>::epsilon() * scale) break;
    const Regularity reg = regularity_from_jets(jets, spec.tol);
    if (!reg.regular())
      throw NotRegular("singular chart Jacobian during Newton inversion");
    const VectorXd step =
        chart_jacobian(jets.dF).partialPivLu().solve(r);
    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
      VectorXcd trial = z;
      for (int k = 0; k < n; ++k)
        trial(k) -= cplx(lambda * step(k), lambda * step(n + k));
      ComponentJets trial_jets;
      try {
        trial_jets = component_jets(spec, trial, 1);
      } catch (const EvaluationError&) {
        continue;
      }
      const VectorXd trial_r = residual_at(trial, trial_jets);
      const double trial_norm = trial_r.cwiseAbs().maxCoeff();
      if (trial_norm < rnorm) {
        z = trial;
        jets = std::move(trial_jets);
        r = trial_r;
        rnorm = trial_norm;
        improved = true;
        break;
      }
    }
    if (!improved) break;  // stagnated at round-off
  }
  if (!(rnorm <= opt.tolerance * scale))
    throw NewtonDiverged("Newton inversion did not converge (residual " +
                         std::to_string(rnorm) + ")");
  return z;
}

inline VectorXcd invert_special_coordinates(const ManifoldSpec& spec,
                                            const VectorXd& q,
                                            const VectorXcd& z0) {
  return invert_special_coordinates(spec, q.head(spec.n), q.tail(spec.n), z0);
}

struct GammaPullback {
  MatrixXcd h;  // h(j, k) = gamma(d/dz^k, d/dz^j)
  VectorXd eigenvalues;
  Signature signature;
  bool nondegenerate = false;
};

/// (d phi)^H gamma (d phi) on the holomorphic frame d/dz^j.
inline GammaPullback gamma_pullback_from_jets(const ComponentJets& jets,
                                              double tol) {
  const auto n = jets.dF.rows();
  const AmbientSpace ambient(static_cast<int>(n));
  MatrixXcd dphi(2 * n, n);
  dphi << MatrixXcd::Identity(n, n), jets.dF;
  GammaPullback g;
  g.h = dphi.adjoint() * ambient.gamma * dphi;
  g.eigenvalues = hermitian_eigenvalues(g.h);
  g.signature = signature_of(g.eigenvalues, tol);
  g.nondegenerate = g.signature.zero == 0;
  return g;
}

inline GammaPullback gamma_pullback(const ManifoldSpec& spec,
                                    const VectorXcd& z) {
  return gamma_pullback_from_jets(component_jets(spec, z, 1), spec.tol);
}

/// Real symmetric form Re(phi^* gamma) on the (Re z, Im z) frame:
/// g(U, V) = Re h(u, v) with u = a + i b.
inline MatrixXd gamma_metric_real(const GammaPullback& g) {
  const auto n = g.h.rows();
  const MatrixXd pr = g.h.real();
  const MatrixXd pi = g.h.imag();
  MatrixXd out(2 * n, 2 * n);
  out << pr, -pi, pi, pr;
  return out;
}

/// Maps the real affine coordinates q = (x, y) back to chart points, seeding
/// Newton from a fixed nearby point.
class AffineChart {
 public:
  AffineChart(const ManifoldSpec& spec, VectorXcd seed)
      : spec_(&spec), seed_(std::move(seed)) {}

  const ManifoldSpec& spec() const { return *spec_; }
  const VectorXcd& seed() const { return seed_; }

  ChartPoint at(const VectorXd& q) const {
    const VectorXcd z = invert_special_coordinates(*spec_, q, seed_);
    return chart_point(*spec_, z);
  }

 private:
  const ManifoldSpec* spec_;
  VectorXcd seed_;
};

}  // namespace specgeo
