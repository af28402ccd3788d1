#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace specgeo;
using namespace testing_support;

namespace {

BundlePoint bundle_point(const ManifoldSpec& spec, const VectorXcd& z, const VectorXd& p) {
  return {chart_point(spec, z), p};
}

VectorXd momenta(std::initializer_list<double> v) {
  VectorXd p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) p(k++) = x;
  return p;
}

const VectorXd& fiber_a() {
  static const VectorXd p = momenta({0.1, -0.2, 0.3, 0.4});
  return p;
}

MatrixXd quad_J() { return standard_complex_structure(2) * -1.0; }

}  // namespace

TEST(Horizontal, CoordinateSplittingWithoutCorrection) {
  const ManifoldSpec spec = catalog("m_cubic");
  const BundlePoint xi = bundle_point(spec, spec.sample_points[0], fiber_a());
  const MatrixXd H = horizontal_frame(xi);
  EXPECT_EQ(max_abs(H.topRows(4) - MatrixXd::Identity(4, 4)), 0.0);
  EXPECT_EQ(max_abs(H.bottomRows(4)), 0.0);
}

TEST(Horizontal, J1PreservesCorrectedHorizontalSpace) {
  for (const char* name : {"m_cubic", "a_curved"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const BundlePoint xi = bundle_point(spec, z, momenta({1.5, 0.5, -1.0, 2.0}));
      const MatrixXd J = complex_structure_matrix(xi.base);
      const TensorSample A = left_multiply(J, nabla_J_analytic(xi.base), 0.5);
      EXPECT_GT(A.max_abs(), 1e-2) << name;
      EXPECT_LE(horizontal_invariance_residual(xi, J, A), 1e-8) << name;
    }
  }
}

TEST(J1, QuadraticBlocks) {
  const ManifoldSpec spec = catalog("m_quad");
  const BundlePoint xi = bundle_point(spec, spec.sample_points[1], fiber_a());
  const BundleEndomorphism j1 = j1_at(xi);
  EXPECT_EQ(max_abs(j1.block(0, 0) - quad_J()), 0.0);
  EXPECT_EQ(max_abs(j1.block(1, 1) - quad_J().transpose()), 0.0);
  EXPECT_EQ(max_abs(j1.block(0, 1)), 0.0);
  EXPECT_EQ(j1.square_residual(-1.0), 0.0);
}

TEST(J1Property, SquaresToMinusOneAndIgnoresFiber) {
  const ManifoldSpec spec = catalog("m_cubic");
  for (const auto& z : spec.sample_points) {
    const BundleEndomorphism a = j1_at(bundle_point(spec, z, fiber_a()));
    const BundleEndomorphism b = j1_at(bundle_point(spec, z, momenta({1.5, 0.5, -1.0, 2.0})));
    EXPECT_LE(a.square_residual(-1.0), 1e-10);
    EXPECT_EQ(max_abs(a.matrix - b.matrix), 0.0);
  }
}

TEST(J1, IntegrableOnCurvedExample) {
  const ManifoldSpec spec = catalog("m_cubic");
  for (const auto& z : spec.sample_points) {
    const BundlePoint xi = bundle_point(spec, z, fiber_a());
    const AffineChart chart(spec, z);
    EXPECT_LE(nijenhuis(j1_field(chart), xi.coordinates(), spec.fd_step).max_abs(), 5e-6);
  }
}

TEST(J2, FullOmegaConstant) {
  const MatrixXd w = symplectic_matrix(2);
  const BundleEndomorphism j2 = j2_from(w, 1e-6);
  EXPECT_EQ(max_abs(j2.block(1, 0) - w.transpose()), 0.0);
  EXPECT_LE(max_abs(j2.block(0, 1) + w.transpose().inverse()), 1e-15);
  EXPECT_LE(j2.square_residual(-1.0), 1e-15);
}

TEST(J2, DegenerateFormRejected) {
  EXPECT_THROW(j2_from(MatrixXd::Zero(4, 4), 1e-6), DegenerateForm);
  MatrixXd rank2 = MatrixXd::Zero(4, 4);
  rank2(0, 1) = 1;
  rank2(1, 0) = -1;
  EXPECT_THROW(j2_from(rank2, 1e-6), DegenerateForm);
  const ManifoldSpec spec = catalog("m_quad");
  const BundlePoint xi = bundle_point(spec, spec.sample_points[0], fiber_a());
  EXPECT_THROW(j2_at(xi, FormPart::omega_prime, spec.tol), DegenerateForm);
}

TEST(J2Property, SquaresToMinusOneForEveryNondegeneratePart) {
  for (const char* name : {"m_quad", "m_cubic", "a_sympl", "a_curved"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const BundlePoint xi = bundle_point(spec, z, fiber_a());
      for (FormPart part : {FormPart::full, FormPart::omega11, FormPart::omega_prime}) {
        try {
          EXPECT_LE(j2_at(xi, part, spec.tol).square_residual(-1.0), 1e-10) << name;
        } catch (const DegenerateForm&) {
          EXPECT_NE(part, FormPart::full) << name;
        }
      }
    }
  }
}

TEST(GN, QuadraticValue) {
  const ManifoldSpec spec = catalog("m_quad");
  const MatrixXd gN = g_N_at(bundle_point(spec, spec.sample_points[0], fiber_a()), spec.tol);
  MatrixXd expected = MatrixXd::Zero(8, 8);
  expected.topLeftCorner(4, 4) = 2.0 * MatrixXd::Identity(4, 4);
  expected.bottomRightCorner(4, 4) = 0.5 * MatrixXd::Identity(4, 4);
  EXPECT_LE(max_abs(gN - expected), 1e-15);
}

TEST(GNProperty, J1AndJ2Orthogonal) {
  for (const char* name : {"m_quad", "m_tau", "m_cubic"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const BundlePoint xi = bundle_point(spec, z, fiber_a());
      const MatrixXd gN = g_N_at(xi, spec.tol);
      const double scale = std::max(1.0, max_abs(gN));
      EXPECT_LE(max_abs(gN - gN.transpose()), 1e-9 * scale) << name;
      EXPECT_LE(orthogonality_residual(gN, j1_at(xi)), 1e-9 * scale) << name;
      EXPECT_LE(orthogonality_residual(gN, j2_at(xi, FormPart::omega11, spec.tol)),
                1e-9 * scale)
          << name;
    }
  }
}

TEST(GN, DegenerateMetricRejected) {
  KaehlerMetric m;
  m.g = MatrixXd::Zero(2, 2);
  m.degenerate = true;
  EXPECT_THROW(g_N_from(m), DegenerateForm);
}

TEST(Quaternion, HyperHermitianOnPrepotentials) {
  for (const char* name : {"m_quad", "m_tau", "m_cubic"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const QuaternionRelations q =
          quaternion_relations(complex_structure_matrix(chart_point(spec, z)), 2, spec.tol);
      ASSERT_TRUE(q.anticommutator) << name;
      EXPECT_LE(*q.anticommutator, 1e-8) << name;
      EXPECT_LE(*q.j3_square, 1e-8) << name;
      EXPECT_FALSE(q.para_commutator) << name;
      EXPECT_LE(q.commutator_formula, 1e-8) << name;
      EXPECT_LE(q.anticommutator_formula, 1e-8) << name;
    }
  }
}

TEST(Quaternion, ParaBranchOnSymplecticExample) {
  const ManifoldSpec spec = catalog("a_sympl");
  for (const auto& z : spec.sample_points) {
    const QuaternionRelations q =
        quaternion_relations(complex_structure_matrix(chart_point(spec, z)), 2, spec.tol);
    ASSERT_TRUE(q.para_commutator);
    EXPECT_LE(*q.para_commutator, 1e-9);
    EXPECT_LE(*q.para_j3_square, 1e-9);
    EXPECT_LE(q.commutator_formula, 1e-8);
    EXPECT_LE(q.anticommutator_formula, 1e-8);
  }
}

// For a random complex structure and the full omega, the split of J2 into
// commuting and anticommuting parts follows the block formulas.
TEST(QuaternionProperty, BlockFormulasForRandomStructures) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const MatrixXd J0 = standard_complex_structure(2);
  for (int s = 0; s < 30; ++s) {
    MatrixXd A(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) A(r, c) = u(rng) + (r == c ? 2.5 : 0.0);
    const MatrixXd J = A * J0 * A.inverse();
    const QuaternionRelations q = quaternion_relations(J, 2, 1e-9);
    EXPECT_LE(q.commutator_formula, 1e-8);
    EXPECT_LE(q.anticommutator_formula, 1e-8);
  }
}

TEST(Nijenhuis, ConstantFormGivesIntegrableJ2) {
  for (const char* name : {"m_cubic", "a_curved"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const BundlePoint xi = bundle_point(spec, z, fiber_a());
      const AffineChart chart(spec, z);
      EXPECT_LE(nijenhuis(j2_field(chart, FormPart::full), xi.coordinates(), spec.fd_step)
                    .max_abs(),
                1e-8)
          << name;
    }
  }
}

TEST(Nijenhuis, PushedForwardStandardStructureIsIntegrable) {
  // J = D Phi J0 D Phi^-1 for Phi(u) = (u0 + u1^2, u1, u2 + sin u3, u3):
  // evaluated at Phi(u), J is integrable though not constant.
  const MatrixXd J0 = standard_complex_structure(2);
  auto dphi = [](const VectorXd& u) {
    MatrixXd D = MatrixXd::Identity(4, 4);
    D(0, 1) = 2 * u(1);
    D(2, 3) = std::cos(u(3));
    return D;
  };
  auto inverse_phi = [](const VectorXd& x) {
    VectorXd u(4);
    u(1) = x(1);
    u(3) = x(3);
    u(0) = x(0) - x(1) * x(1);
    u(2) = x(2) - std::sin(x(3));
    return u;
  };
  const MatrixField J = [&](const VectorXd& x) {
    const MatrixXd D = dphi(inverse_phi(x));
    return MatrixXd(D * J0 * D.inverse());
  };
  VectorXd x(4);
  x << 0.2, 0.7, -0.3, 0.4;
  EXPECT_GT(max_abs(central_gradient(J, x, 1e-5)[1]), 0.5);
  EXPECT_LE(nijenhuis(J, x, 1e-5).max_abs(), 1e-8);
}

TEST(Nijenhuis, CurvedOmegaPrimeIsNotIntegrable) {
  const ManifoldSpec spec = catalog("a_curved");
  const VectorXcd z = spec.sample_points[0];
  const AffineChart chart(spec, z);
  for (const VectorXd& p : {fiber_a(), momenta({1.5, 0.5, -1.0, 2.0})}) {
    const BundlePoint xi = bundle_point(spec, z, p);
    for (FormPart part : {FormPart::omega_prime, FormPart::omega11}) {
      const J2Nijenhuis r = j2_nijenhuis(chart, xi, part, spec.fd_step);
      EXPECT_GT(r.max_component, 1e-2);
      EXPECT_GT(r.closed_form_max, 1e-2);
      EXPECT_LE(r.discrepancy, 1e-5);
    }
  }
}

TEST(Nijenhuis, FlatOmegaPrimeIsIntegrable) {
  const ManifoldSpec spec = catalog("a_sympl");
  for (const auto& z : spec.sample_points) {
    const AffineChart chart(spec, z);
    const BundlePoint xi = bundle_point(spec, z, fiber_a());
    const J2Nijenhuis r = j2_nijenhuis(chart, xi, FormPart::omega_prime, spec.fd_step);
    EXPECT_LE(r.max_component, 1e-6);
    EXPECT_LE(r.discrepancy, 1e-5);
  }
}

TEST(Nijenhuis, CubicOmega11ClosedFormAgrees) {
  const ManifoldSpec spec = catalog("m_cubic");
  for (const auto& z : spec.sample_points) {
    const AffineChart chart(spec, z);
    const J2Nijenhuis r =
        j2_nijenhuis(chart, bundle_point(spec, z, fiber_a()), FormPart::omega11, spec.fd_step);
    EXPECT_LE(r.max_component, 1e-6);
    EXPECT_LE(r.discrepancy, 1e-5);
  }
}

TEST(OmegaAlpha, SkewAndClosedOnPrepotentials) {
  for (const char* name : {"m_quad", "m_tau", "m_cubic"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const AffineChart chart(spec, z);
      const OmegaAlpha oa = omega_alpha_forms(chart, bundle_point(spec, z, fiber_a()), spec.fd_step);
      for (std::size_t a = 0; a < 3; ++a) {
        const double scale = std::max(1.0, max_abs(oa.forms[a]));
        EXPECT_LE(oa.skew_residual[a], 1e-9 * scale) << name << " alpha " << a + 1;
        EXPECT_LE(oa.closedness[a], 5e-6 * scale) << name << " alpha " << a + 1;
      }
    }
  }
}

TEST(OmegaAlpha, Omega1NotClosedWhenOmega11Curves) {
  const ManifoldSpec spec = catalog("a_curved");
  const VectorXcd z = spec.sample_points[0];
  const AffineChart chart(spec, z);
  const OmegaAlpha oa = omega_alpha_forms(chart, bundle_point(spec, z, fiber_a()), spec.fd_step);
  EXPECT_GT(oa.closedness[0], 1e-3);
  double parallel = 0.0;
  for (const auto& d : central_gradient(form_field(chart, FormPart::omega11),
                                        chart_point(spec, z).q(), spec.fd_step))
    parallel = std::max(parallel, max_abs(d));
  EXPECT_GT(parallel, 1e-3);
}
