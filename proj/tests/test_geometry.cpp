#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "support.hpp"

using namespace specgeo;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

MatrixXd fd_chart_jacobian(const ManifoldSpec& spec, const VectorXcd& z) {
  return fd_jacobian([&](const VectorXd& ab) { return real_chart_map(spec, ab); }, ab_of(z),
                     1e-6);
}

// J from a finite-difference chart Jacobian: D(x,y)/D(a,b) J_std (...)^-1.
MatrixXd oracle_J(const ManifoldSpec& spec, const VectorXcd& z) {
  const MatrixXd D = fd_chart_jacobian(spec, z);
  return D * standard_complex_structure(spec.n) * D.inverse();
}

// For a prepotential the metric on (a, b) is diag(N, N) with N = 2 Im F_jk.
MatrixXd oracle_g(const ManifoldSpec& spec, const VectorXcd& z) {
  const int n = spec.n;
  const MatrixXd N = 2.0 * eval_jet(spec.components.front(), z, 2).hess().imag();
  MatrixXd gab = MatrixXd::Zero(2 * n, 2 * n);
  gab.topLeftCorner(n, n) = N;
  gab.bottomRightCorner(n, n) = N;
  const MatrixXd Dinv = fd_chart_jacobian(spec, z).inverse();
  return Dinv.transpose() * gab * Dinv;
}

MatrixXd random_matrix(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixXd m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = u(rng);
  return m;
}

// An almost complex structure on R^4 that is not of the special kind:
// J(q) = A(q) J_std A(q)^-1 for a position-dependent frame A.
MatrixXd adversarial_J(const VectorXd& q) {
  MatrixXd A = MatrixXd::Identity(4, 4);
  A(0, 1) += 0.4 * q(2) * q(3);
  A(1, 3) += 0.3 * std::sin(q(0));
  A(2, 0) += 0.5 * q(1) * q(1);
  A(3, 2) += 0.2 * q(0) - 0.3 * q(3);
  const MatrixXd J0 = standard_complex_structure(2);
  return A * J0 * A.inverse();
}

VectorXd adversarial_point() {
  VectorXd q(4);
  q << 0.3, -0.2, 0.5, 0.1;
  return q;
}

}  // namespace

TEST(Pointwise, SymplecticMatrix) {
  MatrixXd w(2, 2);
  w << 0, 2, -2, 0;
  EXPECT_EQ(max_abs(symplectic_matrix(1) - w), 0.0);
  const MatrixXd w2 = symplectic_matrix(2);
  EXPECT_EQ(max_abs(w2 + w2.transpose()), 0.0);
  EXPECT_NEAR(w2.determinant(), 16.0, 1e-12);
}

TEST(ComplexStructure, QuadraticIsConstant) {
  const ManifoldSpec spec = catalog("m_quad");
  MatrixXd expected = MatrixXd::Zero(4, 4);
  expected.block(0, 2, 2, 2) = MatrixXd::Identity(2, 2);
  expected.block(2, 0, 2, 2) = -MatrixXd::Identity(2, 2);
  for (const auto& z : spec.sample_points)
    EXPECT_EQ(max_abs(complex_structure_matrix(chart_point(spec, z)) - expected), 0.0);
}

TEST(ComplexStructure, TauIsConstant) {
  const ManifoldSpec spec = catalog("m_tau");
  const MatrixXd J0 = complex_structure_matrix(chart_point(spec, spec.sample_points[0]));
  for (const auto& z : spec.sample_points)
    EXPECT_LE(max_abs(complex_structure_matrix(chart_point(spec, z)) - J0), 1e-15);
}

TEST(ComplexStructureProperty, MatchesFiniteDifferenceOracleAndSquaresToMinusOne) {
  for (const char* name : {"m_quad", "m_tau", "m_cubic", "a_sympl", "a_curved"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const MatrixXd J = complex_structure_matrix(chart_point(spec, z));
      const auto d = J.rows();
      EXPECT_LE(max_abs(J * J + MatrixXd::Identity(d, d)), 1e-12) << name;
      EXPECT_LE(max_abs(J - oracle_J(spec, z)), 1e-7) << name;
    }
  }
}

TEST(HodgeProperty, SplitOfRandomFormIsTypeDecomposition) {
  std::mt19937_64 rng(17);
  const MatrixXd J0 = standard_complex_structure(2);
  for (int s = 0; s < 30; ++s) {
    const MatrixXd A = random_matrix(rng, 4) + 3.0 * MatrixXd::Identity(4, 4);
    const MatrixXd J = A * J0 * A.inverse();
    const MatrixXd m = random_matrix(rng, 4);
    const MatrixXd w = m - m.transpose();
    const HodgeSplit split = hodge_split(J, w);
    EXPECT_LE(max_abs(split.omega11 + split.omega_prime - w), 1e-12);
    EXPECT_LE(max_abs(j_transform(split.omega11, J) - split.omega11), 1e-10);
    EXPECT_LE(max_abs(j_transform(split.omega_prime, J) + split.omega_prime), 1e-10);
    EXPECT_LE(split.invariance_residual, 1e-10);
    EXPECT_LE(max_abs(split.omega11 + split.omega11.transpose()), 1e-12);
  }
}

TEST(Hodge, PrepotentialFormIsTypeOneOne) {
  for (const char* name : {"m_quad", "m_tau", "m_cubic"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const MatrixXd J = complex_structure_matrix(chart_point(spec, z));
      EXPECT_LE(max_abs(hodge_split(J, symplectic_matrix(2)).omega_prime), 1e-10) << name;
    }
  }
}

TEST(Hodge, NonLagrangianFormHasOmegaPrime) {
  const ManifoldSpec spec = catalog("a_sympl");
  for (const auto& z : spec.sample_points) {
    const MatrixXd J = complex_structure_matrix(chart_point(spec, z));
    EXPECT_GT(max_abs(hodge_split(J, symplectic_matrix(2)).omega_prime), 0.1);
  }
}

TEST(Metric, QuadraticIsTwiceIdentity) {
  const ManifoldSpec spec = catalog("m_quad");
  const KaehlerMetric m = kaehler_metric(chart_point(spec, spec.sample_points[0]), spec.tol);
  EXPECT_LE(max_abs(m.g - 2.0 * MatrixXd::Identity(4, 4)), 1e-15);
  EXPECT_EQ(m.signature, (Signature{4, 0, 0}));
}

TEST(MetricProperty, MatchesImaginaryHessianOracle) {
  for (const char* name : {"m_quad", "m_tau", "m_cubic"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const KaehlerMetric m = kaehler_metric(chart_point(spec, z), spec.tol);
      const MatrixXd og = oracle_g(spec, z);
      EXPECT_LE(max_abs(m.g - og), 1e-6 * std::max(1.0, max_abs(og))) << name;
      EXPECT_LE(m.symmetry_residual, 1e-9) << name;
      EXPECT_LE(m.hermitian_residual, 1e-9) << name;
    }
  }
}

TEST(Metric, CubicIsIndefinite) {
  const ManifoldSpec spec = catalog("m_cubic");
  const KaehlerMetric m = kaehler_metric(chart_point(spec, spec.sample_points[0]), spec.tol);
  EXPECT_EQ(m.signature.zero, 0);
  EXPECT_GT(m.signature.positive, 0);
  EXPECT_GT(m.signature.negative, 0);
}

TEST(Metric, SignConventionAgreesWithGamma) {
  const ManifoldSpec spec = catalog("m_quad");
  const GEquIdentity r = g_equ_identity(chart_point(spec, spec.sample_points[0]), spec.tol);
  EXPECT_LE(max_abs(r.g_gamma - 2.0 * MatrixXd::Identity(4, 4)), 1e-15);
  EXPECT_LE(r.gequ_residual, 1e-15);
  EXPECT_LE(r.kaehler_form_residual, 1e-15);
}

TEST(NablaJ, VanishesForConstantStructures) {
  for (const char* name : {"m_quad", "m_tau", "a_sympl"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const ChartPoint p = chart_point(spec, z);
      const AffineChart chart(spec, z);
      EXPECT_LE(nabla_J(chart, p, spec.fd_step).max_abs(), 1e-9) << name;
      EXPECT_LE(nabla_J_analytic(p).max_abs(), 1e-15) << name;
    }
  }
}

TEST(NablaJ, AnalyticMatchesFiniteDifferences) {
  for (const char* name : {"m_cubic", "a_curved"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const ChartPoint p = chart_point(spec, z);
      const AffineChart chart(spec, z);
      const TensorSample exact = nabla_J_analytic(p);
      const TensorSample fd = nabla_J(chart, p, spec.fd_step);
      EXPECT_GT(exact.max_abs(), 1e-2) << name;
      EXPECT_LE((exact - fd).max_abs(), 1e-5 * std::max(1.0, exact.max_abs())) << name;
    }
  }
}

TEST(NablaJ, SpecialComplexCurvedExample) {
  const ManifoldSpec spec = catalog("m_cubic");
  for (const auto& z : spec.sample_points) {
    const ChartPoint p = chart_point(spec, z);
    const AffineChart chart(spec, z);
    EXPECT_LE(d_nabla_J(nabla_J(chart, p, spec.fd_step)).residual, 5e-6);
    EXPECT_LE(d_nabla_J(nabla_J_analytic(p)).residual, 1e-10);
  }
}

TEST(NablaJ, RichardsonRatioNearFour) {
  const ManifoldSpec spec = catalog("m_cubic");
  const VectorXcd z = spec.sample_points[0];
  const ChartPoint p = chart_point(spec, z);
  const AffineChart chart(spec, z);
  const TensorSample exact = nabla_J_analytic(p);
  const double h = 1e-3;
  const double e1 = (nabla_J(chart, p, h) - exact).max_abs();
  const double e2 = (nabla_J(chart, p, h / 2) - exact).max_abs();
  const Convergence c = richardson(e1, e2);
  ASSERT_TRUE(c.ratio.has_value());
  EXPECT_NEAR(*c.ratio, 4.0, 0.2);
}

TEST(Richardson, ReportsRatioAboveFloorOnly) {
  const Convergence c = richardson(4e-6, 1e-6);
  ASSERT_TRUE(c.ratio);
  EXPECT_DOUBLE_EQ(*c.ratio, 4.0);
  EXPECT_FALSE(richardson(1e-15, 1e-16).ratio);
  EXPECT_FALSE(richardson(1e-6, 1e-12, 1e-10).ratio);
}

TEST(Adversarial, NonSpecialStructureFailsBothConditions) {
  const MatrixField field = adversarial_J;
  const VectorXd q = adversarial_point();
  const MatrixXd J = field(q);
  ASSERT_LE(max_abs(J * J + MatrixXd::Identity(4, 4)), 1e-12);
  const TensorSample nj = nabla_J(field, q, 1e-5);
  EXPECT_GT(d_nabla_J(nj).residual, 1e-2);
  for (double deg : {30.0, 45.0, 90.0}) {
    const double theta = deg * kPi / 180.0;
    EXPECT_GT(theta_connection(J, nj, theta).torsion.max_abs(), 5e-6);
    EXPECT_GT(theta_d_J(J, nj, theta).residual, 5e-6);
  }
  EXPECT_GT(left_multiply(J, nj, -1.0).max_abs(), 0.0);
  const TensorSample conj = conjugate_connection(J, nj);
  EXPECT_GT((conj - [&] {
              TensorSample t = conj;
              for (int a = 0; a < 4; ++a)
                for (int mu = 0; mu < 4; ++mu)
                  for (int nu = 0; nu < 4; ++nu) t(a, mu, nu) = conj(a, nu, mu);
              return t;
            }())
                .max_abs(),
            5e-6);
}

// D = nabla - 1/2 J nabla J preserves any almost complex structure.
TEST(ComplexConnection, PreservesAnyAlmostComplexStructure) {
  const VectorXd q = adversarial_point();
  const MatrixXd J = adversarial_J(q);
  EXPECT_LE(complex_connection_D(J, nabla_J(MatrixField(adversarial_J), q, 1e-5)).residual,
            1e-8);
  const ManifoldSpec spec = catalog("m_cubic");
  for (const auto& z : spec.sample_points) {
    const ChartPoint p = chart_point(spec, z);
    EXPECT_LE(complex_connection_D(complex_structure_matrix(p), nabla_J_analytic(p)).residual,
              1e-10);
  }
}

TEST(ThetaFamily, EndpointsAndTorsionIdentity) {
  const ManifoldSpec spec = catalog("m_cubic");
  const ChartPoint p = chart_point(spec, spec.sample_points[1]);
  const MatrixXd J = complex_structure_matrix(p);
  const TensorSample nj = nabla_J_analytic(p);
  EXPECT_EQ(theta_connection(J, nj, 0.0).A.max_abs(), 0.0);
  EXPECT_LE((theta_connection(J, nj, kPi / 2).A - conjugate_connection(J, nj)).max_abs(),
            1e-12);
  for (double theta : {0.3, 1.0, 2.5}) {
    EXPECT_LE((theta_connection(J, nj, theta).torsion - torsion_from_dJ(J, nj, theta)).max_abs(),
              1e-10);
    EXPECT_LE(theta_connection(J, nj, theta).torsion.max_abs(), 1e-9);
    EXPECT_LE(theta_d_J(J, nj, theta).residual, 1e-9);
  }
  // On the adversarial field the identity still holds; both sides are large.
  const VectorXd q = adversarial_point();
  const MatrixXd Ja = adversarial_J(q);
  const TensorSample na = nabla_J(MatrixField(adversarial_J), q, 1e-5);
  EXPECT_LE((theta_connection(Ja, na, 0.7).torsion - torsion_from_dJ(Ja, na, 0.7)).max_abs(),
            1e-10);
}

TEST(AJ, ConditionHoldsOnSpecialExamples) {
  for (const char* name : {"m_cubic", "a_sympl", "a_curved"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const ChartPoint p = chart_point(spec, z);
      EXPECT_LE(aj_condition_residual(complex_structure_matrix(p), nabla_J_analytic(p), 1),
                1e-8)
          << name;
    }
  }
}

TEST(AJ, FailsOnAdversarialField) {
  const VectorXd q = adversarial_point();
  EXPECT_GT(aj_condition_residual(adversarial_J(q), nabla_J(MatrixField(adversarial_J), q, 1e-5),
                                  1),
            1e-3);
}

TEST(Christoffel, MatchesHandComputedMetric) {
  // g = diag(1 + x^2, 1) on R^2: Gamma^0_00 = x / (1 + x^2), rest zero.
  const double x = 0.6;
  MatrixXd g(2, 2);
  g << 1 + x * x, 0, 0, 1;
  TensorSample dg = TensorSample::zeros(TensorKind::cubic, 2);
  dg(0, 0, 0) = 2 * x;
  const TensorSample G = christoffel(g, dg);
  EXPECT_NEAR(G(0, 0, 0), x / (1 + x * x), 1e-15);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        if (a || b || c) {
          EXPECT_EQ(G(a, b, c), 0.0);
        }
}

TEST(LeviCivita, EqualsComplexConnectionOnCubic) {
  const ManifoldSpec spec = catalog("m_cubic");
  for (const auto& z : spec.sample_points) {
    const ChartPoint p = chart_point(spec, z);
    const AffineChart chart(spec, z);
    const LeviCivita lc = levi_civita(chart, p, spec.fd_step);
    EXPECT_LE(lc.residual, 1e-5);
    const TensorSample gD =
        complex_connection_D(complex_structure_matrix(p), nabla_J_analytic(p)).gamma;
    EXPECT_LE((lc.gamma_lc - gD).max_abs(), 1e-5);
  }
}

TEST(MetricDerivatives, SymmetryAndDuality) {
  const ManifoldSpec quad = catalog("m_quad");
  const ChartPoint pq = chart_point(quad, quad.sample_points[0]);
  const AffineChart cq(quad, quad.sample_points[0]);
  EXPECT_LE(nabla_g(cq, pq, quad.fd_step).dg.max_abs(), 1e-9);

  const ManifoldSpec spec = catalog("m_cubic");
  for (const auto& z : spec.sample_points) {
    const ChartPoint p = chart_point(spec, z);
    const AffineChart chart(spec, z);
    const NablaG ng = nabla_g(chart, p, spec.fd_step);
    EXPECT_GT(ng.dg.max_abs(), 1e-2);
    EXPECT_LE(ng.symmetry_residual, 5e-6);
    EXPECT_LE(g_duality_check(chart, p, spec.fd_step), 1e-5);
  }
}

TEST(GEqu, HoldsOnPrepotentials) {
  for (const char* name : {"m_quad", "m_tau", "m_cubic"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const ChartPoint p = chart_point(spec, z);
      const GEquIdentity r = g_equ_identity(p, spec.tol);
      EXPECT_LE(r.gequ_residual, 1e-6) << name;
      EXPECT_LE(r.kaehler_form_residual, 1e-8) << name;
      EXPECT_LE(max_abs(r.g_gamma - kaehler_metric(p, spec.tol).g), 1e-8) << name;
    }
  }
}

TEST(Closedness, FormsOnCatalog) {
  const ManifoldSpec cubic = catalog("m_cubic");
  for (const auto& z : cubic.sample_points) {
    const ChartPoint p = chart_point(cubic, z);
    const AffineChart chart(cubic, z);
    EXPECT_LE(form_closedness(chart, p, FormPart::omega11, cubic.fd_step), 5e-6);
  }
  const ManifoldSpec sympl = catalog("a_sympl");
  for (const auto& z : sympl.sample_points) {
    const ChartPoint p = chart_point(sympl, z);
    const AffineChart chart(sympl, z);
    EXPECT_LE(form_closedness(chart, p, FormPart::omega11, sympl.fd_step), 5e-6);
    EXPECT_LE(form_closedness(chart, p, FormPart::omega_prime, sympl.fd_step), 5e-6);
  }
}

TEST(Closedness, ExteriorDerivativeOfNonClosedForm) {
  // b = x0 dx1 ^ dx2 on R^3: db = dx0 ^ dx1 ^ dx2.
  const MatrixField b = [](const VectorXd& x) {
    MatrixXd m = MatrixXd::Zero(3, 3);
    m(1, 2) = x(0);
    m(2, 1) = -x(0);
    return m;
  };
  EXPECT_NEAR(exterior_derivative_residual(central_gradient(b, VectorXd::Zero(3), 1e-4)), 1.0,
              1e-12);
}

TEST(Conic, HomogeneousExamplesExact) {
  for (const char* name : {"m_quad", "m_tau", "m_cubic", "a_sympl"}) {
    const ManifoldSpec spec = catalog(name);
    for (const auto& z : spec.sample_points) {
      const ConicReport r = conic_checks(spec, z, spec.lambda_samples);
      EXPECT_LE(r.homogeneity, 1e-12 * r.scale) << name;
      EXPECT_LE(r.euler, 1e-12 * r.scale) << name;
    }
  }
}

TEST(Conic, NonHomogeneousControl) {
  const ManifoldSpec spec = catalog("c_nonconic");
  const ConicReport r = conic_checks(spec, point({1.0}), {cplx(2.0)});
  EXPECT_NEAR(r.homogeneity, 2.0, 1e-14);  // |F(2) - 4 F(1)| = |-2|
  EXPECT_NEAR(r.euler, 1.0, 1e-14);        // |z F' - 2F| = |z|
  EXPECT_GT(r.residual(), 0.1);
}
