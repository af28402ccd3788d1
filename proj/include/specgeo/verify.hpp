#pragma once

// Check registry and the runner that evaluates it over a spec's sample plan.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "specgeo/cotangent.hpp"
#include "specgeo/geometry.hpp"

namespace specgeo {

inline constexpr std::string_view kToolName = "specgeo";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kConventions =
    "g(X,Y)=omega(JX,Y); omega(X,Y)=g(X,JY); dx^dy=dx(x)dy-dy(x)dx; "
    "(J*eta)(X)=eta(JX); rho(X)=omega(X,.)";

enum class Status { pass, fail, skipped };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::skipped: return "skipped";
  }
  return "skipped";
}

enum class Scope { sample, fiber };
enum class Applies { any, prepotential, conic, conic_prepotential };

struct CheckDescriptor {
  std::string id;
  std::string summary;
  double tolerance = 0.0;
  Scope scope = Scope::sample;
  Applies applies = Applies::any;
  bool finite_difference = false;
};

namespace detail {

inline CheckDescriptor check(std::string id, std::string summary, double tol,
                             Scope scope = Scope::sample,
                             Applies applies = Applies::any, bool fd = false) {
  return {std::move(id), std::move(summary), tol, scope, applies, fd};
}

}  // namespace detail

/// Stable check catalog. Tolerances are defaults; specs may override them.
inline const std::vector<CheckDescriptor>& registry() {
  using detail::check;
  constexpr auto S = Scope::sample;
  constexpr auto B = Scope::fiber;
  constexpr auto any = Applies::any;
  constexpr auto pre = Applies::prepotential;
  static const std::vector<CheckDescriptor> checks = {
      check("ambient.gamma-signature",
            "gamma on T*C^n is Hermitian of signature (n, n)", 0.0),
      check("charts.jacobian-inverse", "Jac Jac^-1 = I", 1e-12),
      check("charts.newton-round-trip",
            "Newton inversion from a perturbed seed recovers z", 1e-10),
      check("lemma.immersion.real-part-rank",
            "Re phi has rank 2n at regular points", 0.0),
      check("lemma.reg.ii.lagrangian",
            "dF_i/dz^j symmetric for a prepotential", 1e-12, S, pre),
      check("prop.2to3.lagrangian-totally-complex",
            "Lagrangian and regular implies phi^* gamma nondegenerate", 0.0),
      check("thm.ssconstr.J-squared", "J^2 = -I in the affine frame", 1e-10),
      check("prop.type.hodge-invariance",
            "omega11 J-invariant, omega' J-anti-invariant", 1e-10),
      check("prop.type.prepotential-omegaprime-zero",
            "omega is of type (1,1) for a prepotential", 1e-10, S, pre),
      check("prop.metric.g-hermitian",
            "g = omega11(J., .) symmetric and J-Hermitian", 1e-9),
      check("def.special-complex.d-nabla-J", "d^nabla J = 0", 5e-6, S, any,
            true),
      check("lemma.theta.torsion",
            "T^theta = alt(A^theta) vanishes for every sampled theta", 5e-6, S,
            any, true),
      check("eq.tor.alt-A-consistency",
            "alt(A^theta) = -sin(theta) e^{theta J} d^nabla J", 1e-8),
      check("prop.1.a-iff-bprime",
            "d^nabla J = 0 exactly when all T^theta vanish", 0.0),
      check("cor.scm.theta-d-J", "d^{nabla^theta} J = 0 for every theta", 5e-6,
            S, any, true),
      check("cor.equ.b.conjugate-torsionfree",
            "Gamma^(J) = -J nabla J symmetric in its lower indices", 5e-6, S,
            any, true),
      check("lemma.theta.pi-half-conjugate",
            "nabla^{pi/2} coincides with the conjugate connection", 1e-12),
      check("prop.xconn.DJ", "D = nabla - 1/2 J nabla J satisfies DJ = 0", 5e-6,
            S, any, true),
      check("prop.type.d-omega11", "d omega11 = 0", 5e-6, S, any, true),
      check("prop.type.d-omegaprime", "d omega' = 0", 5e-6, S, any, true),
      check("prop.conn.AJ",
            "A = 1/2 J nabla J satisfies A^xi_X o J = A^xi_{JX}", 1e-8),
      check("prop.D.iii.nabla-g-symmetric", "nabla g totally symmetric", 5e-6,
            S, pre, true),
      check("prop.D.i.levi-civita", "Levi-Civita connection equals D", 1e-5, S,
            pre, true),
      check("prop.D.ii.g-duality", "nabla^(J) is g-dual to nabla", 1e-5, S, pre,
            true),
      check("eq.gEqu", "2 g(., J.) = omega + omega(J., J.) with g = Re phi^*gamma",
            1e-6, S, pre),
      check("thm.sKconstr.ii.kaehler-form",
            "omega = g(., J.) with g = Re phi^* gamma", 1e-8, S, pre),
      check("sec2.conic.homogeneity",
            "F(lambda z) = lambda^2 F(z), F_i(lambda z) = lambda F_i(z); "
            "tolerance relative to 1 + |F(z)|",
            1e-12, S, Applies::conic),
      check("sec2.conic.euler",
            "sum z^i F_i = 2F; tolerance relative to 1 + |F(z)|", 1e-12, S,
            Applies::conic_prepotential),
      check("eq.J1.square", "J1^2 = -I", 1e-10, B),
      check("lemma.D.flat-J1-constant",
            "for flat J, J1 has constant blocks and vanishing Nijenhuis tensor",
            1e-8, B),
      check("prop.conn.AJ-horizontal",
            "J1 preserves the horizontal space of D + A", 1e-8, B),
      check("thm.final.J1-integrable", "Nijenhuis tensor of J1 vanishes", 5e-6,
            B, any, true),
      check("eq.J2.square", "J2^2 = -I for every nondegenerate rho", 1e-10, B),
      check("lemma.omega.J2-integrable",
            "J2 from the parallel omega is integrable", 1e-8, B, any, true),
      check("thm.final.i.gN-orthogonal",
            "g_N = diag(g, g^-1) symmetric, J1 and J2(omega11) orthogonal",
            1e-9, B),
      check("thm.final.i.quaternion",
            "J1 J2 = -J2 J1 and J3^2 = -I for rho = omega11", 1e-8, B),
      check("thm.comm.block-formulas",
            "commutator and anticommutator of J1, J2(omega) match the block "
            "formulas",
            1e-8, B),
      check("thm.final.ii.para-commuting",
            "[J1, J2] = 0 and J3^2 = I for rho = omega'", 1e-9, B),
      check("thm.final.i.J2-omega11-integrable",
            "Nijenhuis tensor of J2(omega11) vanishes", 1e-6, B, any, true),
      check("thm.final.ii.J2-omegaprime-integrable",
            "Nijenhuis tensor of J2(omega') vanishes", 1e-6, B, any, true),
      check("thm.final.nijenhuis-closed-form.omega11",
            "J2 N(d_qi, d_qj) matches sum_k (rho_jk,i - rho_ik,j) d_pk, "
            "rho = omega11",
            1e-5, B, any, true),
      check("thm.final.nijenhuis-closed-form.omegaprime",
            "J2 N(d_qi, d_qj) matches sum_k (rho_jk,i - rho_ik,j) d_pk, "
            "rho = omega'",
            1e-5, B, any, true),
      check("thm.final.i.omega-alpha-skew", "omega_alpha = g_N J_alpha skew",
            1e-9, B),
      check("thm.final.i.omega2-omega3-closed", "d omega_2 = d omega_3 = 0",
            5e-6, B, any, true),
      check("thm.final.i.omega1-closed-iff-parallel",
            "d omega_1 = 0 exactly when nabla omega11 = 0", 0.0, B),
      check("thm.final.i.hyperkaehler-omega1-closed",
            "d omega_1 = 0 for a prepotential", 5e-6, B, pre, true),
  };
  return checks;
}

inline const CheckDescriptor* find_check(std::string_view id) {
  for (const auto& c : registry())
    if (c.id == id) return &c;
  return nullptr;
}

struct CheckResult {
  std::string check_id;
  int point_index = -1;
  VectorXcd point;
  int fiber_index = -1;  // -1 for sample-scope checks
  VectorXd fiber;
  Status status = Status::skipped;
  std::string reason;  // skip reason
  double residual = std::numeric_limits<double>::quiet_NaN();
  double tolerance = 0.0;
  std::optional<double> residual_half;
  std::optional<double> convergence_ratio;
  bool expected_fail = false;
  std::string detail;
};

struct SampleSummary {
  int index = 0;
  VectorXcd z;
  std::string status = "ok";  // or the reason every check was skipped
  std::optional<InvertibilityVerdict> regularity;
  std::optional<LagrangianVerdict> lagrangian;
  std::optional<double> omega_prime_norm;
  std::optional<Signature> g_signature;
  std::optional<Signature> gamma_signature;
};

struct CheckAggregate {
  std::string check_id;
  std::string outcome;  // pass, fail, xfail, xpass, skipped
  std::optional<double> max_residual;
  int worst_point = -1;
  int worst_fiber = -1;
  int passed = 0;
  int failed = 0;
  int skipped = 0;
};

struct VerificationReport {
  ManifoldSpec spec;
  std::uint64_t seed = 0;
  std::vector<VectorXd> fibers;
  std::vector<SampleSummary> samples;
  std::vector<CheckResult> results;
  std::vector<CheckAggregate> aggregates;
  int passed = 0;
  int failed = 0;
  int skipped = 0;
  int expected_failures = 0;
  int unexpected_passes = 0;
  bool all_skipped = false;

  /// 0 iff every non-expected-fail check passed, no expected failure passed
  /// everywhere, and something was actually checked (or the spec says it
  /// expects nothing to be checkable).
  int exit_code() const {
    if (failed > 0 || unexpected_passes > 0) return 1;
    if (all_skipped && !spec.expected_skip) return 1;
    return 0;
  }
};

struct RunOptions {
  int threads = 1;  // 0 = hardware concurrency
  std::optional<std::uint64_t> seed;
};

namespace detail {

/// Thrown inside a check body when its precondition does not hold.
struct Skip {
  std::string reason;
};

struct Measurement {
  double residual = 0.0;
  std::string detail;
};

inline std::string sig_text(const Signature& s) {
  return "(" + std::to_string(s.positive) + "," + std::to_string(s.negative) +
         "," + std::to_string(s.zero) + ")";
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline double tolerance_for(const ManifoldSpec& spec, const CheckDescriptor& c) {
  const auto it = spec.tolerances.find(c.id);
  return it == spec.tolerances.end() ? c.tolerance : it->second;
}

/// Residuals below this carry no truncation signal for a central difference
/// with step h: they are round-off, amplified by 1/h.
inline double richardson_floor(double h) { return 1e-13 / h; }

inline std::vector<VectorXd> default_fibers(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<VectorXd> out;
  for (int k = 0; k < 2; ++k) {
    VectorXd p(2 * n);
    for (int i = 0; i < 2 * n; ++i) p(i) = uni(rng);
    out.push_back(p);
  }
  return out;
}

/// Everything one sample needs, computed on first use.
class SampleContext {
 public:
  SampleContext(const ManifoldSpec& spec, ChartPoint p)
      : spec_(spec), p_(std::move(p)), chart_(spec, p_.z) {
    J_ = complex_structure_matrix(p_);
    split_ = hodge_split(J_, symplectic_matrix(spec.n));
    metric_ = kaehler_metric(J_, split_.omega11, spec.tol);
  }

  const ManifoldSpec& spec() const { return spec_; }
  const ChartPoint& point() const { return p_; }
  const AffineChart& chart() const { return chart_; }
  const MatrixXd& J() const { return J_; }
  const HodgeSplit& split() const { return split_; }
  const KaehlerMetric& metric() const { return metric_; }

  const TensorSample& nabla_J_fd(double h) {
    auto it = nabla_fd_.find(h);
    if (it == nabla_fd_.end())
      it = nabla_fd_.emplace(h, nabla_J(chart_, p_, h)).first;
    return it->second;
  }

  const TensorSample& nabla_J_exact() {
    if (!nabla_exact_) nabla_exact_ = nabla_J_analytic(p_);
    return *nabla_exact_;
  }

 private:
  const ManifoldSpec& spec_;
  ChartPoint p_;
  AffineChart chart_;
  MatrixXd J_;
  HodgeSplit split_;
  KaehlerMetric metric_;
  std::map<double, TensorSample> nabla_fd_;
  std::optional<TensorSample> nabla_exact_;
};

class SampleRunner {
 public:
  SampleRunner(const ManifoldSpec& spec, int index,
               const std::vector<VectorXd>& fibers, std::uint64_t seed)
      : spec_(spec), index_(index), fibers_(fibers), seed_(seed) {}

  SampleSummary summary;
  std::vector<CheckResult> results;

  void run() {
    const VectorXcd& z = spec_.sample_points[static_cast<std::size_t>(index_)];
    summary.index = index_;
    summary.z = z;
    ComponentJets jets;
    try {
      jets = component_jets(spec_, z, 2);
    } catch (const Error& e) {
      skip_all(std::string(to_string(e.code())));
      return;
    }
    const Regularity reg = regularity_from_jets(jets, spec_.tol);
    summary.regularity = reg.verdict;
    if (!reg.regular()) {
      skip_all("NotRegular");
      return;
    }
    std::optional<SampleContext> ctx;
    try {
      ctx.emplace(spec_, chart_point(spec_, z));
    } catch (const Error& e) {
      skip_all(std::string(to_string(e.code())));
      return;
    }
    summary.lagrangian = is_lagrangian(spec_, z);
    summary.omega_prime_norm = max_abs(ctx->split().omega_prime);
    summary.g_signature = ctx->metric().signature;
    summary.gamma_signature = gamma_pullback_from_jets(jets, spec_.tol).signature;
    sample_checks(*ctx);
    for (std::size_t f = 0; f < fibers_.size(); ++f)
      fiber_checks(*ctx, static_cast<int>(f));
  }

 private:
  const ManifoldSpec& spec_;
  int index_;
  const std::vector<VectorXd>& fibers_;
  std::uint64_t seed_;

  CheckResult blank(const CheckDescriptor& c, int fiber) const {
    CheckResult r;
    r.check_id = c.id;
    r.point_index = index_;
    r.point = spec_.sample_points[static_cast<std::size_t>(index_)];
    r.fiber_index = fiber;
    if (fiber >= 0) r.fiber = fibers_[static_cast<std::size_t>(fiber)];
    r.tolerance = tolerance_for(spec_, c);
    r.expected_fail = spec_.expected_fail.count(c.id) > 0;
    return r;
  }

  void skip_all(const std::string& reason) {
    summary.status = reason;
    for (const auto& c : registry()) {
      if (c.scope == Scope::sample) {
        skipped(c, -1, reason);
      } else {
        for (std::size_t f = 0; f < fibers_.size(); ++f)
          skipped(c, static_cast<int>(f), reason);
      }
    }
  }

  void skipped(const CheckDescriptor& c, int fiber, const std::string& reason) {
    CheckResult r = blank(c, fiber);
    r.status = Status::skipped;
    r.reason = reason;
    results.push_back(std::move(r));
  }

  std::optional<std::string> inapplicable(const CheckDescriptor& c) const {
    const bool pre = spec_.kind == Kind::prepotential;
    switch (c.applies) {
      case Applies::any: return std::nullopt;
      case Applies::prepotential:
        if (!pre) return "NotApplicableToKind";
        return std::nullopt;
      case Applies::conic:
        if (!spec_.conic) return "NotConic";
        return std::nullopt;
      case Applies::conic_prepotential:
        if (!spec_.conic) return "NotConic";
        if (!pre) return "NotApplicableToKind";
        return std::nullopt;
    }
    return std::nullopt;
  }

  /// Runs `body` and records the outcome; library errors become skips.
  template <class Body>
  void record(const CheckDescriptor& c, int fiber, Body&& body) {
    if (auto why = inapplicable(c)) {
      skipped(c, fiber, *why);
      return;
    }
    CheckResult r = blank(c, fiber);
    try {
      body(r);
      r.status = r.residual <= r.tolerance ? Status::pass : Status::fail;
    } catch (const Skip& s) {
      r.status = Status::skipped;
      r.reason = s.reason;
      r.residual = std::numeric_limits<double>::quiet_NaN();
    } catch (const Error& e) {
      r.status = Status::skipped;
      r.reason = std::string(to_string(e.code()));
      r.residual = std::numeric_limits<double>::quiet_NaN();
      r.detail = e.what();
    }
    results.push_back(std::move(r));
  }

  template <class Body>
  void exact(const std::string& id, int fiber, Body&& body) {
    const CheckDescriptor& c = *find_check(id);
    record(c, fiber, [&](CheckResult& r) {
      const Measurement m = body();
      r.residual = m.residual;
      r.detail = m.detail;
    });
  }

  /// Finite-difference check evaluated at h and h/2.
  template <class Body>
  void fd(const std::string& id, int fiber, Body&& body) {
    const CheckDescriptor& c = *find_check(id);
    const double h = spec_.fd_step;
    record(c, fiber, [&](CheckResult& r) {
      const double full = body(h);
      const double half = body(0.5 * h);
      const Convergence conv = richardson(full, half, richardson_floor(0.5 * h));
      r.residual = full;
      r.residual_half = half;
      r.convergence_ratio = conv.ratio;
    });
  }

  std::vector<double> thetas() const {
    if (!spec_.theta_samples.empty()) return spec_.theta_samples;
    return {std::numbers::pi / 6, std::numbers::pi / 4, std::numbers::pi / 2};
  }

  void sample_checks(SampleContext& ctx) {
    const ChartPoint& p = ctx.point();
    const int n = spec_.n;
    const MatrixXd& J = ctx.J();

    exact("ambient.gamma-signature", -1, [&] {
      const Signature s = AmbientSpace(n).gamma_signature();
      return Measurement{
          static_cast<double>(std::abs(s.positive - n) + std::abs(s.negative - n) +
                              s.zero),
          "signature " + sig_text(s)};
    });
    exact("charts.jacobian-inverse", -1, [&] {
      return Measurement{
          max_abs(p.jac * p.jac_inv - MatrixXd::Identity(2 * n, 2 * n)), ""};
    });
    exact("charts.newton-round-trip", -1, [&] {
      const VectorXcd seed =
          p.z + VectorXcd::Constant(n, cplx(0.01, 0.01));
      const VectorXcd z = invert_special_coordinates(spec_, p.x, p.y, seed);
      return Measurement{(z - p.z).cwiseAbs().maxCoeff(), ""};
    });
    exact("lemma.immersion.real-part-rank", -1, [&] {
      Eigen::JacobiSVD<MatrixXd> svd(p.jac);
      svd.setThreshold(1e-12);
      const auto rank = svd.rank();
      return Measurement{static_cast<double>(std::abs(2 * n - rank)),
                         "rank " + std::to_string(rank)};
    });
    exact("lemma.reg.ii.lagrangian", -1, [&] {
      return Measurement{summary.lagrangian->residual, ""};
    });
    exact("prop.2to3.lagrangian-totally-complex", -1, [&] {
      if (!summary.lagrangian->lagrangian) throw Skip{"NotLagrangian"};
      return Measurement{summary.gamma_signature->zero > 0 ? 1.0 : 0.0,
                         "gamma signature " + sig_text(*summary.gamma_signature)};
    });
    exact("thm.ssconstr.J-squared", -1, [&] {
      return Measurement{
          max_abs(J * J + MatrixXd::Identity(2 * n, 2 * n)), ""};
    });
    exact("prop.type.hodge-invariance", -1, [&] {
      return Measurement{ctx.split().invariance_residual, ""};
    });
    exact("prop.type.prepotential-omegaprime-zero", -1, [&] {
      return Measurement{*summary.omega_prime_norm, ""};
    });
    exact("prop.metric.g-hermitian", -1, [&] {
      const KaehlerMetric& m = ctx.metric();
      if (m.degenerate) throw DegenerateForm("g is degenerate");
      return Measurement{std::max(m.symmetry_residual, m.hermitian_residual),
                         "signature " + sig_text(m.signature)};
    });

    fd("def.special-complex.d-nabla-J", -1, [&](double h) {
      return d_nabla_J(ctx.nabla_J_fd(h)).residual;
    });
    fd("lemma.theta.torsion", -1, [&](double h) {
      double worst = 0.0;
      for (double t : thetas())
        worst = std::max(worst,
                         theta_connection(J, ctx.nabla_J_fd(h), t).torsion.max_abs());
      return worst;
    });
    exact("eq.tor.alt-A-consistency", -1, [&] {
      double worst = 0.0;
      const TensorSample& nj = ctx.nabla_J_fd(spec_.fd_step);
      for (double t : thetas())
        worst = std::max(worst, (theta_connection(J, nj, t).torsion -
                                 torsion_from_dJ(J, nj, t))
                                    .max_abs());
      return Measurement{worst, ""};
    });
    exact("prop.1.a-iff-bprime", -1, [&] {
      const TensorSample& nj = ctx.nabla_J_fd(spec_.fd_step);
      const double tol = tolerance_for(spec_, *find_check("lemma.theta.torsion"));
      const bool a = d_nabla_J(nj).residual <= tol;
      bool b = true;
      for (double t : thetas())
        b = b && theta_connection(J, nj, t).torsion.max_abs() <= tol;
      return Measurement{a == b ? 0.0 : 1.0,
                         std::string("d^nabla J = 0: ") + (a ? "yes" : "no") +
                             ", all torsions vanish: " + (b ? "yes" : "no")};
    });
    fd("cor.scm.theta-d-J", -1, [&](double h) {
      double worst = 0.0;
      for (double t : thetas())
        worst = std::max(worst, theta_d_J(J, ctx.nabla_J_fd(h), t).residual);
      return worst;
    });
    fd("cor.equ.b.conjugate-torsionfree", -1, [&](double h) {
      return alternate(conjugate_connection(J, ctx.nabla_J_fd(h))).max_abs();
    });
    exact("lemma.theta.pi-half-conjugate", -1, [&] {
      const TensorSample& nj = ctx.nabla_J_fd(spec_.fd_step);
      return Measurement{(theta_connection(J, nj, std::numbers::pi / 2).A -
                          conjugate_connection(J, nj))
                             .max_abs(),
                         ""};
    });
    fd("prop.xconn.DJ", -1, [&](double h) {
      return complex_connection_D(J, ctx.nabla_J_fd(h)).residual;
    });
    fd("prop.type.d-omega11", -1, [&](double h) {
      return form_closedness(ctx.chart(), p, FormPart::omega11, h);
    });
    fd("prop.type.d-omegaprime", -1, [&](double h) {
      return form_closedness(ctx.chart(), p, FormPart::omega_prime, h);
    });
    exact("prop.conn.AJ", -1, [&] {
      return Measurement{
          aj_condition_residual(J, ctx.nabla_J_exact(), seed_ ^ 0xA5u), ""};
    });
    fd("prop.D.iii.nabla-g-symmetric", -1, [&](double h) {
      return nabla_g(ctx.chart(), p, h).symmetry_residual;
    });
    fd("prop.D.i.levi-civita", -1, [&](double h) {
      return levi_civita(ctx.chart(), p, h).residual;
    });
    fd("prop.D.ii.g-duality", -1, [&](double h) {
      return g_duality_check(ctx.chart(), p, h);
    });
    exact("eq.gEqu", -1, [&] {
      return Measurement{g_equ_identity(p, spec_.tol).gequ_residual, ""};
    });
    exact("thm.sKconstr.ii.kaehler-form", -1, [&] {
      return Measurement{g_equ_identity(p, spec_.tol).kaehler_form_residual, ""};
    });
    const auto lambdas = spec_.lambda_samples;
    record(*find_check("sec2.conic.homogeneity"), -1, [&](CheckResult& r) {
      const ConicReport c = conic_checks(spec_, p.z, lambdas);
      r.residual = c.homogeneity;
      r.tolerance *= c.scale;
    });
    record(*find_check("sec2.conic.euler"), -1, [&](CheckResult& r) {
      const ConicReport c = conic_checks(spec_, p.z, lambdas);
      r.residual = c.euler;
      r.tolerance *= c.scale;
    });
  }

  void fiber_checks(SampleContext& ctx, int f) {
    const ChartPoint& p = ctx.point();
    const int n = spec_.n;
    const double tol = spec_.tol;
    const MatrixXd& J = ctx.J();
    const BundlePoint xi{p, fibers_[static_cast<std::size_t>(f)]};
    const VectorXd x = xi.coordinates();
    const AffineChart& chart = ctx.chart();

    exact("eq.J1.square", f, [&] {
      return Measurement{j1_from(J).square_residual(-1.0), ""};
    });
    exact("lemma.D.flat-J1-constant", f, [&] {
      if (ctx.nabla_J_exact().max_abs() > 1e-12) throw Skip{"NotFlat"};
      const BundleField field = j1_field(chart);
      double worst = 0.0;
      for (const MatrixXd& d : central_gradient(field, x, spec_.fd_step))
        worst = std::max(worst, max_abs(d));
      worst = std::max(worst, nijenhuis(field, x, spec_.fd_step).max_abs());
      return Measurement{worst, ""};
    });
    exact("prop.conn.AJ-horizontal", f, [&] {
      const TensorSample A = left_multiply(J, ctx.nabla_J_exact(), 0.5);
      return Measurement{horizontal_invariance_residual(xi, J, A), ""};
    });
    fd("thm.final.J1-integrable", f, [&](double h) {
      return nijenhuis(j1_field(chart), x, h).max_abs();
    });
    exact("eq.J2.square", f, [&] {
      double worst = 0.0;
      std::string used;
      for (FormPart part :
           {FormPart::full, FormPart::omega11, FormPart::omega_prime}) {
        try {
          worst = std::max(worst, j2_from(form_part(J, n, part), tol)
                                      .square_residual(-1.0));
          used += std::string(used.empty() ? "" : ",") +
                  std::string(to_string(part));
        } catch (const DegenerateForm&) {
        }
      }
      return Measurement{worst, "rho in {" + used + "}"};
    });
    fd("lemma.omega.J2-integrable", f, [&](double h) {
      return nijenhuis(j2_field(chart, FormPart::full), x, h).max_abs();
    });
    exact("thm.final.i.gN-orthogonal", f, [&] {
      const MatrixXd gN = g_N_from(ctx.metric());
      const double sym = max_abs(gN - gN.transpose());
      const double o1 = orthogonality_residual(gN, j1_from(J));
      const double o2 =
          orthogonality_residual(gN, j2_from(ctx.split().omega11, tol));
      return Measurement{std::max({sym, o1, o2}), ""};
    });
    const QuaternionRelations quat = quaternion_relations(J, n, tol);
    exact("thm.final.i.quaternion", f, [&] {
      if (!quat.anticommutator) throw DegenerateForm("omega11 is degenerate");
      return Measurement{std::max(*quat.anticommutator, *quat.j3_square),
                         "anticommutator " + fmt(*quat.anticommutator) +
                             ", J3^2+I " + fmt(*quat.j3_square)};
    });
    exact("thm.comm.block-formulas", f, [&] {
      return Measurement{
          std::max(quat.commutator_formula, quat.anticommutator_formula),
          "commutator " + fmt(quat.commutator_formula) + ", anticommutator " +
              fmt(quat.anticommutator_formula)};
    });
    exact("thm.final.ii.para-commuting", f, [&] {
      if (!quat.para_commutator) throw DegenerateForm("omega' is degenerate");
      return Measurement{std::max(*quat.para_commutator, *quat.para_j3_square),
                         "commutator " + fmt(*quat.para_commutator) +
                             ", J3^2-I " + fmt(*quat.para_j3_square)};
    });
    fd("thm.final.i.J2-omega11-integrable", f, [&](double h) {
      return j2_nijenhuis(chart, xi, FormPart::omega11, h).max_component;
    });
    fd("thm.final.ii.J2-omegaprime-integrable", f, [&](double h) {
      return j2_nijenhuis(chart, xi, FormPart::omega_prime, h).max_component;
    });
    fd("thm.final.nijenhuis-closed-form.omega11", f, [&](double h) {
      return j2_nijenhuis(chart, xi, FormPart::omega11, h).discrepancy;
    });
    fd("thm.final.nijenhuis-closed-form.omegaprime", f, [&](double h) {
      return j2_nijenhuis(chart, xi, FormPart::omega_prime, h).discrepancy;
    });
    exact("thm.final.i.omega-alpha-skew", f, [&] {
      const auto forms = omega_alpha_at(J, n, tol);
      double worst = 0.0;
      for (const auto& w : forms) worst = std::max(worst, max_abs(w + w.transpose()));
      return Measurement{worst, ""};
    });
    fd("thm.final.i.omega2-omega3-closed", f, [&](double h) {
      const OmegaAlpha oa = omega_alpha_forms(chart, xi, h);
      return std::max(oa.closedness[1], oa.closedness[2]);
    });
    exact("thm.final.i.omega1-closed-iff-parallel", f, [&] {
      const double h = spec_.fd_step;
      const double closed_tol =
          tolerance_for(spec_, *find_check("thm.final.i.omega2-omega3-closed"));
      const double d1 = omega_alpha_forms(chart, xi, h).closedness[0];
      double parallel = 0.0;
      for (const MatrixXd& d :
           central_gradient(form_field(chart, FormPart::omega11), p.q(), h))
        parallel = std::max(parallel, max_abs(d));
      const bool closed = d1 <= closed_tol;
      const bool flat = parallel <= closed_tol;
      return Measurement{closed == flat ? 0.0 : 1.0,
                         "d omega_1 " + fmt(d1) + ", |nabla omega11| " +
                             fmt(parallel)};
    });
    fd("thm.final.i.hyperkaehler-omega1-closed", f, [&](double h) {
      return omega_alpha_forms(chart, xi, h).closedness[0];
    });
  }
};

inline std::vector<CheckAggregate> aggregate(
    const std::vector<CheckResult>& results) {
  std::map<std::string, CheckAggregate> by_id;
  for (const auto& c : registry()) by_id[c.id].check_id = c.id;
  std::map<std::string, bool> expected;
  for (const auto& r : results) {
    CheckAggregate& a = by_id[r.check_id];
    expected[r.check_id] = r.expected_fail;
    switch (r.status) {
      case Status::pass: ++a.passed; break;
      case Status::fail: ++a.failed; break;
      case Status::skipped: ++a.skipped; break;
    }
    if (r.status != Status::skipped &&
        (!a.max_residual || r.residual > *a.max_residual)) {
      a.max_residual = r.residual;
      a.worst_point = r.point_index;
      a.worst_fiber = r.fiber_index;
    }
  }
  std::vector<CheckAggregate> out;
  for (auto& [id, a] : by_id) {
    const bool xf = expected[id];
    if (a.failed > 0) {
      a.outcome = xf ? "xfail" : "fail";
    } else if (a.passed > 0) {
      a.outcome = xf ? "xpass" : "pass";
    } else {
      a.outcome = "skipped";
    }
    out.push_back(a);
  }
  return out;
}

}  // namespace detail

inline void validate_expected_ids(const ManifoldSpec& spec) {
  for (const auto& id : spec.expected_fail)
    if (!find_check(id)) throw SpecInvalid("unknown check id in expected_fail: " + id);
  for (const auto& [id, t] : spec.tolerances)
    if (!find_check(id)) throw SpecInvalid("unknown check id in tolerances: " + id);
}

/// Evaluates every registry check at every sample (and fiber point). Check
/// failures and per-sample errors are recorded, never thrown.
inline VerificationReport run_report(const ManifoldSpec& spec,
                                     const RunOptions& options = {}) {
  spec.validate();
  validate_expected_ids(spec);
  VerificationReport report;
  report.spec = spec;
  report.seed = options.seed.value_or(spec.seed);
  report.fibers =
      spec.fibers.empty() ? detail::default_fibers(spec.n, report.seed) : spec.fibers;

  const int count = static_cast<int>(spec.sample_points.size());
  std::vector<detail::SampleRunner> runners;
  runners.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    runners.emplace_back(spec, k, report.fibers,
                         report.seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(k + 1));

  int threads = options.threads;
  if (threads <= 0)
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, std::max(count, 1));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < count; k = next++)
      runners[static_cast<std::size_t>(k)].run();
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (auto& r : runners) {
    report.samples.push_back(std::move(r.summary));
    for (auto& c : r.results) report.results.push_back(std::move(c));
  }
  std::stable_sort(report.results.begin(), report.results.end(),
                   [](const CheckResult& a, const CheckResult& b) {
                     if (a.check_id != b.check_id) return a.check_id < b.check_id;
                     if (a.point_index != b.point_index)
                       return a.point_index < b.point_index;
                     return a.fiber_index < b.fiber_index;
                   });
  report.aggregates = detail::aggregate(report.results);

  bool any_checked = false;
  for (const auto& r : report.results) {
    if (r.status == Status::skipped) {
      ++report.skipped;
      continue;
    }
    any_checked = true;
    if (r.status == Status::pass) {
      ++report.passed;
    } else if (r.expected_fail) {
      ++report.expected_failures;
    } else {
      ++report.failed;
    }
  }
  for (const auto& a : report.aggregates)
    if (a.outcome == "xpass") ++report.unexpected_passes;
  report.all_skipped = !any_checked;
  return report;
}

}  // namespace specgeo
