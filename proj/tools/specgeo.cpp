// specgeo: verify special geometries built from holomorphic data.
//
//   specgeo verify SPEC [--out FILE] [--seed N] [--threads N]
//   specgeo tensor SPEC --point K --what {J,g,omega,omega11,omegaprime,J1,J2,gN}
//   specgeo scan SPEC --axis K:re|im:START:STOP:COUNT [--axis ...] --quantity Q
//
// Exit codes: 0 success, 1 check failure, 2 spec or I/O error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specgeo/specgeo.hpp"

namespace {

using namespace specgeo;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int resolve_threads(int flag) {
  if (flag >= 0) return flag;
  if (const char* env = std::getenv("SPECGEO_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 0) return static_cast<int>(v);
    std::cerr << "warning: ignoring malformed SPECGEO_THREADS=" << env << "\n";
  }
  return 0;
}

void print_matrix(const MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      std::printf(c ? " %.17g" : "%.17g", m(r, c));
    std::printf("\n");
  }
}

int cmd_verify(const std::string& path, const std::string& out,
               std::optional<std::uint64_t> seed, int threads) {
  const ManifoldSpec spec = load_spec(path);
  RunOptions opt;
  opt.seed = seed;
  opt.threads = resolve_threads(threads);
  const VerificationReport report = run_report(spec, opt);
  const std::string text = report_text(report);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << text;
  }
  std::cerr << spec.name << ": " << report.passed << " passed, "
            << report.failed << " failed, " << report.expected_failures
            << " expected failures, " << report.unexpected_passes
            << " unexpected passes, " << report.skipped << " skipped\n";
  for (const auto& a : report.aggregates)
    if (a.outcome == "fail" || a.outcome == "xpass")
      std::cerr << "  " << a.outcome << ": " << a.check_id << "\n";
  if (report.all_skipped && !spec.expected_skip)
    std::cerr << "  every check was skipped\n";
  return report.exit_code();
}

MatrixXd tensor_matrix(const ManifoldSpec& spec, int point,
                       const std::string& what, const std::string& rho) {
  if (point < 0 || point >= static_cast<int>(spec.sample_points.size()))
    throw std::out_of_range("point index out of range");
  const ChartPoint p =
      chart_point(spec, spec.sample_points[static_cast<std::size_t>(point)]);
  const MatrixXd J = complex_structure_matrix(p);
  const HodgeSplit split = hodge_split(J, symplectic_matrix(spec.n));
  if (what == "J") return J;
  if (what == "omega") return symplectic_matrix(spec.n);
  if (what == "omega11") return split.omega11;
  if (what == "omegaprime") return split.omega_prime;
  if (what == "g") return kaehler_metric(J, split.omega11, spec.tol).g;
  if (what == "J1") return j1_from(J).matrix;
  if (what == "J2") {
    FormPart part = FormPart::full;
    if (rho == "omega11") part = FormPart::omega11;
    else if (rho == "omegaprime") part = FormPart::omega_prime;
    return j2_from(form_part(J, spec.n, part), spec.tol).matrix;
  }
  if (what == "gN") return g_N_from(kaehler_metric(J, split.omega11, spec.tol));
  throw std::invalid_argument("unknown tensor " + what);
}

struct Axis {
  int component = 0;  // 0-based
  bool imaginary = false;
  double start = 0.0;
  double stop = 0.0;
  int count = 1;

  double value(int k) const {
    return count == 1 ? start : start + (stop - start) * k / (count - 1);
  }
};

Axis parse_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 5)
    throw std::invalid_argument("axis must be K:re|im:START:STOP:COUNT");
  Axis a;
  a.component = std::stoi(parts[0]) - 1;
  if (parts[1] != "re" && parts[1] != "im")
    throw std::invalid_argument("axis part must be re or im");
  a.imaginary = parts[1] == "im";
  a.start = std::stod(parts[2]);
  a.stop = std::stod(parts[3]);
  a.count = std::stoi(parts[4]);
  if (a.count < 1) throw std::invalid_argument("axis count must be positive");
  return a;
}

std::string scan_value(const ManifoldSpec& spec, const VectorXcd& z,
                       const std::string& quantity) {
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto sig = [](const Signature& s) {
    return std::to_string(s.positive) + "/" + std::to_string(s.negative) + "/" +
           std::to_string(s.zero);
  };
  if (quantity == "det_regularity") {
    // Reported even where the verdict fails, so the zero crossing is visible.
    return num(regularity_matrix(spec, z).verdict.det);
  }
  const ChartPoint p = chart_point(spec, z);
  const MatrixXd J = complex_structure_matrix(p);
  const KaehlerMetric m =
      kaehler_metric(J, hodge_split(J, symplectic_matrix(spec.n)).omega11, spec.tol);
  if (quantity == "det_g") return num(m.g.determinant());
  if (quantity == "signature") return sig(m.signature);
  if (quantity == "gamma_signature")
    return sig(gamma_pullback_from_jets(p.jets, spec.tol).signature);
  if (quantity == "d_nabla_J") {
    const AffineChart chart(spec, z);
    return num(d_nabla_J(nabla_J(chart, p, spec.fd_step)).residual);
  }
  if (quantity == "omegaprime_norm")
    return num(max_abs(hodge_split(J, symplectic_matrix(spec.n)).omega_prime));
  throw std::invalid_argument("unknown quantity " + quantity);
}

int cmd_scan(const ManifoldSpec& spec, int base, const std::vector<std::string>& axes_text,
             const std::string& quantity) {
  if (base < 0 || base >= static_cast<int>(spec.sample_points.size()))
    throw std::out_of_range("base point index out of range");
  if (axes_text.empty() || axes_text.size() > 2)
    throw std::invalid_argument("scan takes one or two axes");
  std::vector<Axis> axes;
  for (const auto& t : axes_text) {
    axes.push_back(parse_axis(t));
    if (axes.back().component < 0 || axes.back().component >= spec.n)
      throw std::out_of_range("axis component out of range");
  }
  const VectorXcd z0 = spec.sample_points[static_cast<std::size_t>(base)];
  std::printf(axes.size() == 1 ? "t1,%s,flag\n" : "t1,t2,%s,flag\n", quantity.c_str());
  const int n1 = axes[0].count;
  const int n2 = axes.size() > 1 ? axes[1].count : 1;
  for (int i = 0; i < n1; ++i)
    for (int k = 0; k < n2; ++k) {
      VectorXcd z = z0;
      std::string coords;
      for (std::size_t a = 0; a < axes.size(); ++a) {
        const double t = axes[a].value(a == 0 ? i : k);
        cplx& c = z(axes[a].component);
        c = axes[a].imaginary ? cplx(c.real(), t) : cplx(t, c.imag());
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g,", t);
        coords += buf;
      }
      std::string value, flag = "ok";
      try {
        value = scan_value(spec, z, quantity);
      } catch (const Error& e) {
        flag = std::string(to_string(e.code()));
      }
      std::printf("%s%s,%s\n", coords.c_str(), value.c_str(), flag.c_str());
    }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of special complex, symplectic and "
               "Kaehler geometries from holomorphic data"};
  app.require_subcommand(1);
  app.footer(
      "Spec files are JSON; theta_samples are given in degrees and converted "
      "to radians.\nExit codes: 0 success, 1 check failure, 2 spec or I/O error.");

  std::string spec_path, out_path, what, rho = "omega11", quantity = "det_regularity";
  std::uint64_t seed = 0;
  int threads = -1, point = 0, base = 0;
  std::vector<std::string> axes;

  CLI::App* verify = app.add_subcommand("verify", "run every registry check and print the report");
  verify->add_option("spec", spec_path, "spec file")->required();
  verify->add_option("--out", out_path, "write the report here instead of stdout");
  CLI::Option* seed_opt = verify->add_option("--seed", seed, "override the spec's PRNG seed");
  verify->add_option("--threads", threads,
                     "worker threads, 0 = auto (default: $SPECGEO_THREADS, else auto)");

  CLI::App* tensor = app.add_subcommand("tensor", "print one tensor at a sample point");
  tensor->add_option("spec", spec_path, "spec file")->required();
  tensor->add_option("--point", point, "sample point index (0-based)");
  tensor->add_option("--what", what, "tensor to print")
      ->required()
      ->check(CLI::IsMember({"J", "g", "omega", "omega11", "omegaprime", "J1", "J2", "gN"}));
  tensor->add_option("--rho", rho, "2-form defining J2")
      ->check(CLI::IsMember({"omega", "omega11", "omegaprime"}));

  CLI::App* scan = app.add_subcommand("scan", "tabulate a scalar over a 1- or 2-parameter grid");
  scan->add_option("spec", spec_path, "spec file")->required();
  scan->add_option("--base", base, "sample point the grid starts from (0-based)");
  scan->add_option("--axis", axes,
                   "K:re|im:START:STOP:COUNT, sets Re or Im of z_K (1-based); repeat for 2D")
      ->required();
  scan->add_option("--quantity", quantity, "scalar to tabulate")
      ->check(CLI::IsMember({"det_regularity", "det_g", "signature", "gamma_signature",
                             "d_nabla_J", "omegaprime_norm"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*verify)
      return cmd_verify(spec_path, out_path,
                        seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt,
                        threads);
    const ManifoldSpec spec = load_spec(spec_path);
    if (*tensor) {
      print_matrix(tensor_matrix(spec, point, what, rho));
      return 0;
    }
    return cmd_scan(spec, base, axes, quantity);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitFailure;
}
