#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <string>

#include "specgeo/specgeo.hpp"

namespace testing_support {

using namespace specgeo;

inline std::string catalog_path(const std::string& name) {
  return std::string(SPECGEO_CATALOG_DIR) + "/" + name + ".spec";
}

inline ManifoldSpec catalog(const std::string& name) {
  return load_spec(catalog_path(name));
}

inline VectorXcd point(std::initializer_list<cplx> values) {
  VectorXcd z(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (const cplx& v : values) z(k++) = v;
  return z;
}

inline ManifoldSpec prepotential(const std::string& F, int n) {
  return parse_spec(R"({"n": )" + std::to_string(n) +
                    R"(, "kind": "prepotential", "components": [")" + F +
                    R"("], "sample_points": []})");
}

/// Real-coordinate map (a, b) -> (x, y) = (a, Re F(a + i b)), used as an
/// oracle independent of the chart Jacobian formula.
inline VectorXd real_chart_map(const ManifoldSpec& spec, const VectorXd& ab) {
  const int n = spec.n;
  VectorXcd z(n);
  for (int k = 0; k < n; ++k) z(k) = cplx(ab(k), ab(n + k));
  const VectorXcd F = component_jets(spec, z, 0).F;
  VectorXd out(2 * n);
  out << ab.head(n), F.real();
  return out;
}

inline VectorXd ab_of(const VectorXcd& z) {
  VectorXd out(2 * z.size());
  out << z.real(), z.imag();
  return out;
}

/// Central-difference Jacobian of an R^m -> R^k map.
template <class Map>
MatrixXd fd_jacobian(const Map& f, const VectorXd& x, double h) {
  const VectorXd f0 = f(x);
  MatrixXd out(f0.size(), x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    VectorXd plus = x, minus = x;
    plus(c) += h;
    minus(c) -= h;
    out.col(c) = (f(plus) - f(minus)) / (2.0 * h);
  }
  return out;
}

inline VectorXcd random_point(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> r(lo, hi);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  VectorXcd z(n);
  for (int k = 0; k < n; ++k) z(k) = std::polar(r(rng), phase(rng));
  return z;
}

}  // namespace testing_support
