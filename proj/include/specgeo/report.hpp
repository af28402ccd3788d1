#pragma once

// Report serialization. The object model is nlohmann::ordered_json; the
// emitter is local so that every double prints with 17 significant digits.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "specgeo/verify.hpp"

namespace specgeo {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline ordered_json complex_json(cplx c) { return ordered_json::array({c.real(), c.imag()}); }

inline ordered_json vector_json(const VectorXcd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(complex_json(v(k)));
  return out;
}

inline ordered_json vector_json(const VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

inline ordered_json signature_json(const Signature& s) {
  return {{"positive", s.positive}, {"negative", s.negative}, {"zero", s.zero}};
}

inline ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

template <class T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? number_or_null(*v) : ordered_json(nullptr);
}

inline void emit(const ordered_json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + ordered_json(key).dump() + ": ";
        emit(value, out, indent, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool scalar = true;
      for (const auto& v : j) scalar = scalar && !v.is_structured();
      if (scalar) {
        out += "[";
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) out += ", ";
          emit(j[k], out, indent, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ",\n";
        out += pad;
        emit(j[k], out, indent, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case ordered_json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

inline std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Pretty-printed JSON with doubles at %.17g.
inline std::string dump_json(const ordered_json& j, int indent = 2) {
  std::string out;
  detail::emit(j, out, indent, 0);
  out += "\n";
  return out;
}

inline ordered_json spec_json(const ManifoldSpec& spec) {
  using detail::complex_json;
  using detail::vector_json;
  ordered_json s;
  s["name"] = spec.name;
  s["n"] = spec.n;
  s["kind"] = std::string(to_string(spec.kind));
  s["components"] = spec.sources;
  ordered_json pts = ordered_json::array();
  for (const auto& z : spec.sample_points) pts.push_back(vector_json(z));
  s["sample_points"] = pts;
  s["fd_step"] = spec.fd_step;
  s["tol"] = spec.tol;
  s["conic"] = spec.conic;
  ordered_json thetas = ordered_json::array();
  for (double t : spec.theta_samples) thetas.push_back(t * 180.0 / std::numbers::pi);
  s["theta_samples"] = thetas;
  ordered_json lambdas = ordered_json::array();
  for (const auto& l : spec.lambda_samples) lambdas.push_back(complex_json(l));
  s["lambda_samples"] = lambdas;
  ordered_json fibers = ordered_json::array();
  for (const auto& p : spec.fibers) fibers.push_back(vector_json(p));
  s["fibers"] = fibers;
  s["expected_fail"] =
      std::vector<std::string>(spec.expected_fail.begin(), spec.expected_fail.end());
  s["expected_skip"] = spec.expected_skip;
  ordered_json tols = ordered_json::object();
  for (const auto& [id, t] : spec.tolerances) tols[id] = t;
  s["tolerances"] = tols;
  s["seed"] = spec.seed;
  return s;
}

inline ordered_json report_json(const VerificationReport& report,
                                const std::string& timestamp) {
  using detail::optional_json;
  using detail::signature_json;
  using detail::vector_json;
  ordered_json j;
  j["tool"] = {{"name", std::string(kToolName)},
               {"version", std::string(kToolVersion)}};
  j["timestamp"] = timestamp;
  j["conventions"] = std::string(kConventions);
  j["seed"] = report.seed;
  j["spec"] = spec_json(report.spec);
  ordered_json fibers = ordered_json::array();
  for (const auto& p : report.fibers) fibers.push_back(vector_json(p));
  j["fibers"] = fibers;

  ordered_json samples = ordered_json::array();
  for (const auto& s : report.samples) {
    ordered_json o;
    o["index"] = s.index;
    o["z"] = vector_json(s.z);
    o["status"] = s.status;
    if (s.regularity) {
      o["regular"] = s.regularity->invertible;
      o["regularity_det"] = s.regularity->det;
      o["regularity_scale"] = s.regularity->scale;
    }
    if (s.lagrangian) {
      o["lagrangian"] = s.lagrangian->lagrangian;
      o["lagrangian_residual"] = s.lagrangian->residual;
    }
    o["omega_prime_norm"] = optional_json(s.omega_prime_norm);
    o["g_signature"] = s.g_signature ? signature_json(*s.g_signature)
                                     : ordered_json(nullptr);
    o["gamma_signature"] = s.gamma_signature ? signature_json(*s.gamma_signature)
                                             : ordered_json(nullptr);
    samples.push_back(o);
  }
  j["samples"] = samples;

  ordered_json aggregates = ordered_json::array();
  for (const auto& a : report.aggregates) {
    aggregates.push_back({{"check_id", a.check_id},
                          {"outcome", a.outcome},
                          {"max_residual", optional_json(a.max_residual)},
                          {"worst_point", a.worst_point},
                          {"worst_fiber", a.worst_fiber},
                          {"passed", a.passed},
                          {"failed", a.failed},
                          {"skipped", a.skipped}});
  }
  j["aggregates"] = aggregates;

  ordered_json checks = ordered_json::array();
  for (const auto& r : report.results) {
    ordered_json o;
    o["check_id"] = r.check_id;
    o["point_index"] = r.point_index;
    o["point"] = vector_json(r.point);
    o["fiber_index"] = r.fiber_index;
    o["fiber"] = r.fiber_index >= 0 ? vector_json(r.fiber) : ordered_json(nullptr);
    o["status"] = std::string(to_string(r.status));
    o["reason"] = r.reason.empty() ? ordered_json(nullptr) : ordered_json(r.reason);
    o["residual"] = detail::number_or_null(r.residual);
    o["tolerance"] = r.tolerance;
    o["residual_half"] = optional_json(r.residual_half);
    o["convergence_ratio"] = optional_json(r.convergence_ratio);
    o["expected_fail"] = r.expected_fail;
    o["detail"] = r.detail;
    checks.push_back(o);
  }
  j["checks"] = checks;

  j["summary"] = {{"passed", report.passed},
                  {"failed", report.failed},
                  {"skipped", report.skipped},
                  {"expected_failures", report.expected_failures},
                  {"unexpected_passes", report.unexpected_passes},
                  {"all_skipped", report.all_skipped},
                  {"exit_code", report.exit_code()}};
  return j;
}

inline std::string report_text(const VerificationReport& report) {
  return dump_json(report_json(report, detail::utc_timestamp()));
}

}  // namespace specgeo
