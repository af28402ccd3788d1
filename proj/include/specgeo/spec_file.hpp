#pragma once

// Spec files: JSON documents describing a manifold and its sample plan.
//
//   {
//     "name": "m_cubic",
//     "n": 2,
//     "kind": "prepotential",              // or "one_form"
//     "components": ["z1^3/z2"],           // one F, or n expressions F_i
//     "sample_points": [[[1, 0], [1, 1]]], // per point: n [re, im] pairs
//     "fd_step": 2e-5, "tol": 1e-6,
//     "conic": true,
//     "theta_samples": [30, 45, 90],       // degrees
//     "lambda_samples": [[2, 0], [1, 1]],
//     "fibers": [[0.1, -0.2, 0.3, 0.4]],   // momenta, 2n each
//     "expected_fail": ["check.id"],
//     "expected_skip": false,
//     "tolerances": {"check.id": 1e-7},
//     "seed": 20020101
//   }
//
// A complex number may also be written as a plain real number. Unknown keys
// are rejected.

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "specgeo/charts.hpp"
#include "specgeo/error.hpp"

namespace specgeo {

namespace detail {

inline const std::set<std::string>& spec_keys() {
  static const std::set<std::string> keys = {
      "name",          "n",           "kind",           "components",
      "sample_points", "fd_step",     "tol",            "conic",
      "theta_samples", "lambda_samples", "fibers",      "expected_fail",
      "expected_skip", "tolerances",  "seed"};
  return keys;
}

inline cplx complex_from_json(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw SpecInvalid(where + ": expected a number or a [re, im] pair");
}

inline double number_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw SpecInvalid(where + ": expected a number");
  return j.get<double>();
}

inline const nlohmann::json& array_at(const nlohmann::json& doc,
                                      const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_array()) throw SpecInvalid(key + ": expected a list");
  return v;
}

}  // namespace detail

/// Builds and validates a spec from a parsed JSON document.
inline ManifoldSpec spec_from_json(const nlohmann::json& doc,
                                   const std::string& default_name = "spec") {
  using detail::array_at;
  using detail::complex_from_json;
  using detail::number_from_json;
  if (!doc.is_object()) throw SpecInvalid("spec must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (!detail::spec_keys().count(key)) throw SpecInvalid("unknown key: " + key);
  for (const char* key : {"n", "kind", "components", "sample_points"})
    if (!doc.contains(key)) throw SpecInvalid(std::string("missing key: ") + key);

  ManifoldSpec spec;
  spec.name = doc.value("name", default_name);
  if (!doc["n"].is_number_integer()) throw SpecInvalid("n: expected an integer");
  spec.n = doc["n"].get<int>();
  if (spec.n < 1) throw SpecInvalid("n must be positive");

  const std::string kind = doc["kind"].is_string() ? doc["kind"].get<std::string>() : "";
  if (kind == "prepotential") {
    spec.kind = Kind::prepotential;
  } else if (kind == "one_form") {
    spec.kind = Kind::one_form;
  } else {
    throw SpecInvalid("kind must be \"prepotential\" or \"one_form\"");
  }

  for (const auto& c : array_at(doc, "components")) {
    if (!c.is_string()) throw SpecInvalid("components: expected strings");
    const std::string src = c.get<std::string>();
    try {
      spec.components.push_back(parse_expression(src, spec.n));
    } catch (const Error& e) {
      throw SpecInvalid("component \"" + src + "\": " + e.what());
    }
    spec.sources.push_back(src);
  }

  for (const auto& pt : array_at(doc, "sample_points")) {
    if (!pt.is_array() || static_cast<int>(pt.size()) != spec.n)
      throw SpecInvalid("sample_points: each point needs n coordinates");
    VectorXcd z(spec.n);
    for (int k = 0; k < spec.n; ++k)
      z(k) = complex_from_json(pt[static_cast<std::size_t>(k)], "sample_points");
    spec.sample_points.push_back(z);
  }

  if (doc.contains("fd_step")) spec.fd_step = number_from_json(doc["fd_step"], "fd_step");
  if (doc.contains("tol")) spec.tol = number_from_json(doc["tol"], "tol");
  if (doc.contains("conic")) {
    if (!doc["conic"].is_boolean()) throw SpecInvalid("conic: expected a boolean");
    spec.conic = doc["conic"].get<bool>();
  }
  if (doc.contains("theta_samples"))
    for (const auto& t : array_at(doc, "theta_samples"))
      spec.theta_samples.push_back(number_from_json(t, "theta_samples") *
                                   std::numbers::pi / 180.0);
  if (doc.contains("lambda_samples"))
    for (const auto& l : array_at(doc, "lambda_samples"))
      spec.lambda_samples.push_back(complex_from_json(l, "lambda_samples"));
  if (doc.contains("fibers"))
    for (const auto& f : array_at(doc, "fibers")) {
      if (!f.is_array() || static_cast<int>(f.size()) != 2 * spec.n)
        throw SpecInvalid("fibers: each fiber point needs 2n momenta");
      VectorXd p(2 * spec.n);
      for (int k = 0; k < 2 * spec.n; ++k)
        p(k) = number_from_json(f[static_cast<std::size_t>(k)], "fibers");
      spec.fibers.push_back(p);
    }
  if (doc.contains("expected_fail"))
    for (const auto& id : array_at(doc, "expected_fail")) {
      if (!id.is_string()) throw SpecInvalid("expected_fail: expected strings");
      spec.expected_fail.insert(id.get<std::string>());
    }
  if (doc.contains("expected_skip")) {
    if (!doc["expected_skip"].is_boolean())
      throw SpecInvalid("expected_skip: expected a boolean");
    spec.expected_skip = doc["expected_skip"].get<bool>();
  }
  if (doc.contains("tolerances")) {
    if (!doc["tolerances"].is_object())
      throw SpecInvalid("tolerances: expected an object");
    for (const auto& [id, t] : doc["tolerances"].items())
      spec.tolerances[id] = number_from_json(t, "tolerances." + id);
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned())
      throw SpecInvalid("seed: expected a non-negative integer");
    spec.seed = doc["seed"].get<std::uint64_t>();
  }
  if (spec.conic && spec.lambda_samples.empty())
    throw SpecInvalid("conic specs need lambda_samples");
  spec.validate();
  return spec;
}

inline ManifoldSpec parse_spec(std::string_view text,
                               const std::string& default_name = "spec") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecInvalid(std::string("malformed JSON: ") + e.what());
  }
  return spec_from_json(doc, default_name);
}

/// Reads a spec file. I/O problems surface as std::runtime_error, content
/// problems as SpecInvalid.
inline ManifoldSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string stem = path;
  if (const auto slash = stem.find_last_of('/'); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (const auto dot = stem.find_last_of('.'); dot != std::string::npos)
    stem = stem.substr(0, dot);
  return parse_spec(buf.str(), stem);
}

}  // namespace specgeo
