#pragma once

// JSON serialization of analysis and solve results. Keys keep insertion
// order; infinite interval endpoints are written as "inf" / "-inf".

#include <cmath>
#include <string>

#include <json.hpp>

#include "innerprec/analysis.hpp"
#include "innerprec/krylov.hpp"
#include "innerprec/lsq.hpp"

namespace innerprec::report {

using Json = nlohmann::ordered_json;

inline Json number(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  if (std::isnan(v)) return Json("nan");
  return Json(v);
}

inline Json to_json(const DefinitenessReport& r) {
  Json j;
  j["subject"] = std::string(to_string(r.subject));
  j["verdict"] = std::string(to_string(r.verdict));
  j["min_eig"] = number(r.min_eig);
  j["max_eig"] = number(r.max_eig);
  return j;
}

inline Json to_json(const DefinitenessTriple& t) {
  Json j;
  j["M"] = to_json(t.m);
  j["M_plus_N"] = to_json(t.m_plus_n);
  j["C_ell"] = to_json(t.c_ell);
  return j;
}

inline Json to_json(const OmegaIntervals& o) {
  Json j;
  Json list = Json::array();
  for (const auto& i : o.intervals) list.push_back(Json::array({number(i.lo), number(i.hi)}));
  j["intervals"] = list;
  j["case_label"] = o.case_label;
  return j;
}

inline Json to_json(const SpectralSummary& s) {
  Json j;
  j["nu"] = number(s.nu);
  j["lambda_max_H"] = number(s.lambda_max_H);
  j["lambda_min_H"] = number(s.lambda_min_H);
  j["delta"] = number(s.delta);
  j["semiconvergent"] = s.semiconvergent;
  j["unit_eigs_simple"] = s.unit_eigs_simple;
  j["unit_multiplicity"] = s.unit_multiplicity;
  j["real_spectrum"] = s.real_spectrum;
  return j;
}

inline Json to_json(const SolveResult& r) {
  Json j;
  j["iterations"] = r.iterations;
  j["termination"] = std::string(to_string(r.termination));
  j["initial_residual"] = number(r.initial_residual);
  j["final_residual"] = number(r.final_residual);
  return j;
}

inline Json vector_json(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

} // namespace innerprec::report
