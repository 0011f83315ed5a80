#include <cstdio>
#include <sstream>

#include "almostcomm/matrix_io.hpp"
#include "almostcomm/tsirelson.hpp"

namespace almostcomm::tsirelson::io {

using nlohmann::json;
using almostcomm::io::family_from_json;
using almostcomm::io::family_to_json;
using almostcomm::io::matrix_from_json;
using almostcomm::io::matrix_to_json;
using almostcomm::io::poly_from_json;
using almostcomm::io::poly_to_json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

int int_field(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw InvalidInput(std::string("'") + key + "' must be an integer");
  return j.at(key).get<int>();
}

}  // namespace

json strategy_to_json(const Strategy& s) {
  json j{{"A", family_to_json(s.A)}, {"B", family_to_json(s.B)}, {"rho", matrix_to_json(s.rho)}};
  if (s.factor_dims) j["factor_dims"] = {s.factor_dims->first, s.factor_dims->second};
  return j;
}

Strategy strategy_from_json(const json& j) {
  if (!j.is_object() || !j.contains("A") || !j.contains("B") || !j.contains("rho")) {
    throw InvalidInput("strategy needs 'A', 'B' and 'rho'");
  }
  Strategy s;
  s.A = family_from_json(j.at("A"));
  s.B = family_from_json(j.at("B"));
  s.rho = matrix_from_json(j.at("rho"));
  if (j.contains("factor_dims") && !j.at("factor_dims").is_null()) {
    const json& f = j.at("factor_dims");
    if (!f.is_array() || f.size() != 2 || !f[0].is_number_integer() || !f[1].is_number_integer()) {
      throw InvalidInput("'factor_dims' must be [D_A, D_B]");
    }
    s.factor_dims = std::make_pair(f[0].get<int>(), f[1].get<int>());
  }
  s.validate();
  return s;
}

json certificate_to_json(const GeneratingCertificate& c) {
  json blocks = json::array();
  for (const auto& b : c.blocks) {
    blocks.push_back({{"projector", poly_to_json(b.projector)},
                      {"shift", poly_to_json(b.shift)},
                      {"clock", poly_to_json(b.clock)}});
  }
  return {{"blocks", blocks}};
}

GeneratingCertificate certificate_from_json(const json& j) {
  if (!j.is_object() || !j.contains("blocks") || !j.at("blocks").is_array()) {
    throw InvalidInput("certificate needs a 'blocks' array");
  }
  GeneratingCertificate c;
  for (const auto& b : j.at("blocks")) {
    if (!b.is_object() || !b.contains("projector") || !b.contains("shift") || !b.contains("clock")) {
      throw InvalidInput("certificate block needs 'projector', 'shift' and 'clock'");
    }
    c.blocks.push_back({poly_from_json(b.at("projector")), poly_from_json(b.at("shift")),
                        poly_from_json(b.at("clock"))});
  }
  if (c.blocks.empty()) throw InvalidInput("certificate has no blocks");
  return c;
}

json table_to_json(const CorrelationTable& t) {
  json rows = json::array();
  for (const auto& e : t.entries) {
    rows.push_back({{"a", e.a}, {"b", e.b}, {"x", e.x}, {"y", e.y}, {"p", e.p}});
  }
  return rows;
}

json report_to_json(const FactorizationReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"b", row.label.a}, {"y", row.label.x}, {"actual_error", row.actual_error}});
  }
  json dims = json::array();
  for (const auto& [a, b] : r.block_dims) dims.push_back({a, b});
  json j{{"epsilon", r.epsilon},
         {"max_error", r.max_error},
         {"rows", rows},
         {"bounds",
          {{"schur_simple", optional_number(r.bounds.schur_simple)},
           {"thm_general_displayed", optional_number(r.bounds.thm_general_displayed)},
           {"thm_general_proof", optional_number(r.bounds.thm_general_proof)},
           {"probabilistic", optional_number(r.bounds.probabilistic)}}},
         {"decomposition_residual", r.decomposition_residual},
         {"block_dims", dims},
         {"correlation_distance", r.correlation_distance},
         {"certified_violation", r.certified_violation()}};
  if (r.constants) {
    j["constants"] = {{"c1", r.constants->c1}, {"c2", r.constants->c2}, {"c3", r.constants->c3}};
  } else {
    j["constants"] = nullptr;
  }
  if (r.certificate_check) {
    j["certificate_check"] = {{"ok", r.certificate_check->ok},
                              {"max_error", r.certificate_check->max_error},
                              {"block_match", r.certificate_check->block_match},
                              {"message", r.certificate_check->message}};
  } else {
    j["certificate_check"] = nullptr;
  }
  if (r.probabilistic) {
    const auto& p = *r.probabilistic;
    j["probabilistic"] = {{"epsilon_sample", p.epsilon_sample},
                          {"projector_commutator", p.projector_commutator},
                          {"epsilon", p.epsilon},
                          {"delta", p.delta},
                          {"eta", p.eta},
                          {"failing_subspaces", p.failing_subspaces},
                          {"tested_subspaces", p.tested_subspaces}};
  } else {
    j["probabilistic"] = nullptr;
  }
  return j;
}

std::string report_to_csv(const FactorizationReport& r) {
  std::ostringstream out;
  out << kReportCsvHeader << "\n";
  for (const auto& row : r.rows) {
    out << row.label.a << "," << row.label.x << "," << csv_number(row.actual_error) << ","
        << csv_number(r.epsilon) << "," << csv_number(r.bounds.schur_simple) << ","
        << csv_number(r.bounds.thm_general_displayed) << ","
        << csv_number(r.bounds.thm_general_proof) << "," << csv_number(r.bounds.probabilistic)
        << "," << csv_number(r.correlation_distance) << "\n";
  }
  return out.str();
}

PlantSpec plant_spec_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("plant spec must be a JSON object");
  if (!j.contains("blocks") || !j.at("blocks").is_array() || j.at("blocks").empty()) {
    throw InvalidInput("plant spec needs a non-empty 'blocks' array");
  }
  PlantSpec s;
  for (const auto& b : j.at("blocks")) {
    if (!b.is_array() || b.size() != 2 || !b[0].is_number_integer() || !b[1].is_number_integer()) {
      throw InvalidInput("each block must be [d_A, d_B]");
    }
    s.blocks.push_back({b[0].get<int>(), b[1].get<int>()});
  }
  s.a_settings = int_field(j, "a_settings", s.a_settings);
  s.a_outcomes = int_field(j, "a_outcomes", s.a_outcomes);
  s.b_settings = int_field(j, "b_settings", s.b_settings);
  s.b_outcomes = int_field(j, "b_outcomes", s.b_outcomes);
  if (j.contains("epsilon")) {
    if (!j.at("epsilon").is_number()) throw InvalidInput("'epsilon' must be a number");
    s.epsilon = j.at("epsilon").get<double>();
  }
  if (j.contains("certificate")) {
    if (!j.at("certificate").is_boolean()) throw InvalidInput("'certificate' must be boolean");
    s.certificate = j.at("certificate").get<bool>();
  }
  return s;
}

json plant_spec_to_json(const PlantSpec& s) {
  json blocks = json::array();
  for (const auto& b : s.blocks) blocks.push_back({b.d_A, b.d_B});
  return {{"blocks", blocks},
          {"a_settings", s.a_settings},
          {"a_outcomes", s.a_outcomes},
          {"b_settings", s.b_settings},
          {"b_outcomes", s.b_outcomes},
          {"epsilon", s.epsilon},
          {"certificate", s.certificate}};
}

}  // namespace almostcomm::tsirelson::io
