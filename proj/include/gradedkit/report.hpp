#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gradedkit/verdict.hpp"

namespace gk {

inline constexpr const char* kReportSchema = "gradedkit.report/1";
inline constexpr const char* kToolVersion = "0.1.0";

/// Outcome of one command: every check run plus named textual outputs.
struct Report {
  std::string command;
  std::string label;
  std::string kind;
  std::string mode = "sampled";
  unsigned seed = 7;
  int samples = 8;
  Verdict verdict;
  std::vector<std::pair<std::string, std::string>> outputs;

  bool pass() const { return verdict.pass(); }
};

inline nlohmann::ordered_json report_json(const Report& r) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["tool"] = "gradedkit";
  j["version"] = kToolVersion;
  j["command"] = r.command;
  j["label"] = r.label;
  j["kind"] = r.kind;
  j["seed"] = r.seed;
  j["samples"] = r.samples;
  j["mode"] = r.mode;
  j["checks"] = nlohmann::ordered_json::array();
  for (auto& c : r.verdict.checks) {
    nlohmann::ordered_json e;
    e["id"] = c.id;
    e["anchor"] = c.anchor;
    e["verdict"] = c.pass ? "pass" : "fail";
    if (!c.pass) {
      e["witness"] = c.witness;
      if (!c.detail.empty()) e["detail"] = c.detail;
    }
    j["checks"].push_back(e);
  }
  j["outputs"] = nlohmann::ordered_json::object();
  for (auto& [k, v] : r.outputs) j["outputs"][k] = v;
  j["verdict"] = r.pass() ? "pass" : "fail";
  return j;
}

inline Report report_from_json(const std::string& text) {
  auto j = nlohmann::ordered_json::parse(text);
  if (j.at("schema") != kReportSchema) throw std::invalid_argument("unknown report schema");
  Report r;
  r.command = j.at("command");
  r.label = j.at("label");
  r.kind = j.at("kind");
  r.seed = j.at("seed");
  r.samples = j.at("samples");
  r.mode = j.at("mode");
  for (auto& e : j.at("checks"))
    r.verdict.add(e.at("id"), e.at("anchor"), e.at("verdict") == "pass", e.value("witness", ""), e.value("detail", ""));
  for (auto& [k, v] : j.at("outputs").items()) r.outputs.emplace_back(k, v.get<std::string>());
  return r;
}

inline std::string report_text(const Report& r) {
  std::string s = "gradedkit " + r.command + ": " + (r.label.empty() ? std::string("(unlabelled)") : r.label) + " [" + r.kind +
                  "]\n";
  s += "mode " + r.mode + ", seed " + std::to_string(r.seed) + ", samples " + std::to_string(r.samples) + "\n";
  for (auto& c : r.verdict.checks) {
    s += std::string(c.pass ? "  PASS " : "  FAIL ") + c.id + "  " + c.anchor + "\n";
    if (!c.pass) {
      s += "       witness: " + c.witness + "\n";
      if (!c.detail.empty()) s += "       residual: " + c.detail + "\n";
    }
  }
  for (auto& [k, v] : r.outputs) {
    s += "-- " + k + "\n" + v;
    if (!v.empty() && v.back() != '\n') s += "\n";
  }
  s += std::string("verdict: ") + (r.pass() ? "PASS" : "FAIL") + "\n";
  return s;
}

inline std::string emit_report(const Report& r, const std::string& format) {
  if (format == "json") return report_json(r).dump(2) + "\n";
  if (format == "text") return report_text(r);
  throw std::invalid_argument("unknown report format '" + format + "'");
}

}  // namespace gk
