#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "nerharness/canonical_json.hpp"
#include "nerharness/formats.hpp"

namespace nerh {

// Registry of public dataset releases the CLI can fetch and audit. The entity
// counts are pinned from the released corpus documentation; ingest must
// reproduce them exactly or the fetch command fails with per-class deltas.
struct PublicRelease {
  std::string name;
  std::string url;
  DatasetFormat format = DatasetFormat::annotator_json;
  CountExpectation expected;
};

inline std::optional<PublicRelease> find_public_release(std::string_view name) {
  if (name == "psynit") {
    PublicRelease r;
    r.name = "psynit";
    r.url = "https://huggingface.co/datasets/Neuroinformatica/PsyNIT/resolve/main/PsyNIT.json";
    r.format = DatasetFormat::annotator_json;
    r.expected.per_class = {
        {"DIAGNOSI E COMORBIDIT\xC3\x80", 779},
        {"SINTOMI COGNITIVI", 2386},
        {"SINTOMI NEUROPSICHIATRICI", 707},
        {"TRATTAMENTO FARMACOLOGICO", 162},
        {"TEST", 1854},
    };
    r.expected.total = 5888;
    return r;
  }
  return std::nullopt;
}

inline CountExpectation count_expectation_from_json(const json& j) {
  CountExpectation e;
  if (!j.is_object() || !j.contains("per_class"))
    throw ParseError("count expectation: want {\"per_class\": {label: n}, \"total\": n}");
  std::size_t sum = 0;
  for (const auto& [label, n] : j["per_class"].items()) {
    e.per_class[label] = n.get<std::size_t>();
    sum += e.per_class[label];
  }
  e.total = j.value("total", sum);
  return e;
}

inline json count_check_to_json(const CountCheck& c) {
  json deltas = json::array();
  for (const auto& d : c.deltas)
    deltas.push_back(json{{"label", d.label},
                          {"expected", d.expected},
                          {"actual", d.actual},
                          {"delta", d.actual - d.expected}});
  return json{{"ok", c.ok},
              {"deltas", deltas},
              {"expected_total", c.expected_total},
              {"actual_total", c.actual_total}};
}

inline std::string render_count_check(const json& c) {
  std::string out;
  char line[200];
  if (c["ok"].get<bool>()) {
    std::snprintf(line, sizeof(line), "entity counts verified: %lld total\n",
                  c["actual_total"].get<long long>());
    out += line;
    return out;
  }
  std::snprintf(line, sizeof(line), "%-40s %10s %10s %10s\n", "Class", "Expected", "Actual",
                "Delta");
  out += line;
  for (const auto& d : c["deltas"]) {
    std::snprintf(line, sizeof(line), "%-40s %10lld %10lld %+10lld\n",
                  d["label"].get<std::string>().c_str(), d["expected"].get<long long>(),
                  d["actual"].get<long long>(), d["delta"].get<long long>());
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-40s %10lld %10lld %+10lld\n", "TOTAL",
                c["expected_total"].get<long long>(), c["actual_total"].get<long long>(),
                c["actual_total"].get<long long>() - c["expected_total"].get<long long>());
  out += line;
  return out;
}

}  // namespace nerh
