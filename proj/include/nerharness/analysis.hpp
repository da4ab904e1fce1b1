#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "nerharness/canonical_json.hpp"
#include "nerharness/errors.hpp"
#include "nerharness/iob.hpp"
#include "nerharness/metrics.hpp"
#include "nerharness/stats.hpp"

namespace nerh {

// ---------------------------------------------------------------------------
// Error taxonomy. Every gold/pred tag mismatch lands in exactly one type:
//   1  spurious     gold O,  pred entity
//   2  missed       gold entity, pred O
//   3  wrong class  both entity tags, different classes
//   4  wrong bound  same class, different B/I prefix

struct ErrorRecord {
  std::string doc_id;
  std::size_t token_index = 0;
  std::string gold_tag, pred_tag;
  int error_type = 0;
};

inline int classify_mismatch(const std::string& gold, const std::string& pred) {
  if (!is_valid_tag(gold) || !is_valid_tag(pred))
    throw ParseError("cannot classify malformed tags '" + gold + "' / '" + pred + "'");
  if (gold == pred) throw DomainError("classify_mismatch called on equal tags");
  if (gold == "O") return 1;
  if (pred == "O") return 2;
  if (tag_label(gold) != tag_label(pred)) return 3;
  return 4;
}

inline std::vector<ErrorRecord> classify_errors(const TagSequence& gold,
                                                const TagSequence& pred) {
  if (gold.tags.size() != pred.tags.size())
    throw AlignmentError("doc '" + gold.doc_id + "': tag streams differ in length");
  std::vector<ErrorRecord> out;
  for (std::size_t i = 0; i < gold.tags.size(); ++i) {
    if (gold.tags[i] == pred.tags[i]) continue;
    out.push_back({gold.doc_id, i, gold.tags[i], pred.tags[i],
                   classify_mismatch(gold.tags[i], pred.tags[i])});
  }
  return out;
}

inline std::vector<ErrorRecord> classify_errors(const std::vector<TagSequence>& gold,
                                                const std::vector<TagSequence>& pred) {
  auto pairs = detail::pair_sequences(gold, pred);
  std::vector<ErrorRecord> out;
  for (auto [g, p] : pairs) {
    auto recs = classify_errors(*g, *p);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

struct ErrorBreakdown {
  long long count[5] = {0, 0, 0, 0, 0};  // index 1..4 used
  long long total = 0;

  double percentage(int type) const {
    return total > 0 ? 100.0 * static_cast<double>(count[type]) / static_cast<double>(total)
                     : 0.0;
  }
};

inline ErrorBreakdown error_breakdown(const std::vector<ErrorRecord>& records) {
  ErrorBreakdown out;
  for (const auto& r : records) {
    ++out.count[r.error_type];
    ++out.total;
  }
  return out;
}

inline json breakdown_to_json(const ErrorBreakdown& b, const std::string& repair_policy) {
  static const char* names[5] = {"", "spurious", "missed", "wrong_class", "wrong_boundary"};
  json types = json::object();
  for (int t = 1; t <= 4; ++t)
    types["type" + std::to_string(t)] = json{
        {"name", names[t]}, {"count", b.count[t]}, {"percentage", b.percentage(t)}};
  return json{{"types", types}, {"total", b.total}, {"repair", repair_policy}};
}

inline std::string render_breakdown_table(const json& b) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %-16s %10s %10s\n", "Type", "Name", "Count", "[%]");
  out += line;
  for (int t = 1; t <= 4; ++t) {
    const json& row = b["types"]["type" + std::to_string(t)];
    std::snprintf(line, sizeof(line), "%-10d %-16s %10lld %10.2f\n", t,
                  row["name"].get<std::string>().c_str(), row["count"].get<long long>(),
                  row["percentage"].get<double>());
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-10s %-16s %10lld %10.2f\n", "TOTAL", "",
                b["total"].get<long long>(), b["total"].get<long long>() > 0 ? 100.0 : 0.0);
  out += line;
  return out;
}

// ---------------------------------------------------------------------------
// Agreement bands

enum class Band { poor, fair, moderate, good, excellent };

inline const char* to_string(Band b) {
  switch (b) {
    case Band::poor: return "poor";
    case Band::fair: return "fair";
    case Band::moderate: return "moderate";
    case Band::good: return "good";
    case Band::excellent: return "excellent";
  }
  return "?";
}

// [0,0.2) poor, [0.2,0.4) fair, [0.4,0.6) moderate, [0.6,0.8) good,
// [0.8,1.0] excellent. The top band is closed.
inline Band band(double v) {
  if (std::isnan(v) || v < 0.0 || v > 1.0)
    throw DomainError("agreement value outside [0, 1]");
  if (v < 0.2) return Band::poor;
  if (v < 0.4) return Band::fair;
  if (v < 0.6) return Band::moderate;
  if (v < 0.8) return Band::good;
  return Band::excellent;
}

// ---------------------------------------------------------------------------
// Inter-annotator agreement: F1 of one annotator against the reference.
// Exchanging the arguments swaps precision and recall; per-class F1 values
// are unchanged. The headline `overall` is the micro-averaged F1, which is
// the symmetric aggregate; the support-weighted mean (whose weights follow
// the reference side) is kept alongside as `overall_weighted`.

struct IaaReport {
  EvalMode mode = EvalMode::token_strict;
  std::map<std::string, double> per_class;
  std::map<std::string, Band> per_class_band;
  double overall = 0.0;
  Band overall_band = Band::poor;
  double overall_weighted = 0.0;
};

inline IaaReport iaa(const Dataset& reference, const Dataset& other,
                     EvalMode mode = EvalMode::token_strict) {
  std::map<std::string, const Document*> other_by_id;
  for (const auto& d : other.documents) other_by_id[d.id] = &d;
  std::vector<TagSequence> ref_tags, oth_tags;
  for (const auto& d : reference.documents) {
    auto it = other_by_id.find(d.id);
    if (it == other_by_id.end())
      throw PairingError("doc '" + d.id + "' missing from second annotator");
    if (it->second->text != d.text)
      throw PairingError("doc '" + d.id + "': annotators disagree on the document text");
    ref_tags.push_back(spans_to_iob(d));
    oth_tags.push_back(spans_to_iob(*it->second));
  }
  if (reference.documents.size() != other.documents.size())
    throw PairingError("annotator datasets cover different documents");
  EvaluationReport rep = evaluate(ref_tags, oth_tags, mode);
  IaaReport out;
  out.mode = mode;
  for (const auto& [label, m] : rep.per_class) {
    out.per_class[label] = m.f1;
    out.per_class_band[label] = band(m.f1);
  }
  out.overall = rep.micro.f1;
  out.overall_band = band(out.overall);
  out.overall_weighted = rep.overall.f1;
  return out;
}

inline json iaa_to_json(const IaaReport& r) {
  json classes = json::object();
  for (const auto& [label, v] : r.per_class)
    classes[label] = json{{"f1", v}, {"band", to_string(r.per_class_band.at(label))}};
  return json{{"mode", to_string(r.mode)},
              {"classes", classes},
              {"overall", json{{"f1", r.overall}, {"band", to_string(r.overall_band)}}},
              {"overall_weighted", r.overall_weighted}};
}

inline std::string render_iaa_table(const json& r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-28s %10s  %s\n", "Class", "F1", "Band");
  out += line;
  for (const auto& [label, m] : r["classes"].items()) {
    std::snprintf(line, sizeof(line), "%-28s %10.4f  %s\n", label.c_str(),
                  m["f1"].get<double>(), m["band"].get<std::string>().c_str());
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-28s %10.4f  %s\n", "OVERALL",
                r["overall"]["f1"].get<double>(),
                r["overall"]["band"].get<std::string>().c_str());
  out += line;
  return out;
}

// ---------------------------------------------------------------------------
// One-way ANOVA over seed-sweep scores.

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  std::size_t group_count = 0;
  std::vector<std::size_t> group_sizes;
};

inline AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw DomainError("one-way ANOVA needs at least two groups");
  AnovaResult out;
  out.group_count = groups.size();
  std::size_t n_total = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw DomainError("each ANOVA group needs at least two observations");
    out.group_sizes.push_back(g.size());
    for (double x : g) {
      if (std::isnan(x)) throw DomainError("ANOVA observation is NaN");
      grand_sum += x;
    }
    n_total += g.size();
  }
  double grand_mean = grand_sum / static_cast<double>(n_total);

  double ss_between = 0.0, ss_within = 0.0;
  for (const auto& g : groups) {
    double gm = mean(g);
    double d = gm - grand_mean;
    ss_between += static_cast<double>(g.size()) * d * d;
    for (double x : g) ss_within += (x - gm) * (x - gm);
  }
  double df_between = static_cast<double>(groups.size() - 1);
  double df_within = static_cast<double>(n_total - groups.size());

  if (ss_within == 0.0) {
    // Degenerate: identical groups read as "no effect", separated constant
    // groups as "certain effect".
    if (ss_between == 0.0) {
      out.f = 0.0;
      out.p = 1.0;
    } else {
      out.f = std::numeric_limits<double>::infinity();
      out.p = 0.0;
    }
    return out;
  }
  out.f = (ss_between / df_between) / (ss_within / df_within);
  out.p = f_survival(out.f, df_between, df_within);
  return out;
}

// ---------------------------------------------------------------------------
// Training-footprint estimate: GPU-hours x average draw x grid intensity.

struct CarbonEstimate {
  double gpu_hours = 0.0;
  double avg_power_kw = 0.0;
  double grid_intensity_kg_per_kwh = 0.0;
  double total_kg_co2eq = 0.0;
};

inline CarbonEstimate carbon_estimate(double gpu_hours, double avg_power_kw,
                                      double grid_intensity_kg_per_kwh) {
  if (gpu_hours < 0.0 || avg_power_kw < 0.0 || grid_intensity_kg_per_kwh < 0.0)
    throw DomainError("carbon estimate inputs must be non-negative");
  CarbonEstimate e;
  e.gpu_hours = gpu_hours;
  e.avg_power_kw = avg_power_kw;
  e.grid_intensity_kg_per_kwh = grid_intensity_kg_per_kwh;
  e.total_kg_co2eq = gpu_hours * avg_power_kw * grid_intensity_kg_per_kwh;
  return e;
}

}  // namespace nerh
