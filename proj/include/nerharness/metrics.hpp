#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "nerharness/canonical_json.hpp"
#include "nerharness/errors.hpp"
#include "nerharness/iob.hpp"

namespace nerh {

// token_strict : full-tag equality per position (B-X vs I-X is an error)
// token_class  : class equality per position (prefix ignored)
// entity_exact : decoded spans must match exactly in boundaries and class
enum class EvalMode { token_strict, token_class, entity_exact };

inline const char* to_string(EvalMode m) {
  switch (m) {
    case EvalMode::token_strict: return "token_strict";
    case EvalMode::token_class: return "token_class";
    case EvalMode::entity_exact: return "entity_exact";
  }
  return "?";
}

inline EvalMode eval_mode_from_string(std::string_view s) {
  if (s == "token_strict") return EvalMode::token_strict;
  if (s == "token_class") return EvalMode::token_class;
  if (s == "entity_exact") return EvalMode::entity_exact;
  throw ParseError("unknown evaluation mode '" + std::string(s) + "'");
}

struct Counts {
  long long tp = 0, fp = 0, fn = 0;
};

struct ConfusionCounts {
  EvalMode mode = EvalMode::token_strict;
  std::map<std::string, Counts> per_class;
};

namespace detail {

// Pairs gold and predicted sequences by doc_id. Both sides must cover the
// same documents with equal lengths.
inline std::vector<std::pair<const TagSequence*, const TagSequence*>> pair_sequences(
    const std::vector<TagSequence>& gold, const std::vector<TagSequence>& pred) {
  std::map<std::string, const TagSequence*> by_id;
  for (const auto& p : pred) {
    if (!by_id.emplace(p.doc_id, &p).second)
      throw AlignmentError("duplicate prediction for doc '" + p.doc_id + "'");
  }
  std::vector<std::pair<const TagSequence*, const TagSequence*>> out;
  std::set<std::string> gold_ids;
  for (const auto& g : gold) {
    if (!gold_ids.insert(g.doc_id).second)
      throw AlignmentError("duplicate gold sequence for doc '" + g.doc_id + "'");
    auto it = by_id.find(g.doc_id);
    if (it == by_id.end()) throw AlignmentError("no prediction for doc '" + g.doc_id + "'");
    if (it->second->tags.size() != g.tags.size())
      throw AlignmentError("doc '" + g.doc_id + "': " + std::to_string(it->second->tags.size()) +
                           " predicted tags for " + std::to_string(g.tags.size()) + " gold tags");
    out.emplace_back(&g, it->second);
  }
  for (const auto& p : pred)
    if (!gold_ids.count(p.doc_id))
      throw AlignmentError("prediction for unknown doc '" + p.doc_id + "'");
  return out;
}

// Token-index span; boundary+class equality over these is equivalent to
// character-offset equality because both sides share one tokenization.
struct TokSpan {
  std::size_t start = 0, len = 0;
  std::string label;
  friend bool operator<(const TokSpan& a, const TokSpan& b) {
    return std::tie(a.start, a.len, a.label) < std::tie(b.start, b.len, b.label);
  }
  friend bool operator==(const TokSpan& a, const TokSpan& b) {
    return a.start == b.start && a.len == b.len && a.label == b.label;
  }
};

inline std::vector<TokSpan> decode_tok_spans(const TagSequence& seq) {
  std::vector<TokSpan> out;
  bool open = false;
  TokSpan cur;
  auto close = [&]() {
    if (open) out.push_back(cur);
    open = false;
  };
  for (std::size_t i = 0; i < seq.tags.size(); ++i) {
    const std::string& t = seq.tags[i];
    if (!is_valid_tag(t))
      throw ParseError("doc '" + seq.doc_id + "': malformed tag '" + t + "'");
    if (t == "O") {
      close();
    } else if (t[0] == 'B') {
      close();
      open = true;
      cur = TokSpan{i, 1, tag_suffix_to_label(t.substr(2))};
    } else {
      if (!open || label_to_tag_suffix(cur.label) != t.substr(2))
        throw CodecError("doc '" + seq.doc_id + "': orphan '" + t + "' at token " +
                         std::to_string(i) + " (repair before entity_exact scoring)");
      ++cur.len;
    }
  }
  close();
  return out;
}

}  // namespace detail

inline ConfusionCounts count_matches(const std::vector<TagSequence>& gold,
                                     const std::vector<TagSequence>& pred, EvalMode mode) {
  ConfusionCounts out;
  out.mode = mode;
  auto pairs = detail::pair_sequences(gold, pred);

  for (auto [g, p] : pairs) {
    if (mode == EvalMode::entity_exact) {
      std::vector<detail::TokSpan> gs = detail::decode_tok_spans(*g);
      std::vector<detail::TokSpan> ps = detail::decode_tok_spans(*p);
      std::sort(gs.begin(), gs.end());
      std::sort(ps.begin(), ps.end());
      std::size_t i = 0, j = 0;
      while (i < gs.size() || j < ps.size()) {
        if (i < gs.size() && j < ps.size() && gs[i] == ps[j]) {
          ++out.per_class[gs[i].label].tp;
          ++i, ++j;
        } else if (j >= ps.size() || (i < gs.size() && gs[i] < ps[j])) {
          ++out.per_class[gs[i].label].fn;
          ++i;
        } else {
          ++out.per_class[ps[j].label].fp;
          ++j;
        }
      }
      continue;
    }
    for (std::size_t i = 0; i < g->tags.size(); ++i) {
      const std::string& gt = g->tags[i];
      const std::string& pt = p->tags[i];
      if (!is_valid_tag(gt) || !is_valid_tag(pt))
        throw ParseError("doc '" + g->doc_id + "': malformed tag at position " +
                         std::to_string(i));
      if (mode == EvalMode::token_strict) {
        if (gt == pt) {
          if (gt != "O") ++out.per_class[tag_label(gt)].tp;
        } else {
          if (gt != "O") ++out.per_class[tag_label(gt)].fn;
          if (pt != "O") ++out.per_class[tag_label(pt)].fp;
        }
      } else {  // token_class
        std::string gc = tag_label(gt), pc = tag_label(pt);
        if (gc == pc) {
          if (!gc.empty()) ++out.per_class[gc].tp;
        } else {
          if (!gc.empty()) ++out.per_class[gc].fn;
          if (!pc.empty()) ++out.per_class[pc].fp;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Precision / recall / F1

struct ClassMetrics {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  long long support = 0;  // tp + fn: gold tokens or gold entities of the class
};

// Zero-denominator convention: the affected metric is 0.
inline ClassMetrics prf(const Counts& c) {
  ClassMetrics m;
  m.support = c.tp + c.fn;
  double tp = static_cast<double>(c.tp);
  m.precision = (c.tp + c.fp) > 0 ? tp / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = (c.tp + c.fn) > 0 ? tp / static_cast<double>(c.tp + c.fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                        : 0.0;
  return m;
}

inline std::map<std::string, ClassMetrics> prf(const ConfusionCounts& counts) {
  std::map<std::string, ClassMetrics> out;
  for (const auto& [label, c] : counts.per_class) out[label] = prf(c);
  return out;
}

// Support-weighted mean of the per-class metrics; classes without gold
// support do not contribute.
inline ClassMetrics overall(const std::map<std::string, ClassMetrics>& per_class) {
  ClassMetrics out;
  long long total = 0;
  double p = 0, r = 0, f = 0;
  for (const auto& [label, m] : per_class) {
    if (m.support == 0) continue;
    double w = static_cast<double>(m.support);
    p += w * m.precision;
    r += w * m.recall;
    f += w * m.f1;
    total += m.support;
  }
  out.support = total;
  if (total > 0) {
    out.precision = p / static_cast<double>(total);
    out.recall = r / static_cast<double>(total);
    out.f1 = f / static_cast<double>(total);
  }
  return out;
}

struct EvaluationReport {
  EvalMode mode = EvalMode::token_strict;
  ConfusionCounts counts;
  std::map<std::string, ClassMetrics> per_class;
  ClassMetrics overall;
  ClassMetrics micro;  // from summed counts; reported for transparency
};

inline EvaluationReport evaluate(const std::vector<TagSequence>& gold,
                                 const std::vector<TagSequence>& pred, EvalMode mode) {
  EvaluationReport rep;
  rep.mode = mode;
  rep.counts = count_matches(gold, pred, mode);
  rep.per_class = prf(rep.counts);
  rep.overall = overall(rep.per_class);
  Counts total;
  for (const auto& [label, c] : rep.counts.per_class) {
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  rep.micro = prf(total);
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization. Tables are rendered from the JSON form, never recomputed.

inline json class_metrics_to_json(const ClassMetrics& m) {
  return json{{"precision", m.precision},
              {"recall", m.recall},
              {"f1", m.f1},
              {"support", m.support}};
}

inline json report_to_json(const EvaluationReport& rep) {
  json classes = json::object();
  for (const auto& [label, m] : rep.per_class) {
    json entry = class_metrics_to_json(m);
    const Counts& c = rep.counts.per_class.at(label);
    entry["tp"] = c.tp;
    entry["fp"] = c.fp;
    entry["fn"] = c.fn;
    classes[label] = entry;
  }
  return json{{"mode", to_string(rep.mode)},
              {"classes", classes},
              {"overall", class_metrics_to_json(rep.overall)},
              {"micro", class_metrics_to_json(rep.micro)}};
}

inline std::string render_report_table(const json& rep) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-28s %10s %10s %10s %10s\n", "Class", "F1 [%]", "P [%]",
                "R [%]", "Support");
  out += line;
  auto row = [&](const std::string& name, const json& m) {
    std::snprintf(line, sizeof(line), "%-28s %10.2f %10.2f %10.2f %10lld\n", name.c_str(),
                  100.0 * m["f1"].get<double>(), 100.0 * m["precision"].get<double>(),
                  100.0 * m["recall"].get<double>(), m["support"].get<long long>());
    out += line;
  };
  for (const auto& [label, m] : rep["classes"].items()) row(label, m);
  row("OVERALL", rep["overall"]);
  row("micro", rep["micro"]);
  std::snprintf(line, sizeof(line), "(mode: %s)\n", rep["mode"].get<std::string>().c_str());
  out += line;
  return out;
}

}  // namespace nerh
