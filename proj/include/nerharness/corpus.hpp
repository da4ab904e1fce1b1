#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nerharness/errors.hpp"
#include "nerharness/text.hpp"

namespace nerh {

// Offsets are byte offsets into the UTF-8 document text; token boundaries
// always fall on code-point boundaries, so text.substr(start, end - start)
// reconstructs the surface form exactly.
struct Token {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  std::string label;

  bool operator==(const EntitySpan&) const = default;
};

struct Document {
  std::string id;
  std::string text;
  std::vector<Token> tokens;
  std::vector<EntitySpan> entities;
};

struct Dataset {
  std::string name;
  std::vector<Document> documents;
  // Optional declared label inventory; empty means "derive from the data".
  std::vector<std::string> declared_labels;

  std::vector<std::string> label_set() const {
    if (!declared_labels.empty()) {
      std::vector<std::string> out = declared_labels;
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return out;
    }
    std::set<std::string> seen;
    for (const auto& d : documents)
      for (const auto& e : d.entities) seen.insert(e.label);
    return {seen.begin(), seen.end()};
  }
};

struct TagSequence {
  std::string doc_id;
  std::vector<std::string> tags;

  bool operator==(const TagSequence&) const = default;
};

// Whitespace separates tokens; a maximal run of letters/digits is one token;
// every other visible code point is a single-character token.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    Utf8Char u = decode_utf8(text, i);
    if (is_space_cp(u.cp)) {
      i += u.size;
      continue;
    }
    std::size_t start = i;
    if (is_word_cp(u.cp)) {
      i += u.size;
      while (i < text.size()) {
        Utf8Char v = decode_utf8(text, i);
        if (!is_word_cp(v.cp)) break;
        i += v.size;
      }
    } else {
      i += u.size;
    }
    out.push_back(Token{std::string(text.substr(start, i - start)), start, i});
  }
  return out;
}

inline void retokenize(Document& doc) { doc.tokens = tokenize(doc.text); }

inline Document make_document(std::string id, std::string text,
                              std::vector<EntitySpan> entities = {}) {
  Document d;
  d.id = std::move(id);
  d.text = std::move(text);
  d.entities = std::move(entities);
  retokenize(d);
  return d;
}

// ---------------------------------------------------------------------------
// Linting

enum class LintKind { overlap, out_of_bounds, empty_span, misaligned_span, unknown_label };

inline const char* to_string(LintKind k) {
  switch (k) {
    case LintKind::overlap: return "overlap";
    case LintKind::out_of_bounds: return "out_of_bounds";
    case LintKind::empty_span: return "empty_span";
    case LintKind::misaligned_span: return "misaligned_span";
    case LintKind::unknown_label: return "unknown_label";
  }
  return "?";
}

struct LintViolation {
  std::string doc_id;
  LintKind kind = LintKind::overlap;
  EntitySpan span;
  std::string detail;
};

struct LintReport {
  std::vector<LintViolation> violations;
  std::size_t snapped_count = 0;  // spans adjusted (or dropped) by the snap policy

  bool clean() const { return violations.empty(); }
};

enum class SnapPolicy { none, expand, shrink };

inline bool span_is_token_aligned(const Document& doc, const EntitySpan& s) {
  bool start_ok = false, end_ok = false;
  for (const auto& t : doc.tokens) {
    if (t.start == s.start) start_ok = true;
    if (t.end == s.end) end_ok = true;
  }
  return start_ok && end_ok;
}

// Reports every violation and, under `expand`/`shrink`, rewrites misaligned
// spans to token boundaries. Overlaps are never auto-resolved. Returns the
// (possibly rewritten) dataset plus the report.
inline std::pair<Dataset, LintReport> lint_dataset(const Dataset& ds,
                                                   SnapPolicy snap = SnapPolicy::none) {
  Dataset out = ds;
  LintReport report;
  std::set<std::string> declared(ds.declared_labels.begin(), ds.declared_labels.end());

  for (auto& doc : out.documents) {
    if (doc.tokens.empty() && !doc.text.empty()) retokenize(doc);
    std::vector<EntitySpan> kept;
    kept.reserve(doc.entities.size());
    for (const auto& e : doc.entities) {
      if (!declared.empty() && !declared.count(e.label))
        report.violations.push_back({doc.id, LintKind::unknown_label, e,
                                     "label not in declared label set"});
      if (e.start >= e.end) {
        report.violations.push_back({doc.id, LintKind::empty_span, e, "start >= end"});
        kept.push_back(e);
        continue;
      }
      if (e.end > doc.text.size()) {
        report.violations.push_back({doc.id, LintKind::out_of_bounds, e,
                                     "span exceeds document text"});
        kept.push_back(e);
        continue;
      }
      if (span_is_token_aligned(doc, e)) {
        kept.push_back(e);
        continue;
      }
      if (snap == SnapPolicy::none) {
        report.violations.push_back({doc.id, LintKind::misaligned_span, e,
                                     "span does not start/end on token boundaries"});
        kept.push_back(e);
      } else if (snap == SnapPolicy::expand) {
        // Grow to the boundaries of every token the span touches.
        const Token* first = nullptr;
        const Token* last = nullptr;
        for (const auto& t : doc.tokens) {
          if (t.end > e.start && t.start < e.end) {
            if (!first) first = &t;
            last = &t;
          }
        }
        if (!first) {
          report.violations.push_back({doc.id, LintKind::misaligned_span, e,
                                       "span covers no token; cannot expand"});
          kept.push_back(e);
        } else {
          kept.push_back(EntitySpan{first->start, last->end, e.label});
          ++report.snapped_count;
        }
      } else {  // shrink
        const Token* first = nullptr;
        const Token* last = nullptr;
        for (const auto& t : doc.tokens) {
          if (t.start >= e.start && t.end <= e.end) {
            if (!first) first = &t;
            last = &t;
          }
        }
        ++report.snapped_count;
        if (first) kept.push_back(EntitySpan{first->start, last->end, e.label});
        // else: no fully contained token — span dropped
      }
    }
    std::sort(kept.begin(), kept.end(), [](const EntitySpan& a, const EntitySpan& b) {
      return std::tie(a.start, a.end, a.label) < std::tie(b.start, b.end, b.label);
    });
    for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        if (kept[j].start >= kept[i].end) break;
        report.violations.push_back({doc.id, LintKind::overlap, kept[i],
                                     "overlaps span [" + std::to_string(kept[j].start) + "," +
                                         std::to_string(kept[j].end) + ") " + kept[j].label});
      }
    }
    doc.entities = std::move(kept);
  }
  return {std::move(out), std::move(report)};
}

// ---------------------------------------------------------------------------
// Class counts

struct ClassCounts {
  std::map<std::string, std::size_t> per_class;
  std::size_t total = 0;

  double percentage(const std::string& label) const {
    auto it = per_class.find(label);
    if (it == per_class.end() || total == 0) return 0.0;
    return 100.0 * static_cast<double>(it->second) / static_cast<double>(total);
  }
};

inline ClassCounts class_counts(const Dataset& ds) {
  ClassCounts out;
  for (const auto& l : ds.label_set()) out.per_class[l] = 0;
  for (const auto& d : ds.documents)
    for (const auto& e : d.entities) {
      ++out.per_class[e.label];
      ++out.total;
    }
  return out;
}

}  // namespace nerh
