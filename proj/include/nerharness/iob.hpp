#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "nerharness/corpus.hpp"
#include "nerharness/errors.hpp"

namespace nerh {

// Tags are "O", "B-<class>" or "I-<class>". Class names may contain spaces
// ("SINTOMI COGNITIVI"); inside tags those spaces become underscores so a tag
// stays a single whitespace-free column in CoNLL files. The two mappings are
// inverse of each other, which means literal underscores in class names are
// not representable — they normalize to spaces on the way back.

inline std::string label_to_tag_suffix(std::string_view label) {
  std::string out(label);
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

inline std::string tag_suffix_to_label(std::string_view suffix) {
  std::string out(suffix);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

inline bool is_valid_tag(std::string_view tag) {
  if (tag == "O") return true;
  if (tag.size() < 3) return false;
  if (tag[0] != 'B' && tag[0] != 'I') return false;
  return tag[1] == '-';
}

struct ParsedTag {
  char prefix = 'O';      // 'O', 'B' or 'I'
  std::string label;      // empty for O, spaces restored otherwise
};

inline ParsedTag parse_tag(std::string_view tag) {
  if (!is_valid_tag(tag))
    throw ParseError("invalid tag '" + std::string(tag) + "' (want O, B-<class> or I-<class>)");
  if (tag == "O") return {};
  return {tag[0], tag_suffix_to_label(tag.substr(2))};
}

inline std::string make_tag(char prefix, std::string_view label) {
  if (prefix == 'O') return "O";
  return std::string(1, prefix) + "-" + label_to_tag_suffix(label);
}

// Class of a tag ("" for O); assumes valid syntax.
inline std::string tag_label(std::string_view tag) {
  if (tag == "O") return {};
  return tag_suffix_to_label(tag.substr(2));
}

// ---------------------------------------------------------------------------
// Validation / repair

struct TagViolation {
  std::size_t index = 0;
  std::string tag;
  std::string detail;
};

// Flags syntax errors and I-tags whose predecessor (sequence start counts as
// O) is not a B/I of the same class.
inline std::vector<TagViolation> validate_tags(const TagSequence& seq) {
  std::vector<TagViolation> out;
  std::string prev = "O";
  for (std::size_t i = 0; i < seq.tags.size(); ++i) {
    const std::string& t = seq.tags[i];
    if (!is_valid_tag(t)) {
      out.push_back({i, t, "malformed tag"});
      prev = "O";
      continue;
    }
    if (t[0] == 'I') {
      bool ok = prev != "O" && is_valid_tag(prev) &&
                (prev[0] == 'B' || prev[0] == 'I') && prev.substr(2) == t.substr(2);
      if (!ok) out.push_back({i, t, "I-tag without matching B/I predecessor"});
    }
    prev = t;
  }
  return out;
}

enum class RepairPolicy { promote_to_b, drop_to_o };

inline const char* to_string(RepairPolicy p) {
  return p == RepairPolicy::promote_to_b ? "promote_to_B" : "drop_to_O";
}

// Left-to-right repair against the already-repaired prefix; idempotent.
// promote_to_B turns an orphan I-X into B-X, drop_to_O turns it into O (which
// cascades through any I-run that followed it).
inline TagSequence repair_tags(const TagSequence& seq, RepairPolicy policy) {
  TagSequence out = seq;
  std::string prev = "O";
  for (auto& t : out.tags) {
    if (!is_valid_tag(t)) throw ParseError("cannot repair malformed tag '" + t + "'");
    if (t[0] == 'I') {
      bool ok = prev != "O" && (prev[0] == 'B' || prev[0] == 'I') && prev.substr(2) == t.substr(2);
      if (!ok) t = policy == RepairPolicy::promote_to_b ? "B" + t.substr(1) : "O";
    }
    prev = t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spans -> tags

// Requires lint-clean entities: token-aligned, in-bounds, non-overlapping.
// Adjacent same-class spans stay separate (B starts each one).
inline TagSequence spans_to_iob(const Document& doc) {
  TagSequence out{doc.id, std::vector<std::string>(doc.tokens.size(), "O")};
  std::vector<EntitySpan> spans = doc.entities;
  std::sort(spans.begin(), spans.end(), [](const EntitySpan& a, const EntitySpan& b) {
    return std::tie(a.start, a.end, a.label) < std::tie(b.start, b.end, b.label);
  });
  for (const auto& e : spans) {
    std::size_t first = doc.tokens.size();
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (doc.tokens[i].start == e.start) {
        first = i;
        break;
      }
    }
    if (first == doc.tokens.size())
      throw CodecError("doc " + doc.id + ": span [" + std::to_string(e.start) + "," +
                       std::to_string(e.end) + ") does not start on a token boundary");
    bool closed = false;
    for (std::size_t i = first; i < doc.tokens.size(); ++i) {
      if (doc.tokens[i].start >= e.end) break;
      if (out.tags[i] != "O")
        throw CodecError("doc " + doc.id + ": overlapping spans at token " + std::to_string(i));
      out.tags[i] = make_tag(i == first ? 'B' : 'I', e.label);
      if (doc.tokens[i].end == e.end) {
        closed = true;
        break;
      }
      if (doc.tokens[i].end > e.end) break;
    }
    if (!closed)
      throw CodecError("doc " + doc.id + ": span [" + std::to_string(e.start) + "," +
                       std::to_string(e.end) + ") does not end on a token boundary");
  }
  return out;
}

// Tags -> spans. Strict: an invalid transition throws; repair first if the
// sequence comes from an untrusted source.
inline std::vector<EntitySpan> iob_to_spans(const TagSequence& seq, const Document& doc) {
  if (seq.tags.size() != doc.tokens.size())
    throw AlignmentError("doc " + doc.id + ": " + std::to_string(seq.tags.size()) +
                         " tags for " + std::to_string(doc.tokens.size()) + " tokens");
  std::vector<EntitySpan> out;
  std::string open_label;
  std::size_t open_start = 0, open_end = 0;
  bool open = false;
  auto close = [&]() {
    if (open) out.push_back(EntitySpan{open_start, open_end, open_label});
    open = false;
  };
  for (std::size_t i = 0; i < seq.tags.size(); ++i) {
    const std::string& t = seq.tags[i];
    if (!is_valid_tag(t))
      throw ParseError("doc " + doc.id + ": malformed tag '" + t + "' at " + std::to_string(i));
    if (t == "O") {
      close();
    } else if (t[0] == 'B') {
      close();
      open = true;
      open_label = tag_suffix_to_label(t.substr(2));
      open_start = doc.tokens[i].start;
      open_end = doc.tokens[i].end;
    } else {  // I
      if (!open || label_to_tag_suffix(open_label) != t.substr(2))
        throw CodecError("doc " + doc.id + ": orphan '" + t + "' at token " + std::to_string(i) +
                         " (repair the sequence first)");
      open_end = doc.tokens[i].end;
    }
  }
  close();
  return out;
}

// Gold tags for every document of a lint-clean dataset, in document order.
inline std::vector<TagSequence> dataset_tags(const Dataset& ds) {
  std::vector<TagSequence> out;
  out.reserve(ds.documents.size());
  for (const auto& d : ds.documents) out.push_back(spans_to_iob(d));
  return out;
}

}  // namespace nerh
