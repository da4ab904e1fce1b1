#pragma once

// Deliberately naive re-derivations of the scoring rules, written straight
// from their prose definitions with plain string handling and no shared code
// paths, so the library counters can be cross-checked against them on random
// inputs.

#include <map>
#include <string>
#include <vector>

namespace brute {

struct Counts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;

  bool operator==(const Counts& o) const {
    return tp == o.tp && fp == o.fp && fn == o.fn;
  }
};

using PerClass = std::map<std::string, Counts>;
using Tags = std::vector<std::string>;       // one document
using TagCorpus = std::vector<Tags>;         // documents in parallel order

inline std::string label_of(const std::string& tag) {
  std::string label = tag.substr(2);
  for (char& c : label)
    if (c == '_') c = ' ';
  return label;
}

// token_strict: a token is a true positive for class X only when the full
// tags agree; any disagreement charges the gold side's class with a false
// negative and the predicted side's class with a false positive.
inline PerClass token_strict(const TagCorpus& gold, const TagCorpus& pred) {
  PerClass out;
  for (std::size_t d = 0; d < gold.size(); ++d)
    for (std::size_t i = 0; i < gold[d].size(); ++i) {
      const std::string& g = gold[d][i];
      const std::string& p = pred[d][i];
      if (g != "O") {
        if (g == p)
          out[label_of(g)].tp++;
        else
          out[label_of(g)].fn++;
      }
      if (p != "O" && p != g) out[label_of(p)].fp++;
    }
  return out;
}

// token_class: the B/I prefix is ignored; class equality suffices.
inline PerClass token_class(const TagCorpus& gold, const TagCorpus& pred) {
  PerClass out;
  for (std::size_t d = 0; d < gold.size(); ++d)
    for (std::size_t i = 0; i < gold[d].size(); ++i) {
      std::string g = gold[d][i] == "O" ? "" : label_of(gold[d][i]);
      std::string p = pred[d][i] == "O" ? "" : label_of(pred[d][i]);
      if (!g.empty()) {
        if (g == p)
          out[g].tp++;
        else
          out[g].fn++;
      }
      if (!p.empty() && p != g) out[p].fp++;
    }
  return out;
}

struct Span {
  std::size_t doc = 0;
  std::size_t begin = 0;  // token index
  std::size_t len = 0;
  std::string label;

  bool operator==(const Span& o) const {
    return doc == o.doc && begin == o.begin && len == o.len && label == o.label;
  }
};

// Chunks of a valid IOB sequence: B-X opens, following I-X extend.
inline std::vector<Span> chunks(const TagCorpus& corpus) {
  std::vector<Span> out;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const Tags& tags = corpus[d];
    std::size_t i = 0;
    while (i < tags.size()) {
      if (tags[i].rfind("B-", 0) != 0) {
        ++i;
        continue;
      }
      Span s{d, i, 1, label_of(tags[i])};
      std::string cont = "I-" + tags[i].substr(2);
      ++i;
      while (i < tags.size() && tags[i] == cont) {
        ++s.len;
        ++i;
      }
      out.push_back(s);
    }
  }
  return out;
}

// entity_exact: whole-span matches only (begin, length, label all equal).
inline PerClass entity_exact(const TagCorpus& gold, const TagCorpus& pred) {
  PerClass out;
  std::vector<Span> g = chunks(gold), p = chunks(pred);
  std::vector<bool> used(p.size(), false);
  for (const Span& gs : g) {
    bool hit = false;
    for (std::size_t j = 0; j < p.size(); ++j)
      if (!used[j] && p[j] == gs) {
        used[j] = true;
        hit = true;
        break;
      }
    if (hit)
      out[gs.label].tp++;
    else
      out[gs.label].fn++;
  }
  for (std::size_t j = 0; j < p.size(); ++j)
    if (!used[j]) out[p[j].label].fp++;
  return out;
}

// Mismatch taxonomy, restated: 1 = gold O (spurious), 2 = pred O (missed),
// 3 = both entity tags with different classes, 4 = same class, different
// B/I prefix.
inline int mismatch_type(const std::string& gold, const std::string& pred) {
  if (gold == pred) return 0;
  if (gold == "O") return 1;
  if (pred == "O") return 2;
  if (label_of(gold) != label_of(pred)) return 3;
  return 4;
}

}  // namespace brute
