#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nerharness/canonical_json.hpp"
#include "nerharness/corpus.hpp"
#include "nerharness/errors.hpp"
#include "nerharness/formats.hpp"
#include "nerharness/iob.hpp"
#include "nerharness/random.hpp"
#include "nerharness/text.hpp"

namespace nerh {

struct TrainConfig {
  int epochs = 10;
  std::uint64_t seed = 0;
  bool shuffle = true;
  double rehearsal_fraction = 0.25;  // replayed share of the tune set per epoch
};

// Hyper-parameters handed to an external fine-tuning job. This harness never
// interprets them beyond validation; it only writes them out.
struct ExternalTrainerConfig {
  int batch_size = 10;
  double learning_rate = 3e-5;
  int epochs = 50;
  double weight_decay = 0.01;
  double warmup_ratio = 0.02;
  double layerwise_lr_decay = 0.95;
  int frozen_layers = 3;

  void validate() const {
    if (batch_size <= 0) throw DomainError("batch_size must be positive");
    if (!(learning_rate > 0.0)) throw DomainError("learning_rate must be positive");
    if (epochs <= 0) throw DomainError("epochs must be positive");
    if (weight_decay < 0.0) throw DomainError("weight_decay must be non-negative");
    if (warmup_ratio < 0.0 || warmup_ratio > 1.0)
      throw DomainError("warmup_ratio must be in [0, 1]");
    if (!(layerwise_lr_decay > 0.0)) throw DomainError("layerwise_lr_decay must be positive");
    if (frozen_layers < 0) throw DomainError("frozen_layers must be non-negative");
  }

  json to_json() const {
    return json{{"batch_size", batch_size},
                {"learning_rate", learning_rate},
                {"epochs", epochs},
                {"weight_decay", weight_decay},
                {"warmup_ratio", warmup_ratio},
                {"layerwise_lr_decay", layerwise_lr_decay},
                {"frozen_layers", frozen_layers}};
  }

  static ExternalTrainerConfig from_json(const json& j) {
    ExternalTrainerConfig c;
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.warmup_ratio = j.value("warmup_ratio", c.warmup_ratio);
    c.layerwise_lr_decay = j.value("layerwise_lr_decay", c.layerwise_lr_decay);
    c.frozen_layers = j.value("frozen_layers", c.frozen_layers);
    c.validate();
    return c;
  }
};

// ---------------------------------------------------------------------------
// Gazetteer: exact-surface, case-insensitive phrase lookup built from the
// training entities. Keys are lowercased token texts joined by single spaces.

struct Gazetteer {
  std::map<std::string, std::vector<std::string>> phrases;  // phrase -> sorted labels
  std::size_t max_len = 0;                                  // longest phrase, in tokens

  void add(const std::string& phrase_lower, std::size_t token_count, const std::string& label) {
    auto& labels = phrases[phrase_lower];
    auto it = std::lower_bound(labels.begin(), labels.end(), label);
    if (it == labels.end() || *it != label) labels.insert(it, label);
    max_len = std::max(max_len, token_count);
  }

  // Adds every (token-aligned) entity of the dataset.
  void add_entities(const Dataset& ds) {
    for (const auto& d : ds.documents) {
      for (const auto& e : d.entities) {
        std::string phrase;
        std::size_t count = 0;
        for (const auto& t : d.tokens) {
          if (t.start >= e.start && t.end <= e.end) {
            if (count) phrase += ' ';
            phrase += lower_copy(t.text);
            ++count;
          }
        }
        if (count == 0)
          throw CodecError("doc " + d.id + ": entity [" + std::to_string(e.start) + "," +
                           std::to_string(e.end) + ") covers no token; lint the dataset first");
        add(phrase, count, e.label);
      }
    }
  }
};

// Longest gazetteer match covering each token (leftmost start on ties).
struct GazCover {
  std::size_t len = 0;  // 0 = uncovered
  bool begin = false;
  const std::vector<std::string>* labels = nullptr;
};

inline std::vector<GazCover> gazetteer_cover(const Gazetteer& gaz,
                                             const std::vector<Token>& tokens) {
  std::vector<GazCover> cover(tokens.size());
  if (gaz.phrases.empty()) return cover;
  std::vector<std::string> lowered;
  lowered.reserve(tokens.size());
  for (const auto& t : tokens) lowered.push_back(lower_copy(t.text));
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    std::string phrase;
    for (std::size_t len = 1; len <= gaz.max_len && s + len <= tokens.size(); ++len) {
      if (len > 1) phrase += ' ';
      phrase += lowered[s + len - 1];
      auto it = gaz.phrases.find(phrase);
      if (it == gaz.phrases.end()) continue;
      for (std::size_t i = s; i < s + len; ++i) {
        if (len > cover[i].len) cover[i] = GazCover{len, i == s, &it->second};
      }
    }
  }
  return cover;
}

// ---------------------------------------------------------------------------
// Feature templates (fixed inventory):
//   w-2..w+2   lowercased window surfaces, <s>/</s> past the boundaries
//   pre1..3    lowercased prefixes of the focus token (code points)
//   suf1..3    lowercased suffixes of the focus token
//   shape      collapsed character-class shape (X/x/d/p)
//   isdigit    focus is all digits
//   ispunct    focus is a single non-alphanumeric code point
//   gaz / gaz@B / gaz@I  classes of the longest gazetteer match covering the
//                        focus, with its position inside the match

namespace detail {

inline std::vector<std::string> codepoints_of(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    Utf8Char u = decode_utf8(s, i);
    out.push_back(std::string(s.substr(i, u.size)));
    i += u.size;
  }
  return out;
}

inline std::string word_shape(std::string_view s) {
  std::string shape;
  std::size_t i = 0;
  char last = 0;
  while (i < s.size()) {
    Utf8Char u = decode_utf8(s, i);
    char c;
    if (is_upper_cp(u.cp))
      c = 'X';
    else if (is_letter_cp(u.cp))
      c = 'x';
    else if (is_digit_cp(u.cp))
      c = 'd';
    else
      c = 'p';
    if (c != last) shape += c;
    last = c;
    i += u.size;
  }
  return shape;
}

}  // namespace detail

inline std::vector<std::string> extract_features(const std::vector<Token>& tokens,
                                                 std::size_t index,
                                                 const std::vector<GazCover>& cover) {
  if (index >= tokens.size())
    throw DomainError("feature extraction index " + std::to_string(index) +
                      " out of range (n=" + std::to_string(tokens.size()) + ")");
  std::vector<std::string> out;
  out.reserve(16);

  static const char* names[5] = {"w-2=", "w-1=", "w0=", "w+1=", "w+2="};
  for (int off = -2; off <= 2; ++off) {
    long long j = static_cast<long long>(index) + off;
    std::string v;
    if (j < 0)
      v = "<s>";
    else if (j >= static_cast<long long>(tokens.size()))
      v = "</s>";
    else
      v = lower_copy(tokens[static_cast<std::size_t>(j)].text);
    out.push_back(names[off + 2] + v);
  }

  std::string focus = lower_copy(tokens[index].text);
  std::vector<std::string> cps = detail::codepoints_of(focus);
  for (std::size_t k = 1; k <= 3 && k <= cps.size(); ++k) {
    std::string pre, suf;
    for (std::size_t i = 0; i < k; ++i) {
      pre += cps[i];
      suf += cps[cps.size() - k + i];
    }
    out.push_back("pre" + std::to_string(k) + "=" + pre);
    out.push_back("suf" + std::to_string(k) + "=" + suf);
  }

  out.push_back("shape=" + detail::word_shape(tokens[index].text));

  bool all_digits = !cps.empty();
  for (std::size_t i = 0; i < tokens[index].text.size();) {
    Utf8Char u = decode_utf8(tokens[index].text, i);
    if (!is_digit_cp(u.cp)) all_digits = false;
    i += u.size;
  }
  if (all_digits) out.push_back("isdigit");
  if (cps.size() == 1) {
    Utf8Char u = decode_utf8(tokens[index].text, 0);
    if (!is_word_cp(u.cp)) out.push_back("ispunct");
  }

  if (index < cover.size() && cover[index].len > 0) {
    const char* pos = cover[index].begin ? "gaz@B=" : "gaz@I=";
    for (const auto& label : *cover[index].labels) {
      out.push_back("gaz=" + label);
      out.push_back(pos + label);
    }
  }

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<std::string> extract_features(const std::vector<Token>& tokens,
                                                 std::size_t index, const Gazetteer& gaz) {
  return extract_features(tokens, index, gazetteer_cover(gaz, tokens));
}

// ---------------------------------------------------------------------------
// Model

// Perceptron weights are integer-valued by construction (every update is
// +-1), which keeps training, serialization and reload exactly reproducible.
// `u` accumulates step-weighted updates so the running average over all
// steps 1..T is ((T+1) * w - u) / T.
struct WeightCell {
  long long w = 0;
  long long u = 0;
};

struct TrainMeta {
  int epochs = 0;
  std::uint64_t seed = 0;
  bool shuffle = true;
  double rehearsal_fraction = 0.25;
  std::string dataset_fingerprint;
  std::string replay_fingerprint;  // set by continue_training
};

// Decode priority: O first, then the entity tags in lexicographic order.
// Score ties fall to the earliest tag in this order, so a model with no
// evidence emits all-O.
inline std::vector<std::string> priority_tag_order(const std::vector<std::string>& labels) {
  std::vector<std::string> rest;
  for (const auto& l : labels) {
    rest.push_back(make_tag('B', l));
    rest.push_back(make_tag('I', l));
  }
  std::sort(rest.begin(), rest.end());
  rest.erase(std::unique(rest.begin(), rest.end()), rest.end());
  std::vector<std::string> out{"O"};
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

struct TaggerModel {
  std::vector<std::string> tag_set;  // priority order, tag_set[0] == "O"
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::vector<WeightCell>> weights;  // feature -> per-tag cell
  long long update_count = 0;  // perceptron steps taken (T)
  Gazetteer gazetteer;
  TrainMeta meta;

  // Materialized averaged weights, rebuilt by finalize().
  std::unordered_map<std::string, std::vector<double>> averaged;

  void finalize() {
    averaged.clear();
    double t = static_cast<double>(update_count);
    for (const auto& [feat, cells] : weights) {
      std::vector<double> row(cells.size(), 0.0);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (update_count == 0)
          row[i] = static_cast<double>(cells[i].w);
        else
          row[i] = (static_cast<double>(update_count + 1) * static_cast<double>(cells[i].w) -
                    static_cast<double>(cells[i].u)) /
                   t;
      }
      averaged[feat] = std::move(row);
    }
  }
};

namespace detail {

inline bool valid_start_tag(const std::string& tag) { return tag.empty() || tag[0] != 'I'; }

inline bool valid_transition(const std::string& prev, const std::string& cur) {
  if (cur[0] != 'I') return true;
  if (prev == "O" || prev[0] == 'O') return false;
  return prev.substr(2) == cur.substr(2);
}

// Viterbi over per-position emission scores with a hard IOB transition mask.
// Scorer: double(position, tag_index). Ties resolve to the lowest tag index
// at every comparison, which is the documented O-first priority.
template <class Scorer>
inline std::vector<int> viterbi(std::size_t n, const std::vector<std::string>& tag_set,
                                Scorer&& score) {
  constexpr double NEG = -1e300;
  const std::size_t k = tag_set.size();
  if (n == 0) return {};
  std::vector<std::vector<double>> dp(n, std::vector<double>(k, NEG));
  std::vector<std::vector<int>> bp(n, std::vector<int>(k, -1));
  for (std::size_t t = 0; t < k; ++t)
    if (valid_start_tag(tag_set[t])) dp[0][t] = score(0, t);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      double best = NEG;
      int best_prev = -1;
      for (std::size_t p = 0; p < k; ++p) {
        if (dp[i - 1][p] <= NEG) continue;
        if (!valid_transition(tag_set[p], tag_set[t])) continue;
        if (dp[i - 1][p] > best) {
          best = dp[i - 1][p];
          best_prev = static_cast<int>(p);
        }
      }
      if (best_prev < 0) continue;
      dp[i][t] = best + score(i, t);
      bp[i][t] = best_prev;
    }
  }
  double best = NEG;
  int best_tag = 0;
  for (std::size_t t = 0; t < k; ++t) {
    if (dp[n - 1][t] > best) {
      best = dp[n - 1][t];
      best_tag = static_cast<int>(t);
    }
  }
  std::vector<int> tags(n, 0);
  tags[n - 1] = best_tag;
  for (std::size_t i = n - 1; i > 0; --i) tags[i - 1] = bp[i][tags[i]];
  return tags;
}

struct TrainItem {
  std::vector<std::vector<std::string>> feats;  // sorted per position
  std::vector<int> gold;                        // tag indices
};

inline TrainItem make_item(const Document& doc, const std::vector<Token>& tokens,
                           const Gazetteer& gaz,
                           const std::map<std::string, int>& tag_index) {
  TrainItem item;
  auto cover = gazetteer_cover(gaz, tokens);
  item.feats.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i)
    item.feats.push_back(extract_features(tokens, i, cover));
  TagSequence gold = spans_to_iob(doc);
  item.gold.reserve(gold.tags.size());
  for (const auto& t : gold.tags) {
    auto it = tag_index.find(t);
    if (it == tag_index.end()) throw TrainingError("gold tag '" + t + "' outside tag set");
    item.gold.push_back(it->second);
  }
  return item;
}

struct PerceptronState {
  std::unordered_map<std::string, std::vector<WeightCell>>* weights;
  std::size_t k = 0;
  long long steps = 0;

  double raw_score(const std::vector<std::string>& feats, std::size_t tag) const {
    double s = 0.0;
    for (const auto& f : feats) {
      auto it = weights->find(f);
      if (it != weights->end()) s += static_cast<double>(it->second[tag].w);
    }
    return s;
  }

  void visit(const TrainItem& item, const std::vector<std::string>& tag_set) {
    ++steps;
    std::vector<int> pred = viterbi(item.feats.size(), tag_set, [&](std::size_t i, std::size_t t) {
      return raw_score(item.feats[i], t);
    });
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] == item.gold[i]) continue;
      for (const auto& f : item.feats[i]) {
        auto& cells = (*weights)[f];
        if (cells.empty()) cells.resize(k);
        cells[static_cast<std::size_t>(item.gold[i])].w += 1;
        cells[static_cast<std::size_t>(item.gold[i])].u += steps;
        cells[static_cast<std::size_t>(pred[i])].w -= 1;
        cells[static_cast<std::size_t>(pred[i])].u -= steps;
      }
    }
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Training / decoding

inline void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw TrainingError("epochs must be >= 0");
  if (cfg.rehearsal_fraction < 0.0 || cfg.rehearsal_fraction > 1.0)
    throw TrainingError("rehearsal_fraction must be in [0, 1]");
}

inline TaggerModel train(const Dataset& ds, const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (ds.documents.empty()) throw TrainingError("training dataset has no documents");

  TaggerModel m;
  m.labels = ds.label_set();
  m.tag_set = priority_tag_order(m.labels);
  m.gazetteer.add_entities(ds);
  m.meta = TrainMeta{cfg.epochs, cfg.seed, cfg.shuffle, cfg.rehearsal_fraction,
                     dataset_fingerprint(ds), ""};

  std::map<std::string, int> tag_index;
  for (std::size_t i = 0; i < m.tag_set.size(); ++i)
    tag_index[m.tag_set[i]] = static_cast<int>(i);

  std::vector<detail::TrainItem> items;
  items.reserve(ds.documents.size());
  for (const auto& d : ds.documents)
    items.push_back(detail::make_item(d, d.tokens, m.gazetteer, tag_index));

  detail::PerceptronState state{&m.weights, m.tag_set.size(), 0};
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) deterministic_shuffle(order, rng);
    for (std::size_t idx : order) state.visit(items[idx], m.tag_set);
  }
  m.update_count = state.steps;
  m.finalize();
  return m;
}

inline TagSequence decode(const TaggerModel& m, const Document& doc) {
  auto cover = gazetteer_cover(m.gazetteer, doc.tokens);
  std::vector<std::vector<std::string>> feats;
  feats.reserve(doc.tokens.size());
  for (std::size_t i = 0; i < doc.tokens.size(); ++i)
    feats.push_back(extract_features(doc.tokens, i, cover));
  std::vector<int> tags =
      detail::viterbi(doc.tokens.size(), m.tag_set, [&](std::size_t i, std::size_t t) {
        double s = 0.0;
        for (const auto& f : feats[i]) {
          auto it = m.averaged.find(f);
          if (it != m.averaged.end()) s += it->second[t];
        }
        return s;
      });
  TagSequence out{doc.id, {}};
  out.tags.reserve(tags.size());
  for (int t : tags) out.tags.push_back(m.tag_set[static_cast<std::size_t>(t)]);
  return out;
}

// Resumes perceptron updates on a tune set while replaying a seeded sample of
// the previous training data each epoch (rehearsal), so the model keeps its
// grip on the old distribution. The gazetteer grows by the tune entities.
inline TaggerModel continue_training(const TaggerModel& base, const Dataset& tune,
                                     const Dataset& prev, const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (tune.documents.empty()) throw TrainingError("tune dataset has no documents");

  TaggerModel m = base;
  std::set<std::string> label_set(m.labels.begin(), m.labels.end());
  for (const auto& l : tune.label_set()) label_set.insert(l);
  for (const auto& l : prev.label_set()) label_set.insert(l);
  m.labels.assign(label_set.begin(), label_set.end());
  std::vector<std::string> new_tags = priority_tag_order(m.labels);
  if (new_tags != m.tag_set) {
    // Remap every weight row onto the extended tag set.
    std::map<std::string, int> new_index;
    for (std::size_t i = 0; i < new_tags.size(); ++i)
      new_index[new_tags[i]] = static_cast<int>(i);
    std::unordered_map<std::string, std::vector<WeightCell>> remapped;
    for (const auto& [feat, cells] : m.weights) {
      std::vector<WeightCell> row(new_tags.size());
      for (std::size_t i = 0; i < cells.size(); ++i)
        row[static_cast<std::size_t>(new_index.at(m.tag_set[i]))] = cells[i];
      remapped[feat] = std::move(row);
    }
    m.weights = std::move(remapped);
    m.tag_set = std::move(new_tags);
  }
  m.gazetteer.add_entities(tune);

  std::map<std::string, int> tag_index;
  for (std::size_t i = 0; i < m.tag_set.size(); ++i)
    tag_index[m.tag_set[i]] = static_cast<int>(i);

  std::vector<detail::TrainItem> tune_items, prev_items;
  for (const auto& d : tune.documents)
    tune_items.push_back(detail::make_item(d, d.tokens, m.gazetteer, tag_index));
  for (const auto& d : prev.documents)
    prev_items.push_back(detail::make_item(d, d.tokens, m.gazetteer, tag_index));

  std::size_t replay_k = static_cast<std::size_t>(
      std::ceil(cfg.rehearsal_fraction * static_cast<double>(tune_items.size())));

  detail::PerceptronState state{&m.weights, m.tag_set.size(), base.update_count};
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> prev_idx(prev_items.size());
  for (std::size_t i = 0; i < prev_idx.size(); ++i) prev_idx[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<const detail::TrainItem*> batch;
    for (const auto& it : tune_items) batch.push_back(&it);
    for (std::size_t i : sample_without_replacement(prev_idx, replay_k, rng))
      batch.push_back(&prev_items[i]);
    if (cfg.shuffle) deterministic_shuffle(batch, rng);
    for (const auto* item : batch) state.visit(*item, m.tag_set);
  }
  m.update_count = state.steps;
  m.meta.epochs = cfg.epochs;
  m.meta.seed = cfg.seed;
  m.meta.shuffle = cfg.shuffle;
  m.meta.rehearsal_fraction = cfg.rehearsal_fraction;
  m.meta.dataset_fingerprint = dataset_fingerprint(tune);
  m.meta.replay_fingerprint = dataset_fingerprint(prev);
  m.finalize();
  return m;
}

// ---------------------------------------------------------------------------
// Serialization (canonical JSON; integer weights round-trip exactly)

inline json model_to_json(const TaggerModel& m) {
  json weights = json::object();
  std::vector<std::string> feats;
  feats.reserve(m.weights.size());
  for (const auto& [feat, cells] : m.weights) feats.push_back(feat);
  std::sort(feats.begin(), feats.end());
  for (const auto& feat : feats) {
    const auto& cells = m.weights.at(feat);
    json row = json::object();
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (cells[i].w != 0 || cells[i].u != 0)
        row[m.tag_set[i]] = json::array({cells[i].w, cells[i].u});
    if (!row.empty()) weights[feat] = row;
  }
  json gaz = json::object();
  for (const auto& [phrase, labels] : m.gazetteer.phrases) gaz[phrase] = labels;
  return json{{"format", "nerharness.model.v1"},
              {"tags", m.tag_set},
              {"labels", m.labels},
              {"weights", weights},
              {"updates", m.update_count},
              {"gazetteer", gaz},
              {"gazetteer_max_len", m.gazetteer.max_len},
              {"meta", json{{"epochs", m.meta.epochs},
                            {"seed", m.meta.seed},
                            {"shuffle", m.meta.shuffle},
                            {"rehearsal_fraction", m.meta.rehearsal_fraction},
                            {"dataset_fingerprint", m.meta.dataset_fingerprint},
                            {"replay_fingerprint", m.meta.replay_fingerprint}}}};
}

inline TaggerModel model_from_json(const json& j) {
  if (!j.is_object() || j.value("format", std::string()) != "nerharness.model.v1")
    throw ParseError("not a nerharness model file");
  TaggerModel m;
  for (const auto& t : j.at("tags")) m.tag_set.push_back(t.get<std::string>());
  for (const auto& l : j.at("labels")) m.labels.push_back(l.get<std::string>());
  std::map<std::string, std::size_t> tag_index;
  for (std::size_t i = 0; i < m.tag_set.size(); ++i) tag_index[m.tag_set[i]] = i;
  for (const auto& [feat, row] : j.at("weights").items()) {
    std::vector<WeightCell> cells(m.tag_set.size());
    for (const auto& [tag, wu] : row.items()) {
      auto it = tag_index.find(tag);
      if (it == tag_index.end()) throw ParseError("model weight for unknown tag '" + tag + "'");
      cells[it->second] = WeightCell{wu.at(0).get<long long>(), wu.at(1).get<long long>()};
    }
    m.weights[feat] = std::move(cells);
  }
  m.update_count = j.value("updates", 0LL);
  for (const auto& [phrase, labels] : j.at("gazetteer").items()) {
    std::size_t count = static_cast<std::size_t>(
        1 + std::count(phrase.begin(), phrase.end(), ' '));
    for (const auto& l : labels) m.gazetteer.add(phrase, count, l.get<std::string>());
  }
  if (j.contains("gazetteer_max_len"))
    m.gazetteer.max_len = std::max(m.gazetteer.max_len, j["gazetteer_max_len"].get<std::size_t>());
  const json& meta = j.at("meta");
  m.meta.epochs = meta.value("epochs", 0);
  m.meta.seed = meta.value("seed", std::uint64_t{0});
  m.meta.shuffle = meta.value("shuffle", true);
  m.meta.rehearsal_fraction = meta.value("rehearsal_fraction", 0.25);
  m.meta.dataset_fingerprint = meta.value("dataset_fingerprint", std::string());
  m.meta.replay_fingerprint = meta.value("replay_fingerprint", std::string());
  m.finalize();
  return m;
}

inline std::string serialize_model(const TaggerModel& m) {
  return canonical_dump(model_to_json(m)) + "\n";
}

inline TaggerModel deserialize_model(std::string_view bytes) {
  return model_from_json(detail::parse_json(bytes, "model"));
}

// ---------------------------------------------------------------------------
// Prediction files: one JSON object per line, dataset document order.

inline std::string predictions_to_jsonl(const TaggerModel& m, const Dataset& ds) {
  std::string out;
  for (const auto& d : ds.documents) {
    TagSequence seq = decode(m, d);
    out += canonical_dump(json{{"doc_id", seq.doc_id}, {"tags", seq.tags}});
    out += '\n';
  }
  return out;
}

inline std::vector<TagSequence> load_predictions(std::string_view bytes, const Dataset& ds,
                                                 std::optional<RepairPolicy> repair = {}) {
  std::map<std::string, TagSequence> by_id;
  std::istringstream in{std::string(bytes)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("predictions line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("doc_id") || !j.contains("tags"))
      throw ParseError("predictions line " + std::to_string(line_no) +
                       ": want {\"doc_id\", \"tags\"}");
    TagSequence seq{j["doc_id"].get<std::string>(), {}};
    for (const auto& t : j["tags"]) {
      std::string tag = t.get<std::string>();
      if (!is_valid_tag(tag))
        throw ParseError("predictions line " + std::to_string(line_no) + ": invalid tag '" +
                         tag + "'");
      seq.tags.push_back(std::move(tag));
    }
    if (!by_id.emplace(seq.doc_id, seq).second)
      throw AlignmentError("predictions: duplicate doc_id '" + seq.doc_id + "'");
  }
  std::vector<TagSequence> out;
  out.reserve(ds.documents.size());
  std::set<std::string> wanted;
  for (const auto& d : ds.documents) {
    wanted.insert(d.id);
    auto it = by_id.find(d.id);
    if (it == by_id.end()) throw AlignmentError("predictions: missing doc '" + d.id + "'");
    if (it->second.tags.size() != d.tokens.size())
      throw AlignmentError("predictions: doc '" + d.id + "' has " +
                           std::to_string(it->second.tags.size()) + " tags for " +
                           std::to_string(d.tokens.size()) + " tokens");
    out.push_back(repair ? repair_tags(it->second, *repair) : it->second);
  }
  for (const auto& [id, seq] : by_id)
    if (!wanted.count(id)) throw AlignmentError("predictions: unknown doc '" + id + "'");
  return out;
}

}  // namespace nerh
