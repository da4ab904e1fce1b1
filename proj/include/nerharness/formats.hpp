#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nerharness/canonical_json.hpp"
#include "nerharness/corpus.hpp"
#include "nerharness/errors.hpp"
#include "nerharness/iob.hpp"

namespace nerh {

enum class DatasetFormat { annotator_json, canonical, conll };

inline DatasetFormat dataset_format_from_string(std::string_view s) {
  if (s == "annotator-json" || s == "annotator_json") return DatasetFormat::annotator_json;
  if (s == "canonical" || s == "json") return DatasetFormat::canonical;
  if (s == "conll") return DatasetFormat::conll;
  throw ParseError("unknown dataset format '" + std::string(s) + "'");
}

namespace detail {

inline json parse_json(std::string_view bytes, const std::string& what) {
  try {
    return json::parse(bytes);
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based byte position of the failure.
    throw ParseError(what + ": malformed JSON at byte " + std::to_string(e.byte) + ": " +
                     e.what());
  }
}

inline std::string doc_id_for(std::string_view dataset_name, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", index);
  return std::string(dataset_name) + "-" + buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Annotation-tool export: a list of [text, {"entities": [[start, end, label],
// ...]}] records, either bare or under an "annotations" key. Records with a
// null body (skipped documents) are ignored.
inline Dataset ingest_annotator_json(std::string_view bytes, std::string_view dataset_name) {
  json root = detail::parse_json(bytes, "annotator export");
  const json* records = &root;
  Dataset ds;
  ds.name = std::string(dataset_name);
  if (root.is_object()) {
    if (root.contains("classes") && root["classes"].is_array())
      for (const auto& c : root["classes"]) ds.declared_labels.push_back(c.get<std::string>());
    if (!root.contains("annotations"))
      throw ParseError("annotator export: object form requires an 'annotations' array");
    records = &root["annotations"];
  }
  if (!records->is_array()) throw ParseError("annotator export: expected an array of records");
  std::size_t index = 0;
  for (const auto& rec : *records) {
    if (rec.is_null()) continue;
    if (!rec.is_array() || rec.size() < 2 || !rec[0].is_string())
      throw ParseError("annotator export: record " + std::to_string(index) +
                       " is not [text, {\"entities\": ...}]");
    Document d;
    d.id = detail::doc_id_for(dataset_name, index);
    d.text = rec[0].get<std::string>();
    if (!rec[1].is_null()) {
      if (!rec[1].is_object() || !rec[1].contains("entities"))
        throw ParseError("annotator export: record " + std::to_string(index) +
                         " lacks an 'entities' list");
      for (const auto& e : rec[1]["entities"]) {
        if (!e.is_array() || e.size() != 3)
          throw ParseError("annotator export: record " + std::to_string(index) +
                           " has an entity that is not [start, end, label]");
        d.entities.push_back(EntitySpan{e[0].get<std::size_t>(), e[1].get<std::size_t>(),
                                        e[2].get<std::string>()});
      }
    }
    retokenize(d);
    ds.documents.push_back(std::move(d));
    ++index;
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Canonical dataset JSON

inline Dataset dataset_from_json(const json& root) {
  if (!root.is_object() || !root.contains("documents"))
    throw ParseError("canonical dataset: expected {\"name\", \"documents\": [...]}");
  Dataset ds;
  ds.name = root.value("name", std::string("dataset"));
  if (root.contains("labels"))
    for (const auto& l : root["labels"]) ds.declared_labels.push_back(l.get<std::string>());
  for (const auto& jd : root["documents"]) {
    Document d;
    d.id = jd.value("id", detail::doc_id_for(ds.name, ds.documents.size()));
    d.text = jd.value("text", std::string());
    if (jd.contains("entities"))
      for (const auto& je : jd["entities"])
        d.entities.push_back(EntitySpan{je.at("start").get<std::size_t>(),
                                        je.at("end").get<std::size_t>(),
                                        je.at("label").get<std::string>()});
    retokenize(d);
    ds.documents.push_back(std::move(d));
  }
  return ds;
}

inline Dataset read_canonical_json(std::string_view bytes) {
  return dataset_from_json(detail::parse_json(bytes, "canonical dataset"));
}

inline json dataset_to_json(const Dataset& ds) {
  json docs = json::array();
  for (const auto& d : ds.documents) {
    json ents = json::array();
    for (const auto& e : d.entities)
      ents.push_back({{"start", e.start}, {"end", e.end}, {"label", e.label}});
    docs.push_back({{"id", d.id}, {"text", d.text}, {"entities", ents}});
  }
  json root{{"name", ds.name}, {"documents", docs}};
  if (!ds.declared_labels.empty()) root["labels"] = ds.declared_labels;
  return root;
}

inline std::string write_canonical_json(const Dataset& ds) {
  return canonical_dump(dataset_to_json(ds)) + "\n";
}

inline std::string dataset_fingerprint(const Dataset& ds) {
  return fingerprint_hex(write_canonical_json(ds));
}

// ---------------------------------------------------------------------------
// CoNLL (two columns: token, tag; blank line between documents)

inline Dataset ingest_conll(std::string_view bytes, std::string_view dataset_name) {
  Dataset ds;
  ds.name = std::string(dataset_name);
  std::vector<std::string> toks, tags;
  std::size_t line_no = 0;

  auto flush = [&]() {
    if (toks.empty()) return;
    Document d;
    d.id = detail::doc_id_for(dataset_name, ds.documents.size());
    // Reconstructed text: single space between surface forms.
    std::string text;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (i) text += ' ';
      text += toks[i];
    }
    d.text = std::move(text);
    retokenize(d);
    if (d.tokens.size() != toks.size())
      throw ParseError("conll: document ending at line " + std::to_string(line_no) +
                       " has a first column that is not a single token (e.g. embedded "
                       "punctuation); got " +
                       std::to_string(d.tokens.size()) + " tokens from " +
                       std::to_string(toks.size()) + " rows");
    TagSequence seq{d.id, tags};
    d.entities = iob_to_spans(seq, d);
    ds.documents.push_back(std::move(d));
    toks.clear();
    tags.clear();
  };

  std::string line;
  std::istringstream in{std::string(bytes)};
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t ws = line.find_first_of(" \t");
    if (line.empty()) {
      flush();
      continue;
    }
    if (ws == std::string::npos)
      throw ParseError("conll line " + std::to_string(line_no) + ": expected 'token tag'");
    std::string tok = line.substr(0, ws);
    std::size_t tag_pos = line.find_first_not_of(" \t", ws);
    if (tok.empty() || tag_pos == std::string::npos)
      throw ParseError("conll line " + std::to_string(line_no) + ": expected 'token tag'");
    std::string tag = line.substr(tag_pos);
    while (!tag.empty() && (tag.back() == ' ' || tag.back() == '\t')) tag.pop_back();
    if (!is_valid_tag(tag))
      throw ParseError("conll line " + std::to_string(line_no) + ": invalid tag '" + tag + "'");
    toks.push_back(std::move(tok));
    tags.push_back(std::move(tag));
  }
  flush();
  return ds;
}

inline std::string export_conll(const Dataset& ds) {
  std::string out;
  bool first = true;
  for (const auto& d : ds.documents) {
    if (!first) out += '\n';
    first = false;
    TagSequence seq = spans_to_iob(d);
    for (std::size_t i = 0; i < d.tokens.size(); ++i) {
      out += d.tokens[i].text;
      out += ' ';
      out += seq.tags[i];
      out += '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

inline Dataset load_dataset_file(const std::string& path, DatasetFormat format,
                                 std::string_view name) {
  std::string bytes = read_file(path);
  switch (format) {
    case DatasetFormat::annotator_json: return ingest_annotator_json(bytes, name);
    case DatasetFormat::canonical: {
      Dataset ds = read_canonical_json(bytes);
      if (!name.empty()) ds.name = std::string(name);
      return ds;
    }
    case DatasetFormat::conll: return ingest_conll(bytes, name);
  }
  throw ParseError("unreachable dataset format");
}

// ---------------------------------------------------------------------------
// Class-count verification (release auditing)

struct CountExpectation {
  std::map<std::string, std::size_t> per_class;
  std::size_t total = 0;
};

struct CountDelta {
  std::string label;
  long long expected = 0;
  long long actual = 0;
};

struct CountCheck {
  bool ok = true;
  std::vector<CountDelta> deltas;  // only rows that differ
  long long expected_total = 0;
  long long actual_total = 0;
};

inline CountCheck verify_class_counts(const Dataset& ds, const CountExpectation& expect) {
  ClassCounts actual = class_counts(ds);
  CountCheck check;
  check.expected_total = static_cast<long long>(expect.total);
  check.actual_total = static_cast<long long>(actual.total);
  std::map<std::string, std::pair<long long, long long>> rows;
  for (const auto& [label, n] : expect.per_class) rows[label].first = static_cast<long long>(n);
  for (const auto& [label, n] : actual.per_class) rows[label].second = static_cast<long long>(n);
  for (const auto& [label, row] : rows)
    if (row.first != row.second) check.deltas.push_back({label, row.first, row.second});
  check.ok = check.deltas.empty() && check.expected_total == check.actual_total;
  return check;
}

}  // namespace nerh
