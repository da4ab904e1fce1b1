// nerharness: command-line front end for the NER experiment harness.
//
// One subcommand per procedure: ingest, lint, eval, errors, iaa, train,
// predict, experiment, anova, carbon, fetch-public.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.  Every failure also
// emits {"error": {"kind", "message"}} on stderr so callers can parse it.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nerharness/nerharness.hpp"

#ifdef NERH_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <openssl/evp.h>

#include "httplib.h"
#endif

namespace {

using nerh::json;

void emit_error(const std::string& kind, const std::string& message) {
  json err{{"error", json{{"kind", kind}, {"message", message}}}};
  std::cerr << nerh::canonical_dump(err) << "\n";
}

void print_json(const json& j) { std::cout << nerh::canonical_dump(j) << "\n"; }

// ---------------------------------------------------------------------------
// Shared option bundles

struct DatasetArg {
  std::string path;
  std::string format = "canonical";
  std::string name;

  nerh::Dataset load() const {
    std::string effective_name =
        name.empty() ? std::filesystem::path(path).stem().string() : name;
    return nerh::load_dataset_file(path, nerh::dataset_format_from_string(format),
                                   effective_name);
  }
};

void add_format_flags(CLI::App* cmd, DatasetArg& arg, const std::string& prefix = "") {
  std::string dash = prefix.empty() ? "" : prefix + "-";
  cmd->add_option("--" + dash + "format", arg.format,
                  "input format: annotator-json | canonical | conll")
      ->check(CLI::IsMember({"annotator-json", "canonical", "conll"}));
  cmd->add_option("--" + dash + "name", arg.name, "dataset name override");
}

nerh::RepairPolicy repair_from_string(const std::string& s) {
  if (s == "promote_to_B") return nerh::RepairPolicy::promote_to_b;
  if (s == "drop_to_O") return nerh::RepairPolicy::drop_to_o;
  throw nerh::DomainError("unknown repair policy '" + s + "'");
}

std::optional<nerh::RepairPolicy> optional_repair(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return repair_from_string(s);
}

// ---------------------------------------------------------------------------
// ingest

json class_counts_json(const nerh::Dataset& ds) {
  nerh::ClassCounts counts = nerh::class_counts(ds);
  json classes = json::object();
  for (const auto& [label, n] : counts.per_class)
    classes[label] = json{{"count", n}, {"percent", counts.percentage(label)}};
  return json{{"dataset", ds.name},
              {"documents", ds.documents.size()},
              {"classes", classes},
              {"total", counts.total}};
}

std::string render_class_counts(const json& c) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-42s %8s %8s\n", "Class", "Count", "%");
  out += line;
  for (const auto& [label, row] : c.at("classes").items()) {
    std::snprintf(line, sizeof(line), "%-42s %8lld %8.2f\n", label.c_str(),
                  static_cast<long long>(row.at("count").get<std::size_t>()),
                  row.at("percent").get<double>());
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-42s %8lld %8.2f\n", "TOTAL",
                static_cast<long long>(c.at("total").get<std::size_t>()),
                c.at("total").get<std::size_t>() ? 100.0 : 0.0);
  out += line;
  return out;
}

int cmd_ingest(const DatasetArg& in, const std::string& out_path, bool as_json) {
  nerh::Dataset ds = in.load();
  if (!out_path.empty()) nerh::write_file(out_path, nerh::write_canonical_json(ds));
  json counts = class_counts_json(ds);
  counts["fingerprint"] = nerh::dataset_fingerprint(ds);
  if (as_json)
    print_json(counts);
  else {
    std::cout << render_class_counts(counts);
    std::cout << "fingerprint: " << counts["fingerprint"].get<std::string>() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// lint

int cmd_lint(const DatasetArg& in, const std::string& snap, const std::string& out_path,
             bool as_json) {
  nerh::Dataset ds = in.load();
  nerh::SnapPolicy policy = snap == "expand" ? nerh::SnapPolicy::expand
                            : snap == "shrink" ? nerh::SnapPolicy::shrink
                                               : nerh::SnapPolicy::none;
  auto [repaired, report] = nerh::lint_dataset(ds, policy);
  if (!out_path.empty())
    nerh::write_file(out_path, nerh::write_canonical_json(repaired));

  json violations = json::array();
  for (const auto& v : report.violations)
    violations.push_back(json{{"doc_id", v.doc_id},
                              {"kind", nerh::to_string(v.kind)},
                              {"start", v.span.start},
                              {"end", v.span.end},
                              {"label", v.span.label},
                              {"detail", v.detail}});
  json j{{"violations", violations},
         {"snapped", report.snapped_count},
         {"clean", report.clean()}};
  if (as_json)
    print_json(j);
  else {
    for (const auto& v : report.violations)
      std::cout << v.doc_id << ": " << nerh::to_string(v.kind) << " [" << v.span.start
                << ", " << v.span.end << ") '" << v.span.label << "' — " << v.detail
                << "\n";
    std::cout << report.violations.size() << " violation(s), " << report.snapped_count
              << " span(s) snapped\n";
  }
  if (!report.clean()) {
    emit_error("lint", std::to_string(report.violations.size()) +
                           " unresolved annotation violation(s)");
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval / errors

std::vector<nerh::TagSequence> load_pred_file(const std::string& path,
                                              const nerh::Dataset& gold,
                                              const std::string& repair) {
  return nerh::load_predictions(nerh::read_file(path), gold, optional_repair(repair));
}

int cmd_eval(const DatasetArg& gold_arg, const std::string& pred_path,
             const std::string& mode, const std::string& repair,
             const std::string& out_path, bool as_json) {
  nerh::Dataset gold = gold_arg.load();
  auto pred = load_pred_file(pred_path, gold, repair);
  nerh::EvaluationReport rep =
      nerh::evaluate(nerh::dataset_tags(gold), pred, nerh::eval_mode_from_string(mode));
  json j = nerh::report_to_json(rep);
  if (!out_path.empty()) nerh::write_file(out_path, nerh::canonical_dump(j) + "\n");
  if (as_json)
    print_json(j);
  else
    std::cout << nerh::render_report_table(j);
  return 0;
}

int cmd_errors(const DatasetArg& gold_arg, const std::string& pred_path,
               const std::string& repair, const std::string& out_path, bool as_json) {
  nerh::Dataset gold = gold_arg.load();
  auto pred = load_pred_file(pred_path, gold, repair);
  auto records = nerh::classify_errors(nerh::dataset_tags(gold), pred);
  json j = nerh::breakdown_to_json(nerh::error_breakdown(records),
                                   repair.empty() ? "none" : repair);
  if (!out_path.empty()) nerh::write_file(out_path, nerh::canonical_dump(j) + "\n");
  if (as_json)
    print_json(j);
  else
    std::cout << nerh::render_breakdown_table(j);
  return 0;
}

// ---------------------------------------------------------------------------
// iaa

int cmd_iaa(const DatasetArg& ref_arg, const DatasetArg& other_arg,
            const std::string& mode, const std::string& out_path, bool as_json) {
  nerh::IaaReport rep = nerh::iaa(ref_arg.load(), other_arg.load(),
                                  nerh::eval_mode_from_string(mode));
  json j = nerh::iaa_to_json(rep);
  if (!out_path.empty()) nerh::write_file(out_path, nerh::canonical_dump(j) + "\n");
  if (as_json)
    print_json(j);
  else
    std::cout << nerh::render_iaa_table(j);
  return 0;
}

// ---------------------------------------------------------------------------
// train / predict

int cmd_train(const DatasetArg& data_arg, const std::string& out_path,
              const nerh::TrainConfig& cfg, const std::string& init_path,
              const DatasetArg& replay_arg) {
  nerh::Dataset data = data_arg.load();
  nerh::TaggerModel model;
  if (init_path.empty()) {
    model = nerh::train(data, cfg);
  } else {
    nerh::TaggerModel base = nerh::deserialize_model(nerh::read_file(init_path));
    nerh::Dataset replay;
    if (!replay_arg.path.empty()) replay = replay_arg.load();
    model = nerh::continue_training(base, data, replay, cfg);
  }
  nerh::write_file(out_path, nerh::serialize_model(model));
  std::cout << "trained " << model.tag_set.size() << "-tag model ("
            << model.weights.size() << " features, " << model.update_count
            << " update steps) -> " << out_path << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const DatasetArg& data_arg,
                const std::string& out_path) {
  nerh::TaggerModel model = nerh::deserialize_model(nerh::read_file(model_path));
  nerh::Dataset data = data_arg.load();
  std::string jsonl = nerh::predictions_to_jsonl(model, data);
  if (out_path.empty())
    std::cout << jsonl;
  else {
    nerh::write_file(out_path, jsonl);
    std::cout << "wrote predictions for " << data.documents.size() << " document(s) -> "
              << out_path << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// experiment

int cmd_experiment(const std::string& plan_path, const std::string& out_dir, int jobs,
                   bool as_json) {
  nerh::LoadedPlan loaded = nerh::load_plan_file(plan_path);
  json summary = nerh::run_experiment_to_dir(loaded.plan, loaded.datasets, out_dir, jobs);
  if (as_json)
    print_json(summary);
  else
    std::cout << nerh::render_summary(summary);
  return 0;
}

// ---------------------------------------------------------------------------
// anova

std::vector<std::vector<double>> groups_from_json(const json& j) {
  const json* rows = &j;
  if (j.is_object() && j.contains("groups")) rows = &j["groups"];
  std::vector<std::vector<double>> groups;
  if (rows->is_object()) {
    for (const auto& [name, values] : rows->items())
      groups.push_back(values.get<std::vector<double>>());
  } else if (rows->is_array()) {
    for (const auto& row : *rows) groups.push_back(row.get<std::vector<double>>());
  } else {
    throw nerh::ParseError("scores file: expected an array of groups or {\"groups\": ...}");
  }
  return groups;
}

int cmd_anova(const std::string& scores_path, bool as_json) {
  json j = nerh::detail::parse_json(nerh::read_file(scores_path), "scores file");
  nerh::AnovaResult r = nerh::anova_oneway(groups_from_json(j));
  std::size_t n = 0;
  for (std::size_t s : r.group_sizes) n += s;
  json out{{"f", r.f},
           {"p", r.p},
           {"df_between", r.group_count - 1},
           {"df_within", n - r.group_count},
           {"groups", r.group_count}};
  if (as_json)
    print_json(out);
  else {
    std::printf("F(%zu, %zu) = %.6f\n", r.group_count - 1, n - r.group_count, r.f);
    std::printf("p = %.6f\n", r.p);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// carbon

int cmd_carbon(double gpu_hours, double power_kw, double intensity, bool as_json) {
  nerh::CarbonEstimate est = nerh::carbon_estimate(gpu_hours, power_kw, intensity);
  if (as_json)
    print_json(json{{"gpu_hours", est.gpu_hours},
                    {"avg_power_kw", est.avg_power_kw},
                    {"grid_intensity_kg_per_kwh", est.grid_intensity_kg_per_kwh},
                    {"total_kg_co2eq", est.total_kg_co2eq}});
  else
    std::printf("estimated emissions: %g kg CO2-eq\n", est.total_kg_co2eq);
  return 0;
}

// ---------------------------------------------------------------------------
// fetch-public

#ifdef NERH_WITH_TLS
std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw nerh::IoError("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

std::string http_get(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw nerh::IoError("URL must start with http:// or https://: " + url);
  auto host_start = scheme_end + 3;
  auto path_start = url.find('/', host_start);
  std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  httplib::Client cli(origin);
  cli.set_follow_location(true);
  cli.set_connection_timeout(30);
  cli.set_read_timeout(120);
  auto res = cli.Get(path);
  if (!res)
    throw nerh::IoError("request to " + origin + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw nerh::IoError("GET " + url + " returned HTTP " + std::to_string(res->status));
  return res->body;
}
#endif

int cmd_fetch_public(const std::string& name, const std::string& file,
                     const std::string& url_override, const std::string& sha256,
                     const std::string& expect_path, const std::string& out_path,
                     bool as_json) {
  auto release = nerh::find_public_release(name);
  if (!release) throw nerh::DomainError("unknown public release '" + name + "'");

  std::string bytes;
  if (!file.empty()) {
    bytes = nerh::read_file(file);
  } else {
#ifdef NERH_WITH_TLS
    bytes = http_get(url_override.empty() ? release->url : url_override);
#else
    throw nerh::IoError("built without TLS support; pass --file <local copy>");
#endif
  }

#ifdef NERH_WITH_TLS
  if (!sha256.empty()) {
    std::string got = sha256_hex(bytes);
    if (got != sha256) {
      emit_error("checksum", "sha256 mismatch: expected " + sha256 + ", got " + got);
      return 1;
    }
  }
#else
  if (!sha256.empty())
    throw nerh::IoError("built without OpenSSL; --sha256 is unavailable");
#endif

  nerh::Dataset ds;
  switch (release->format) {
    case nerh::DatasetFormat::annotator_json:
      ds = nerh::ingest_annotator_json(bytes, release->name);
      break;
    case nerh::DatasetFormat::canonical:
      ds = nerh::read_canonical_json(bytes);
      break;
    case nerh::DatasetFormat::conll:
      ds = nerh::ingest_conll(bytes, release->name);
      break;
  }

  nerh::CountExpectation expect = release->expected;
  if (!expect_path.empty())
    expect = nerh::count_expectation_from_json(
        nerh::detail::parse_json(nerh::read_file(expect_path), "expectation file"));

  nerh::CountCheck check = nerh::verify_class_counts(ds, expect);
  json cj = nerh::count_check_to_json(check);
  if (as_json)
    print_json(cj);
  else
    std::cout << nerh::render_count_check(cj);

  if (!out_path.empty()) nerh::write_file(out_path, nerh::write_canonical_json(ds));

  if (!check.ok) {
    emit_error("counts", "class counts do not match the pinned release expectation");
    return 1;
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"nerharness: sequence-labeling experiment harness for clinical NER"};
  app.require_subcommand(1);
  std::function<int()> action;

  // ingest ------------------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "convert a dataset to canonical JSON");
  {
    auto in = std::make_shared<DatasetArg>();
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    ingest->add_option("input", in->path, "input dataset file")->required();
    add_format_flags(ingest, *in);
    ingest->add_option("--out", *out, "write canonical dataset JSON here");
    ingest->add_flag("--json", *as_json, "print the class-count report as JSON");
    ingest->callback([=, &action] { action = [=] { return cmd_ingest(*in, *out, *as_json); }; });
  }

  // lint --------------------------------------------------------------------
  auto* lint = app.add_subcommand("lint", "check annotation hygiene (exit 1 on violations)");
  {
    auto in = std::make_shared<DatasetArg>();
    auto snap = std::make_shared<std::string>("none");
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    lint->add_option("input", in->path, "dataset file")->required();
    add_format_flags(lint, *in);
    lint->add_option("--snap", *snap, "snap misaligned spans: none | expand | shrink")
        ->check(CLI::IsMember({"none", "expand", "shrink"}));
    lint->add_option("--out", *out, "write the post-snap dataset here");
    lint->add_flag("--json", *as_json, "print the lint report as JSON");
    lint->callback(
        [=, &action] { action = [=] { return cmd_lint(*in, *snap, *out, *as_json); }; });
  }

  // eval --------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "score predictions against gold annotations");
  {
    auto gold = std::make_shared<DatasetArg>();
    auto pred = std::make_shared<std::string>();
    auto mode = std::make_shared<std::string>("token_strict");
    auto repair = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    eval->add_option("--gold", gold->path, "gold dataset file")->required();
    add_format_flags(eval, *gold);
    eval->add_option("--pred", *pred, "predictions JSONL")->required();
    eval->add_option("--mode", *mode, "token_strict | token_class | entity_exact")
        ->check(CLI::IsMember({"token_strict", "token_class", "entity_exact"}));
    eval->add_option("--repair", *repair, "repair invalid tags: promote_to_B | drop_to_O")
        ->check(CLI::IsMember({"promote_to_B", "drop_to_O"}));
    eval->add_option("--out", *out, "write the report JSON here");
    eval->add_flag("--json", *as_json, "print the report as JSON");
    eval->callback([=, &action] {
      action = [=] { return cmd_eval(*gold, *pred, *mode, *repair, *out, *as_json); };
    });
  }

  // errors ------------------------------------------------------------------
  auto* errors = app.add_subcommand("errors", "token-level error taxonomy (Types 1-4)");
  {
    auto gold = std::make_shared<DatasetArg>();
    auto pred = std::make_shared<std::string>();
    auto repair = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    errors->add_option("--gold", gold->path, "gold dataset file")->required();
    add_format_flags(errors, *gold);
    errors->add_option("--pred", *pred, "predictions JSONL")->required();
    errors->add_option("--repair", *repair, "repair invalid tags: promote_to_B | drop_to_O")
        ->check(CLI::IsMember({"promote_to_B", "drop_to_O"}));
    errors->add_option("--out", *out, "write the breakdown JSON here");
    errors->add_flag("--json", *as_json, "print the breakdown as JSON");
    errors->callback([=, &action] {
      action = [=] { return cmd_errors(*gold, *pred, *repair, *out, *as_json); };
    });
  }

  // iaa ---------------------------------------------------------------------
  auto* iaa = app.add_subcommand("iaa", "inter-annotator agreement (F1 with bands)");
  {
    auto ref = std::make_shared<DatasetArg>();
    auto other = std::make_shared<DatasetArg>();
    auto mode = std::make_shared<std::string>("token_strict");
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    iaa->add_option("--reference", ref->path, "reference annotator dataset")->required();
    add_format_flags(iaa, *ref, "reference");
    iaa->add_option("--other", other->path, "second annotator dataset")->required();
    add_format_flags(iaa, *other, "other");
    iaa->add_option("--mode", *mode, "token_strict | token_class | entity_exact")
        ->check(CLI::IsMember({"token_strict", "token_class", "entity_exact"}));
    iaa->add_option("--out", *out, "write the agreement JSON here");
    iaa->add_flag("--json", *as_json, "print the agreement report as JSON");
    iaa->callback([=, &action] {
      action = [=] { return cmd_iaa(*ref, *other, *mode, *out, *as_json); };
    });
  }

  // train -------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "train (or continue training) the baseline tagger");
  {
    auto data = std::make_shared<DatasetArg>();
    auto out = std::make_shared<std::string>();
    auto cfg = std::make_shared<nerh::TrainConfig>();
    auto no_shuffle = std::make_shared<bool>(false);
    auto init = std::make_shared<std::string>();
    auto replay = std::make_shared<DatasetArg>();
    train->add_option("--data", data->path, "training dataset")->required();
    add_format_flags(train, *data);
    train->add_option("--out", *out, "write the model JSON here")->required();
    train->add_option("--epochs", cfg->epochs, "training epochs");
    train->add_option("--seed", cfg->seed, "shuffle seed");
    train->add_flag("--no-shuffle", *no_shuffle, "keep document order fixed");
    train->add_option("--init", *init, "start from this model (continued training)");
    train->add_option("--replay", replay->path,
                      "previous training data to rehearse from (with --init)");
    add_format_flags(train, *replay, "replay");
    train->add_option("--rehearsal-fraction", cfg->rehearsal_fraction,
                      "fraction of the tune set replayed from --replay each epoch");
    train->callback([=, &action] {
      action = [=] {
        nerh::TrainConfig c = *cfg;
        c.shuffle = !*no_shuffle;
        return cmd_train(*data, *out, c, *init, *replay);
      };
    });
  }

  // predict -----------------------------------------------------------------
  auto* predict = app.add_subcommand("predict", "tag a dataset with a trained model");
  {
    auto model = std::make_shared<std::string>();
    auto data = std::make_shared<DatasetArg>();
    auto out = std::make_shared<std::string>();
    predict->add_option("--model", *model, "model JSON")->required();
    predict->add_option("--data", data->path, "dataset to tag")->required();
    add_format_flags(predict, *data);
    predict->add_option("--out", *out, "write predictions JSONL here (default: stdout)");
    predict->callback(
        [=, &action] { action = [=] { return cmd_predict(*model, *data, *out); }; });
  }

  // experiment --------------------------------------------------------------
  auto* experiment = app.add_subcommand(
      "experiment", "run an experiment plan (single | ova | logo | lowres | full)");
  {
    auto plan = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto jobs = std::make_shared<int>(1);
    auto as_json = std::make_shared<bool>(false);
    experiment->add_option("plan", *plan, "experiment plan JSON")->required();
    experiment->add_option("--out", *out, "run directory to create")->required();
    experiment->add_option("--jobs", *jobs, "worker parallelism cap");
    experiment->add_flag("--json", *as_json, "print the summary as JSON");
    experiment->callback([=, &action] {
      action = [=] { return cmd_experiment(*plan, *out, *jobs, *as_json); };
    });
  }

  // anova -------------------------------------------------------------------
  auto* anova = app.add_subcommand("anova", "one-way ANOVA over score groups");
  {
    auto scores = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    anova->add_option("scores", *scores, "JSON file: [[...], [...]] or {\"groups\": ...}")
        ->required();
    anova->add_flag("--json", *as_json, "print F and p as JSON");
    anova->callback([=, &action] { action = [=] { return cmd_anova(*scores, *as_json); }; });
  }

  // carbon ------------------------------------------------------------------
  auto* carbon = app.add_subcommand("carbon", "estimate training emissions (kg CO2-eq)");
  {
    auto gpu_hours = std::make_shared<double>(0.0);
    auto power = std::make_shared<double>(0.0);
    auto intensity = std::make_shared<double>(0.0);
    auto as_json = std::make_shared<bool>(false);
    carbon->add_option("--gpu-hours", *gpu_hours, "total GPU hours")->required();
    carbon->add_option("--power-kw", *power, "average draw in kW")->required();
    carbon->add_option("--intensity", *intensity, "grid intensity in kg CO2-eq per kWh")
        ->required();
    carbon->add_flag("--json", *as_json, "print the estimate as JSON");
    carbon->callback([=, &action] {
      action = [=] { return cmd_carbon(*gpu_hours, *power, *intensity, *as_json); };
    });
  }

  // fetch-public ------------------------------------------------------------
  auto* fetch = app.add_subcommand(
      "fetch-public", "fetch a public release, verify pinned class counts, ingest");
  {
    auto name = std::make_shared<std::string>("psynit");
    auto file = std::make_shared<std::string>();
    auto url = std::make_shared<std::string>();
    auto sha = std::make_shared<std::string>();
    auto expect = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    fetch->add_option("--name", *name, "release name (default: psynit)");
    fetch->add_option("--file", *file, "use a local copy instead of the network");
    fetch->add_option("--url", *url, "override the pinned download URL");
    fetch->add_option("--sha256", *sha, "require this sha256 of the raw download");
    fetch->add_option("--expect", *expect, "count expectation JSON (overrides the pin)");
    fetch->add_option("--out", *out, "write the ingested canonical dataset here");
    fetch->add_flag("--json", *as_json, "print the count check as JSON");
    fetch->callback([=, &action] {
      action = [=] {
        return cmd_fetch_public(*name, *file, *url, *sha, *expect, *out, *as_json);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 2;
  }

  try {
    return action();
  } catch (const nerh::Error& e) {
    emit_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
}
