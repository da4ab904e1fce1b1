#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "nerharness/analysis.hpp"
#include "nerharness/canonical_json.hpp"
#include "nerharness/corpus.hpp"
#include "nerharness/errors.hpp"
#include "nerharness/formats.hpp"
#include "nerharness/metrics.hpp"
#include "nerharness/random.hpp"
#include "nerharness/stats.hpp"
#include "nerharness/tagger.hpp"

namespace nerh {

// ---------------------------------------------------------------------------
// Document-level splits. Sorting the ids before the seeded shuffle makes the
// split a function of (id set, seed), not of document order on disk.

struct SplitSpec {
  double test_fraction = 0.10;
  double val_fraction_of_rest = 0.20;
};

struct DocSplit {
  std::vector<std::string> train, val, test;
};

inline std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

inline DocSplit split_ids(const Dataset& ds, const SplitSpec& spec, std::uint64_t seed) {
  if (spec.test_fraction < 0.0 || spec.test_fraction >= 1.0 ||
      spec.val_fraction_of_rest < 0.0 || spec.val_fraction_of_rest >= 1.0)
    throw DomainError("split fractions must be in [0, 1)");
  std::size_t n = ds.documents.size();
  if (n < 3) throw DomainError("dataset '" + ds.name + "' has fewer than 3 documents");

  std::vector<std::string> ids;
  ids.reserve(n);
  std::set<std::string> seen;
  for (const auto& d : ds.documents) {
    if (!seen.insert(d.id).second)
      throw DomainError("dataset '" + ds.name + "' has duplicate doc id '" + d.id + "'");
    ids.push_back(d.id);
  }
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  deterministic_shuffle(ids, rng);

  std::size_t n_test = round_half_up(spec.test_fraction * static_cast<double>(n));
  std::size_t n_val =
      round_half_up(spec.val_fraction_of_rest * static_cast<double>(n - n_test));
  if (n_test + n_val > n) n_val = n - n_test;

  DocSplit out;
  out.test.assign(ids.begin(), ids.begin() + static_cast<long>(n_test));
  out.val.assign(ids.begin() + static_cast<long>(n_test),
                 ids.begin() + static_cast<long>(n_test + n_val));
  out.train.assign(ids.begin() + static_cast<long>(n_test + n_val), ids.end());
  return out;
}

inline Dataset subset(const Dataset& ds, const std::vector<std::string>& ids,
                      const std::string& name) {
  std::map<std::string, const Document*> by_id;
  for (const auto& d : ds.documents) by_id[d.id] = &d;
  Dataset out;
  out.name = name;
  out.declared_labels = ds.declared_labels;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DomainError("subset: unknown doc id '" + id + "'");
    out.documents.push_back(*it->second);
  }
  return out;
}

// Concatenation namespaces every id as "<dataset>/<doc id>", which keeps the
// provenance of each document auditable inside merged training sets.
inline Dataset concat_datasets(const std::vector<const Dataset*>& parts,
                               const std::string& name) {
  Dataset out;
  out.name = name;
  std::set<std::string> labels;
  for (const auto* ds : parts) {
    for (const auto& l : ds->label_set()) labels.insert(l);
    for (const auto& d : ds->documents) {
      Document copy = d;
      copy.id = ds->name + "/" + d.id;
      out.documents.push_back(std::move(copy));
    }
  }
  out.declared_labels.assign(labels.begin(), labels.end());
  return out;
}

// ---------------------------------------------------------------------------
// Plans

enum class PlanKind { single, ova, logo, logo_lowres, full };

inline const char* to_string(PlanKind k) {
  switch (k) {
    case PlanKind::single: return "single";
    case PlanKind::ova: return "ova";
    case PlanKind::logo: return "logo";
    case PlanKind::logo_lowres: return "logo_lowres";
    case PlanKind::full: return "full";
  }
  return "?";
}

inline PlanKind plan_kind_from_string(std::string_view s) {
  if (s == "single") return PlanKind::single;
  if (s == "ova") return PlanKind::ova;
  if (s == "logo") return PlanKind::logo;
  if (s == "logo_lowres" || s == "lowres") return PlanKind::logo_lowres;
  if (s == "full") return PlanKind::full;
  throw PlanError("unknown experiment kind '" + std::string(s) + "'");
}

struct DatasetRef {
  std::string name;
  std::string path;
  DatasetFormat format = DatasetFormat::canonical;
};

struct ExperimentPlan {
  PlanKind kind = PlanKind::single;
  std::string anchor;  // required for ova/logo/logo_lowres
  std::vector<DatasetRef> datasets;
  int n_seeds = 10;
  EvalMode eval_mode = EvalMode::token_strict;
  SplitSpec split;
  TrainConfig tagger;           // seed is overridden per sweep seed
  double lowres_fraction = 0.10;
  std::map<std::string, std::string> predictions;  // ova: dataset -> jsonl path

  void validate() const {
    if (datasets.empty()) throw PlanError("plan lists no datasets");
    std::set<std::string> names;
    for (const auto& d : datasets)
      if (!names.insert(d.name).second)
        throw PlanError("duplicate dataset name '" + d.name + "' in plan");
    if (n_seeds < 1) throw PlanError("n_seeds must be >= 1");
    if (lowres_fraction <= 0.0 || lowres_fraction >= 1.0)
      throw PlanError("lowres_fraction must be in (0, 1)");
    bool needs_anchor =
        kind == PlanKind::ova || kind == PlanKind::logo || kind == PlanKind::logo_lowres;
    if (needs_anchor) {
      if (anchor.empty()) throw PlanError("this experiment kind requires an anchor dataset");
      if (!names.count(anchor)) throw PlanError("anchor '" + anchor + "' not in plan datasets");
      if (datasets.size() < 2)
        throw PlanError("this experiment kind requires at least one non-anchor dataset");
    }
    if (!anchor.empty() && !names.count(anchor))
      throw PlanError("anchor '" + anchor + "' not in plan datasets");
    for (const auto& [name, path] : predictions)
      if (!names.count(name))
        throw PlanError("predictions entry for unknown dataset '" + name + "'");
    validate_train_config(tagger);
    if (split.test_fraction < 0.0 || split.test_fraction >= 1.0 ||
        split.val_fraction_of_rest < 0.0 || split.val_fraction_of_rest >= 1.0)
      throw PlanError("split fractions must be in [0, 1)");
  }
};

inline ExperimentPlan plan_from_json(const json& root) {
  const json& j = root.is_object() && root.contains("plan") ? root["plan"] : root;
  if (!j.is_object() || !j.contains("kind")) throw PlanError("plan needs a 'kind'");
  ExperimentPlan p;
  p.kind = plan_kind_from_string(j["kind"].get<std::string>());
  p.anchor = j.value("anchor", std::string());
  if (!j.contains("datasets") || !j["datasets"].is_array())
    throw PlanError("plan needs a 'datasets' array");
  for (const auto& jd : j["datasets"]) {
    DatasetRef ref;
    ref.name = jd.at("name").get<std::string>();
    ref.path = jd.at("path").get<std::string>();
    ref.format = dataset_format_from_string(jd.value("format", std::string("canonical")));
    p.datasets.push_back(std::move(ref));
  }
  p.n_seeds = j.value("n_seeds", 10);
  p.eval_mode = eval_mode_from_string(j.value("eval_mode", std::string("token_strict")));
  if (j.contains("split")) {
    p.split.test_fraction = j["split"].value("test_fraction", 0.10);
    p.split.val_fraction_of_rest = j["split"].value("val_fraction_of_rest", 0.20);
  }
  if (j.contains("tagger")) {
    p.tagger.epochs = j["tagger"].value("epochs", 10);
    p.tagger.shuffle = j["tagger"].value("shuffle", true);
    p.tagger.rehearsal_fraction = j["tagger"].value("rehearsal_fraction", 0.25);
  }
  p.lowres_fraction = j.value("lowres_fraction", 0.10);
  if (j.contains("predictions"))
    for (const auto& [name, path] : j["predictions"].items())
      p.predictions[name] = path.get<std::string>();
  p.validate();
  return p;
}

inline json plan_to_json(const ExperimentPlan& p) {
  json datasets = json::array();
  for (const auto& d : p.datasets) {
    const char* fmt = d.format == DatasetFormat::annotator_json ? "annotator-json"
                      : d.format == DatasetFormat::conll        ? "conll"
                                                                : "canonical";
    datasets.push_back({{"name", d.name}, {"path", d.path}, {"format", fmt}});
  }
  json j{{"kind", to_string(p.kind)},
         {"datasets", datasets},
         {"n_seeds", p.n_seeds},
         {"eval_mode", to_string(p.eval_mode)},
         {"split", json{{"test_fraction", p.split.test_fraction},
                        {"val_fraction_of_rest", p.split.val_fraction_of_rest}}},
         {"tagger", json{{"epochs", p.tagger.epochs},
                         {"shuffle", p.tagger.shuffle},
                         {"rehearsal_fraction", p.tagger.rehearsal_fraction}}},
         {"lowres_fraction", p.lowres_fraction}};
  if (!p.anchor.empty()) j["anchor"] = p.anchor;
  if (!p.predictions.empty()) {
    json preds = json::object();
    for (const auto& [name, path] : p.predictions) preds[name] = path;
    j["predictions"] = preds;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Seed sweeps

struct SeedRun {
  int seed = 0;
  DocSplit split;
  EvaluationReport report;
};

struct MetricAgg {
  double mean = 0.0, stdev = 0.0;
};

struct ClassAgg {
  MetricAgg precision, recall, f1;
};

struct SweepSummary {
  std::map<std::string, ClassAgg> per_class;
  ClassAgg overall;
  std::vector<double> overall_f1;  // one value per seed
  int reference_seed = 0;
};

struct SweepResult {
  std::vector<SeedRun> runs;
  std::vector<TaggerModel> models;  // indexed by seed
  SweepSummary summary;
};

// Seed whose overall F1 sits closest to the sweep mean; ties take the lowest
// seed.
inline int select_reference_run(const std::vector<double>& overall_f1) {
  if (overall_f1.empty()) throw DomainError("select_reference_run on empty sweep");
  double m = mean(overall_f1);
  int best = 0;
  double best_d = std::abs(overall_f1[0] - m);
  for (std::size_t i = 1; i < overall_f1.size(); ++i) {
    double d = std::abs(overall_f1[i] - m);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

inline void parallel_for(std::size_t count, int jobs,
                         const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace detail {

inline MetricAgg agg(const std::vector<double>& xs) {
  return MetricAgg{mean(xs), sample_std(xs)};
}

// Aggregates per-class metrics across seed reports; a class absent from one
// seed's report contributes zeros there (support-0 convention).
inline std::map<std::string, ClassAgg> aggregate_classes(
    const std::vector<const EvaluationReport*>& reports) {
  std::set<std::string> classes;
  for (const auto* r : reports)
    for (const auto& [label, m] : r->per_class) classes.insert(label);
  std::map<std::string, ClassAgg> out;
  for (const auto& label : classes) {
    std::vector<double> p, r, f;
    for (const auto* rep : reports) {
      auto it = rep->per_class.find(label);
      p.push_back(it == rep->per_class.end() ? 0.0 : it->second.precision);
      r.push_back(it == rep->per_class.end() ? 0.0 : it->second.recall);
      f.push_back(it == rep->per_class.end() ? 0.0 : it->second.f1);
    }
    out[label] = ClassAgg{agg(p), agg(r), agg(f)};
  }
  return out;
}

inline ClassAgg aggregate_overall(const std::vector<const EvaluationReport*>& reports) {
  std::vector<double> p, r, f;
  for (const auto* rep : reports) {
    p.push_back(rep->overall.precision);
    r.push_back(rep->overall.recall);
    f.push_back(rep->overall.f1);
  }
  return ClassAgg{agg(p), agg(r), agg(f)};
}

inline SweepSummary summarize(const std::vector<SeedRun>& runs) {
  SweepSummary s;
  std::vector<const EvaluationReport*> reports;
  for (const auto& r : runs) reports.push_back(&r.report);
  s.per_class = aggregate_classes(reports);
  s.overall = aggregate_overall(reports);
  for (const auto& r : runs) s.overall_f1.push_back(r.report.overall.f1);
  s.reference_seed = select_reference_run(s.overall_f1);
  return s;
}

inline EvaluationReport evaluate_model(const TaggerModel& model, const Dataset& ds,
                                       EvalMode mode) {
  std::vector<TagSequence> gold = dataset_tags(ds);
  std::vector<TagSequence> pred;
  pred.reserve(ds.documents.size());
  for (const auto& d : ds.documents) pred.push_back(decode(model, d));
  return evaluate(gold, pred, mode);
}

}  // namespace detail

// Ten-seed protocol: per seed, split the dataset, train on train+val (the
// baseline tagger has no early stopping, so the val block folds into
// training; external trainers receive the split verbatim) and score the test
// block.
inline SweepResult sweep(const Dataset& ds, const ExperimentPlan& plan, int jobs = 1) {
  SweepResult out;
  out.runs.resize(static_cast<std::size_t>(plan.n_seeds));
  out.models.resize(static_cast<std::size_t>(plan.n_seeds));
  parallel_for(static_cast<std::size_t>(plan.n_seeds), jobs, [&](std::size_t s) {
    DocSplit split = split_ids(ds, plan.split, s);
    std::vector<std::string> train_ids = split.train;
    train_ids.insert(train_ids.end(), split.val.begin(), split.val.end());
    Dataset train_ds = subset(ds, train_ids, ds.name + "-train");
    Dataset test_ds = subset(ds, split.test, ds.name + "-test");
    TrainConfig cfg = plan.tagger;
    cfg.seed = s;
    TaggerModel model = train(train_ds, cfg);
    EvaluationReport report = detail::evaluate_model(model, test_ds, plan.eval_mode);
    out.runs[s] = SeedRun{static_cast<int>(s), std::move(split), std::move(report)};
    out.models[s] = std::move(model);
  });
  out.summary = detail::summarize(out.runs);
  return out;
}

// ---------------------------------------------------------------------------
// Leave-one-group-out

struct LogoGroup {
  std::vector<std::string> train_names;
  std::string leftout;
};

// One group per non-anchor dataset, in plan order; the anchor is always on
// the training side.
inline std::vector<LogoGroup> build_logo_groups(const std::vector<std::string>& names,
                                                const std::string& anchor) {
  std::set<std::string> set(names.begin(), names.end());
  if (set.size() != names.size()) throw PlanError("duplicate dataset names");
  if (!set.count(anchor)) throw PlanError("anchor '" + anchor + "' not among datasets");
  if (names.size() < 2) throw PlanError("need at least one non-anchor dataset");
  std::vector<LogoGroup> out;
  for (const auto& leftout : names) {
    if (leftout == anchor) continue;
    LogoGroup g;
    g.leftout = leftout;
    for (const auto& n : names)
      if (n != leftout) g.train_names.push_back(n);
    out.push_back(std::move(g));
  }
  return out;
}

struct LogoGroupResult {
  LogoGroup group;
  Dataset train_concat;  // namespaced ids; kept for auditing and reuse
  SweepResult sweep;
  std::vector<EvaluationReport> leftout_reports;  // one per seed
  std::map<std::string, ClassAgg> leftout_per_class;
  ClassAgg leftout_overall;
  std::vector<double> leftout_overall_f1;
};

namespace detail {

inline const Dataset& dataset_by_name(const std::vector<Dataset>& datasets,
                                      const std::string& name) {
  for (const auto& ds : datasets)
    if (ds.name == name) return ds;
  throw PlanError("dataset '" + name + "' not loaded");
}

inline LogoGroupResult run_logo_group(const std::vector<Dataset>& datasets,
                                      const ExperimentPlan& plan, const LogoGroup& group,
                                      int jobs) {
  LogoGroupResult out;
  out.group = group;
  std::vector<const Dataset*> parts;
  for (const auto& n : group.train_names)
    parts.push_back(&dataset_by_name(datasets, n));
  out.train_concat = concat_datasets(parts, "minus-" + group.leftout);
  out.sweep = nerh::sweep(out.train_concat, plan, jobs);

  const Dataset& leftout = dataset_by_name(datasets, group.leftout);
  out.leftout_reports.resize(out.sweep.models.size());
  parallel_for(out.sweep.models.size(), jobs, [&](std::size_t s) {
    out.leftout_reports[s] = evaluate_model(out.sweep.models[s], leftout, plan.eval_mode);
  });
  std::vector<const EvaluationReport*> reports;
  for (const auto& r : out.leftout_reports) reports.push_back(&r);
  out.leftout_per_class = aggregate_classes(reports);
  out.leftout_overall = aggregate_overall(reports);
  for (const auto& r : out.leftout_reports) out.leftout_overall_f1.push_back(r.overall.f1);
  return out;
}

}  // namespace detail

inline std::vector<LogoGroupResult> run_logo(const std::vector<Dataset>& datasets,
                                             const ExperimentPlan& plan, int jobs = 1) {
  std::vector<std::string> names;
  for (const auto& d : plan.datasets) names.push_back(d.name);
  std::vector<LogoGroupResult> out;
  for (const auto& group : build_logo_groups(names, plan.anchor))
    out.push_back(detail::run_logo_group(datasets, plan, group, jobs));
  return out;
}

// ---------------------------------------------------------------------------
// Low-resource continuation (A/B)

struct LowresSeedRun {
  int seed = 0;
  std::vector<std::string> tune_ids, test_ids;
  EvaluationReport report_a, report_b;
};

struct AbComparison {
  LogoGroup group;
  int a_reference_seed = 0;  // seed of the LOGO sweep whose model became A
  std::vector<LowresSeedRun> seeds;
  ClassAgg a_overall, b_overall;
  MetricAgg delta_f1;  // B - A per seed
  std::map<std::string, ClassAgg> a_per_class, b_per_class;
  int b_wins = 0;  // seeds with strictly better overall F1 for B
};

struct LowresResult {
  std::vector<LogoGroupResult> logo;  // the underlying LOGO runs (model A source)
  std::vector<AbComparison> groups;
};

// Per group: model A is the reference run of the LOGO sweep. Per seed, the
// left-out dataset splits into a tune slice (round-half-up of the fraction)
// and a disjoint test remainder; model B continues training on the tune slice
// with rehearsal over the LOGO training concat. A and B are scored on the
// identical test remainder.
inline LowresResult run_lowres(const std::vector<Dataset>& datasets, const ExperimentPlan& plan,
                               int jobs = 1) {
  LowresResult out;
  std::vector<std::string> names;
  for (const auto& d : plan.datasets) names.push_back(d.name);
  for (const auto& group : build_logo_groups(names, plan.anchor)) {
    LogoGroupResult logo = detail::run_logo_group(datasets, plan, group, jobs);
    const Dataset& leftout = detail::dataset_by_name(datasets, group.leftout);

    std::size_t n = leftout.documents.size();
    std::size_t n_tune = round_half_up(plan.lowres_fraction * static_cast<double>(n));
    if (n_tune == 0 || n_tune >= n)
      throw PlanError("left-out dataset '" + group.leftout +
                      "' too small for the low-resource protocol");

    AbComparison cmp;
    cmp.group = group;
    cmp.a_reference_seed = logo.sweep.summary.reference_seed;
    const TaggerModel& model_a =
        logo.sweep.models[static_cast<std::size_t>(cmp.a_reference_seed)];

    cmp.seeds.resize(static_cast<std::size_t>(plan.n_seeds));
    parallel_for(static_cast<std::size_t>(plan.n_seeds), jobs, [&](std::size_t s) {
      std::vector<std::string> ids;
      for (const auto& d : leftout.documents) ids.push_back(d.id);
      std::sort(ids.begin(), ids.end());
      std::mt19937_64 rng(s);
      deterministic_shuffle(ids, rng);
      LowresSeedRun run;
      run.seed = static_cast<int>(s);
      run.tune_ids.assign(ids.begin(), ids.begin() + static_cast<long>(n_tune));
      run.test_ids.assign(ids.begin() + static_cast<long>(n_tune), ids.end());
      Dataset tune_ds = subset(leftout, run.tune_ids, group.leftout + "-tune");
      Dataset test_ds = subset(leftout, run.test_ids, group.leftout + "-test");
      TrainConfig cfg = plan.tagger;
      cfg.seed = s;
      TaggerModel model_b = continue_training(model_a, tune_ds, logo.train_concat, cfg);
      run.report_a = detail::evaluate_model(model_a, test_ds, plan.eval_mode);
      run.report_b = detail::evaluate_model(model_b, test_ds, plan.eval_mode);
      cmp.seeds[s] = std::move(run);
    });

    std::vector<const EvaluationReport*> a_reports, b_reports;
    std::vector<double> delta;
    for (const auto& r : cmp.seeds) {
      a_reports.push_back(&r.report_a);
      b_reports.push_back(&r.report_b);
      delta.push_back(r.report_b.overall.f1 - r.report_a.overall.f1);
      if (r.report_b.overall.f1 > r.report_a.overall.f1) ++cmp.b_wins;
    }
    cmp.a_overall = detail::aggregate_overall(a_reports);
    cmp.b_overall = detail::aggregate_overall(b_reports);
    cmp.a_per_class = detail::aggregate_classes(a_reports);
    cmp.b_per_class = detail::aggregate_classes(b_reports);
    cmp.delta_f1 = detail::agg(delta);

    out.logo.push_back(std::move(logo));
    out.groups.push_back(std::move(cmp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// One-vs-all: the anchor's reference model (or supplied prediction files)
// scored against each full external dataset. No re-training.

struct OvaResult {
  SweepResult anchor_sweep;
  std::vector<std::pair<std::string, EvaluationReport>> externals;
};

inline OvaResult run_ova(const std::vector<Dataset>& datasets, const ExperimentPlan& plan,
                         int jobs = 1) {
  OvaResult out;
  const Dataset& anchor = detail::dataset_by_name(datasets, plan.anchor);
  out.anchor_sweep = sweep(anchor, plan, jobs);
  const TaggerModel& reference =
      out.anchor_sweep.models[static_cast<std::size_t>(out.anchor_sweep.summary.reference_seed)];
  for (const auto& ref : plan.datasets) {
    if (ref.name == plan.anchor) continue;
    const Dataset& ds = detail::dataset_by_name(datasets, ref.name);
    auto pit = plan.predictions.find(ref.name);
    if (pit != plan.predictions.end()) {
      std::vector<TagSequence> pred =
          load_predictions(read_file(pit->second), ds, RepairPolicy::promote_to_b);
      out.externals.emplace_back(ref.name,
                                 evaluate(dataset_tags(ds), pred, plan.eval_mode));
    } else {
      out.externals.emplace_back(ref.name, detail::evaluate_model(reference, ds, plan.eval_mode));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full training: every dataset concatenated, swept, reference model exported.

struct FullResult {
  Dataset concat;
  SweepResult sweep;
};

inline FullResult run_full(const std::vector<Dataset>& datasets, const ExperimentPlan& plan,
                           int jobs = 1) {
  FullResult out;
  std::vector<const Dataset*> parts;
  for (const auto& ref : plan.datasets)
    parts.push_back(&detail::dataset_by_name(datasets, ref.name));
  out.concat = concat_datasets(parts, "full");
  out.sweep = sweep(out.concat, plan, jobs);
  return out;
}

}  // namespace nerh
