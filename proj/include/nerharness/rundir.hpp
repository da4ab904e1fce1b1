#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nerharness/experiments.hpp"

namespace nerh {

// Run-directory layout. Every artifact is canonical JSON (or a table rendered
// from it), and nothing time- or host-dependent is written, so re-running the
// same plan over the same data reproduces the directory byte for byte.
//
//   config.json                    effective plan + dataset fingerprints
//   external_trainer_config.json   hyper-parameters for external fine-tuning
//   summary.json / summary.txt
//   seeds/seed_<k>/split.json      (single, full; ova under anchor/)
//   seeds/seed_<k>/report.json
//   reference_model.json           (full)
//   anchor_model.json              (ova)
//   externals/<name>/report.json   (ova)
//   groups/<leftout>/...           (logo, logo_lowres)

namespace detail {

inline json metric_agg_to_json(const MetricAgg& a) {
  return json{{"mean", a.mean}, {"std", a.stdev}};
}

inline json class_agg_to_json(const ClassAgg& a) {
  return json{{"precision", metric_agg_to_json(a.precision)},
              {"recall", metric_agg_to_json(a.recall)},
              {"f1", metric_agg_to_json(a.f1)}};
}

inline json class_agg_map_to_json(const std::map<std::string, ClassAgg>& m) {
  json out = json::object();
  for (const auto& [label, a] : m) out[label] = class_agg_to_json(a);
  return out;
}

inline json sweep_summary_to_json(const SweepSummary& s) {
  return json{{"per_class", class_agg_map_to_json(s.per_class)},
              {"overall", class_agg_to_json(s.overall)},
              {"per_seed_overall_f1", s.overall_f1},
              {"reference_seed", s.reference_seed}};
}

inline json split_to_json(const DocSplit& s) {
  return json{{"train", s.train}, {"val", s.val}, {"test", s.test}};
}

inline void write_canonical(const std::filesystem::path& path, const json& j) {
  write_file(path.string(), canonical_dump(j) + "\n");
}

inline void write_sweep_artifacts(const std::filesystem::path& dir, const SweepResult& sweep) {
  for (const auto& run : sweep.runs) {
    std::filesystem::path seed_dir = dir / "seeds" / ("seed_" + std::to_string(run.seed));
    std::filesystem::create_directories(seed_dir);
    write_canonical(seed_dir / "split.json", split_to_json(run.split));
    write_canonical(seed_dir / "report.json", report_to_json(run.report));
  }
}

inline std::string render_agg_block(const json& per_class, const json& overall) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "  %-28s %18s %18s %18s\n", "Class", "F1 [%]", "P [%]",
                "R [%]");
  out += line;
  auto row = [&](const std::string& name, const json& a) {
    auto cell = [](const json& m, char* buf, std::size_t len) {
      std::snprintf(buf, len, "%6.2f +/- %5.2f", 100.0 * m["mean"].get<double>(),
                    100.0 * m["std"].get<double>());
    };
    char f1[32], p[32], r[32];
    cell(a["f1"], f1, sizeof(f1));
    cell(a["precision"], p, sizeof(p));
    cell(a["recall"], r, sizeof(r));
    std::snprintf(line, sizeof(line), "  %-28s %18s %18s %18s\n", name.c_str(), f1, p, r);
    out += line;
  };
  for (const auto& [label, a] : per_class.items()) row(label, a);
  row("OVERALL", overall);
  return out;
}

inline std::string render_sweep_block(const json& s) {
  std::string out = render_agg_block(s["per_class"], s["overall"]);
  out += "  reference seed: " + std::to_string(s["reference_seed"].get<int>()) + "\n";
  return out;
}

}  // namespace detail

inline json run_config_json(const ExperimentPlan& plan, const std::vector<Dataset>& datasets) {
  json fingerprints = json::object();
  for (const auto& ds : datasets) fingerprints[ds.name] = dataset_fingerprint(ds);
  return json{{"plan", plan_to_json(plan)}, {"dataset_fingerprints", fingerprints}};
}

inline void write_run_common(const std::filesystem::path& dir, const ExperimentPlan& plan,
                             const std::vector<Dataset>& datasets) {
  std::filesystem::create_directories(dir);
  detail::write_canonical(dir / "config.json", run_config_json(plan, datasets));
  detail::write_canonical(dir / "external_trainer_config.json",
                          ExternalTrainerConfig{}.to_json());
}

// ---------------------------------------------------------------------------
// Per-kind summaries

inline json single_summary_json(const ExperimentPlan& plan, const std::string& dataset_name,
                                const SweepResult& sweep) {
  return json{{"kind", to_string(plan.kind)},
              {"dataset", dataset_name},
              {"mode", to_string(plan.eval_mode)},
              {"n_seeds", plan.n_seeds},
              {"sweep", detail::sweep_summary_to_json(sweep.summary)}};
}

inline json ova_summary_json(const ExperimentPlan& plan, const OvaResult& res) {
  json externals = json::object();
  for (const auto& [name, report] : res.externals) externals[name] = report_to_json(report);
  return json{{"kind", "ova"},
              {"anchor", plan.anchor},
              {"mode", to_string(plan.eval_mode)},
              {"n_seeds", plan.n_seeds},
              {"anchor_sweep", detail::sweep_summary_to_json(res.anchor_sweep.summary)},
              {"externals", externals}};
}

inline json logo_summary_json(const ExperimentPlan& plan,
                              const std::vector<LogoGroupResult>& groups) {
  json jgroups = json::array();
  for (const auto& g : groups) {
    jgroups.push_back(
        json{{"leftout", g.group.leftout},
             {"train", g.group.train_names},
             {"internal", detail::sweep_summary_to_json(g.sweep.summary)},
             {"leftout_eval",
              json{{"per_class", detail::class_agg_map_to_json(g.leftout_per_class)},
                   {"overall", detail::class_agg_to_json(g.leftout_overall)},
                   {"per_seed_overall_f1", g.leftout_overall_f1}}}});
  }
  return json{{"kind", "logo"},
              {"anchor", plan.anchor},
              {"mode", to_string(plan.eval_mode)},
              {"n_seeds", plan.n_seeds},
              {"groups", jgroups}};
}

inline json lowres_summary_json(const ExperimentPlan& plan, const LowresResult& res) {
  json jgroups = json::array();
  for (const auto& g : res.groups) {
    json seeds = json::array();
    for (const auto& s : g.seeds)
      seeds.push_back(json{{"seed", s.seed},
                           {"a_f1", s.report_a.overall.f1},
                           {"b_f1", s.report_b.overall.f1}});
    jgroups.push_back(json{{"leftout", g.group.leftout},
                           {"train", g.group.train_names},
                           {"a_reference_seed", g.a_reference_seed},
                           {"a_overall", detail::class_agg_to_json(g.a_overall)},
                           {"b_overall", detail::class_agg_to_json(g.b_overall)},
                           {"a_per_class", detail::class_agg_map_to_json(g.a_per_class)},
                           {"b_per_class", detail::class_agg_map_to_json(g.b_per_class)},
                           {"delta_f1", detail::metric_agg_to_json(g.delta_f1)},
                           {"b_wins", g.b_wins},
                           {"per_seed", seeds}});
  }
  return json{{"kind", "logo_lowres"},
              {"anchor", plan.anchor},
              {"mode", to_string(plan.eval_mode)},
              {"n_seeds", plan.n_seeds},
              {"groups", jgroups}};
}

// ---------------------------------------------------------------------------
// Human-readable summary (rendered from the JSON, never recomputed)

inline std::string render_summary(const json& s) {
  std::string out;
  std::string kind = s["kind"].get<std::string>();
  out += "experiment: " + kind + " (mode " + s["mode"].get<std::string>() + ", " +
         std::to_string(s["n_seeds"].get<int>()) + " seeds)\n";
  if (kind == "single" || kind == "full") {
    out += "dataset: " + s["dataset"].get<std::string>() + "\n";
    out += detail::render_sweep_block(s["sweep"]);
  } else if (kind == "ova") {
    out += "anchor sweep (" + s["anchor"].get<std::string>() + "):\n";
    out += detail::render_sweep_block(s["anchor_sweep"]);
    for (const auto& [name, report] : s["externals"].items()) {
      out += "external " + name + ":\n";
      std::string table = render_report_table(report);
      std::istringstream lines(table);
      std::string l;
      while (std::getline(lines, l)) out += "  " + l + "\n";
    }
  } else if (kind == "logo") {
    for (const auto& g : s["groups"]) {
      out += "group leftout=" + g["leftout"].get<std::string>() + ":\n";
      out += " internal test:\n";
      out += detail::render_sweep_block(g["internal"]);
      out += " left-out evaluation:\n";
      out += detail::render_agg_block(g["leftout_eval"]["per_class"],
                                      g["leftout_eval"]["overall"]);
    }
  } else if (kind == "logo_lowres") {
    char line[200];
    std::snprintf(line, sizeof(line), "%-14s %18s %18s %16s %8s\n", "leftout", "A F1 [%]",
                  "B F1 [%]", "delta [%]", "B wins");
    out += line;
    for (const auto& g : s["groups"]) {
      auto fmt = [](const json& m, char* buf, std::size_t len) {
        std::snprintf(buf, len, "%6.2f +/- %5.2f", 100.0 * m["f1"]["mean"].get<double>(),
                      100.0 * m["f1"]["std"].get<double>());
      };
      char a[32], b[32];
      fmt(g["a_overall"], a, sizeof(a));
      fmt(g["b_overall"], b, sizeof(b));
      std::snprintf(line, sizeof(line), "%-14s %18s %18s %8.2f +/- %5.2f %5d/%d\n",
                    g["leftout"].get<std::string>().c_str(), a, b,
                    100.0 * g["delta_f1"]["mean"].get<double>(),
                    100.0 * g["delta_f1"]["std"].get<double>(), g["b_wins"].get<int>(),
                    static_cast<int>(g["per_seed"].size()));
      out += line;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Entry point: run the plan and lay down the directory. Returns summary.json.

inline json run_experiment_to_dir(const ExperimentPlan& plan,
                                  const std::vector<Dataset>& datasets,
                                  const std::filesystem::path& outdir, int jobs = 1) {
  plan.validate();
  write_run_common(outdir, plan, datasets);
  json summary;

  switch (plan.kind) {
    case PlanKind::single: {
      const Dataset& ds = plan.anchor.empty() ? detail::dataset_by_name(datasets,
                                                                        plan.datasets[0].name)
                                              : detail::dataset_by_name(datasets, plan.anchor);
      SweepResult res = sweep(ds, plan, jobs);
      detail::write_sweep_artifacts(outdir, res);
      summary = single_summary_json(plan, ds.name, res);
      break;
    }
    case PlanKind::full: {
      FullResult res = run_full(datasets, plan, jobs);
      detail::write_sweep_artifacts(outdir, res.sweep);
      const TaggerModel& reference =
          res.sweep.models[static_cast<std::size_t>(res.sweep.summary.reference_seed)];
      write_file((outdir / "reference_model.json").string(), serialize_model(reference));
      summary = single_summary_json(plan, res.concat.name, res.sweep);
      summary["kind"] = "full";
      summary["reference_model"] = "reference_model.json";
      break;
    }
    case PlanKind::ova: {
      OvaResult res = run_ova(datasets, plan, jobs);
      detail::write_sweep_artifacts(outdir / "anchor", res.anchor_sweep);
      const TaggerModel& reference = res.anchor_sweep.models[static_cast<std::size_t>(
          res.anchor_sweep.summary.reference_seed)];
      write_file((outdir / "anchor_model.json").string(), serialize_model(reference));
      for (const auto& [name, report] : res.externals) {
        std::filesystem::path d = outdir / "externals" / name;
        std::filesystem::create_directories(d);
        detail::write_canonical(d / "report.json", report_to_json(report));
      }
      summary = ova_summary_json(plan, res);
      break;
    }
    case PlanKind::logo: {
      std::vector<LogoGroupResult> res = run_logo(datasets, plan, jobs);
      for (const auto& g : res) {
        std::filesystem::path gdir = outdir / "groups" / g.group.leftout;
        detail::write_sweep_artifacts(gdir, g.sweep);
        for (std::size_t s = 0; s < g.leftout_reports.size(); ++s)
          detail::write_canonical(gdir / "seeds" / ("seed_" + std::to_string(s)) /
                                      "leftout_report.json",
                                  report_to_json(g.leftout_reports[s]));
      }
      summary = logo_summary_json(plan, res);
      break;
    }
    case PlanKind::logo_lowres: {
      LowresResult res = run_lowres(datasets, plan, jobs);
      for (std::size_t gi = 0; gi < res.groups.size(); ++gi) {
        const AbComparison& cmp = res.groups[gi];
        std::filesystem::path gdir = outdir / "groups" / cmp.group.leftout;
        detail::write_sweep_artifacts(gdir / "logo", res.logo[gi].sweep);
        for (const auto& run : cmp.seeds) {
          std::filesystem::path sdir = gdir / "seeds" / ("seed_" + std::to_string(run.seed));
          std::filesystem::create_directories(sdir);
          detail::write_canonical(sdir / "partition.json",
                                  json{{"tune", run.tune_ids}, {"test", run.test_ids}});
          detail::write_canonical(sdir / "report_a.json", report_to_json(run.report_a));
          detail::write_canonical(sdir / "report_b.json", report_to_json(run.report_b));
        }
      }
      summary = lowres_summary_json(plan, res);
      break;
    }
  }

  detail::write_canonical(outdir / "summary.json", summary);
  write_file((outdir / "summary.txt").string(), render_summary(summary));
  return summary;
}

// ---------------------------------------------------------------------------
// Plan files. Dataset and prediction paths inside a plan are resolved
// relative to the plan file itself, so plans can ship next to their data (a
// run directory's config.json is itself a valid plan file).

struct LoadedPlan {
  ExperimentPlan plan;
  std::vector<Dataset> datasets;  // in plan order, renamed to the plan names
};

inline LoadedPlan load_plan_file(const std::string& path) {
  json j = detail::parse_json(read_file(path), "plan file");
  LoadedPlan out{plan_from_json(j), {}};
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    // Absolute so the paths survive into config.json, which must itself be a
    // valid plan file no matter where the run directory ends up.
    return std::filesystem::absolute(fp.is_absolute() ? fp : base / fp)
        .lexically_normal()
        .string();
  };
  for (auto& ref : out.plan.datasets) ref.path = resolve(ref.path);
  for (auto& [name, ppath] : out.plan.predictions) ppath = resolve(ppath);
  for (const auto& ref : out.plan.datasets) {
    Dataset ds = load_dataset_file(ref.path, ref.format, ref.name);
    ds.name = ref.name;
    out.datasets.push_back(std::move(ds));
  }
  return out;
}

}  // namespace nerh
