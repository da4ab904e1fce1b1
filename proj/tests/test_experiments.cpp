#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>

#include "nerharness/nerharness.hpp"
#include "support/gen.hpp"

using nerh::Dataset;
using nerh::DocSplit;
using nerh::ExperimentPlan;
using nerh::PlanKind;
using nerh::SplitSpec;

static std::string fixture(const std::string& rel) {
  return std::string(NERH_DATA_DIR) + "/" + rel;
}

static std::set<std::string> as_set(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

TEST_CASE("round half up", "[experiments]") {
  CHECK(nerh::round_half_up(0.0) == 0);
  CHECK(nerh::round_half_up(0.49) == 0);
  CHECK(nerh::round_half_up(0.5) == 1);
  CHECK(nerh::round_half_up(1.5) == 2);
  CHECK(nerh::round_half_up(2.5) == 3);
  CHECK(nerh::round_half_up(2.4) == 2);
  CHECK(nerh::round_half_up(2.6) == 3);
}

TEST_CASE("document splits", "[experiments]") {
  std::mt19937 rng(3);
  SplitSpec spec;  // 0.10 test, then 0.20 val

  SECTION("sizes for one hundred documents") {
    Dataset ds = gen::random_dataset("h", 100, rng, 8);
    DocSplit s = nerh::split_ids(ds, spec, 0);
    CHECK(s.test.size() == 10);
    CHECK(s.val.size() == 18);
    CHECK(s.train.size() == 72);
  }

  SECTION("sizes for ten documents") {
    Dataset ds = gen::random_dataset("t", 10, rng, 8);
    DocSplit s = nerh::split_ids(ds, spec, 1);
    CHECK(s.test.size() == 1);
    CHECK(s.val.size() == 2);
    CHECK(s.train.size() == 7);
  }

  SECTION("the three blocks partition the id set") {
    Dataset ds = gen::random_dataset("p", 37, rng, 8);
    DocSplit s = nerh::split_ids(ds, spec, 5);
    std::set<std::string> all;
    for (const auto& d : ds.documents) all.insert(d.id);
    std::set<std::string> covered = as_set(s.train);
    for (const auto& id : s.val) CHECK(covered.insert(id).second);
    for (const auto& id : s.test) CHECK(covered.insert(id).second);
    CHECK(covered == all);
  }

  SECTION("same seed gives the same split, regardless of document order") {
    Dataset ds = gen::random_dataset("d", 25, rng, 8);
    Dataset reversed = ds;
    std::reverse(reversed.documents.begin(), reversed.documents.end());
    DocSplit a = nerh::split_ids(ds, spec, 9);
    DocSplit b = nerh::split_ids(reversed, spec, 9);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    CHECK(a.test == b.test);
    DocSplit c = nerh::split_ids(ds, spec, 10);
    CHECK(as_set(a.test) != as_set(c.test));  // different seed reshuffles
  }

  SECTION("input validation") {
    Dataset tiny = gen::random_dataset("tiny", 2, rng, 8);
    CHECK_THROWS_AS(nerh::split_ids(tiny, spec, 0), nerh::DomainError);
    Dataset dup = gen::random_dataset("dup", 5, rng, 8);
    dup.documents[3].id = dup.documents[1].id;
    CHECK_THROWS_AS(nerh::split_ids(dup, spec, 0), nerh::DomainError);
    Dataset ok = gen::random_dataset("ok", 5, rng, 8);
    CHECK_THROWS_AS(nerh::split_ids(ok, SplitSpec{1.0, 0.2}, 0), nerh::DomainError);
    CHECK_THROWS_AS(nerh::split_ids(ok, SplitSpec{0.1, -0.2}, 0), nerh::DomainError);
  }
}

TEST_CASE("subset and concatenation", "[experiments]") {
  std::mt19937 rng(4);
  Dataset a = gen::random_dataset("alpha", 4, rng, 8);
  Dataset b = gen::random_dataset("beta", 3, rng, 8);

  SECTION("subset keeps the requested order and fails on unknown ids") {
    Dataset sub = nerh::subset(a, {a.documents[2].id, a.documents[0].id}, "s");
    REQUIRE(sub.documents.size() == 2);
    CHECK(sub.name == "s");
    CHECK(sub.documents[0].id == a.documents[2].id);
    CHECK(sub.documents[1].id == a.documents[0].id);
    CHECK_THROWS_AS(nerh::subset(a, {"nope"}, "s"), nerh::DomainError);
  }

  SECTION("concatenation namespaces ids and unions labels") {
    Dataset cat = nerh::concat_datasets({&a, &b}, "joined");
    CHECK(cat.name == "joined");
    REQUIRE(cat.documents.size() == 7);
    CHECK(cat.documents[0].id == "alpha/" + a.documents[0].id);
    CHECK(cat.documents[4].id == "beta/" + b.documents[0].id);
    std::set<std::string> want;
    for (const auto& l : a.label_set()) want.insert(l);
    for (const auto& l : b.label_set()) want.insert(l);
    CHECK(as_set(cat.label_set()) == want);
  }
}

TEST_CASE("experiment plans round-trip through JSON", "[experiments]") {
  ExperimentPlan p;
  p.kind = PlanKind::logo_lowres;
  p.anchor = "a";
  p.datasets = {{"a", "a.json", nerh::DatasetFormat::canonical},
                {"b", "b.conll", nerh::DatasetFormat::conll}};
  p.n_seeds = 4;
  p.eval_mode = nerh::EvalMode::entity_exact;
  p.split = SplitSpec{0.15, 0.25};
  p.tagger.epochs = 7;
  p.lowres_fraction = 0.2;
  p.predictions["b"] = "preds.jsonl";
  p.validate();

  nerh::json j = nerh::plan_to_json(p);
  ExperimentPlan back = nerh::plan_from_json(j);
  CHECK(nerh::plan_to_json(back) == j);
  CHECK(back.kind == PlanKind::logo_lowres);
  CHECK(back.anchor == "a");
  CHECK(back.datasets[1].format == nerh::DatasetFormat::conll);
  CHECK(back.n_seeds == 4);
  CHECK(back.eval_mode == nerh::EvalMode::entity_exact);
  CHECK(back.tagger.epochs == 7);
  CHECK(back.predictions.at("b") == "preds.jsonl");

  SECTION("a wrapping config object is accepted") {
    nerh::json wrapped{{"plan", j}, {"jobs", 2}};
    CHECK(nerh::plan_to_json(nerh::plan_from_json(wrapped)) == j);
  }

  SECTION("'lowres' is an accepted spelling of the kind") {
    nerh::json alias = j;
    alias["kind"] = "lowres";
    CHECK(nerh::plan_from_json(alias).kind == PlanKind::logo_lowres);
  }

  SECTION("defaults") {
    nerh::json minimal{{"kind", "single"},
                       {"datasets", nerh::json::array({{{"name", "x"}, {"path", "x.json"}}})}};
    ExperimentPlan d = nerh::plan_from_json(minimal);
    CHECK(d.n_seeds == 10);
    CHECK(d.eval_mode == nerh::EvalMode::token_strict);
    CHECK(d.split.test_fraction == 0.10);
    CHECK(d.split.val_fraction_of_rest == 0.20);
    CHECK(d.tagger.epochs == 10);
    CHECK(d.lowres_fraction == 0.10);
  }

  SECTION("validation failures") {
    ExperimentPlan bad = p;
    bad.datasets.clear();
    CHECK_THROWS_AS(bad.validate(), nerh::PlanError);
    bad = p;
    bad.datasets.push_back({"a", "again.json", nerh::DatasetFormat::canonical});
    CHECK_THROWS_AS(bad.validate(), nerh::PlanError);
    bad = p;
    bad.n_seeds = 0;
    CHECK_THROWS_AS(bad.validate(), nerh::PlanError);
    bad = p;
    bad.anchor = "missing";
    CHECK_THROWS_AS(bad.validate(), nerh::PlanError);
    bad = p;
    bad.anchor.clear();
    CHECK_THROWS_AS(bad.validate(), nerh::PlanError);  // lowres needs an anchor
    bad = p;
    bad.predictions["ghost"] = "x.jsonl";
    CHECK_THROWS_AS(bad.validate(), nerh::PlanError);
    bad = p;
    bad.lowres_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), nerh::PlanError);
    CHECK_THROWS_AS(nerh::plan_kind_from_string("sideways"), nerh::PlanError);
  }
}

TEST_CASE("reference run selection", "[experiments]") {
  CHECK(nerh::select_reference_run({0.2, 0.4, 0.6}) == 1);
  CHECK(nerh::select_reference_run({0.9}) == 0);
  // Equidistant candidates: the lowest seed wins.  0.25 and 0.75 are chosen
  // because their mean (0.5) and both distances (0.25) are exact in binary
  // floating point, so the distances genuinely tie.
  CHECK(nerh::select_reference_run({0.25, 0.75}) == 0);
  CHECK(nerh::select_reference_run({0.5, 0.3, 0.4}) == 2);
  CHECK_THROWS_AS(nerh::select_reference_run({}), nerh::DomainError);
}

TEST_CASE("parallel execution matches serial execution", "[experiments]") {
  std::vector<std::size_t> serial(64, 0), threaded(64, 0);
  nerh::parallel_for(64, 1, [&](std::size_t i) { serial[i] = i * i; });
  nerh::parallel_for(64, 4, [&](std::size_t i) { threaded[i] = i * i; });
  CHECK(serial == threaded);

  CHECK_THROWS_AS(nerh::parallel_for(
                      8, 4,
                      [](std::size_t i) {
                        if (i == 3) throw nerh::DomainError("boom");
                      }),
                  nerh::DomainError);
}

TEST_CASE("leave-one-group-out group construction", "[experiments]") {
  auto groups = nerh::build_logo_groups({"a", "b", "c", "d"}, "a");
  REQUIRE(groups.size() == 3);
  CHECK(groups[0].leftout == "b");
  CHECK(groups[1].leftout == "c");
  CHECK(groups[2].leftout == "d");
  for (const auto& g : groups) {
    CHECK(g.train_names.size() == 3);
    CHECK(std::count(g.train_names.begin(), g.train_names.end(), "a") == 1);
    CHECK(std::count(g.train_names.begin(), g.train_names.end(), g.leftout) == 0);
  }
  auto pair = nerh::build_logo_groups({"a", "b"}, "a");
  REQUIRE(pair.size() == 1);
  CHECK(pair[0].leftout == "b");
  CHECK(pair[0].train_names == std::vector<std::string>{"a"});
  CHECK_THROWS_AS(nerh::build_logo_groups({"a"}, "a"), nerh::PlanError);
  CHECK_THROWS_AS(nerh::build_logo_groups({"a", "b"}, "z"), nerh::PlanError);
  CHECK_THROWS_AS(nerh::build_logo_groups({"a", "a"}, "a"), nerh::PlanError);
}

static ExperimentPlan tiny_plan(PlanKind kind, int n_seeds) {
  ExperimentPlan p;
  p.kind = kind;
  p.n_seeds = n_seeds;
  p.eval_mode = nerh::EvalMode::token_strict;
  p.tagger.epochs = 2;
  p.lowres_fraction = 0.25;
  return p;
}

TEST_CASE("seed sweeps are reproducible and thread-count independent",
          "[experiments]") {
  std::mt19937 rng(6);
  Dataset ds = gen::random_dataset("sw", 12, rng, 10);
  ExperimentPlan plan = tiny_plan(PlanKind::single, 3);
  plan.datasets = {{"sw", "", nerh::DatasetFormat::canonical}};

  nerh::SweepResult one = nerh::sweep(ds, plan, 1);
  REQUIRE(one.runs.size() == 3);
  REQUIRE(one.models.size() == 3);
  CHECK(one.summary.overall_f1.size() == 3);
  CHECK(one.summary.reference_seed >= 0);
  CHECK(one.summary.reference_seed < 3);
  for (const auto& run : one.runs) {
    CHECK(run.split.test.size() == 1);
    CHECK(run.split.val.size() == 2);
    CHECK(run.split.train.size() == 9);
  }

  nerh::SweepResult four = nerh::sweep(ds, plan, 4);
  CHECK(four.summary.overall_f1 == one.summary.overall_f1);
  CHECK(four.summary.reference_seed == one.summary.reference_seed);
  for (std::size_t s = 0; s < 3; ++s)
    CHECK(nerh::serialize_model(four.models[s]) == nerh::serialize_model(one.models[s]));
}

TEST_CASE("leave-one-group-out keeps the left-out site untouched",
          "[experiments]") {
  std::mt19937 rng(8);
  std::vector<Dataset> sites = {gen::random_dataset("s1", 6, rng, 10),
                                gen::random_dataset("s2", 5, rng, 10),
                                gen::random_dataset("s3", 5, rng, 10)};
  ExperimentPlan plan = tiny_plan(PlanKind::logo, 2);
  plan.anchor = "s1";
  plan.datasets = {{"s1", "", nerh::DatasetFormat::canonical},
                   {"s2", "", nerh::DatasetFormat::canonical},
                   {"s3", "", nerh::DatasetFormat::canonical}};

  auto results = nerh::run_logo(sites, plan, 2);
  REQUIRE(results.size() == 2);
  CHECK(results[0].group.leftout == "s2");
  CHECK(results[1].group.leftout == "s3");
  for (const auto& r : results) {
    // Every training document is namespaced and none comes from the left-out
    // site.
    for (const auto& d : r.train_concat.documents) {
      CHECK(d.id.find('/') != std::string::npos);
      CHECK(d.id.rfind(r.group.leftout + "/", 0) != 0);
    }
    CHECK(std::count_if(
              r.train_concat.documents.begin(), r.train_concat.documents.end(),
              [](const nerh::Document& d) { return d.id.rfind("s1/", 0) == 0; }) == 6);
    REQUIRE(r.leftout_reports.size() == 2);
    CHECK(r.leftout_overall_f1.size() == 2);
  }
}

TEST_CASE("low-resource continuation compares A and B on the same test slice",
          "[experiments]") {
  std::mt19937 rng(9);
  std::vector<Dataset> sites = {gen::random_dataset("s1", 6, rng, 10),
                                gen::random_dataset("s2", 8, rng, 10)};
  ExperimentPlan plan = tiny_plan(PlanKind::logo_lowres, 2);
  plan.anchor = "s1";
  plan.datasets = {{"s1", "", nerh::DatasetFormat::canonical},
                   {"s2", "", nerh::DatasetFormat::canonical}};

  nerh::LowresResult res = nerh::run_lowres(sites, plan, 1);
  REQUIRE(res.groups.size() == 1);
  const nerh::AbComparison& cmp = res.groups[0];
  CHECK(cmp.group.leftout == "s2");
  REQUIRE(cmp.seeds.size() == 2);
  std::set<std::string> s2_ids;
  for (const auto& d : sites[1].documents) s2_ids.insert(d.id);
  for (const auto& run : cmp.seeds) {
    CHECK(run.tune_ids.size() == 2);  // round_half_up(0.25 * 8)
    CHECK(run.test_ids.size() == 6);
    std::set<std::string> both = as_set(run.tune_ids);
    for (const auto& id : run.test_ids) CHECK(both.insert(id).second);
    CHECK(both == s2_ids);
  }
  CHECK(cmp.b_wins >= 0);
  CHECK(cmp.b_wins <= 2);

  // A left-out set too small to carve a tune slice from is rejected.
  std::vector<Dataset> small = {sites[0], gen::random_dataset("s2", 3, rng, 10)};
  ExperimentPlan bad = plan;
  bad.lowres_fraction = 0.01;
  CHECK_THROWS_AS(nerh::run_lowres(small, bad, 1), nerh::PlanError);
}

TEST_CASE("plan files resolve dataset paths relative to their own directory",
          "[experiments]") {
  nerh::LoadedPlan lp = nerh::load_plan_file(fixture("plans/plan_single.json"));
  CHECK(lp.plan.kind == PlanKind::single);
  REQUIRE(lp.datasets.size() == 1);
  CHECK(lp.datasets[0].name == "site_a");
  CHECK(lp.datasets[0].documents.size() == 60);
  CHECK(lp.plan.n_seeds == 10);
  CHECK(lp.plan.tagger.epochs == 10);

  nerh::LoadedPlan logo = nerh::load_plan_file(fixture("plans/plan_logo.json"));
  CHECK(logo.plan.kind == PlanKind::logo);
  CHECK(logo.plan.anchor == "site_a");
  CHECK(logo.datasets.size() == 4);
}
