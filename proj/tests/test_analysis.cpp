#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nerharness/nerharness.hpp"
#include "support/brute_force.hpp"
#include "support/gen.hpp"

using Catch::Matchers::WithinAbs;
using nerh::Band;
using nerh::Dataset;
using nerh::EvalMode;
using nerh::TagSequence;

TEST_CASE("mismatch taxonomy on the canonical examples", "[analysis]") {
  CHECK(nerh::classify_mismatch("B-TEST", "B-DIAGNOSI_E_COMORBIDIT\xC3\x80") == 3);
  CHECK(nerh::classify_mismatch("B-TEST", "I-TEST") == 4);
  CHECK(nerh::classify_mismatch("O", "B-TEST") == 1);
  CHECK(nerh::classify_mismatch("B-TEST", "O") == 2);
  CHECK(nerh::classify_mismatch("I-TEST", "B-TEST") == 4);
  CHECK(nerh::classify_mismatch("I-DRUG", "I-TEST") == 3);
}

TEST_CASE("error classification is exhaustive and consistent with the counts",
          "[analysis]") {
  std::mt19937 rng(88);
  for (int trial = 0; trial < 60; ++trial) {
    Dataset ds = gen::random_dataset("tax", 3, rng);
    auto gold = nerh::dataset_tags(ds);
    std::vector<TagSequence> pred;
    brute::TagCorpus g_tags, p_tags;
    for (const auto& g : gold) {
      pred.push_back(TagSequence{g.doc_id, gen::random_valid_tags(g.tags.size(), rng)});
      g_tags.push_back(g.tags);
      p_tags.push_back(pred.back().tags);
    }

    auto records = nerh::classify_errors(gold, pred);
    std::size_t mismatches = 0;
    long long type_count[5] = {0, 0, 0, 0, 0};
    for (std::size_t d = 0; d < g_tags.size(); ++d)
      for (std::size_t i = 0; i < g_tags[d].size(); ++i) {
        int want = brute::mismatch_type(g_tags[d][i], p_tags[d][i]);
        if (want != 0) {
          ++mismatches;
          ++type_count[want];
        }
      }
    REQUIRE(records.size() == mismatches);
    nerh::ErrorBreakdown breakdown = nerh::error_breakdown(records);
    for (int t = 1; t <= 4; ++t) CHECK(breakdown.count[t] == type_count[t]);
    CHECK(breakdown.total ==
          static_cast<long long>(mismatches));
    for (const auto& r : records) {
      CHECK(r.error_type >= 1);
      CHECK(r.error_type <= 4);
      CHECK(r.error_type == brute::mismatch_type(r.gold_tag, r.pred_tag));
    }

    // Mismatches with a non-O prediction are exactly the strict false
    // positives; mismatches with non-O gold are exactly the false negatives.
    nerh::ConfusionCounts strict =
        nerh::count_matches(gold, pred, EvalMode::token_strict);
    long long fp = 0, fn = 0;
    for (const auto& [label, c] : strict.per_class) {
      fp += c.fp;
      fn += c.fn;
    }
    CHECK(fp == type_count[1] + type_count[3] + type_count[4]);
    CHECK(fn == type_count[2] + type_count[3] + type_count[4]);
  }
}

TEST_CASE("breakdown JSON and table", "[analysis]") {
  std::vector<nerh::ErrorRecord> records{
      {"d", 0, "O", "B-DRUG", 1},
      {"d", 1, "B-DRUG", "O", 2},
      {"d", 2, "B-DRUG", "B-DIAG", 3},
      {"d", 3, "B-DRUG", "I-DRUG", 4},
      {"d", 4, "O", "B-DIAG", 1},
  };
  nerh::json j = nerh::breakdown_to_json(nerh::error_breakdown(records), "none");
  CHECK(j["total"] == 5);
  CHECK(j["types"]["type1"]["name"] == "spurious");
  CHECK(j["types"]["type1"]["count"] == 2);
  CHECK(j["types"]["type2"]["name"] == "missed");
  CHECK(j["types"]["type3"]["name"] == "wrong_class");
  CHECK(j["types"]["type4"]["name"] == "wrong_boundary");
  CHECK_THAT(j["types"]["type1"]["percentage"].get<double>(), WithinAbs(40.0, 1e-9));
  CHECK(j["repair"] == "none");
  std::string table = nerh::render_breakdown_table(j);
  CHECK(table.find("spurious") != std::string::npos);
  CHECK(table.find("TOTAL") != std::string::npos);
}

TEST_CASE("agreement bands", "[analysis]") {
  CHECK(nerh::band(0.0) == Band::poor);
  CHECK(nerh::band(0.19999) == Band::poor);
  CHECK(nerh::band(0.2) == Band::fair);
  CHECK(nerh::band(0.39999) == Band::fair);
  CHECK(nerh::band(0.4) == Band::moderate);
  CHECK(nerh::band(0.6) == Band::good);
  CHECK(nerh::band(0.79999) == Band::good);
  CHECK(nerh::band(0.8) == Band::excellent);
  CHECK(nerh::band(1.0) == Band::excellent);
  CHECK_THROWS_AS(nerh::band(-0.01), nerh::DomainError);
  CHECK_THROWS_AS(nerh::band(1.01), nerh::DomainError);

  // Monotone in the score.
  std::mt19937 rng(3);
  for (int i = 0; i < 100; ++i) {
    double a = static_cast<double>(rng() % 1001) / 1000.0;
    double b = static_cast<double>(rng() % 1001) / 1000.0;
    if (a > b) std::swap(a, b);
    CHECK(static_cast<int>(nerh::band(a)) <= static_cast<int>(nerh::band(b)));
  }

  CHECK(std::string(nerh::to_string(Band::moderate)) == "moderate");
}

static Dataset annotator_copy_with_tags(const Dataset& base, std::mt19937& rng) {
  Dataset out;
  out.name = base.name;
  for (const auto& d : base.documents) {
    nerh::Document copy = nerh::make_document(d.id, d.text);
    TagSequence seq{d.id, gen::random_valid_tags(copy.tokens.size(), rng)};
    copy.entities = nerh::iob_to_spans(seq, copy);
    out.documents.push_back(std::move(copy));
  }
  return out;
}

TEST_CASE("IAA trivial and derived cases", "[analysis]") {
  std::mt19937 rng(17);
  Dataset ds = gen::random_dataset("iaa", 5, rng);

  SECTION("identical annotations: 1.0, excellent, any mode") {
    for (EvalMode mode : {EvalMode::token_strict, EvalMode::entity_exact}) {
      nerh::IaaReport rep = nerh::iaa(ds, ds, mode);
      CHECK(rep.overall == 1.0);
      CHECK(rep.overall_band == Band::excellent);
      CHECK(rep.mode == mode);
    }
  }

  SECTION("fully disjoint annotations: 0.0, poor") {
    Dataset a;
    a.name = "a";
    nerh::Document d = nerh::make_document("x", "aaa bbb ccc ddd");
    d.entities.push_back({0, 3, "DIAG"});
    a.documents.push_back(d);
    Dataset b;
    b.name = "b";
    nerh::Document e = nerh::make_document("x", "aaa bbb ccc ddd");
    e.entities.push_back({8, 11, "DIAG"});
    b.documents.push_back(e);
    nerh::IaaReport rep = nerh::iaa(a, b, EvalMode::entity_exact);
    CHECK(rep.overall == 0.0);
    CHECK(rep.overall_band == Band::poor);
  }

  SECTION("annotator B finds one of two gold entities: 2/3, good") {
    Dataset a;
    a.name = "a";
    nerh::Document d = nerh::make_document("x", "aaa bbb ccc ddd");
    d.entities.push_back({0, 3, "DIAG"});
    d.entities.push_back({8, 11, "DIAG"});
    a.documents.push_back(d);
    Dataset b;
    b.name = "b";
    nerh::Document e = nerh::make_document("x", "aaa bbb ccc ddd");
    e.entities.push_back({0, 3, "DIAG"});
    b.documents.push_back(e);
    nerh::IaaReport rep = nerh::iaa(a, b, EvalMode::entity_exact);
    CHECK_THAT(rep.overall, WithinAbs(2.0 / 3.0, 1e-9));
    CHECK(rep.overall_band == Band::good);
  }

  SECTION("default mode is token_strict") {
    nerh::IaaReport rep = nerh::iaa(ds, ds);
    CHECK(rep.mode == EvalMode::token_strict);
  }

  SECTION("overall F1 is symmetric under annotator exchange") {
    for (int trial = 0; trial < 30; ++trial) {
      Dataset base = gen::random_dataset("sym", 4, rng);
      Dataset a = annotator_copy_with_tags(base, rng);
      Dataset b = annotator_copy_with_tags(base, rng);
      for (EvalMode mode : {EvalMode::token_strict, EvalMode::entity_exact}) {
        nerh::IaaReport ab = nerh::iaa(a, b, mode);
        nerh::IaaReport ba = nerh::iaa(b, a, mode);
        CHECK_THAT(ab.overall, WithinAbs(ba.overall, 1e-12));
      }
    }
  }

  SECTION("pairing errors") {
    Dataset a;
    a.name = "a";
    a.documents.push_back(nerh::make_document("x", "aaa"));
    Dataset b;
    b.name = "b";
    b.documents.push_back(nerh::make_document("y", "aaa"));
    CHECK_THROWS_AS(nerh::iaa(a, b), nerh::PairingError);
    Dataset c;
    c.name = "c";
    c.documents.push_back(nerh::make_document("x", "different text"));
    CHECK_THROWS_AS(nerh::iaa(a, c), nerh::PairingError);
    Dataset d = a;
    d.documents.push_back(nerh::make_document("extra", "zzz"));
    CHECK_THROWS_AS(nerh::iaa(a, d), nerh::PairingError);
  }
}

TEST_CASE("IAA report JSON and table carry bands", "[analysis]") {
  Dataset a;
  a.name = "a";
  nerh::Document d = nerh::make_document("x", "aaa bbb ccc ddd");
  d.entities.push_back({0, 3, "DIAG"});
  d.entities.push_back({8, 11, "DIAG"});
  a.documents.push_back(d);
  Dataset b;
  b.name = "b";
  nerh::Document e = nerh::make_document("x", "aaa bbb ccc ddd");
  e.entities.push_back({0, 3, "DIAG"});
  b.documents.push_back(e);
  nerh::json j = nerh::iaa_to_json(nerh::iaa(a, b, EvalMode::entity_exact));
  CHECK(j["overall"]["band"] == "good");
  CHECK(j["mode"] == "entity_exact");
  CHECK(j["classes"]["DIAG"].contains("band"));
  std::string table = nerh::render_iaa_table(j);
  CHECK(table.find("good") != std::string::npos);
}

TEST_CASE("regularized incomplete beta matches frozen oracle values",
          "[analysis]") {
  struct Case {
    double x, a, b, want;
  };
  const Case cases[] = {
      {0.5, 0.5, 0.5, 0.5000000000000001},
      {0.25, 2.0, 3.0, 0.26171875},
      {0.9, 5.0, 1.5, 0.7761721343162159},
      {0.123, 10.0, 0.5, 1.4819038361059038e-10},
      {0.7272727272727273, 2.0, 0.5, 0.28786413472669053},
  };
  for (const Case& c : cases)
    CHECK_THAT(nerh::reg_incomplete_beta(c.x, c.a, c.b), WithinAbs(c.want, 1e-12));
  CHECK(nerh::reg_incomplete_beta(0.0, 2.0, 3.0) == 0.0);
  CHECK(nerh::reg_incomplete_beta(1.0, 2.0, 3.0) == 1.0);
  CHECK_THROWS_AS(nerh::reg_incomplete_beta(-0.1, 1.0, 1.0), nerh::DomainError);
  CHECK_THROWS_AS(nerh::reg_incomplete_beta(0.5, 0.0, 1.0), nerh::DomainError);
}

TEST_CASE("F survival function matches frozen oracle values", "[analysis]") {
  struct Case {
    double f, d1, d2, want;
  };
  const Case cases[] = {
      {1.5, 1, 4, 0.2878641347266907},
      {0.5, 2, 9, 0.6224311118509421},
      {3.75, 3, 16, 0.032551597407307564},
      {10.0, 1, 8, 0.013349063426018723},
      {0.05, 4, 35, 0.9950902403922007},
      {2.0, 2, 27, 0.15489162975053442},
      {7.3, 5, 54, 2.7564740538672524e-05},
      {1.0, 3, 6, 0.4547247457653535},
      {25.0, 2, 10, 0.00012860082304526745},
      {0.9, 9, 90, 0.5288652358536701},
  };
  for (const Case& c : cases)
    CHECK_THAT(nerh::f_survival(c.f, c.d1, c.d2), WithinAbs(c.want, 1e-8));
  CHECK(nerh::f_survival(0.0, 2, 5) == 1.0);
  CHECK(nerh::f_survival(-3.0, 2, 5) == 1.0);
}

TEST_CASE("one-way ANOVA on the textbook case", "[analysis]") {
  nerh::AnovaResult r = nerh::anova_oneway({{1, 2, 3}, {2, 3, 4}});
  CHECK(r.f == 1.5);  // exact in IEEE doubles
  CHECK_THAT(r.p, WithinAbs(0.2878641347266907, 1e-9));
  CHECK(r.group_count == 2);
  CHECK(r.group_sizes == std::vector<std::size_t>{3, 3});
}

TEST_CASE("ANOVA degenerate and invariance properties", "[analysis]") {
  nerh::AnovaResult same = nerh::anova_oneway({{2, 2}, {2, 2}});
  CHECK(same.f == 0.0);
  CHECK(same.p == 1.0);

  // All variation between groups, none within.
  nerh::AnovaResult sep = nerh::anova_oneway({{1, 1}, {2, 2}});
  CHECK(std::isinf(sep.f));
  CHECK(sep.p == 0.0);

  std::mt19937 rng(5150);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::vector<double>> groups(2 + rng() % 3);
    for (auto& g : groups) {
      g.resize(2 + rng() % 5);
      for (double& v : g) v = static_cast<double>(rng() % 1000) / 100.0;
    }
    nerh::AnovaResult base = nerh::anova_oneway(groups);
    auto shifted = groups;
    for (auto& g : shifted)
      for (double& v : g) v += 123.25;
    auto scaled = groups;
    for (auto& g : scaled)
      for (double& v : g) v *= 7.5;
    double tol = 1e-9 * std::max(1.0, std::abs(base.f));
    if (std::isfinite(base.f)) {
      CHECK_THAT(nerh::anova_oneway(shifted).f, WithinAbs(base.f, tol));
      CHECK_THAT(nerh::anova_oneway(scaled).f, WithinAbs(base.f, tol));
    }
  }

  CHECK_THROWS_AS(nerh::anova_oneway({{1, 2}}), nerh::DomainError);
  CHECK_THROWS_AS(nerh::anova_oneway({{1, 2}, {3}}), nerh::DomainError);
  CHECK_THROWS_AS(nerh::anova_oneway({{1, 2}, {3, std::nan("")}}),
                  nerh::DomainError);
}

TEST_CASE("descriptive statistics", "[analysis]") {
  CHECK(nerh::mean({2.0, 4.0}) == 3.0);
  CHECK_THROWS_AS(nerh::mean({}), nerh::DomainError);
  CHECK(nerh::sample_std({5.0}) == 0.0);
  CHECK_THAT(nerh::sample_std({1.0, 2.0, 3.0}), WithinAbs(1.0, 1e-12));
}

TEST_CASE("carbon estimate is the plain product", "[analysis]") {
  nerh::CarbonEstimate est = nerh::carbon_estimate(30.0, 0.4, 0.45);
  CHECK(est.total_kg_co2eq == 5.4);  // exact in IEEE doubles
  CHECK(est.gpu_hours == 30.0);
  CHECK(est.avg_power_kw == 0.4);
  CHECK(est.grid_intensity_kg_per_kwh == 0.45);
  CHECK(nerh::carbon_estimate(0.0, 1.0, 1.0).total_kg_co2eq == 0.0);
  CHECK_THROWS_AS(nerh::carbon_estimate(-1.0, 0.4, 0.45), nerh::DomainError);
  CHECK_THROWS_AS(nerh::carbon_estimate(1.0, -0.4, 0.45), nerh::DomainError);
  CHECK_THROWS_AS(nerh::carbon_estimate(1.0, 0.4, -0.45), nerh::DomainError);
}
