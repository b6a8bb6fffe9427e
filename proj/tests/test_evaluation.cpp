#include <doctest.h>

#include <sstream>

#include "mortem/error.hpp"
#include "mortem/evaluation.hpp"
#include "mortem/synth.hpp"
#include "support.hpp"

using namespace mortem;

namespace {

Corpus small_corpus(std::size_t profiles, std::uint64_t seed) {
  auto config = desk200_config();
  config.n_profiles = profiles;
  config.seed = seed;
  return generate(config);
}

Document doc(const std::string& id, const std::string& text, std::optional<Label> label) {
  return {UnitKind::comment, id, text, label};
}

TrainedModel baseline_model() {
  TrainedModel m;
  m.kind = ModelKind::baseline;
  m.unit = UnitKind::profile;
  return m;
}

}  // namespace

TEST_CASE("confusion and metrics against hand counts") {
  // tp 3, fp 1, fn 2, tn 4
  std::vector<Label> truth;
  std::vector<Label> pred;
  const auto add = [&](Label t, Label p, int n) {
    for (int i = 0; i < n; ++i) {
      truth.push_back(t);
      pred.push_back(p);
    }
  };
  add(Label::post, Label::post, 3);
  add(Label::pre, Label::post, 1);
  add(Label::post, Label::pre, 2);
  add(Label::pre, Label::pre, 4);
  const auto m = confusion_and_metrics(truth, pred);
  CHECK(m.tp == 3);
  CHECK(m.fp == 1);
  CHECK(m.fn == 2);
  CHECK(m.tn == 4);
  CHECK(m.precision == doctest::Approx(0.75));
  CHECK(m.recall == doctest::Approx(0.6));
  CHECK(m.f1 == doctest::Approx(0.66667).epsilon(1e-5));
  CHECK(m.accuracy == doctest::Approx(0.7));

  const std::vector<Label> all_pre(4, Label::pre);
  const auto none = confusion_and_metrics(all_pre, all_pre);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(none.accuracy == 1.0);
  CHECK_THROWS_AS(confusion_and_metrics(truth, all_pre), Error);
  CHECK_THROWS_AS(confusion_and_metrics(std::vector<Label>{}, std::vector<Label>{}), Error);
}

TEST_CASE("baseline cross-validation equals direct per-fold evaluation") {
  const auto corpus = small_corpus(40, 3);
  const auto docs = make_documents(corpus, UnitKind::comment);
  PipelineConfig config;
  config.unit = UnitKind::comment;
  config.model = ModelKind::baseline;
  const auto report = cross_validate(config, docs, 5, 11);
  REQUIRE(report.folds.size() == 5);
  std::vector<Label> labels;
  for (const auto& d : docs) labels.push_back(*d.label);
  const auto folds = stratified_kfold(labels, 5, 11);
  double mean_f1 = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<Label> truth;
    std::vector<Label> pred;
    for (const auto i : folds[f]) {
      truth.push_back(labels[i]);
      const auto& tokens = tokenize(docs[i].text).tokens;
      pred.push_back(std::find(tokens.begin(), tokens.end(), "rip") != tokens.end() ? Label::post : Label::pre);
    }
    const auto direct = confusion_and_metrics(truth, pred);
    CHECK(report.folds[f].metrics.tp == direct.tp);
    CHECK(report.folds[f].metrics.fp == direct.fp);
    CHECK(report.folds[f].metrics.fn == direct.fn);
    CHECK(report.folds[f].metrics.tn == direct.tn);
    CHECK(report.folds[f].test_size == folds[f].size());
    mean_f1 += direct.f1 / 5.0;
  }
  CHECK(report.mean.f1 == doctest::Approx(mean_f1).epsilon(1e-12));
}

TEST_CASE("cross-validation is deterministic and fits every fold on its training part only") {
  const auto corpus = small_corpus(30, 5);
  const auto docs = make_documents(corpus, UnitKind::profile);
  PipelineConfig config;
  config.model = ModelKind::lr;
  const auto a = cross_validate(config, docs, 3, 21);
  const auto b = cross_validate(config, docs, 3, 21);
  CHECK(to_json(a).dump() == to_json(b).dump());

  std::vector<Label> labels;
  std::vector<std::string> all_texts;
  for (const auto& d : docs) {
    labels.push_back(*d.label);
    all_texts.push_back(d.text);
  }
  const auto full = build_vocabulary(all_texts, config.text).fingerprint();
  const auto folds = stratified_kfold(labels, 3, 21);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::string> train;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (std::find(folds[f].begin(), folds[f].end(), i) == folds[f].end()) train.push_back(docs[i].text);
    }
    const auto expected = build_vocabulary(train, config.text).fingerprint();
    CHECK(a.folds[f].vocabulary_fingerprint == expected);
    CHECK(a.folds[f].vocabulary_fingerprint != full);
    CHECK(a.folds[f].train_size == train.size());
  }

  const auto report_json = to_json(a);
  CHECK(to_json(cv_report_from_json(report_json)).dump() == report_json.dump());
}

TEST_CASE("cross-validation writes misclassified rows with their fold") {
  const auto corpus = small_corpus(20, 9);
  const auto docs = make_documents(corpus, UnitKind::comment);
  PipelineConfig config;
  config.unit = UnitKind::comment;
  config.model = ModelKind::baseline;
  std::ostringstream out;
  const auto report = cross_validate(config, docs, 4, 1, CltExtractor::standard(), &out);
  std::size_t errors = 0;
  for (const auto& f : report.folds) errors += f.metrics.fp + f.metrics.fn;
  std::istringstream in(out.str());
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto row = nlohmann::json::parse(line);
    CHECK(row.contains("fold"));
    CHECK(row["true"] != row["predicted"]);
    ++rows;
  }
  CHECK(rows == errors);
}

TEST_CASE("grid search keeps the first of tied configurations") {
  const auto corpus = small_corpus(20, 2);
  const auto docs = make_documents(corpus, UnitKind::profile);
  PipelineConfig base;
  base.model = ModelKind::baseline;
  const std::vector<PipelineConfig> grid = {base, base};
  const auto result = grid_search(grid, docs, 3, 4);
  REQUIRE(result.reports.size() == 2);
  CHECK(result.reports[0].mean.f1 == result.reports[1].mean.f1);
  CHECK(result.best == 0);
  CHECK_THROWS_AS(grid_search(std::span<const PipelineConfig>{}, docs, 3, 4), Error);
}

TEST_CASE("default grid sizes and descriptions") {
  PipelineConfig base;
  base.model = ModelKind::gbt;
  CHECK(default_grid(base).size() == 4);
  base.model = ModelKind::lr;
  const std::vector<std::size_t> ks = {10, 100};
  const auto grid = default_grid(base, ks);
  CHECK(grid.size() == 8);
  for (const auto& c : grid) CHECK(c.select_k.has_value());
  base.model = ModelKind::baseline;
  CHECK(default_grid(base).size() == 1);
  CHECK(default_grid(base)[0].describe() == "profile/baseline");
  const auto round = pipeline_from_json(to_json(grid[3]));
  CHECK(round.describe() == grid[3].describe());
}

TEST_CASE("fit_pipeline rejects an empty training set and a single class") {
  PipelineConfig config;
  CHECK_THROWS_AS(fit_pipeline(config, std::vector<Document>{}), Error);
  const std::vector<Document> one_class = {doc("a", "miss you", Label::post), doc("b", "miss him", Label::post)};
  CHECK_THROWS_AS(fit_pipeline(config, one_class), Error);
}

TEST_CASE("early detection by hand with the baseline rule") {
  Profile a;
  a.profile_id = "a";
  a.death_time = 100;
  a.comments = {testing::comment("a", "a1", 50, "hello there"), testing::comment("a", "a2", 100, "rip friend")};
  Profile b;
  b.profile_id = "b";
  const std::int64_t day = 86400;
  b.death_time = day;
  b.comments = {testing::comment("b", "b1", 10, "hey"), testing::comment("b", "b2", day, "miss you"),
                testing::comment("b", "b3", 2 * day, "so sad"), testing::comment("b", "b4", 3 * day, "R.I.P.")};
  Profile none;
  none.profile_id = "c";
  none.death_time = 1000;
  none.comments = {testing::comment("c", "c1", 10, "hey")};
  Profile alive;
  alive.profile_id = "d";
  alive.comments = {testing::comment("d", "d1", 10, "rip")};
  const Corpus corpus({a, b, none, alive});

  const auto curve = early_detection(baseline_model(), corpus.profiles());
  CHECK(curve.test_profiles == 2);
  CHECK(curve.detected == 2);
  CHECK(curve.excluded == std::vector<std::string>{"c"});
  CHECK(curve.flagged_before_death == 0);
  CHECK(curve.fraction_at_count(1) == doctest::Approx(0.5));
  CHECK(curve.fraction_at_count(2) == doctest::Approx(0.5));
  CHECK(curve.fraction_at_count(3) == doctest::Approx(1.0));
  CHECK(curve.fraction_at_count(0) == 0.0);
  CHECK(curve.fraction_at_count(50) == doctest::Approx(1.0));
  CHECK(curve.fraction_at_day(0) == doctest::Approx(0.5));
  CHECK(curve.fraction_at_day(1) == doctest::Approx(0.5));
  CHECK(curve.fraction_at_day(2) == doctest::Approx(1.0));

  std::ostringstream csv1;
  std::ostringstream csv2;
  write_curve_csv(curve, csv1);
  write_curve_csv(early_detection(baseline_model(), corpus.profiles()), csv2);
  CHECK(csv1.str() == csv2.str());
  CHECK(csv1.str().rfind("m,fraction\n1,0.500000\n", 0) == 0);

  TrainedModel comment_model = baseline_model();
  comment_model.unit = UnitKind::comment;
  CHECK_THROWS_AS(early_detection(comment_model, corpus.profiles()), Error);
}

TEST_CASE("property: early detection curves are non-decreasing and bounded") {
  const auto corpus = small_corpus(40, 13);
  const auto split = split_profiles(corpus, 0.3, 5);
  PipelineConfig config;
  config.model = ModelKind::nb;
  const auto curve = early_detection(split.train, split.test, config);
  for (const auto* points : {&curve.by_count, &curve.by_time}) {
    for (std::size_t i = 0; i < points->size(); ++i) {
      CHECK((*points)[i].fraction >= 0.0);
      CHECK((*points)[i].fraction <= 1.0);
      if (i > 0) CHECK((*points)[i].fraction >= (*points)[i - 1].fraction);
    }
  }
  REQUIRE_FALSE(curve.by_count.empty());
  CHECK(curve.by_count.front().key == 1);
  CHECK(curve.by_count.back().fraction ==
        doctest::Approx(static_cast<double>(curve.detected) / static_cast<double>(curve.test_profiles)));
}

TEST_CASE("recall-only evaluation") {
  const std::vector<Document> positives = {doc("a", "rip man", Label::post), doc("b", "hello", Label::post),
                                           doc("c", "R.I.P.", std::nullopt), doc("d", "lol", std::nullopt)};
  CHECK(recall_only_eval(baseline_model(), positives) == doctest::Approx(0.5));
  CHECK_THROWS_AS(recall_only_eval(baseline_model(), std::vector<Document>{}), Error);
  const std::vector<Document> with_pre = {doc("a", "rip", Label::post), doc("b", "hey", Label::pre)};
  CHECK_THROWS_AS(recall_only_eval(baseline_model(), with_pre), Error);
}

TEST_CASE("export_misclassified writes only the errors in input order") {
  const std::vector<Document> docs = {doc("1", "rip", Label::post), doc("2", "hello", Label::post),
                                      doc("3", "rip lol", Label::pre), doc("4", "lol", Label::pre)};
  std::ostringstream out;
  CHECK(export_misclassified(baseline_model(), docs, out) == 2);
  std::istringstream in(out.str());
  std::string first;
  std::string second;
  std::getline(in, first);
  std::getline(in, second);
  const auto r1 = nlohmann::json::parse(first);
  const auto r2 = nlohmann::json::parse(second);
  CHECK(r1["source_id"] == "2");
  CHECK(r1["true"] == "post");
  CHECK(r1["predicted"] == "pre");
  CHECK(r2["source_id"] == "3");
  CHECK(r2["text"] == "rip lol");
  const auto dir = testing::scratch_dir("export");
  CHECK(export_misclassified(baseline_model(), docs, dir / "m.jsonl") == 2);
  CHECK(testing::read_file(dir / "m.jsonl") == out.str());
}

TEST_CASE("model persistence round-trips every kind bit-exactly") {
  const auto corpus = small_corpus(24, 17);
  const auto docs = make_documents(corpus, UnitKind::profile);
  const auto dir = testing::scratch_dir("persist");
  for (const auto kind : {ModelKind::baseline, ModelKind::nb, ModelKind::lr, ModelKind::svm, ModelKind::gbt}) {
    CAPTURE(to_string(kind));
    PipelineConfig config;
    config.model = kind;
    config.hyperparameters.gbt_rounds = 10;
    if (kind == ModelKind::lr) config.select_k = 50;
    const auto model = fit_pipeline(config, docs);
    const auto path = dir / (std::string(to_string(kind)) + ".json");
    save_model(model, path);
    const auto loaded = load_model(path);
    CHECK(loaded.kind == kind);
    CHECK(serialize_model(loaded) == serialize_model(model));
    for (const auto& d : docs) {
      const auto p = predict_text(model, d.text);
      const auto q = predict_text(loaded, d.text);
      CHECK(p.label == q.label);
      CHECK(p.score == q.score);
    }
  }
}

TEST_CASE("model loading rejects unknown versions and malformed files") {
  const auto corpus = small_corpus(12, 4);
  const auto docs = make_documents(corpus, UnitKind::profile);
  PipelineConfig config;
  config.model = ModelKind::nb;
  auto j = nlohmann::json::parse(serialize_model(fit_pipeline(config, docs)));
  j["format_version"] = 99;
  CHECK_THROWS_AS(deserialize_model(j.dump()), Error);
  CHECK_THROWS_AS(deserialize_model("{"), Error);
  CHECK_THROWS_AS(load_model(testing::scratch_dir("missing") / "none.json"), Error);
}
