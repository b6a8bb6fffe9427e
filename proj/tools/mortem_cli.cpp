// mortem: command-line front end for the pre-/post-mortem classification
// library. Exit codes: 0 success, 1 usage error, 2 data or validation error,
// 3 internal error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mortem/corpus.hpp"
#include "mortem/error.hpp"
#include "mortem/evaluation.hpp"
#include "mortem/lexicon.hpp"
#include "mortem/models.hpp"
#include "mortem/statistics.hpp"
#include "mortem/synth.hpp"

namespace {

using nlohmann::json;
using namespace mortem;

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kInternal = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kUnits = {"profile", "comment"};
const std::vector<std::string> kFeatures = {"ngram", "clt", "combined"};
const std::vector<std::string> kModels = {"baseline", "nb", "lr", "svm", "gbt"};

struct PipelineFlags {
  PipelineConfig config;
  std::string unit = "profile";
  std::string features = "combined";
  std::string model = "lr";
  std::vector<std::size_t> select_k;
  std::string lexicon;
  std::string sentiment;
  std::string negations;
  CLI::Option* select_k_option = nullptr;
  CLI::Option* features_option = nullptr;

  void attach(CLI::App* cmd, bool many_k) {
    cmd->add_option("--unit", unit, "Classification unit")->check(CLI::IsMember(kUnits))->capture_default_str();
    features_option = cmd->add_option("--features", features, "Feature set")
                          ->check(CLI::IsMember(kFeatures))
                          ->capture_default_str();
    cmd->add_option("--model", model, "Classifier")->check(CLI::IsMember(kModels))->capture_default_str();
    select_k_option = cmd->add_option("--select-k", select_k,
                                      many_k ? "Chi-squared selection sizes to search" : "Keep the top-k chi-squared features")
                          ->check(CLI::PositiveNumber);
    if (!many_k) select_k_option->expected(1);
    auto& h = config.hyperparameters;
    cmd->add_option("--nb-alpha", h.nb_alpha, "Naive Bayes additive smoothing")->capture_default_str();
    cmd->add_option("--lr-lambda", h.lr_lambda, "Logistic regression L2 strength")->capture_default_str();
    cmd->add_option("--svm-c", h.svm_c, "SVM cost parameter C")->capture_default_str();
    cmd->add_option("--gbt-depth", h.gbt_depth, "Boosted tree depth")->capture_default_str();
    cmd->add_option("--gbt-rounds", h.gbt_rounds, "Boosting rounds")->capture_default_str();
    cmd->add_option("--gbt-learning-rate", h.gbt_learning_rate, "Boosting shrinkage")->capture_default_str();
    cmd->add_option("--ngram-max", config.text.ngram_max, "Longest n-gram")->check(CLI::Range(1, 5))->capture_default_str();
    cmd->add_option("--min-df", config.text.min_df, "Minimum document frequency")->capture_default_str();
    cmd->add_option("--lexicon", lexicon, "Category lexicon file (default: built-in demo lexicon)")->check(CLI::ExistingFile);
    cmd->add_option("--sentiment", sentiment, "Sentiment lexicon TSV")->check(CLI::ExistingFile);
    cmd->add_option("--negations", negations, "Negation word list")->check(CLI::ExistingFile);
  }

  PipelineConfig resolved() {
    config.unit = parse_unit(unit);
    config.features = parse_feature_kind(features);
    config.model = parse_model_kind(model);
    if (!select_k.empty()) config.select_k = select_k.front();
    if (config.model == ModelKind::baseline && (select_k_option->count() > 0 || features_option->count() > 0)) {
      std::cerr << "warning: the baseline ignores --features and --select-k\n";
    }
    if (config.model == ModelKind::baseline) config.select_k.reset();
    return config;
  }

  CltExtractor extractor() const {
    if (lexicon.empty() && sentiment.empty() && negations.empty()) return CltExtractor::standard();
    return CltExtractor(lexicon.empty() ? demo_lexicon() : load_lexicon(lexicon),
                        sentiment.empty() ? SentimentLexicon::standard() : SentimentLexicon::load(sentiment),
                        negations.empty() ? default_negations() : load_negations(negations));
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

void write_json(const json& j, const std::string& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed writing '" + path + "'");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// --- gen-synth ------------------------------------------------------------

struct GenSynthFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> profiles;
  std::string out;
};

int run_gen_synth(const GenSynthFlags& f) {
  SynthConfig config = f.config.empty() ? desk200_config() : load_synth_config(f.config);
  if (f.seed) config.seed = *f.seed;
  if (f.profiles) config.n_profiles = *f.profiles;
  const Corpus corpus = generate(config);
  save_corpus(corpus, f.out);
  std::cout << "profiles " << corpus.profile_count() << "\ncomments " << corpus.comment_count() << '\n';
  return 0;
}

// --- stats ------------------------------------------------------------------

struct StatsFlags {
  std::string corpus;
  std::string out;
  std::size_t top = 5;
  double effect_threshold = 0.2;
};

json ngram_list(const std::vector<NgramCount>& grams) {
  json out = json::array();
  for (const auto& [gram, count] : grams) out.push_back({{"ngram", gram}, {"count", count}});
  return out;
}

int run_stats(const StatsFlags& f) {
  const Corpus corpus = load_corpus(f.corpus);
  if (!corpus.fully_labeled()) throw Error("stats needs a fully labeled corpus");
  const auto s = corpus_stats(corpus);
  json report;
  report["corpus"] = f.corpus;
  report["descriptive"] = {{"total_comments", s.total_comments},
                           {"total_profiles", s.total_profiles},
                           {"post_comments", {{"count", s.post_comments.count}, {"fraction", s.post_comments.fraction}}},
                           {"pre_comments", {{"count", s.pre_comments.count}, {"fraction", s.pre_comments.fraction}}},
                           {"mean_comments_per_profile", s.mean_comments_per_profile},
                           {"median_comments_per_profile", s.median_comments_per_profile},
                           {"mean_words_per_comment", s.mean_words_per_comment},
                           {"mean_post_words_per_comment", s.mean_post_words_per_comment},
                           {"mean_pre_words_per_comment", s.mean_pre_words_per_comment},
                           {"mean_post_comments_per_profile", s.mean_post_comments_per_profile},
                           {"mean_pre_comments_per_profile", s.mean_pre_comments_per_profile}};
  for (const Label cls : {Label::pre, Label::post}) {
    report["top_ngrams"][std::string(to_string(cls))] = {{"unigrams", ngram_list(top_ngrams(corpus, 1, f.top, cls))},
                                                         {"bigrams", ngram_list(top_ngrams(corpus, 2, f.top, cls))}};
  }

  const auto& clt = CltExtractor::standard();
  std::vector<std::vector<double>> pre(clt.size());
  std::vector<std::vector<double>> post(clt.size());
  for (const auto& p : corpus.profiles()) {
    for (const auto& c : p.comments) {
      const auto values = clt.values(c.text);
      auto& side = *c.label == Label::post ? post : pre;
      for (std::size_t m = 0; m < values.size(); ++m) side[m].push_back(values[m]);
    }
  }
  std::vector<StatTestResult> tests;
  std::vector<double> p_values;
  for (std::size_t m = 0; m < clt.size(); ++m) {
    tests.push_back(mann_whitney_u(pre[m], post[m]));
    p_values.push_back(tests.back().p_value);
  }
  const auto holm = holm_bonferroni(p_values);
  json rows = json::array();
  for (std::size_t m = 0; m < clt.size(); ++m) {
    json row = {{"metric", clt.metric_names()[m]},
                {"pre_mean", mean(pre[m])},
                {"post_mean", mean(post[m])},
                {"u", tests[m].statistic},
                {"p", tests[m].p_value},
                {"p_holm", holm.adjusted[m]},
                {"significant", holm.reject[m]}};
    std::optional<double> d;
    try {
      d = cohens_d(pre[m], post[m]);
    } catch (const Error&) {
      // constant metric on both sides: no effect size
    }
    row["d"] = d ? json(*d) : json(nullptr);
    row["reported"] = holm.reject[m] && d && std::abs(*d) > f.effect_threshold;
    rows.push_back(std::move(row));
  }
  report["clt_tests"] = rows;
  report["effect_threshold"] = f.effect_threshold;

  if (f.out.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    write_json(report, f.out);
    std::cout << "comments " << s.total_comments << " (post " << s.post_comments.count << ", pre "
              << s.pre_comments.count << ")\n";
  }
  return 0;
}

// --- train / cv / grid -----------------------------------------------------

struct TrainFlags {
  std::string corpus;
  std::string out;
  std::size_t top_features = 0;
  PipelineFlags pipeline;
};

int run_train(TrainFlags& f) {
  const auto config = f.pipeline.resolved();
  const Corpus corpus = load_corpus(f.corpus);
  const auto docs = make_documents(corpus, config.unit);
  const auto model = fit_pipeline(config, docs, f.pipeline.extractor());
  save_model(model, f.out);
  std::cout << "trained " << config.describe() << " on " << docs.size() << " documents, dimension "
            << model.space.dimension() << '\n';
  if (model.kind == ModelKind::lr || model.kind == ModelKind::svm) {
    std::cout << "optimizer " << (model.trace.converged ? "converged" : "stopped") << " after "
              << model.trace.iterations << " iterations\n";
  }
  if (f.top_features > 0 && model.kind != ModelKind::baseline) {
    const auto info = informative_features(model, f.top_features);
    const auto print = [](const char* title, const std::vector<RankedFeature>& list) {
      if (list.empty()) return;
      std::cout << title << '\n';
      for (const auto& [name, score] : list) std::cout << "  " << name << ' ' << fixed(score) << '\n';
    };
    print("post", info.post);
    print("pre", info.pre);
    print("importance", info.unsigned_ranking);
  }
  return 0;
}

struct CvFlags {
  std::string corpus;
  std::string out;
  std::string misclassified;
  std::size_t folds = 10;
  std::uint64_t seed = 7;
  PipelineFlags pipeline;
};

int run_cv(CvFlags& f) {
  const auto config = f.pipeline.resolved();
  const Corpus corpus = load_corpus(f.corpus);
  const auto docs = make_documents(corpus, config.unit);
  std::ofstream errors;
  if (!f.misclassified.empty()) errors = open_output(f.misclassified);
  const auto report = cross_validate(config, docs, f.folds, f.seed, f.pipeline.extractor(),
                                     f.misclassified.empty() ? nullptr : &errors);
  write_json(to_json(report), f.out);
  std::cout << config.describe() << " mean F1 " << fixed(report.mean.f1) << " (precision "
            << fixed(report.mean.precision) << ", recall " << fixed(report.mean.recall) << ", accuracy "
            << fixed(report.mean.accuracy) << ")\n";
  return 0;
}

int run_grid(CvFlags& f) {
  const auto base = f.pipeline.resolved();
  const Corpus corpus = load_corpus(f.corpus);
  const auto docs = make_documents(corpus, base.unit);
  const auto grid = default_grid(base, base.model == ModelKind::baseline ? std::vector<std::size_t>{}
                                                                          : f.pipeline.select_k);
  const auto result = grid_search(grid, docs, f.folds, f.seed, f.pipeline.extractor());
  write_json(to_json(result), f.out);
  for (const auto& r : result.reports) std::cout << r.config.describe() << " mean F1 " << fixed(r.mean.f1) << '\n';
  std::cout << "best " << result.best_report().config.describe() << '\n';
  return 0;
}

// --- classify -----------------------------------------------------------------

struct ClassifyFlags {
  std::string model;
  std::string in;
  std::string out;
};

int run_classify(const ClassifyFlags& f) {
  const auto model = load_model(f.model);
  std::ifstream in(f.in);
  if (!in) throw Error("cannot open '" + f.in + "'");
  auto out = open_output(f.out);
  std::string line;
  std::size_t line_no = 0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception&) {
      throw Error(f.in + " line " + std::to_string(line_no) + ": invalid JSON");
    }
    if (!record.is_object() || !record.contains("text") || !record["text"].is_string()) {
      throw Error(f.in + " line " + std::to_string(line_no) + ": expected an object with a string \"text\"");
    }
    const auto p = predict_text(model, record["text"].get<std::string>());
    nlohmann::ordered_json row;
    row["id"] = record.contains("id") ? record["id"] : json(line_no);
    row["label"] = std::string(to_string(p.label));
    row["score"] = p.score;
    out << row.dump() << '\n';
    ++rows;
  }
  if (!out) throw Error("failed writing '" + f.out + "'");
  std::cout << "classified " << rows << " texts\n";
  return 0;
}

// --- early --------------------------------------------------------------------------

struct EarlyFlags {
  std::string corpus;
  std::string out;
  std::string json_out;
  double test_fraction = 0.2;
  std::uint64_t seed = 7;
  PipelineFlags pipeline;
};

int run_early(EarlyFlags& f) {
  auto config = f.pipeline.resolved();
  if (config.unit != UnitKind::profile) throw UsageError("early detection works on profile-level models only");
  const Corpus corpus = load_corpus(f.corpus);
  const auto split = split_profiles(corpus, f.test_fraction, f.seed);
  const auto curve = early_detection(split.train, split.test, config, f.pipeline.extractor());
  auto out = open_output(f.out);
  write_curve_csv(curve, out);
  if (!out) throw Error("failed writing '" + f.out + "'");
  if (!f.json_out.empty()) write_json(to_json(curve), f.json_out);
  std::cout << "test profiles " << curve.test_profiles << ", detected " << curve.detected << '\n';
  std::cout << "m=1 " << fixed(curve.fraction_at_count(1)) << "\nm=4 " << fixed(curve.fraction_at_count(4)) << '\n';
  if (!curve.excluded.empty()) {
    std::cerr << "note: " << curve.excluded.size() << " test profiles have no post-mortem comments\n";
  }
  return 0;
}

// --- compare ------------------------------------------------------------------------

struct CompareFlags {
  std::string a;
  std::string b;
};

int run_compare(const CompareFlags& f) {
  const auto a = cv_report_from_json(read_json(f.a));
  const auto b = cv_report_from_json(read_json(f.b));
  if (a.folds.size() != b.folds.size()) {
    throw Error("reports have different fold counts (" + std::to_string(a.folds.size()) + " vs " +
                std::to_string(b.folds.size()) + ")");
  }
  const auto r = paired_ttest(a.fold_f1(), b.fold_f1());
  std::cout << "a " << a.config.describe() << " mean F1 " << fixed(a.mean.f1) << '\n'
            << "b " << b.config.describe() << " mean F1 " << fixed(b.mean.f1) << '\n'
            << "t " << fixed(r.statistic) << "\ndf " << *r.degrees_of_freedom << "\np " << fixed(r.p_value, 6)
            << '\n';
  return 0;
}

// --- recall-only --------------------------------------------------------------------

struct RecallFlags {
  std::string model;
  std::string corpus;
};

std::vector<Document> positive_documents(const Corpus& corpus, UnitKind unit) {
  std::vector<Document> docs;
  for (const auto& p : corpus.profiles()) {
    if (unit == UnitKind::comment) {
      for (const auto& c : p.comments) docs.push_back({unit, c.comment_id, c.text, c.label});
      continue;
    }
    std::optional<Label> label;
    for (const auto& c : p.comments) {
      if (c.label == Label::pre) label = Label::pre;
    }
    docs.push_back({unit, p.profile_id, join_comment_texts(p.comments), label});
  }
  return docs;
}

int run_recall_only(const RecallFlags& f) {
  const auto model = load_model(f.model);
  const Corpus corpus = load_corpus(f.corpus);
  const auto docs = positive_documents(corpus, model.unit);
  const double recall = recall_only_eval(model, docs);
  std::cout << "documents " << docs.size() << "\nrecall " << fixed(recall) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classify social-media profiles and comments as pre- or post-mortem"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mortem 0.1.0");

  GenSynthFlags gen;
  auto* gen_cmd = app.add_subcommand("gen-synth", "Generate a synthetic labeled corpus");
  gen_cmd->add_option("--config", gen.config, "Synthetic corpus config (JSON); default desk-200")->check(CLI::ExistingFile);
  gen_cmd->add_option("--seed", gen.seed, "Override the config seed");
  gen_cmd->add_option("--profiles", gen.profiles, "Override the number of profiles");
  gen_cmd->add_option("--out", gen.out, "Output corpus (JSONL)")->required();

  StatsFlags stats;
  auto* stats_cmd = app.add_subcommand("stats", "Descriptive statistics, top n-grams and metric tests");
  stats_cmd->add_option("--corpus", stats.corpus, "Labeled corpus (JSONL)")->required();
  stats_cmd->add_option("--out", stats.out, "Report file (JSON); stdout when omitted");
  stats_cmd->add_option("--top", stats.top, "N-grams listed per class")->capture_default_str();

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "Fit a pipeline on a corpus and save the model");
  train_cmd->add_option("--corpus", train.corpus, "Labeled corpus (JSONL)")->required();
  train_cmd->add_option("--out", train.out, "Model file (JSON)")->required();
  train_cmd->add_option("--top-features", train.top_features, "Print the k most informative features");
  train.pipeline.attach(train_cmd, false);

  const auto cv_options = [](CLI::App* cmd, CvFlags& f, const char* out_help) {
    cmd->add_option("--corpus", f.corpus, "Labeled corpus (JSONL)")->required();
    cmd->add_option("--out", f.out, out_help)->required();
    cmd->add_option("--folds", f.folds, "Number of folds")->check(CLI::Range(2, 1000))->capture_default_str();
    cmd->add_option("--seed", f.seed, "Fold assignment seed")->capture_default_str();
  };
  CvFlags cv;
  auto* cv_cmd = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  cv_options(cv_cmd, cv, "Report file (JSON)");
  cv_cmd->add_option("--misclassified", cv.misclassified, "Write held-out errors as JSONL");
  cv.pipeline.attach(cv_cmd, false);

  CvFlags grid;
  auto* grid_cmd = app.add_subcommand("grid", "Grid search over hyperparameters and selection sizes");
  cv_options(grid_cmd, grid, "Best config and all reports (JSON)");
  grid.pipeline.attach(grid_cmd, true);

  ClassifyFlags classify;
  auto* classify_cmd = app.add_subcommand("classify", "Label texts with a saved model");
  classify_cmd->add_option("--model", classify.model, "Model file")->required();
  classify_cmd->add_option("--in", classify.in, "Input JSONL rows {id, text}")->required();
  classify_cmd->add_option("--out", classify.out, "Output JSONL rows {id, label, score}")->required();

  EarlyFlags early;
  auto* early_cmd = app.add_subcommand("early", "Early-detection simulation on held-out profiles");
  early_cmd->add_option("--corpus", early.corpus, "Labeled corpus (JSONL)")->required();
  early_cmd->add_option("--out", early.out, "Curve file (CSV)")->required();
  early_cmd->add_option("--json", early.json_out, "Also write the curve as JSON");
  early_cmd->add_option("--test-fraction", early.test_fraction, "Fraction of profiles held out")
      ->check(CLI::Range(0.0, 1.0))
      ->check([](const std::string& v) {
        const double x = std::stod(v);
        return x > 0.0 && x < 1.0 ? std::string() : std::string("must lie strictly between 0 and 1");
      })
      ->capture_default_str();
  early_cmd->add_option("--seed", early.seed, "Split seed")->capture_default_str();
  early.pipeline.attach(early_cmd, false);

  CompareFlags compare;
  auto* compare_cmd = app.add_subcommand("compare", "Paired t-test over per-fold F1 of two reports");
  compare_cmd->add_option("--report-a", compare.a, "First CV report")->required();
  compare_cmd->add_option("--report-b", compare.b, "Second CV report")->required();

  RecallFlags recall;
  auto* recall_cmd = app.add_subcommand("recall-only", "Detected fraction on a positives-only corpus");
  recall_cmd->add_option("--model", recall.model, "Model file")->required();
  recall_cmd->add_option("--corpus", recall.corpus, "Corpus of post-mortem content (JSONL)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen_cmd) return run_gen_synth(gen);
    if (*stats_cmd) return run_stats(stats);
    if (*train_cmd) return run_train(train);
    if (*cv_cmd) return run_cv(cv);
    if (*grid_cmd) return run_grid(grid);
    if (*classify_cmd) return run_classify(classify);
    if (*early_cmd) return run_early(early);
    if (*compare_cmd) return run_compare(compare);
    if (*recall_cmd) return run_recall_only(recall);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
