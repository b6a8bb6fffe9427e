#include "mortem/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "json_util.hpp"
#include "mortem/error.hpp"

namespace mortem {

using nlohmann::json;

EvalMetrics confusion_and_metrics(std::span<const Label> y_true, std::span<const Label> y_pred) {
  if (y_true.size() != y_pred.size()) throw Error("metrics: y_true and y_pred differ in length");
  if (y_true.empty()) throw Error("metrics: no predictions");
  EvalMetrics m;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool truth = y_true[i] == Label::post;
    const bool pred = y_pred[i] == Label::post;
    if (truth && pred) ++m.tp;
    if (!truth && pred) ++m.fp;
    if (!truth && !pred) ++m.tn;
    if (truth && !pred) ++m.fn;
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = ratio(m.tp + m.tn, y_true.size());
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

std::string PipelineConfig::describe() const {
  std::string out = std::string(to_string(unit)) + "/" + std::string(to_string(model));
  if (model == ModelKind::baseline) return out;
  out += "/" + std::string(to_string(features));
  out += select_k ? "/k=" + std::to_string(*select_k) : "/k=all";
  char buf[64];
  switch (model) {
    case ModelKind::nb: std::snprintf(buf, sizeof buf, "/alpha=%g", hyperparameters.nb_alpha); break;
    case ModelKind::lr: std::snprintf(buf, sizeof buf, "/lambda=%g", hyperparameters.lr_lambda); break;
    case ModelKind::svm: std::snprintf(buf, sizeof buf, "/C=%g", hyperparameters.svm_c); break;
    case ModelKind::gbt:
      std::snprintf(buf, sizeof buf, "/depth=%d/rounds=%d/lr=%g", hyperparameters.gbt_depth,
                    hyperparameters.gbt_rounds, hyperparameters.gbt_learning_rate);
      break;
    case ModelKind::baseline: buf[0] = '\0'; break;
  }
  return out + buf;
}

json to_json(const PipelineConfig& config) {
  return {{"unit", std::string(to_string(config.unit))},
          {"model", std::string(to_string(config.model))},
          {"features", std::string(to_string(config.features))},
          {"select_k", config.select_k ? json(*config.select_k) : json(nullptr)},
          {"text", detail::to_json(config.text)},
          {"hyperparameters", detail::to_json(config.hyperparameters)},
          {"description", config.describe()}};
}

PipelineConfig pipeline_from_json(const json& j) {
  PipelineConfig c;
  c.unit = parse_unit(detail::require<std::string>(j, "unit"));
  c.model = parse_model_kind(detail::require<std::string>(j, "model"));
  c.features = parse_feature_kind(detail::require<std::string>(j, "features"));
  if (j.contains("select_k") && !j["select_k"].is_null()) c.select_k = detail::require<std::size_t>(j, "select_k");
  c.text = detail::text_config_from_json(j.value("text", json::object()));
  c.hyperparameters = detail::hyperparameters_from_json(j.value("hyperparameters", json::object()));
  return c;
}

namespace {

std::vector<Label> labels_of(std::span<const Document> docs) {
  std::vector<Label> labels;
  labels.reserve(docs.size());
  for (const auto& d : docs) {
    if (!d.label) throw Error("document '" + d.source_id + "' is unlabeled");
    labels.push_back(*d.label);
  }
  return labels;
}

nlohmann::ordered_json misclassified_row(const Document& d, const Prediction& p) {
  nlohmann::ordered_json row;
  row["source_id"] = d.source_id;
  row["true"] = std::string(to_string(*d.label));
  row["predicted"] = std::string(to_string(p.label));
  row["score"] = p.score;
  row["text"] = d.text;
  return row;
}

}  // namespace

TrainedModel fit_pipeline(const PipelineConfig& config, std::span<const Document> train, const CltExtractor& clt) {
  TrainedModel model;
  model.kind = config.model;
  model.unit = config.unit;
  model.hyperparameters = config.hyperparameters;
  model.space.kind = config.features;
  if (config.model == ModelKind::baseline) {
    model.trace.converged = true;
    return model;
  }
  const auto labels = labels_of(train);
  model.space = build_feature_space(config.features, train, config.text, clt);
  auto vectors = compose_all(train, model.space);
  if (config.select_k) {
    auto chi2 = chi2_select(vectors, labels, *config.select_k);
    for (auto& v : vectors) v = apply_mask(v, chi2.selected_indices);
    model.space.selection_mask = std::move(chi2.selected_indices);
  }
  model.parameters = train_parameters(config.model, config.hyperparameters, vectors, labels, &model.trace);
  return model;
}

std::vector<double> CvReport::fold_f1() const {
  std::vector<double> out;
  for (const auto& f : folds) out.push_back(f.metrics.f1);
  return out;
}

CvReport cross_validate(const PipelineConfig& config, std::span<const Document> documents, std::size_t k,
                        std::uint64_t seed, const CltExtractor& clt, std::ostream* misclassified) {
  const auto labels = labels_of(documents);
  const auto folds = stratified_kfold(labels, k, seed);
  CvReport report;
  report.config = config;
  report.fold_count = k;
  report.seed = seed;
  std::vector<char> held_out(documents.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(held_out.begin(), held_out.end(), 0);
    for (const auto i : folds[f]) held_out[i] = 1;
    std::vector<Document> train;
    train.reserve(documents.size() - folds[f].size());
    for (std::size_t i = 0; i < documents.size(); ++i) {
      if (!held_out[i]) train.push_back(documents[i]);
    }
    FoldReport fold;
    fold.train_size = train.size();
    fold.test_size = folds[f].size();
    try {
      const auto model = fit_pipeline(config, train, clt);
      if (model.space.vocabulary) fold.vocabulary_fingerprint = model.space.vocabulary->fingerprint();
      std::vector<Label> truth;
      std::vector<Label> predicted;
      for (const auto i : folds[f]) {
        const auto p = predict_text(model, documents[i].text);
        truth.push_back(labels[i]);
        predicted.push_back(p.label);
        if (misclassified && p.label != labels[i]) {
          auto row = misclassified_row(documents[i], p);
          row["fold"] = f;
          *misclassified << row.dump() << '\n';
        }
      }
      fold.metrics = confusion_and_metrics(truth, predicted);
    } catch (const Error& e) {
      throw Error("fold " + std::to_string(f) + ": " + e.what());
    }
    report.folds.push_back(fold);
  }
  const double n = static_cast<double>(report.folds.size());
  for (const auto& f : report.folds) {
    report.mean.accuracy += f.metrics.accuracy / n;
    report.mean.precision += f.metrics.precision / n;
    report.mean.recall += f.metrics.recall / n;
    report.mean.f1 += f.metrics.f1 / n;
  }
  return report;
}

GridResult grid_search(std::span<const PipelineConfig> grid, std::span<const Document> documents, std::size_t k,
                       std::uint64_t seed, const CltExtractor& clt) {
  if (grid.empty()) throw Error("grid_search: empty grid");
  GridResult result;
  for (const auto& config : grid) {
    result.reports.push_back(cross_validate(config, documents, k, seed, clt));
    if (result.reports.back().mean.f1 > result.reports[result.best].mean.f1) {
      result.best = result.reports.size() - 1;
    }
  }
  return result;
}

std::vector<PipelineConfig> default_grid(const PipelineConfig& base, std::span<const std::size_t> select_ks) {
  std::vector<PipelineConfig> hyper;
  switch (base.model) {
    case ModelKind::baseline:
      return {base};
    case ModelKind::nb:
      for (const double a : {0.1, 0.5, 1.0}) {
        auto c = base;
        c.hyperparameters.nb_alpha = a;
        hyper.push_back(c);
      }
      break;
    case ModelKind::lr:
      for (const double l : {1e-4, 1e-3, 1e-2, 1e-1}) {
        auto c = base;
        c.hyperparameters.lr_lambda = l;
        hyper.push_back(c);
      }
      break;
    case ModelKind::svm:
      for (const double cval : {0.1, 1.0, 10.0}) {
        auto c = base;
        c.hyperparameters.svm_c = cval;
        hyper.push_back(c);
      }
      break;
    case ModelKind::gbt:
      for (const int depth : {2, 3}) {
        for (const int rounds : {50, 100}) {
          auto c = base;
          c.hyperparameters.gbt_depth = depth;
          c.hyperparameters.gbt_rounds = rounds;
          c.hyperparameters.gbt_learning_rate = 0.3;
          hyper.push_back(c);
        }
      }
      break;
  }
  if (select_ks.empty()) return hyper;
  std::vector<PipelineConfig> grid;
  for (const auto k : select_ks) {
    for (auto c : hyper) {
      c.select_k = k;
      grid.push_back(c);
    }
  }
  return grid;
}

json to_json(const EvalMetrics& m) {
  return {{"tp", m.tp},           {"fp", m.fp},
          {"tn", m.tn},           {"fn", m.fn},
          {"accuracy", m.accuracy}, {"precision", m.precision},
          {"recall", m.recall},   {"f1", m.f1}};
}

json to_json(const CvReport& report) {
  json folds = json::array();
  for (const auto& f : report.folds) {
    auto j = to_json(f.metrics);
    j["train_size"] = f.train_size;
    j["test_size"] = f.test_size;
    j["vocabulary_fingerprint"] = f.vocabulary_fingerprint;
    folds.push_back(std::move(j));
  }
  return {{"config", to_json(report.config)},
          {"folds", folds},
          {"fold_count", report.fold_count},
          {"seed", report.seed},
          {"mean",
           {{"accuracy", report.mean.accuracy},
            {"precision", report.mean.precision},
            {"recall", report.mean.recall},
            {"f1", report.mean.f1}}}};
}

json to_json(const GridResult& result) {
  json reports = json::array();
  for (const auto& r : result.reports) reports.push_back(to_json(r));
  return {{"best_index", result.best}, {"best", to_json(result.best_report().config)}, {"reports", reports}};
}

CvReport cv_report_from_json(const json& j) {
  CvReport r;
  r.config = pipeline_from_json(detail::require<json>(j, "config"));
  r.fold_count = detail::require<std::size_t>(j, "fold_count");
  r.seed = detail::require<std::uint64_t>(j, "seed");
  for (const auto& f : detail::require<json>(j, "folds")) {
    FoldReport fold;
    fold.metrics.tp = detail::require<std::size_t>(f, "tp");
    fold.metrics.fp = detail::require<std::size_t>(f, "fp");
    fold.metrics.tn = detail::require<std::size_t>(f, "tn");
    fold.metrics.fn = detail::require<std::size_t>(f, "fn");
    fold.metrics.accuracy = detail::require<double>(f, "accuracy");
    fold.metrics.precision = detail::require<double>(f, "precision");
    fold.metrics.recall = detail::require<double>(f, "recall");
    fold.metrics.f1 = detail::require<double>(f, "f1");
    fold.train_size = detail::optional_field<std::size_t>(f, "train_size", 0);
    fold.test_size = detail::optional_field<std::size_t>(f, "test_size", 0);
    fold.vocabulary_fingerprint = detail::optional_field<std::uint64_t>(f, "vocabulary_fingerprint", 0);
    r.folds.push_back(fold);
  }
  const auto& m = detail::require<json>(j, "mean");
  r.mean.accuracy = detail::require<double>(m, "accuracy");
  r.mean.precision = detail::require<double>(m, "precision");
  r.mean.recall = detail::require<double>(m, "recall");
  r.mean.f1 = detail::require<double>(m, "f1");
  return r;
}

double recall_only_eval(const TrainedModel& model, std::span<const Document> positives) {
  if (positives.empty()) throw Error("recall-only evaluation: no documents");
  std::size_t detected = 0;
  for (const auto& d : positives) {
    if (d.label == Label::pre) {
      throw Error("recall-only evaluation: document '" + d.source_id + "' is labeled pre");
    }
    if (predict_text(model, d.text).label == Label::post) ++detected;
  }
  return static_cast<double>(detected) / static_cast<double>(positives.size());
}

std::size_t export_misclassified(const TrainedModel& model, std::span<const Document> documents, std::ostream& out) {
  std::size_t rows = 0;
  for (const auto& d : documents) {
    if (!d.label) throw Error("export_misclassified: document '" + d.source_id + "' is unlabeled");
    const auto p = predict_text(model, d.text);
    if (p.label == *d.label) continue;
    out << misclassified_row(d, p).dump() << '\n';
    ++rows;
  }
  return rows;
}

std::size_t export_misclassified(const TrainedModel& model, std::span<const Document> documents,
                                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write misclassification file '" + path.string() + "'");
  const auto rows = export_misclassified(model, documents, out);
  if (!out) throw Error("failed writing misclassification file '" + path.string() + "'");
  return rows;
}

}  // namespace mortem
