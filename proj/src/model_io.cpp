// Versioned JSON persistence for trained models.

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "mortem/error.hpp"
#include "mortem/models.hpp"

namespace mortem {

using nlohmann::json;

namespace detail {

json to_json(const Hyperparameters& h) {
  return {{"nb_alpha", h.nb_alpha},
          {"lr_lambda", h.lr_lambda},
          {"lr_tol", h.lr_tol},
          {"lr_max_iter", h.lr_max_iter},
          {"svm_c", h.svm_c},
          {"svm_tol", h.svm_tol},
          {"svm_max_sweeps", h.svm_max_sweeps},
          {"gbt_depth", h.gbt_depth},
          {"gbt_rounds", h.gbt_rounds},
          {"gbt_learning_rate", h.gbt_learning_rate}};
}

Hyperparameters hyperparameters_from_json(const json& j) {
  Hyperparameters h;
  h.nb_alpha = optional_field(j, "nb_alpha", h.nb_alpha);
  h.lr_lambda = optional_field(j, "lr_lambda", h.lr_lambda);
  h.lr_tol = optional_field(j, "lr_tol", h.lr_tol);
  h.lr_max_iter = optional_field(j, "lr_max_iter", h.lr_max_iter);
  h.svm_c = optional_field(j, "svm_c", h.svm_c);
  h.svm_tol = optional_field(j, "svm_tol", h.svm_tol);
  h.svm_max_sweeps = optional_field(j, "svm_max_sweeps", h.svm_max_sweeps);
  h.gbt_depth = optional_field(j, "gbt_depth", h.gbt_depth);
  h.gbt_rounds = optional_field(j, "gbt_rounds", h.gbt_rounds);
  h.gbt_learning_rate = optional_field(j, "gbt_learning_rate", h.gbt_learning_rate);
  return h;
}

json to_json(const TextConfig& c) {
  return {{"ngram_max", c.ngram_max}, {"min_df", c.min_df}, {"remove_stopwords", c.remove_stopwords}};
}

TextConfig text_config_from_json(const json& j) {
  TextConfig c;
  c.ngram_max = optional_field(j, "ngram_max", c.ngram_max);
  c.min_df = optional_field(j, "min_df", c.min_df);
  c.remove_stopwords = optional_field(j, "remove_stopwords", c.remove_stopwords);
  return c;
}

}  // namespace detail

namespace {

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j, const char* key) {
  const auto values = detail::require<std::vector<double>>(j, key);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json space_json(const FeatureSpace& space) {
  json out;
  out["kind"] = std::string(to_string(space.kind));
  if (space.vocabulary) {
    const auto& v = *space.vocabulary;
    out["vocabulary"] = {
        {"ngrams", std::vector<std::string>(v.terms().begin(), v.terms().end())},
        {"idf", std::vector<double>(v.idf_values().begin(), v.idf_values().end())},
        {"df", std::vector<std::size_t>(v.document_frequencies().begin(), v.document_frequencies().end())},
        {"document_count", v.document_count()},
        {"text", detail::to_json(v.config())}};
  } else {
    out["vocabulary"] = nullptr;
  }
  if (space.clt) {
    const auto& c = *space.clt;
    json categories = json::array();
    for (const auto& cat : c.lexicon()) {
      categories.push_back({{"name", cat.name},
                            {"exact", std::vector<std::string>(cat.exact_terms.begin(), cat.exact_terms.end())},
                            {"prefix", std::vector<std::string>(cat.prefix_terms.begin(), cat.prefix_terms.end())}});
    }
    out["clt_names"] = c.metric_names();
    out["clt"] = {{"lexicon", categories},
                  {"sentiment", c.sentiment().entries()},
                  {"negations", std::vector<std::string>(c.negations().begin(), c.negations().end())},
                  {"word_count_cap", c.config().word_count_cap}};
  } else {
    out["clt_names"] = json::array();
    out["clt"] = nullptr;
  }
  out["mask"] = space.selection_mask ? json(*space.selection_mask) : json(nullptr);
  return out;
}

FeatureSpace space_from_json(const json& j) {
  FeatureSpace space;
  space.kind = parse_feature_kind(detail::require<std::string>(j, "kind"));
  if (j.contains("vocabulary") && !j["vocabulary"].is_null()) {
    const auto& v = j["vocabulary"];
    space.vocabulary = Vocabulary(detail::require<std::vector<std::string>>(v, "ngrams"),
                                  detail::require<std::vector<double>>(v, "idf"),
                                  detail::require<std::vector<std::size_t>>(v, "df"),
                                  detail::text_config_from_json(v.value("text", json::object())),
                                  detail::require<std::size_t>(v, "document_count"));
  }
  if (j.contains("clt") && !j["clt"].is_null()) {
    const auto& c = j["clt"];
    Lexicon lexicon;
    for (const auto& cat : detail::require<json>(c, "lexicon")) {
      LexiconCategory category;
      category.name = detail::require<std::string>(cat, "name");
      for (const auto& t : detail::require<std::vector<std::string>>(cat, "exact")) category.exact_terms.insert(t);
      for (const auto& t : detail::require<std::vector<std::string>>(cat, "prefix")) category.prefix_terms.insert(t);
      lexicon.push_back(std::move(category));
    }
    const auto sentiment = detail::require<std::map<std::string, double>>(c, "sentiment");
    const auto negations = detail::require<std::vector<std::string>>(c, "negations");
    CltConfig config;
    config.word_count_cap = detail::require<double>(c, "word_count_cap");
    space.clt = CltExtractor(std::move(lexicon), SentimentLexicon(sentiment),
                             NegationSet(negations.begin(), negations.end()), config);
    if (detail::require<std::vector<std::string>>(j, "clt_names") != space.clt->metric_names()) {
      throw Error("model file: clt_names do not match the stored lexicon");
    }
  }
  const bool needs_vocab = space.kind != FeatureKind::clt;
  const bool needs_clt = space.kind != FeatureKind::ngram;
  if (needs_vocab != space.vocabulary.has_value() || needs_clt != space.clt.has_value()) {
    throw Error("model file: feature space blocks do not match its kind");
  }
  if (j.contains("mask") && !j["mask"].is_null()) {
    auto mask = detail::require<std::vector<std::size_t>>(j, "mask");
    const std::size_t full = space.full_dimension();
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i] >= full || (i > 0 && mask[i] <= mask[i - 1])) {
        throw Error("model file: selection mask must be strictly increasing and inside the space");
      }
    }
    space.selection_mask = std::move(mask);
  }
  return space;
}

json parameters_json(const TrainedModel& model) {
  switch (model.kind) {
    case ModelKind::baseline:
      return json::object();
    case ModelKind::nb: {
      const auto& nb = std::get<NaiveBayesModel>(model.parameters);
      return {{"alpha", nb.alpha},
              {"log_prior", vector_json(nb.log_prior)},
              {"log_likelihood", {vector_json(nb.log_likelihood.row(0).transpose()),
                                  vector_json(nb.log_likelihood.row(1).transpose())}}};
    }
    case ModelKind::lr:
    case ModelKind::svm: {
      const auto& lin = std::get<LinearModel>(model.parameters);
      return {{"weights", vector_json(lin.weights)}, {"bias", lin.bias}};
    }
    case ModelKind::gbt: {
      const auto& gbt = std::get<BoostedTrees>(model.parameters);
      json trees = json::array();
      for (const auto& tree : gbt.trees) {
        json nodes = json::array();
        for (const auto& n : tree.nodes) {
          nodes.push_back({{"feature", n.feature},
                           {"threshold", n.threshold},
                           {"left", n.left},
                           {"right", n.right},
                           {"value", n.value},
                           {"gain", n.gain}});
        }
        trees.push_back(std::move(nodes));
      }
      return {{"base_score", gbt.base_score},
              {"learning_rate", gbt.learning_rate},
              {"depth", gbt.depth},
              {"trees", trees},
              {"training_loss", gbt.training_loss}};
    }
  }
  return json::object();
}

ModelParameters parameters_from_json(ModelKind kind, const json& j, std::size_t dim) {
  const auto check_dim = [dim](Eigen::Index got) {
    if (static_cast<std::size_t>(got) != dim) {
      throw Error("model file: parameter length " + std::to_string(got) +
                  " does not match feature space dimension " + std::to_string(dim));
    }
  };
  switch (kind) {
    case ModelKind::baseline:
      return std::monostate{};
    case ModelKind::nb: {
      NaiveBayesModel nb;
      nb.alpha = detail::require<double>(j, "alpha");
      const auto prior = vector_from(j, "log_prior");
      if (prior.size() != 2) throw Error("model file: log_prior must have two entries");
      nb.log_prior = prior;
      const auto rows = detail::require<std::vector<std::vector<double>>>(j, "log_likelihood");
      if (rows.size() != 2 || rows[0].size() != rows[1].size()) {
        throw Error("model file: log_likelihood must be a 2 x D table");
      }
      check_dim(static_cast<Eigen::Index>(rows[0].size()));
      nb.log_likelihood.resize(2, static_cast<Eigen::Index>(rows[0].size()));
      for (int c = 0; c < 2; ++c) {
        nb.log_likelihood.row(c) = Eigen::Map<const Eigen::RowVectorXd>(rows[static_cast<std::size_t>(c)].data(),
                                                                        static_cast<Eigen::Index>(rows[0].size()));
      }
      return nb;
    }
    case ModelKind::lr:
    case ModelKind::svm: {
      LinearModel lin;
      lin.weights = vector_from(j, "weights");
      lin.bias = detail::require<double>(j, "bias");
      check_dim(lin.weights.size());
      return lin;
    }
    case ModelKind::gbt: {
      BoostedTrees gbt;
      gbt.base_score = detail::require<double>(j, "base_score");
      gbt.learning_rate = detail::require<double>(j, "learning_rate");
      gbt.depth = detail::require<int>(j, "depth");
      gbt.training_loss = detail::optional_field(j, "training_loss", std::vector<double>{});
      for (const auto& nodes : detail::require<json>(j, "trees")) {
        RegressionTree tree;
        for (const auto& n : nodes) {
          TreeNode node;
          node.feature = detail::require<int>(n, "feature");
          node.threshold = detail::require<double>(n, "threshold");
          node.left = detail::require<int>(n, "left");
          node.right = detail::require<int>(n, "right");
          node.value = detail::require<double>(n, "value");
          node.gain = detail::optional_field(n, "gain", 0.0);
          tree.nodes.push_back(node);
        }
        const auto count = static_cast<int>(tree.nodes.size());
        if (count == 0) throw Error("model file: empty tree");
        for (const auto& node : tree.nodes) {
          if (node.feature >= 0 && (static_cast<std::size_t>(node.feature) >= dim || node.left <= 0 ||
                                    node.right <= 0 || node.left >= count || node.right >= count)) {
            throw Error("model file: malformed tree node");
          }
        }
        gbt.trees.push_back(std::move(tree));
      }
      return gbt;
    }
  }
  return std::monostate{};
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  json out;
  out["format_version"] = model.format_version;
  out["kind"] = std::string(to_string(model.kind));
  out["unit"] = std::string(to_string(model.unit));
  out["feature_space"] = space_json(model.space);
  out["parameters"] = parameters_json(model);
  out["hyperparameters"] = detail::to_json(model.hyperparameters);
  out["training"] = {{"converged", model.trace.converged},
                     {"iterations", model.trace.iterations},
                     {"final_criterion", model.trace.final_criterion}};
  return out.dump(1) + "\n";
}

TrainedModel deserialize_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model file is not valid JSON (truncated?): ") + e.what());
  }
  TrainedModel model;
  model.format_version = detail::require<int>(j, "format_version");
  if (model.format_version != TrainedModel::kFormatVersion) {
    throw Error("unsupported model format_version " + std::to_string(model.format_version));
  }
  model.kind = parse_model_kind(detail::require<std::string>(j, "kind"));
  model.unit = parse_unit(detail::optional_field<std::string>(j, "unit", "profile"));
  if (model.kind != ModelKind::baseline) {
    model.space = space_from_json(detail::require<json>(j, "feature_space"));
  } else if (j.contains("feature_space") && !j["feature_space"].is_null()) {
    model.space.kind = parse_feature_kind(detail::optional_field<std::string>(j["feature_space"], "kind", "ngram"));
  }
  model.parameters = parameters_from_json(model.kind, detail::require<json>(j, "parameters"), model.space.dimension());
  model.hyperparameters = detail::hyperparameters_from_json(j.value("hyperparameters", json::object()));
  if (j.contains("training")) {
    const auto& t = j["training"];
    model.trace.converged = detail::optional_field(t, "converged", false);
    model.trace.iterations = detail::optional_field<std::size_t>(t, "iterations", 0);
    model.trace.final_criterion = detail::optional_field(t, "final_criterion", 0.0);
  }
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file '" + path.string() + "'");
  out << serialize_model(model);
  if (!out) throw Error("failed writing model file '" + path.string() + "'");
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

}  // namespace mortem
