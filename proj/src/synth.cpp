#include "mortem/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json_util.hpp"
#include "mortem/error.hpp"
#include "mortem/random.hpp"

namespace mortem {

using nlohmann::json;

namespace {

constexpr double kSecondsPerDay = 86400.0;

// Common words in rough frequency order; the head of the general pool.
constexpr const char* kCommonWords[] = {
    "i",      "you",    "the",    "to",     "and",    "a",      "my",     "it",     "is",     "that",
    "of",     "in",     "me",     "so",     "for",    "be",     "this",   "your",   "we",     "have",
    "was",    "just",   "but",    "on",     "with",   "all",    "are",    "like",   "im",     "know",
    "get",    "got",    "what",   "go",     "one",    "can",    "at",     "out",    "day",    "good",
    "up",     "time",   "do",     "if",     "will",   "really", "see",    "now",    "about",  "how",
    "when",   "friend", "think",  "us",     "back",   "she",    "he",     "they",   "there",  "much",
    "today",  "night",  "want",   "well",   "make",   "people", "school", "said",   "new",    "man",
    "going",  "life",   "world",  "girl",   "great",  "still",  "always", "again",  "last",   "work",
    "look",   "way",    "best",   "thing",  "off",    "never",  "year",   "mom",    "little", "pretty",
    "take",   "show",   "music",  "song",   "picture", "old",   "long",   "tell",   "talk",   "hope",
    "week",   "guys",   "fun",    "nice",   "car",    "game",   "house",  "weekend", "family", "summer",
    "happy",  "sure",   "gonna",  "better", "bad",    "thanks", "dude",   "bro",    "funny",  "cool",
};

std::vector<std::string> general_vocabulary(std::size_t size) {
  static constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
  static constexpr const char* kVowels[] = {"a", "e", "i", "o", "u"};
  std::vector<std::string> words;
  for (const char* w : kCommonWords) {
    if (words.size() == size) return words;
    words.emplace_back(w);
  }
  // Pronounceable three-syllable filler words, enumerated deterministically.
  constexpr std::size_t kSyllables = std::size(kOnsets) * std::size(kVowels);
  for (std::size_t i = 0; words.size() < size; ++i) {
    std::string w;
    std::size_t code = i + kSyllables * kSyllables;  // skip the short forms
    while (code > 0) {
      const std::size_t s = code % kSyllables;
      w += kOnsets[s / std::size(kVowels)];
      w += kVowels[s % std::size(kVowels)];
      code /= kSyllables;
    }
    words.push_back(std::move(w));
  }
  return words;
}

std::vector<WeightedTerm> default_memorial() {
  return {{"miss", 4.0},       {"love", 3.0},        {"heaven", 1.5},   {"gone", 1.5},        {"wish", 1.2},
          {"missed", 1.0},     {"thinking", 1.0},    {"remember", 1.0}, {"angel", 0.8},       {"peace", 0.8},
          {"memories", 0.7},   {"forget", 0.6},      {"rest", 0.6},     {"sorry", 0.6},       {"rip", 0.5},
          {"grave", 0.3},      {"better place", 0.3}, {"miss love", 0.4}, {"rest in peace", 0.3}};
}

std::vector<WeightedTerm> default_sadness() {
  return {{"cry", 1.0},    {"crying", 1.0},      {"tears", 1.0}, {"sad", 1.0},  {"hurt", 0.8},   {"grief", 0.5},
          {"heartbroken", 0.4}, {"lost", 0.8},   {"pain", 0.8},  {"broken", 0.5}, {"lonely", 0.5}};
}

std::vector<WeightedTerm> default_greetings() {
  return {{"hey", 4.0},      {"lol", 3.0},     {"haha", 1.5},  {"yo", 1.5},    {"ya", 1.0},    {"yeah", 1.0},
          {"wait", 1.0},     {"hang", 1.0},    {"soon", 1.0},  {"whats up", 0.8}, {"call me", 0.8},
          {"tonight", 0.8},  {"party", 0.8},   {"come", 0.7},  {"home", 0.6},  {"seen", 0.5},  {"need", 0.5},
          {"wanna", 0.6},    {"aww", 0.4},     {"stay safe", 0.3}, {"ooooooo", 0.2}};
}

// Cumulative-weight sampler; ties resolve to the first bucket whose cumulative
// weight exceeds the draw.
class Sampler {
 public:
  Sampler() = default;
  explicit Sampler(std::vector<double> weights) {
    double total = 0.0;
    for (const double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error("synth: term weights must be finite and nonnegative");
      total += w;
      cumulative_.push_back(total);
    }
    if (!(total > 0.0)) throw Error("synth: a term pool has zero total weight");
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

struct Pool {
  std::vector<std::string> terms;
  Sampler sampler;

  explicit Pool(const std::vector<WeightedTerm>& weighted) {
    std::vector<double> w;
    for (const auto& t : weighted) {
      if (t.term.empty()) throw Error("synth: empty term in a pool");
      terms.push_back(t.term);
      w.push_back(t.weight);
    }
    sampler = Sampler(std::move(w));
  }

  const std::string& draw(Rng& rng) const { return terms[sampler.draw(rng)]; }
};

void validate(const SynthConfig& c) {
  if (c.n_profiles == 0) throw Error("synth: n_profiles must be positive (zero profiles requested)");
  if (!(c.post_profile_fraction > 0.0 && c.post_profile_fraction <= 1.0)) {
    throw Error("synth: post_profile_fraction must lie in (0, 1]");
  }
  for (const double m : {c.mean_pre_comments, c.mean_post_comments, c.pre_length_mean, c.post_length_mean,
                         c.pre_span_days, c.first_post_delay_days, c.post_gap_days}) {
    if (!(m > 0.0) || !std::isfinite(m)) throw Error("synth: all means must be positive");
  }
  if (c.mean_pre_comments < 1.0 || c.mean_post_comments < 1.0) {
    throw Error("synth: mean comment counts must be at least 1");
  }
  if (c.general_vocab_size == 0) throw Error("synth: general_vocab_size must be positive");
  if (!(c.zipf_exponent >= 0.0)) throw Error("synth: zipf_exponent must be nonnegative");
  for (const double r : {c.memorial_rate, c.sadness_rate, c.greeting_rate, c.pre_memorial_rate,
                         c.rip_dotted_fraction, c.pre_question_rate, c.post_question_rate, c.pre_exclamation_rate,
                         c.post_exclamation_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error("synth: rates must lie in [0, 1]");
  }
  if (c.memorial_rate + c.sadness_rate > 1.0 || c.greeting_rate + c.pre_memorial_rate > 1.0) {
    throw Error("synth: pool rates of one class must sum to at most 1");
  }
  if (c.pre_question_rate + c.pre_exclamation_rate > 1.0 || c.post_question_rate + c.post_exclamation_rate > 1.0) {
    throw Error("synth: punctuation rates of one class must sum to at most 1");
  }
  if (c.death_window_start >= c.death_window_end) throw Error("synth: empty death window");
}

class CommentWriter {
 public:
  CommentWriter(const SynthConfig& config, Rng& rng)
      : config_(config),
        rng_(rng),
        general_(general_vocabulary(config.general_vocab_size)),
        memorial_(config.memorial_terms),
        sadness_(config.sadness_terms),
        greetings_(config.greeting_terms) {
    std::vector<double> zipf;
    for (std::size_t r = 0; r < general_.size(); ++r) {
      zipf.push_back(1.0 / std::pow(static_cast<double>(r + 1), config.zipf_exponent));
    }
    general_sampler_ = Sampler(std::move(zipf));
  }

  std::string write(Label label) {
    const bool post = label == Label::post;
    const std::size_t length =
        std::max<std::size_t>(1, rng_.poisson(post ? config_.post_length_mean : config_.pre_length_mean));
    std::string text;
    for (std::size_t i = 0; i < length; ++i) {
      if (!text.empty()) text.push_back(' ');
      text += render(draw_term(post));
    }
    text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    const double u = rng_.uniform();
    const double q = post ? config_.post_question_rate : config_.pre_question_rate;
    const double e = post ? config_.post_exclamation_rate : config_.pre_exclamation_rate;
    if (u < q) {
      text.push_back('?');
    } else if (u < q + e) {
      text.push_back('!');
    }
    return text;
  }

 private:
  const std::string& draw_term(bool post) {
    const double u = rng_.uniform();
    if (post) {
      if (u < config_.memorial_rate) return memorial_.draw(rng_);
      if (u < config_.memorial_rate + config_.sadness_rate) return sadness_.draw(rng_);
    } else {
      if (u < config_.greeting_rate) return greetings_.draw(rng_);
      if (u < config_.greeting_rate + config_.pre_memorial_rate) return memorial_.draw(rng_);
    }
    return general_[general_sampler_.draw(rng_)];
  }

  std::string render(const std::string& term) {
    if (term == "rip" && rng_.uniform() < config_.rip_dotted_fraction) return "R.I.P.";
    return term;
  }

  const SynthConfig& config_;
  Rng& rng_;
  std::vector<std::string> general_;
  Sampler general_sampler_;
  Pool memorial_;
  Pool sadness_;
  Pool greetings_;
};

std::string numbered(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%04zu", prefix, n);
  return buf;
}

}  // namespace

SynthConfig SynthConfig::with_default_pools() const {
  SynthConfig c = *this;
  if (c.memorial_terms.empty()) c.memorial_terms = default_memorial();
  if (c.sadness_terms.empty()) c.sadness_terms = default_sadness();
  if (c.greeting_terms.empty()) c.greeting_terms = default_greetings();
  return c;
}

SynthConfig desk200_config() {
  SynthConfig c;
  c.seed = 7;
  c.n_profiles = 200;
  c.post_profile_fraction = 0.8;
  return c.with_default_pools();
}

Corpus generate(const SynthConfig& requested) {
  const SynthConfig config = requested.with_default_pools();
  validate(config);
  Rng rng(config.seed);
  CommentWriter writer(config, rng);

  const auto n_post = static_cast<std::size_t>(
      std::llround(config.post_profile_fraction * static_cast<double>(config.n_profiles)));
  std::vector<char> has_death(config.n_profiles, 0);
  std::fill_n(has_death.begin(), std::min(n_post, config.n_profiles), 1);
  rng.shuffle(std::span<char>(has_death));

  const double window = static_cast<double>(config.death_window_end - config.death_window_start);
  const double pre_span = config.pre_span_days * kSecondsPerDay;
  std::vector<Profile> profiles;
  profiles.reserve(config.n_profiles);
  for (std::size_t p = 0; p < config.n_profiles; ++p) {
    Profile profile;
    profile.profile_id = numbered("p", p + 1);
    const auto anchor = config.death_window_start + static_cast<std::int64_t>(std::floor(rng.uniform() * window));
    if (has_death[p]) profile.death_time = anchor;

    // Pre-mortem comments fall strictly before the anchor.
    const std::size_t n_pre = 1 + rng.poisson(config.mean_pre_comments - 1.0);
    std::vector<std::int64_t> pre_times(n_pre);
    for (auto& t : pre_times) t = anchor - 1 - static_cast<std::int64_t>(std::floor(rng.uniform() * pre_span));
    std::sort(pre_times.begin(), pre_times.end());
    std::vector<std::pair<std::int64_t, Label>> slots;
    for (const auto t : pre_times) slots.emplace_back(t, Label::pre);
    if (has_death[p]) {
      const std::size_t n_post_comments = 1 + rng.poisson(config.mean_post_comments - 1.0);
      double offset = 0.0;
      for (std::size_t k = 0; k < n_post_comments; ++k) {
        offset += rng.exponential(k == 0 ? config.first_post_delay_days : config.post_gap_days) * kSecondsPerDay;
        slots.emplace_back(anchor + static_cast<std::int64_t>(std::floor(offset)), Label::post);
      }
    }
    for (std::size_t k = 0; k < slots.size(); ++k) {
      Comment c;
      c.profile_id = profile.profile_id;
      c.comment_id = profile.profile_id + "-" + numbered("c", k + 1);
      c.timestamp = slots[k].first;
      c.label = slots[k].second;
      c.text = writer.write(slots[k].second);
      profile.comments.push_back(std::move(c));
    }
    profiles.push_back(std::move(profile));
  }
  return Corpus(std::move(profiles));
}

namespace {

json terms_to_json(const std::vector<WeightedTerm>& terms) {
  json out = json::array();
  for (const auto& t : terms) out.push_back({{"term", t.term}, {"weight", t.weight}});
  return out;
}

std::vector<WeightedTerm> terms_from_json(const json& j, const char* key) {
  std::vector<WeightedTerm> out;
  if (!j.contains(key)) return out;
  for (const auto& t : j.at(key)) {
    out.push_back({detail::require<std::string>(t, "term"), detail::require<double>(t, "weight")});
  }
  return out;
}

}  // namespace

json to_json(const SynthConfig& c) {
  return {{"seed", c.seed},
          {"n_profiles", c.n_profiles},
          {"post_profile_fraction", c.post_profile_fraction},
          {"mean_pre_comments", c.mean_pre_comments},
          {"mean_post_comments", c.mean_post_comments},
          {"pre_length_mean", c.pre_length_mean},
          {"post_length_mean", c.post_length_mean},
          {"general_vocab_size", c.general_vocab_size},
          {"zipf_exponent", c.zipf_exponent},
          {"memorial_terms", terms_to_json(c.memorial_terms)},
          {"sadness_terms", terms_to_json(c.sadness_terms)},
          {"greeting_terms", terms_to_json(c.greeting_terms)},
          {"memorial_rate", c.memorial_rate},
          {"sadness_rate", c.sadness_rate},
          {"greeting_rate", c.greeting_rate},
          {"pre_memorial_rate", c.pre_memorial_rate},
          {"rip_dotted_fraction", c.rip_dotted_fraction},
          {"pre_question_rate", c.pre_question_rate},
          {"post_question_rate", c.post_question_rate},
          {"pre_exclamation_rate", c.pre_exclamation_rate},
          {"post_exclamation_rate", c.post_exclamation_rate},
          {"death_window_start", c.death_window_start},
          {"death_window_end", c.death_window_end},
          {"pre_span_days", c.pre_span_days},
          {"first_post_delay_days", c.first_post_delay_days},
          {"post_gap_days", c.post_gap_days}};
}

SynthConfig synth_config_from_json(const json& j) {
  if (!j.is_object()) throw Error("synth config must be a JSON object");
  SynthConfig d;
  SynthConfig c;
  c.seed = detail::optional_field<std::uint64_t>(j, "seed", d.seed);
  c.n_profiles = detail::optional_field<std::size_t>(j, "n_profiles", d.n_profiles);
  c.post_profile_fraction = detail::optional_field<double>(j, "post_profile_fraction", d.post_profile_fraction);
  c.mean_pre_comments = detail::optional_field<double>(j, "mean_pre_comments", d.mean_pre_comments);
  c.mean_post_comments = detail::optional_field<double>(j, "mean_post_comments", d.mean_post_comments);
  c.pre_length_mean = detail::optional_field<double>(j, "pre_length_mean", d.pre_length_mean);
  c.post_length_mean = detail::optional_field<double>(j, "post_length_mean", d.post_length_mean);
  c.general_vocab_size = detail::optional_field<std::size_t>(j, "general_vocab_size", d.general_vocab_size);
  c.zipf_exponent = detail::optional_field<double>(j, "zipf_exponent", d.zipf_exponent);
  c.memorial_terms = terms_from_json(j, "memorial_terms");
  c.sadness_terms = terms_from_json(j, "sadness_terms");
  c.greeting_terms = terms_from_json(j, "greeting_terms");
  c.memorial_rate = detail::optional_field<double>(j, "memorial_rate", d.memorial_rate);
  c.sadness_rate = detail::optional_field<double>(j, "sadness_rate", d.sadness_rate);
  c.greeting_rate = detail::optional_field<double>(j, "greeting_rate", d.greeting_rate);
  c.pre_memorial_rate = detail::optional_field<double>(j, "pre_memorial_rate", d.pre_memorial_rate);
  c.rip_dotted_fraction = detail::optional_field<double>(j, "rip_dotted_fraction", d.rip_dotted_fraction);
  c.pre_question_rate = detail::optional_field<double>(j, "pre_question_rate", d.pre_question_rate);
  c.post_question_rate = detail::optional_field<double>(j, "post_question_rate", d.post_question_rate);
  c.pre_exclamation_rate = detail::optional_field<double>(j, "pre_exclamation_rate", d.pre_exclamation_rate);
  c.post_exclamation_rate = detail::optional_field<double>(j, "post_exclamation_rate", d.post_exclamation_rate);
  c.death_window_start = detail::optional_field<std::int64_t>(j, "death_window_start", d.death_window_start);
  c.death_window_end = detail::optional_field<std::int64_t>(j, "death_window_end", d.death_window_end);
  c.pre_span_days = detail::optional_field<double>(j, "pre_span_days", d.pre_span_days);
  c.first_post_delay_days = detail::optional_field<double>(j, "first_post_delay_days", d.first_post_delay_days);
  c.post_gap_days = detail::optional_field<double>(j, "post_gap_days", d.post_gap_days);
  return c;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open synth config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("synth config '" + path.string() + "': " + e.what());
  }
  return synth_config_from_json(j);
}

}  // namespace mortem
