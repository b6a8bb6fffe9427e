#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mortem/corpus.hpp"

namespace mortem {

struct WeightedTerm {
  std::string term;  // may contain spaces (emitted as several tokens)
  double weight = 1.0;
};

/// Shape of a synthetic corpus. Comment counts per profile are 1 + Poisson
/// (mean - 1); comment lengths are Poisson(length mean), at least one token.
/// Every token is drawn from one of several pools:
///   post-mortem: memorial pool with memorial_rate, sadness pool with
///                sadness_rate, otherwise the shared general pool;
///   pre-mortem:  greeting pool with greeting_rate, memorial pool with
///                pre_memorial_rate, otherwise the general pool.
/// The general pool is the built-in common-word list, extended with
/// pronounceable filler words up to general_vocab_size, sampled by a Zipf law.
struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t n_profiles = 200;
  double post_profile_fraction = 0.8;
  double mean_pre_comments = 10.0;
  double mean_post_comments = 8.0;
  double pre_length_mean = 23.0;
  double post_length_mean = 49.0;
  std::size_t general_vocab_size = 600;
  double zipf_exponent = 1.0;

  std::vector<WeightedTerm> memorial_terms;
  std::vector<WeightedTerm> sadness_terms;
  std::vector<WeightedTerm> greeting_terms;
  double memorial_rate = 0.08;
  double sadness_rate = 0.02;
  double greeting_rate = 0.08;
  double pre_memorial_rate = 0.01;

  double rip_dotted_fraction = 0.3;  // "rip" rendered as "R.I.P."
  double pre_question_rate = 0.35;   // chance a pre-mortem comment ends in '?'
  double post_question_rate = 0.05;
  double pre_exclamation_rate = 0.3;
  double post_exclamation_rate = 0.15;

  std::int64_t death_window_start = 1136073600;  // 2006-01-01
  std::int64_t death_window_end = 1262304000;    // 2010-01-01
  double pre_span_days = 365.0;
  double first_post_delay_days = 0.6;  // mean of the first post-mortem gap
  double post_gap_days = 2.0;          // mean gap between later post comments

  /// Fills any empty term pool with the built-in defaults.
  SynthConfig with_default_pools() const;
};

/// The shipped "desk-200" configuration: 200 profiles, 80% post-mortem, seed 7.
SynthConfig desk200_config();

nlohmann::json to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const nlohmann::json& j);
SynthConfig load_synth_config(const std::filesystem::path& path);

/// Deterministic for a given config. Throws when n_profiles == 0 or the
/// config is otherwise invalid.
Corpus generate(const SynthConfig& config);

}  // namespace mortem
