#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mortem {

class StopwordList;

enum class Label { pre, post };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

enum class UnitKind { profile, comment };

std::string_view to_string(UnitKind unit);
UnitKind parse_unit(std::string_view text);

struct Comment {
  std::string comment_id;
  std::string profile_id;
  std::int64_t timestamp = 0;  // epoch seconds, UTC
  std::string text;
  std::optional<Label> label;
};

struct Profile {
  std::string profile_id;
  std::optional<std::int64_t> death_time;
  std::vector<Comment> comments;  // ascending (timestamp, comment_id)

  bool is_post_mortem() const { return death_time.has_value(); }
};

/// A unit of classification: a whole profile or a single comment.
struct Document {
  UnitKind unit = UnitKind::comment;
  std::string source_id;
  std::string text;
  std::optional<Label> label;
};

/// Immutable, validated collection of profiles ordered by profile_id.
///
/// Construction enforces the corpus invariants: positive timestamps, unique
/// comment ids, comment/profile id agreement, chronological comment order,
/// and label coherence with the profile's death time (labels are derived
/// where absent).
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Profile> profiles);

  std::span<const Profile> profiles() const { return profiles_; }
  std::size_t profile_count() const { return profiles_.size(); }
  std::size_t comment_count() const { return comment_count_; }
  bool empty() const { return profiles_.empty(); }

  /// True when every comment carries a label.
  bool fully_labeled() const;

 private:
  std::vector<Profile> profiles_;
  std::size_t comment_count_ = 0;
};

/// Reads the one-record-per-comment JSONL format. Errors cite the 1-based line.
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

/// Writes one JSONL record per comment in corpus order. Labels and the
/// profile death time are written on every record that has them.
void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// label(c) = post iff c.timestamp >= death_time. Throws when the profile has
/// no death time or a stored label disagrees with the derived one.
Profile derive_labels(Profile profile);

/// Profile documents concatenate every comment (chronologically, single
/// space) and carry the profile's mortality as label. Comment documents carry
/// the comment's own label. Order: profile_id, then timestamp.
std::vector<Document> make_documents(const Corpus& corpus, UnitKind unit);
std::vector<Document> make_documents(std::span<const Profile> profiles, UnitKind unit);

/// Concatenation rule shared by profile documents and early detection.
std::string join_comment_texts(std::span<const Comment> comments);

/// Stratified k-fold partition. Returns k lists of document indices (each
/// ascending). Deterministic for a given seed.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const Label> labels,
                                                       std::size_t k, std::uint64_t seed);
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const Document> documents,
                                                       std::size_t k, std::uint64_t seed);

struct ProfileSplit {
  std::vector<Profile> train;
  std::vector<Profile> test;
};

/// Random profile-level split with |test| = round(test_fraction * N).
ProfileSplit split_profiles(const Corpus& corpus, double test_fraction, std::uint64_t seed);

struct CountAndFraction {
  std::size_t count = 0;
  double fraction = 0.0;
};

struct CorpusStats {
  std::size_t total_comments = 0;
  std::size_t total_profiles = 0;
  CountAndFraction post_comments;
  CountAndFraction pre_comments;
  double mean_comments_per_profile = 0.0;
  double median_comments_per_profile = 0.0;
  double mean_words_per_comment = 0.0;
  double mean_post_words_per_comment = 0.0;
  double mean_pre_words_per_comment = 0.0;
  double mean_post_comments_per_profile = 0.0;
  double mean_pre_comments_per_profile = 0.0;
};

/// Requires a fully labeled corpus. Word counts use the project tokenizer.
CorpusStats corpus_stats(const Corpus& corpus);

using NgramCount = std::pair<std::string, std::size_t>;

/// Most frequent n-grams (exactly n tokens, stopwords removed first) over the
/// comments of one class. Descending frequency, ties lexicographic.
std::vector<NgramCount> top_ngrams(const Corpus& corpus, int n, std::size_t k, Label cls);
std::vector<NgramCount> top_ngrams(const Corpus& corpus, int n, std::size_t k, Label cls,
                                   const StopwordList& stopwords);

}  // namespace mortem
