#include "mortem/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "mortem/error.hpp"
#include "mortem/random.hpp"
#include "mortem/text.hpp"

namespace mortem {

using nlohmann::json;

std::string_view to_string(Label label) { return label == Label::post ? "post" : "pre"; }

Label parse_label(std::string_view text) {
  if (text == "post") return Label::post;
  if (text == "pre") return Label::pre;
  throw Error("unknown label '" + std::string(text) + "' (expected pre|post)");
}

std::string_view to_string(UnitKind unit) { return unit == UnitKind::profile ? "profile" : "comment"; }

UnitKind parse_unit(std::string_view text) {
  if (text == "profile") return UnitKind::profile;
  if (text == "comment") return UnitKind::comment;
  throw Error("unknown unit '" + std::string(text) + "' (expected profile|comment)");
}

namespace {

bool comment_before(const Comment& a, const Comment& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.comment_id < b.comment_id;
}

}  // namespace

Profile derive_labels(Profile profile) {
  if (!profile.death_time) {
    throw Error("cannot derive labels for profile '" + profile.profile_id + "': no death_time");
  }
  std::vector<std::string> conflicts;
  for (auto& c : profile.comments) {
    const Label derived = c.timestamp >= *profile.death_time ? Label::post : Label::pre;
    if (c.label && *c.label != derived) conflicts.push_back(c.comment_id);
    c.label = derived;
  }
  if (!conflicts.empty()) {
    std::string list;
    for (const auto& id : conflicts) list += (list.empty() ? "" : ", ") + id;
    throw Error("stored labels conflict with death_time in profile '" + profile.profile_id +
                "': " + list);
  }
  return profile;
}

Corpus::Corpus(std::vector<Profile> profiles) : profiles_(std::move(profiles)) {
  std::sort(profiles_.begin(), profiles_.end(),
            [](const Profile& a, const Profile& b) { return a.profile_id < b.profile_id; });
  std::unordered_set<std::string> comment_ids;
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    auto& p = profiles_[i];
    if (i > 0 && profiles_[i - 1].profile_id == p.profile_id) {
      throw Error("duplicate profile_id '" + p.profile_id + "'");
    }
    for (const auto& c : p.comments) {
      if (c.profile_id != p.profile_id) {
        throw Error("comment '" + c.comment_id + "' belongs to '" + c.profile_id +
                    "' but was placed in profile '" + p.profile_id + "'");
      }
      if (c.timestamp <= 0) throw Error("comment '" + c.comment_id + "' has non-positive timestamp");
      if (!comment_ids.insert(c.comment_id).second) {
        throw Error("duplicate comment_id '" + c.comment_id + "'");
      }
    }
    std::sort(p.comments.begin(), p.comments.end(), comment_before);
    if (p.death_time) p = derive_labels(std::move(p));
    comment_count_ += p.comments.size();
  }
}

bool Corpus::fully_labeled() const {
  for (const auto& p : profiles_) {
    for (const auto& c : p.comments) {
      if (!c.label) return false;
    }
  }
  return true;
}

Corpus parse_corpus(std::istream& in) {
  std::map<std::string, Profile> by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fail = [&](const std::string& why) -> Error {
      return Error("corpus line " + std::to_string(line_no) + ": " + why);
    };
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw fail(std::string("invalid JSON (") + e.what() + ")");
    }
    if (!record.is_object()) throw fail("record is not a JSON object");
    for (const char* key : {"comment_id", "profile_id", "text"}) {
      if (!record.contains(key)) throw fail(std::string("missing field \"") + key + "\"");
      if (!record[key].is_string()) throw fail(std::string("field \"") + key + "\" must be a string");
    }
    if (!record.contains("timestamp")) throw fail("missing field \"timestamp\"");
    if (!record["timestamp"].is_number_integer()) throw fail("field \"timestamp\" must be an integer");

    Comment c;
    c.comment_id = record["comment_id"].get<std::string>();
    c.profile_id = record["profile_id"].get<std::string>();
    c.text = record["text"].get<std::string>();
    c.timestamp = record["timestamp"].get<std::int64_t>();
    if (c.timestamp <= 0) throw fail("timestamp must be positive");
    if (record.contains("label") && !record["label"].is_null()) {
      if (!record["label"].is_string()) throw fail("field \"label\" must be \"pre\" or \"post\"");
      try {
        c.label = parse_label(record["label"].get<std::string>());
      } catch (const Error& e) {
        throw fail(e.what());
      }
    }
    std::optional<std::int64_t> death;
    if (record.contains("death_time") && !record["death_time"].is_null()) {
      if (!record["death_time"].is_number_integer()) throw fail("field \"death_time\" must be an integer");
      death = record["death_time"].get<std::int64_t>();
      if (*death <= 0) throw fail("death_time must be positive");
    }

    auto& profile = by_id[c.profile_id];
    if (profile.profile_id.empty()) profile.profile_id = c.profile_id;
    if (death) {
      if (profile.death_time && *profile.death_time != *death) {
        throw fail("death_time disagrees with earlier records of profile '" + c.profile_id + "'");
      }
      profile.death_time = death;
    }
    profile.comments.push_back(std::move(c));
  }

  std::vector<Profile> profiles;
  profiles.reserve(by_id.size());
  for (auto& [id, p] : by_id) profiles.push_back(std::move(p));
  return Corpus(std::move(profiles));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path.string() + "'");
  return parse_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& p : corpus.profiles()) {
    for (const auto& c : p.comments) {
      json record = {{"comment_id", c.comment_id},
                     {"profile_id", c.profile_id},
                     {"timestamp", c.timestamp},
                     {"text", c.text}};
      if (c.label) record["label"] = std::string(to_string(*c.label));
      if (p.death_time) record["death_time"] = *p.death_time;
      out << record.dump() << '\n';
    }
  }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file '" + path.string() + "'");
  write_corpus(corpus, out);
  if (!out) throw Error("failed writing corpus file '" + path.string() + "'");
}

std::string join_comment_texts(std::span<const Comment> comments) {
  std::string text;
  for (std::size_t i = 0; i < comments.size(); ++i) {
    if (i > 0) text.push_back(' ');
    text += comments[i].text;
  }
  return text;
}

std::vector<Document> make_documents(std::span<const Profile> profiles, UnitKind unit) {
  std::vector<Document> docs;
  for (const auto& p : profiles) {
    if (unit == UnitKind::profile) {
      docs.push_back({UnitKind::profile, p.profile_id, join_comment_texts(p.comments),
                      p.is_post_mortem() ? Label::post : Label::pre});
      continue;
    }
    for (const auto& c : p.comments) {
      if (!c.label) throw Error("comment '" + c.comment_id + "' is unlabeled");
      docs.push_back({UnitKind::comment, c.comment_id, c.text, c.label});
    }
  }
  return docs;
}

std::vector<Document> make_documents(const Corpus& corpus, UnitKind unit) {
  return make_documents(corpus.profiles(), unit);
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const Label> labels, std::size_t k,
                                                       std::uint64_t seed) {
  if (k < 2) throw Error("stratified_kfold: k must be at least 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<int>(labels[i])].push_back(i);
  for (const auto& members : by_class) {
    if (members.size() < k) {
      throw Error("stratified_kfold: a class has " + std::to_string(members.size()) +
                  " members, fewer than k=" + std::to_string(k));
    }
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t next = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (const std::size_t index : members) {
      folds[next].push_back(index);
      next = (next + 1) % k;
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const Document> documents,
                                                       std::size_t k, std::uint64_t seed) {
  std::vector<Label> labels;
  labels.reserve(documents.size());
  for (const auto& d : documents) {
    if (!d.label) throw Error("stratified_kfold: document '" + d.source_id + "' is unlabeled");
    labels.push_back(*d.label);
  }
  return stratified_kfold(labels, k, seed);
}

ProfileSplit split_profiles(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error("split_profiles: test_fraction must lie in (0, 1)");
  }
  if (corpus.empty()) throw Error("split_profiles: corpus is empty");
  const auto profiles = corpus.profiles();
  std::vector<std::size_t> order(profiles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(order.size())));
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  ProfileSplit split;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_test ? split.test : split.train).push_back(profiles[order[i]]);
  }
  return split;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  if (!corpus.fully_labeled()) throw Error("corpus_stats: corpus has unlabeled comments");
  CorpusStats s;
  s.total_profiles = corpus.profile_count();
  s.total_comments = corpus.comment_count();
  std::vector<double> per_profile;
  std::size_t words = 0;
  std::size_t post_words = 0;
  std::size_t pre_words = 0;
  for (const auto& p : corpus.profiles()) {
    per_profile.push_back(static_cast<double>(p.comments.size()));
    for (const auto& c : p.comments) {
      const std::size_t n = tokenize(c.text).total_tokens();
      words += n;
      if (*c.label == Label::post) {
        ++s.post_comments.count;
        post_words += n;
      } else {
        ++s.pre_comments.count;
        pre_words += n;
      }
    }
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  s.post_comments.fraction = ratio(s.post_comments.count, s.total_comments);
  s.pre_comments.fraction = s.total_comments == 0 ? 0.0 : 1.0 - s.post_comments.fraction;
  s.mean_comments_per_profile = ratio(s.total_comments, s.total_profiles);
  if (!per_profile.empty()) {
    std::sort(per_profile.begin(), per_profile.end());
    const std::size_t mid = per_profile.size() / 2;
    s.median_comments_per_profile = per_profile.size() % 2 == 1
                                        ? per_profile[mid]
                                        : 0.5 * (per_profile[mid - 1] + per_profile[mid]);
  }
  s.mean_words_per_comment = ratio(words, s.total_comments);
  s.mean_post_words_per_comment = ratio(post_words, s.post_comments.count);
  s.mean_pre_words_per_comment = ratio(pre_words, s.pre_comments.count);
  s.mean_post_comments_per_profile = ratio(s.post_comments.count, s.total_profiles);
  s.mean_pre_comments_per_profile = ratio(s.pre_comments.count, s.total_profiles);
  return s;
}

std::vector<NgramCount> top_ngrams(const Corpus& corpus, int n, std::size_t k, Label cls,
                                   const StopwordList& stopwords) {
  if (n < 1) throw Error("top_ngrams: n must be positive");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& p : corpus.profiles()) {
    for (const auto& c : p.comments) {
      if (c.label != cls) continue;
      const auto tokens = remove_stopwords(tokenize(c.text).tokens, stopwords);
      for (auto& gram : extract_ngrams(tokens, n, n)) ++counts[std::move(gram)];
    }
  }
  std::vector<NgramCount> rows(counts.begin(), counts.end());
  std::sort(rows.begin(), rows.end(), [](const NgramCount& a, const NgramCount& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (rows.size() > k) rows.resize(k);
  return rows;
}

std::vector<NgramCount> top_ngrams(const Corpus& corpus, int n, std::size_t k, Label cls) {
  return top_ngrams(corpus, n, k, cls, StopwordList::english());
}

}  // namespace mortem
