#include <algorithm>
#include <cstdio>
#include <ostream>

#include "mortem/error.hpp"
#include "mortem/evaluation.hpp"

namespace mortem {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t day_since(std::int64_t t, std::int64_t death) {
  const std::int64_t delta = t - death;
  // floor division for negative deltas as well
  return delta >= 0 ? delta / kSecondsPerDay : -((-delta + kSecondsPerDay - 1) / kSecondsPerDay);
}

double lookup(const std::vector<CurvePoint>& points, std::int64_t key) {
  double value = 0.0;
  for (const auto& p : points) {
    if (p.key > key) break;
    value = p.fraction;
  }
  return value;
}

}  // namespace

double EarlyDetectionCurve::fraction_at_count(std::int64_t m) const { return lookup(by_count, m); }

double EarlyDetectionCurve::fraction_at_day(std::int64_t day) const { return lookup(by_time, day); }

EarlyDetectionCurve early_detection(const TrainedModel& model, std::span<const Profile> test_profiles) {
  if (model.unit != UnitKind::profile) throw Error("early detection needs a profile-level model");
  EarlyDetectionCurve curve;
  std::vector<std::int64_t> detect_count;
  std::vector<std::int64_t> detect_day;
  std::int64_t max_count = 0;
  std::int64_t max_day = 0;

  for (const auto& profile : test_profiles) {
    if (!profile.death_time) continue;
    const auto death = *profile.death_time;
    std::vector<Comment> visible;
    std::vector<const Comment*> post;
    for (const auto& c : profile.comments) {
      if (c.timestamp < death) {
        visible.push_back(c);
      } else {
        post.push_back(&c);
      }
    }
    if (post.empty()) {
      curve.excluded.push_back(profile.profile_id);
      continue;
    }
    ++curve.test_profiles;
    max_count = std::max(max_count, static_cast<std::int64_t>(post.size()));
    max_day = std::max(max_day, day_since(post.back()->timestamp, death));
    if (!visible.empty() && predict_text(model, join_comment_texts(visible)).label == Label::post) {
      ++curve.flagged_before_death;
    }
    for (std::size_t m = 1; m <= post.size(); ++m) {
      visible.push_back(*post[m - 1]);
      if (predict_text(model, join_comment_texts(visible)).label == Label::post) {
        detect_count.push_back(static_cast<std::int64_t>(m));
        detect_day.push_back(day_since(post[m - 1]->timestamp, death));
        break;
      }
    }
  }
  curve.detected = detect_count.size();
  if (curve.test_profiles == 0) return curve;

  const double total = static_cast<double>(curve.test_profiles);
  const auto cumulative = [&](const std::vector<std::int64_t>& events, std::int64_t first, std::int64_t last) {
    std::vector<CurvePoint> points;
    for (std::int64_t key = first; key <= last; ++key) {
      const auto hits = std::count_if(events.begin(), events.end(), [key](std::int64_t e) { return e <= key; });
      points.push_back({key, static_cast<double>(hits) / total});
    }
    return points;
  };
  curve.by_count = cumulative(detect_count, 1, max_count);
  curve.by_time = cumulative(detect_day, 0, max_day);
  return curve;
}

EarlyDetectionCurve early_detection(std::span<const Profile> train_profiles, std::span<const Profile> test_profiles,
                                    const PipelineConfig& config, const CltExtractor& clt) {
  if (config.unit != UnitKind::profile) throw Error("early detection trains on profile-level documents");
  const auto train_docs = make_documents(train_profiles, UnitKind::profile);
  const auto model = fit_pipeline(config, train_docs, clt);
  return early_detection(model, test_profiles);
}

nlohmann::json to_json(const EarlyDetectionCurve& curve) {
  nlohmann::json by_count = nlohmann::json::array();
  for (const auto& p : curve.by_count) by_count.push_back({{"m", p.key}, {"fraction", p.fraction}});
  nlohmann::json by_time = nlohmann::json::array();
  for (const auto& p : curve.by_time) by_time.push_back({{"day", p.key}, {"fraction", p.fraction}});
  return {{"test_profiles", curve.test_profiles},
          {"detected", curve.detected},
          {"excluded", curve.excluded},
          {"flagged_before_death", curve.flagged_before_death},
          {"by_count", by_count},
          {"by_time", by_time}};
}

void write_curve_csv(const EarlyDetectionCurve& curve, std::ostream& out) {
  char buf[64];
  out << "m,fraction\n";
  for (const auto& p : curve.by_count) {
    std::snprintf(buf, sizeof buf, "%lld,%.6f\n", static_cast<long long>(p.key), p.fraction);
    out << buf;
  }
  out << "\nday,fraction\n";
  for (const auto& p : curve.by_time) {
    std::snprintf(buf, sizeof buf, "%lld,%.6f\n", static_cast<long long>(p.key), p.fraction);
    out << buf;
  }
}

}  // namespace mortem
