#include "arousal/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "arousal/parallel.hpp"

namespace arousal {

ProbabilityVector fuse_epoch_probabilities(std::size_t record_len, std::span<const EpochSpan> spans,
                                           std::span<const double> epoch_probs) {
  if (spans.size() != epoch_probs.size()) throw std::invalid_argument("one probability per span required");
  ProbabilityVector probs(record_len, 0.0);
  std::vector<std::uint32_t> count(record_len, 0);
  for (std::size_t s = 0; s < spans.size(); ++s) {
    if (spans[s].end > record_len) throw std::invalid_argument("span past record end");
    const double p = epoch_probs[s];
    for (std::size_t i = spans[s].start; i < spans[s].end; ++i) {
      probs[i] += (p - probs[i]) / static_cast<double>(++count[i]);
    }
  }
  if (std::find(count.begin(), count.end(), 0u) != count.end()) {
    throw std::invalid_argument("spans leave samples uncovered");
  }
  return probs;
}

ProbabilityVector predict_record(const Record& record, const ModelDatabase& db, double test_overlap) {
  if (db.models.empty()) throw std::invalid_argument("model database is empty");
  const auto spans = segment_test(record.length(), record.sampling_rate, db.epoch_seconds, test_overlap);
  const FeatureMatrix X = extract_epochs(record, spans, db.feature_config);
  const auto epoch_probs = predict_rows(db, X);
  return fuse_epoch_probabilities(record.length(), spans, epoch_probs);
}

void write_vec(std::span<const double> probs, const std::filesystem::path& path) {
  std::string text;
  text.reserve(probs.size() * 6);
  char buf[32];
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw VecError(i + 1, "probability " + std::to_string(p) + " at sample " + std::to_string(i) + " outside [0,1]");
    }
    const int len = std::snprintf(buf, sizeof buf, "%.3f\n", p);
    text.append(buf, static_cast<std::size_t>(len));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw VecError(0, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw VecError(0, "write failed: " + path.string());
}

ProbabilityVector read_vec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VecError(0, "cannot open " + path.string());
  ProbabilityVector probs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (line.empty() || ec != std::errc{} || ptr != line.data() + line.size()) {
      throw VecError(lineno, path.string() + ":" + std::to_string(lineno) + ": malformed probability '" + line + "'");
    }
    if (!(v >= 0.0 && v <= 1.0)) {
      throw VecError(lineno, path.string() + ":" + std::to_string(lineno) + ": probability " + line + " outside [0,1]");
    }
    probs.push_back(v);
  }
  return probs;
}

namespace {

struct Counts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

Counts check_metric_input(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  Counts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) throw std::invalid_argument("labels must be 0 or 1");
    if (std::isnan(scores[i])) throw std::invalid_argument("NaN score");
    (labels[i] ? c.pos : c.neg)++;
  }
  if (c.pos == 0 || c.neg == 0) throw UnscorableError("metric undefined: only one class present");
  return c;
}

std::vector<std::pair<double, std::uint8_t>> sorted_desc(std::span<const double> scores,
                                                         std::span<const std::uint8_t> labels) {
  std::vector<std::pair<double, std::uint8_t>> v(scores.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = {scores[i], labels[i]};
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  return v;
}

}  // namespace

double auprc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const Counts c = check_metric_input(scores, labels);
  const auto v = sorted_desc(scores, labels);
  std::size_t tp = 0, fp = 0;
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j].first == v[i].first) {
      (v[j].second ? tp : fp)++;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(c.pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const Counts c = check_metric_input(scores, labels);
  const auto v = sorted_desc(scores, labels);
  // Walking from high to low: each positive beats every negative below it.
  double concordant = 0.0;
  std::size_t neg_above = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i, pos = 0, neg = 0;
    while (j < v.size() && v[j].first == v[i].first) {
      (v[j].second ? pos : neg)++;
      ++j;
    }
    const std::size_t neg_below = c.neg - neg_above - neg;
    concordant += static_cast<double>(pos) * static_cast<double>(neg_below) +
                  0.5 * static_cast<double>(pos) * static_cast<double>(neg);
    neg_above += neg;
    i = j;
  }
  return concordant / (static_cast<double>(c.pos) * static_cast<double>(c.neg));
}

ScoreReport gross_score(std::span<const ScoredRecord> records) {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  ScoreReport report;
  for (const auto& r : records) {
    if (r.probs.size() != r.annotations.size()) {
      throw std::invalid_argument("prediction length " + std::to_string(r.probs.size()) +
                                  " differs from annotation length " + std::to_string(r.annotations.size()));
    }
    for (std::size_t i = 0; i < r.probs.size(); ++i) {
      if (r.annotations[i] == kUndefined) {
        ++report.n_excluded;
        continue;
      }
      scores.push_back(r.probs[i]);
      labels.push_back(r.annotations[i] == kArousal ? 1 : 0);
    }
  }
  report.n_scored = scores.size();
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
  if (positives == 0 || positives == labels.size()) {
    throw UnscorableError("pooled samples hold a single class (" + std::to_string(labels.size()) + " scored)");
  }
  report.prevalence = static_cast<double>(positives) / static_cast<double>(labels.size());
  report.auprc = auprc(scores, labels);
  report.auroc = auroc(scores, labels);
  return report;
}

}  // namespace arousal
