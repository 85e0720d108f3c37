#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "arousal/classifier.hpp"
#include "arousal/config.hpp"
#include "arousal/parallel.hpp"
#include "arousal/record.hpp"
#include "arousal/rng.hpp"
#include "arousal/scoring.hpp"

namespace arousal::cli {
namespace fs = std::filesystem;

namespace {

// Config flags shared by every pipeline command. Each is kept as text and
// routed through PipelineConfig::set so file and flag values share one
// validation path; flags are applied after --config, so they win.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App& app, std::initializer_list<std::string_view> keys) {
    app.add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
    for (std::string_view key : keys) {
      std::string flag = "--" + std::string(key);
      std::replace(flag.begin(), flag.end(), '_', '-');
      app.add_option_function<std::string>(
          flag, [this, k = std::string(key)](const std::string& v) { values[k] = v; },
          "overrides config key " + std::string(key));
    }
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_file.empty()) cfg.merge_file(config_file);
    for (const auto& [key, value] : values) cfg.set(key, value);
    set_thread_count(cfg.threads);
    return cfg;
  }
};

std::string subject_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%04zu", i + 1);
  return buf;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::size_t subjects = 0;
  double duration = 3600.0;
  double arousal_rate = 24.0;
  double arousal_duration = 15.0;
  double signature_strength = 1.0;
  std::uint64_t seed = 0;
  std::optional<double> split;
  std::string out;
  ConfigFlags config;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  a.config.resolve();  // only `threads` matters here
  std::vector<SynthParams> params(a.subjects);
  for (std::size_t i = 0; i < a.subjects; ++i) {
    auto& p = params[i];
    p.subject_id = subject_name(i);
    p.duration_s = a.duration;
    p.arousal_rate = a.arousal_rate;
    p.arousal_duration_s = a.arousal_duration;
    p.signature_strength = a.signature_strength;
    p.seed = hash64(a.seed, p.subject_id);
    try {
      validate_synth_params(p);
    } catch (const std::invalid_argument& e) {
      err << "synth: " << e.what() << '\n';
      return kExitFailure;
    }
  }

  // Deterministic split: shuffle subject indices with the global seed.
  std::vector<std::string> part(a.subjects);
  if (a.split) {
    std::vector<std::size_t> order(a.subjects);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(hash64(a.seed, "split"));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    const auto n_train = static_cast<std::size_t>(std::llround(*a.split * static_cast<double>(a.subjects)));
    for (std::size_t k = 0; k < order.size(); ++k) part[order[k]] = k < n_train ? "train" : "test";
  }

  std::vector<std::size_t> arousal_samples(a.subjects, 0);
  std::vector<std::string> failures(a.subjects);
  const auto n = static_cast<std::ptrdiff_t>(a.subjects);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const Record r = synth_record(params[idx]);
      arousal_samples[idx] = static_cast<std::size_t>(std::count(r.annotations.begin(), r.annotations.end(), kArousal));
      write_record(r, part[idx].empty() ? fs::path(a.out) : fs::path(a.out) / part[idx]);
    } catch (const std::exception& e) {
      failures[idx] = e.what();
    }
  }
  int status = kExitOk;
  for (std::size_t i = 0; i < a.subjects; ++i) {
    if (!failures[i].empty()) {
      err << "synth: " << params[i].subject_id << ": " << failures[i] << '\n';
      status = kExitFailure;
      continue;
    }
    out << params[i].subject_id << " duration_s=" << a.duration << " arousal_samples=" << arousal_samples[i];
    if (!part[i].empty()) out << " split=" << part[i];
    out << '\n';
  }
  return status;
}

// ---------------------------------------------------------------------------

struct FeaturesArgs {
  std::string record;
  std::string out;
  ConfigFlags config;
};

int cmd_features(const FeaturesArgs& a, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = a.config.resolve();
  Record record;
  try {
    record = read_record(a.record);
  } catch (const std::exception& e) {
    err << "features: " << e.what() << '\n';
    return kExitFailure;
  }
  const auto spans = segment_train(record.length(), record.sampling_rate, cfg.epoch_seconds);
  const FeatureMatrix X = extract_epochs(record, spans, cfg.features());

  std::ofstream csv(a.out, std::ios::trunc);
  if (!csv) {
    err << "features: cannot open " << a.out << '\n';
    return kExitFailure;
  }
  csv << "epoch_start_s";
  for (const auto& f : feature_schema()) csv << ',' << f.name;
  csv << '\n';
  char buf[32];
  for (std::size_t i = 0; i < spans.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(spans[i].start) / record.sampling_rate);
    csv << buf;
    for (double v : X.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      csv << ',' << buf;
    }
    csv << '\n';
  }
  if (!csv) {
    err << "features: write failed for " << a.out << '\n';
    return kExitFailure;
  }
  out << record.subject_id << " epochs=" << spans.size() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string models_out;
  ConfigFlags config;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = a.config.resolve();
  std::vector<fs::path> dirs;
  try {
    dirs = list_record_dirs(a.data);
  } catch (const std::exception& e) {
    err << "train: " << e.what() << '\n';
    return kExitFailure;
  }
  if (dirs.empty()) {
    err << "train: no records found in " << a.data << '\n';
    return kExitFailure;
  }

  // Records are loaded one at a time; only their feature matrices are kept.
  std::vector<TrainingSet> sets;
  for (const auto& dir : dirs) {
    try {
      const Record record = read_record(dir);
      if (std::any_of(sets.begin(), sets.end(), [&](const TrainingSet& s) { return s.subject_id == record.subject_id; })) {
        err << "train: duplicate subject " << record.subject_id << " in " << dir.string() << ", skipped\n";
        continue;
      }
      sets.push_back(training_set(record, cfg.epoch_seconds, cfg.features()));
    } catch (const std::exception& e) {
      err << "train: skipping " << dir.string() << ": " << e.what() << '\n';
    }
  }
  std::sort(sets.begin(), sets.end(), [](const auto& x, const auto& y) { return x.subject_id < y.subject_id; });

  const auto outcomes = train_subjects(sets, cfg.train_params());
  ModelDatabase db;
  db.feature_config = cfg.features();
  db.epoch_seconds = cfg.epoch_seconds;
  for (const auto& outcome : outcomes) {
    if (const auto* m = std::get_if<SubjectModel>(&outcome)) {
      out << m->subject_id << " trained epochs=" << m->n_epochs_train << " arousal=" << m->class_counts.arousal
          << " non_arousal=" << m->class_counts.non_arousal << '\n';
      db.add(*m);
    } else {
      const auto& s = std::get<Skipped>(outcome);
      out << s.subject_id << " skipped(" << s.reason << ")\n";
    }
  }
  if (db.models.empty()) {
    err << "train: no subject had both arousal and non-arousal epochs; nothing trained\n";
    return kExitFailure;
  }
  try {
    save_db(db, a.models_out);
  } catch (const std::exception& e) {
    err << "train: " << e.what() << '\n';
    return kExitFailure;
  }
  out << "models=" << db.models.size() << " skipped=" << outcomes.size() - db.models.size() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string data;
  std::string models;
  std::string out;
  ConfigFlags config;
};

int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = a.config.resolve();
  ModelDatabase db;
  std::vector<fs::path> dirs;
  try {
    db = load_db(a.models);
    if (db.models.empty()) throw std::runtime_error("model database " + a.models + " holds no models");
    dirs = list_record_dirs(a.data);
    fs::create_directories(a.out);
  } catch (const std::exception& e) {
    err << "predict: " << e.what() << '\n';
    return kExitFailure;
  }
  std::size_t written = 0;
  for (const auto& dir : dirs) {
    try {
      const Record record = read_record(dir);
      const auto probs = predict_record(record, db, cfg.test_overlap);
      write_vec(probs, fs::path(a.out) / (record.subject_id + ".vec"));
      out << record.subject_id << " samples=" << probs.size() << '\n';
      ++written;
    } catch (const std::exception& e) {
      err << "predict: skipping " << dir.string() << ": " << e.what() << '\n';
    }
  }
  if (written == 0) {
    err << "predict: no predictions written\n";
    return kExitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
  std::string pred;
  std::string ref;
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<ProbabilityVector> preds;
  std::vector<std::vector<std::int8_t>> refs;
  try {
    const auto dirs = list_record_dirs(a.ref);
    if (dirs.empty()) throw std::runtime_error("no reference records in " + a.ref);
    for (const auto& dir : dirs) {
      auto [subject, annotations] = read_annotations(dir);
      const fs::path vec = fs::path(a.pred) / (subject + ".vec");
      if (!fs::exists(vec)) throw std::runtime_error("missing prediction " + vec.string());
      preds.push_back(read_vec(vec));
      refs.push_back(std::move(annotations));
    }
  } catch (const std::exception& e) {
    err << "score: " << e.what() << '\n';
    return kExitFailure;
  }
  std::vector<ScoredRecord> pairs;
  for (std::size_t i = 0; i < preds.size(); ++i) pairs.push_back({preds[i], refs[i]});
  ScoreReport report;
  try {
    report = gross_score(pairs);
  } catch (const UnscorableError& e) {
    err << "score: " << e.what() << '\n';
    return kExitUnscorable;
  } catch (const std::exception& e) {
    err << "score: " << e.what() << '\n';
    return kExitFailure;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "AUROC=%.3f AUPRC=%.3f scored=%zu excluded=%zu\n", report.auroc, report.auprc,
                report.n_scored, report.n_excluded);
  out << buf;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sleep arousal detection: synthesize, extract features, train, predict, score"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate synthetic polysomnography records");
  s->add_option("--subjects", synth.subjects, "number of subjects")->required()->check(CLI::PositiveNumber);
  s->add_option("--duration", synth.duration, "record length, seconds");
  s->add_option("--arousal-rate", synth.arousal_rate, "arousal events per hour");
  s->add_option("--arousal-duration", synth.arousal_duration, "mean arousal length, seconds");
  s->add_option("--signature-strength", synth.signature_strength, "gain on arousal signatures");
  s->add_option("--seed", synth.seed, "global seed");
  s->add_option("--split", synth.split, "train fraction; writes OUT/train and OUT/test")->check(CLI::Range(0.0, 1.0));
  s->add_option("--out", synth.out, "output directory")->required();
  synth.config.attach(*s, {"threads"});

  FeaturesArgs features;
  auto* f = app.add_subcommand("features", "dump per-epoch features of one record as CSV");
  f->add_option("--record", features.record, "record directory")->required();
  f->add_option("--out", features.out, "CSV path")->required();
  features.config.attach(*f, {"epoch_seconds", "wamp_threshold_factor", "eog_smooth_window", "airflow_smooth_window",
                              "xcorr_max_lag_s", "threads"});

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train one bagged-tree model per subject");
  t->add_option("--data", train.data, "directory of record directories")->required();
  t->add_option("--models-out", train.models_out, "model database path")->required();
  train.config.attach(*t, {"epoch_seconds", "trees", "max_depth", "min_leaf", "seed", "wamp_threshold_factor",
                           "eog_smooth_window", "airflow_smooth_window", "xcorr_max_lag_s", "threads"});

  PredictArgs predict;
  auto* p = app.add_subcommand("predict", "write sample-wise arousal probabilities (.vec)");
  p->add_option("--data", predict.data, "directory of record directories")->required();
  p->add_option("--models", predict.models, "model database path")->required();
  p->add_option("--out", predict.out, "output directory for <subject>.vec")->required();
  predict.config.attach(*p, {"test_overlap", "threads"});

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "gross AUROC/AUPRC of .vec predictions");
  sc->add_option("--pred", score.pred, "directory of <subject>.vec files")->required();
  sc->add_option("--ref", score.ref, "directory of reference record directories")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*s) return cmd_synth(synth, out, err);
    if (*f) return cmd_features(features, out, err);
    if (*t) return cmd_train(train, out, err);
    if (*p) return cmd_predict(predict, out, err);
    if (*sc) return cmd_score(score, out, err);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace arousal::cli
