// Serial reference vs OpenMP driver timings for the hot kernels.
//   bench_kernels [--threads N] [--reps R] [--minutes M]

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>

#include "arousal/dsp.hpp"
#include "arousal/epoching.hpp"
#include "arousal/parallel.hpp"
#include "arousal/rng.hpp"

using namespace arousal;

namespace {

// Best of `reps` wall-clock runs, in milliseconds.
double best_ms(int reps, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-28s %10.1f %10.1f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel benchmark: serial reference vs parallel driver"};
  int threads = 0, reps = 3;
  double minutes = 30;
  app.add_option("--threads", threads, "OpenMP threads (0 = default)")->check(CLI::Range(0, 1024));
  app.add_option("--reps", reps, "repetitions, best time reported")->check(CLI::Range(1, 1000));
  app.add_option("--minutes", minutes, "synthetic record length")->check(CLI::Range(2.0, 1440.0));
  CLI11_PARSE(app, argc, argv);
  set_thread_count(threads);

  SynthParams p;
  p.subject_id = "bench";
  p.duration_s = minutes * 60;
  p.arousal_rate = 40;
  p.seed = 11;
  const Record rec = synth_record(p);
  const auto test_spans = segment_test(rec.length(), 200, 30, 0.5);
  std::printf("record %.0f min, %zu test windows, threads %d, best of %d\n\n", minutes, test_spans.size(),
              thread_count(), reps);
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  FeatureMatrix a, b;
  const double fs = best_ms(reps, [&] { a = extract_epochs_serial(rec, test_spans, {}); });
  const double fp = best_ms(reps, [&] { b = extract_epochs(rec, test_spans, {}); });
  row("extract_epochs", fs, fp,
      a.values.size() == b.values.size() &&
          std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0);

  ModelDatabase db;
  for (int s = 0; s < 4; ++s) {
    SynthParams q = p;
    q.subject_id = "m" + std::to_string(s);
    q.duration_s = 1800;
    q.seed = 100 + s;
    db.add(std::get<SubjectModel>(train_subject(synth_record(q), TrainParams{})));
  }
  std::vector<double> pa, pb;
  const double ps = best_ms(reps, [&] { pa = predict_rows_serial(db, a); });
  const double pp = best_ms(reps, [&] { pb = predict_rows(db, a); });
  row("predict_rows (4 subjects)", ps, pp, pa == pb);

  std::vector<TrainingSet> sets;
  for (int s = 0; s < 4; ++s) {
    SynthParams q = p;
    q.subject_id = "t" + std::to_string(s);
    q.duration_s = 3600;
    q.seed = 200 + s;
    sets.push_back(training_set(synth_record(q)));
  }
  TrainParams tp;
  tp.n_trees = 30;
  std::vector<TrainOutcome> ta, tb;
  const double ts = best_ms(reps, [&] {
    int saved = thread_count();
    set_thread_count(1);
    ta = train_subjects(sets, tp);
    set_thread_count(saved);
  });
  const double tq = best_ms(reps, [&] { tb = train_subjects(sets, tp); });
  row("train_subjects (4 x 30)", ts, tq, ta == tb);

  std::vector<double> x(6000), y(6000);
  Rng rng(5);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (i >= 137 ? x[i - 137] : 0.0) + 0.3 * rng.normal();
  std::ptrdiff_t la = 0, lb = 0;
  const double xs = best_ms(reps, [&] { la = xcorr_max_lag_direct(x, y, 1000); });
  const double xf = best_ms(reps, [&] { lb = xcorr_max_lag(x, y, 1000); });
  row("xcorr lag (direct vs FFT)", xs, xf, la == lb);
  return 0;
}
