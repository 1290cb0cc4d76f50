#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "run_config.hpp"
#include "semshift/semshift.hpp"

#ifndef SEMSHIFT_VERSION
#define SEMSHIFT_VERSION "unknown"
#endif

namespace semshift::cli {
namespace {

namespace fs = std::filesystem;

// Usage problems detected after parsing (missing file arguments etc).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

// Flag values that override the config file when given.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;

  std::optional<std::string> stopwords;
  std::optional<std::size_t> min_tokens;
  std::optional<bool> keep_hashtags;

  std::optional<std::size_t> dim, window, epochs, negatives;
  std::optional<std::uint64_t> min_count;
  std::optional<double> lr_start, lr_end, subsample;

  std::optional<std::size_t> anchors;
  std::optional<std::string> scope;
  std::optional<std::size_t> stability_bins;

  std::optional<std::size_t> k_min, k_max, restarts, max_iters, top;
  std::optional<std::uint64_t> min_frequency;

  std::optional<std::size_t> top_n, report_bins;

  std::optional<std::vector<std::string>> periods, neighbors;
  std::optional<std::string> raw_dir, work_dir, cluster_period, target;
};

template <typename T>
void apply(const std::optional<T>& flag, T& value) {
  if (flag) value = *flag;
}

RunConfig merge(RunConfig c, const Overrides& o) {
  apply(o.seed, c.seed);
  apply(o.threads, c.threads);
  apply(o.stopwords, c.preprocess.stopwords);
  apply(o.min_tokens, c.preprocess.min_tokens);
  apply(o.keep_hashtags, c.preprocess.keep_hashtags);
  apply(o.dim, c.train.dim);
  apply(o.window, c.train.window);
  apply(o.epochs, c.train.epochs);
  apply(o.negatives, c.train.negatives);
  apply(o.min_count, c.train.min_count);
  apply(o.lr_start, c.train.lr_start);
  apply(o.lr_end, c.train.lr_end);
  apply(o.subsample, c.train.subsample_threshold);
  apply(o.anchors, c.align.anchors);
  apply(o.scope, c.stability.scope);
  apply(o.stability_bins, c.stability.bins);
  apply(o.k_min, c.cluster.k_min);
  apply(o.k_max, c.cluster.k_max);
  apply(o.restarts, c.cluster.restarts);
  apply(o.max_iters, c.cluster.max_iters);
  apply(o.top, c.cluster.top);
  apply(o.min_frequency, c.cluster.min_frequency);
  apply(o.top_n, c.report.top_n);
  apply(o.report_bins, c.report.bins);
  apply(o.periods, c.pipeline.periods);
  apply(o.neighbors, c.pipeline.neighbors);
  apply(o.raw_dir, c.pipeline.raw_dir);
  apply(o.work_dir, c.pipeline.work_dir);
  apply(o.cluster_period, c.pipeline.cluster_period);
  apply(o.target, c.pipeline.target);
  c.train.seed = c.seed;
  c.train.threads = c.threads;
  return c;
}

void add_preprocess_flags(CLI::App* app, Overrides& o) {
  app->add_option("--stopwords", o.stopwords, "Stop-word list, one per line");
  app->add_option("--min-tokens", o.min_tokens, "Drop documents with fewer tokens");
  app->add_option("--keep-hashtags", o.keep_hashtags, "Keep '#' on hashtag tokens (true/false)");
}

void add_train_flags(CLI::App* app, Overrides& o) {
  app->add_option("--dim", o.dim, "Embedding dimension");
  app->add_option("--window", o.window, "Maximum context offset");
  app->add_option("--min-count", o.min_count, "Minimum token count");
  app->add_option("--epochs", o.epochs, "Passes over the corpus");
  app->add_option("--lr-start", o.lr_start, "Learning rate at the start of each epoch");
  app->add_option("--lr-end", o.lr_end, "Learning rate at the end of each epoch");
  app->add_option("--negatives", o.negatives, "Negative samples per pair");
  app->add_option("--subsample", o.subsample, "Frequent-word downsampling threshold (0 = off)");
}

void add_cluster_flags(CLI::App* app, Overrides& o) {
  app->add_option("--k-min", o.k_min, "Smallest k in the sweep");
  app->add_option("--k-max", o.k_max, "Largest k in the sweep");
  app->add_option("--min-frequency", o.min_frequency, "Minimum hashtag frequency");
  app->add_option("--restarts", o.restarts, "k-means restarts per k");
  app->add_option("--max-iters", o.max_iters, "Lloyd iterations per restart");
  app->add_option("--top", o.top, "Hashtags listed per cluster");
}

fs::path require_path(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required option ") + flag);
  return fs::path(value);
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw IoError("input file not found: " + p.string());
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

fs::path vocab_sidecar(const fs::path& embeddings) { return fs::path(embeddings.string() + ".vocab"); }

// Embedding file plus its "<file>.vocab" frequency sidecar when present.
EmbeddingSpace load_space(const fs::path& path) {
  require_file(path);
  EmbeddingSpace space = load_embeddings(path);
  if (fs::exists(vocab_sidecar(path))) space.set_frequencies(load_frequencies(vocab_sidecar(path)));
  return space;
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Stages

CorpusStats stage_preprocess(const RunConfig& c, const fs::path& input, const fs::path& output,
                             const fs::path& stats_path, std::ostream& err) {
  require_file(input);
  PipelineConfig pc;
  if (!c.preprocess.stopwords.empty()) {
    require_file(c.preprocess.stopwords);
    pc.stopwords = load_stopwords(c.preprocess.stopwords);
  }
  pc.min_tokens = c.preprocess.min_tokens;
  pc.keep_hashtags = c.preprocess.keep_hashtags;
  ensure_parent(output);
  const CorpusStats stats = run_corpus(input, pc, output);
  ensure_parent(stats_path);
  save_corpus_stats(stats, stats_path);
  err << "preprocess " << input.string() << ": kept " << stats.documents_kept << ", dropped "
      << stats.documents_dropped << " documents, " << stats.word_frequencies.size() << " distinct tokens\n";
  return stats;
}

EmbeddingSpace stage_train(const RunConfig& c, const fs::path& input, const fs::path& output,
                           const EmbeddingSpace* init, std::ostream& err) {
  require_file(input);
  const std::string label = output.stem().string();
  auto log = [&](const EpochReport& r) {
    char line[160];
    std::snprintf(line, sizeof line, "train %s: epoch %zu/%zu lr %.6g words %llu pairs %llu words/s %.0f\n",
                  label.c_str(), r.epoch, c.train.epochs, r.final_learning_rate,
                  static_cast<unsigned long long>(r.words), static_cast<unsigned long long>(r.pairs),
                  r.words_per_second);
    err << line << std::flush;
  };
  EmbeddingSpace space = train(input, c.train, init, label, log);
  ensure_parent(output);
  save_embeddings(space, output);
  save_frequencies(space, vocab_sidecar(output));
  err << "train " << label << ": " << space.size() << " words x " << space.dim() << " -> " << output.string()
      << "\n";
  return space;
}

RotationPair stage_align(const RunConfig& c, const EmbeddingSpace& base, const EmbeddingSpace& target,
                         const fs::path& output, std::ostream& err) {
  const RotationPair pair = fit_rotation_pair(base, target, c.align.anchors);
  ensure_parent(output);
  save_rotation_pair(pair, output);
  err << "align " << base.label() << " <-> " << target.label() << ": " << pair.forward.anchors.words.size() << "/"
      << pair.backward.anchors.words.size() << " anchors, residuals " << pair.forward.residual << " / "
      << pair.backward.residual << "\n";
  return pair;
}

void check_pair(const RotationPair& pair, const EmbeddingSpace& base, const EmbeddingSpace& target,
                const fs::path& file) {
  if (pair.forward.from_label != base.label() || pair.forward.to_label != target.label() ||
      pair.backward.from_label != target.label() || pair.backward.to_label != base.label()) {
    throw InvalidArgument("rotation file " + file.string() + " maps '" + pair.forward.from_label + "' <-> '" +
                          pair.forward.to_label + "', expected '" + base.label() + "' <-> '" + target.label() + "'");
  }
}

// Per-pair records for every comparison, followed by the averaged rows when
// there is more than one.
std::vector<StabilityRecord> stage_stability(const RunConfig& c, const std::vector<Comparison>& comparisons,
                                             const fs::path& csv, const fs::path& histogram, std::ostream& err) {
  const VocabularyScope scope = parse_scope(c.stability.scope);
  std::vector<StabilityRecord> all;
  nlohmann::json summary;
  summary["scope"] = c.stability.scope;
  summary["pairs"] = nlohmann::json::object();
  for (const auto& cmp : comparisons) {
    auto table = stability_table(cmp, scope);
    summary["pairs"][cmp.label()] = stability_distribution(table, c.stability.bins);
    all.insert(all.end(), table.begin(), table.end());
  }
  if (comparisons.size() > 1) {
    auto mean = averaged_stability_table(comparisons, scope);
    summary["mean"] = stability_distribution(mean, c.stability.bins);
    all.insert(all.end(), mean.begin(), mean.end());
  }
  ensure_parent(csv);
  write_stability_csv(all, csv);
  write_json(summary, histogram);
  err << "stability: " << all.size() << " records over " << comparisons.size() << " pair(s) -> " << csv.string()
      << "\n";
  return all;
}

void stage_cluster(const RunConfig& c, const EmbeddingSpace& space, const fs::path& dir, std::ostream& err) {
  if (!space.has_frequencies()) {
    throw InvalidArgument("space '" + space.label() + "' has no frequencies; clustering needs the .vocab sidecar");
  }
  const HashtagSelection sel = select_hashtag_vectors(space, c.cluster.min_frequency);
  const std::size_t n = sel.tokens.size();
  if (n < 3) throw InvalidArgument("only " + std::to_string(n) + " hashtags qualify; need at least 3 to cluster");
  std::size_t k_max = c.cluster.k_max;
  if (k_max > n - 1) {
    warn("k_max " + std::to_string(k_max) + " exceeds " + std::to_string(n - 1) + " for " + std::to_string(n) +
         " hashtags; clipped");
    k_max = n - 1;
  }
  if (c.cluster.k_min > k_max) throw InvalidArgument("k_min exceeds the number of clusterable hashtags");
  KMeansOptions opts;
  opts.seed = c.seed;
  opts.restarts = c.cluster.restarts;
  opts.max_iters = c.cluster.max_iters;
  const SweepResult sweep = sweep_k(sel.vectors, c.cluster.k_min, k_max, opts);
  const PcaProjection pca = pca_2d(sel.vectors);

  nlohmann::json j;
  j["space"] = space.label();
  j["tokens"] = sel.tokens;
  j["frequencies"] = sel.frequencies;
  j["sweep"] = {{"k", sweep.ks}, {"mean_silhouette", sweep.mean_silhouettes}};
  j["best_k"] = sweep.best_k;
  j["result"] = sweep.best;
  j["pca_explained_variance"] = pca.explained_variance;
  fs::create_directories(dir);
  write_json(j, dir / "clusters.json");
  write_silhouette_csv(sweep.best, sel.tokens, dir / "silhouette.csv");
  write_pca_csv(pca, sel.tokens, sweep.best.assignments, dir / "pca.csv");
  write_top_hashtags_csv(top_hashtags_per_cluster(sweep.best, sel.tokens, sel.frequencies, c.cluster.top),
                         dir / "top_hashtags.csv");
  err << "cluster " << space.label() << ": " << n << " hashtags, best k " << sweep.best_k << " (mean silhouette "
      << sweep.best.mean_silhouette << ")\n";
}

std::vector<StabilityRecord> select_pair(const std::vector<StabilityRecord>& records, const std::string& pair) {
  std::string chosen = pair;
  if (chosen.empty()) {
    std::vector<std::string> pairs;
    for (const auto& r : records) {
      if (std::find(pairs.begin(), pairs.end(), r.pair) == pairs.end()) pairs.push_back(r.pair);
    }
    if (std::find(pairs.begin(), pairs.end(), "mean") != pairs.end()) {
      chosen = "mean";
    } else if (pairs.size() == 1) {
      chosen = pairs.front();
    } else {
      throw UsageError("stability table holds several pairs; choose one with --pair");
    }
  }
  std::vector<StabilityRecord> out;
  for (const auto& r : records) {
    if (r.pair == chosen) out.push_back(r);
  }
  if (out.empty()) throw InvalidArgument("no stability records for pair '" + chosen + "'");
  return out;
}

void stage_report(const RunConfig& c, const std::vector<StabilityRecord>& records,
                  const std::vector<std::pair<std::string, FrequencyTable>>& frequencies, const fs::path& dir,
                  std::ostream& err) {
  fs::create_directories(dir);
  nlohmann::json j;
  j["pair"] = records.front().pair;
  j["distribution"] = stability_distribution(records, c.report.bins);
  j["correlations"] = nlohmann::json::array();
  for (const auto& [source, table] : frequencies) {
    const auto report = frequency_stability_correlation(records, table, source);
    j["correlations"].push_back(report);
    write_scatter_csv(report, dir / ("scatter_" + source + ".csv"));
    err << "report: spearman(stab, " << source << " frequency) = " << report.coefficient << " over "
        << report.sample_size << " words\n";
  }
  write_json(j, dir / "correlation.json");
  write_shift_ranking_csv(shift_ranking(records, c.report.top_n), dir / "shift_ranking.csv");
}

// Moves every space after the first into the first one's frame, then reports
// the target's neighborhood.
void stage_trajectory(const RunConfig& c, const std::vector<EmbeddingSpace>& spaces, const std::string& target,
                      const std::vector<std::string>& neighbors, const fs::path& out) {
  if (spaces.empty()) throw UsageError("trajectory needs at least one --space");
  std::vector<EmbeddingSpace> aligned;
  aligned.push_back(spaces.front());
  for (std::size_t i = 1; i < spaces.size(); ++i) {
    const auto map = fit_rotation(spaces[i], spaces.front(), select_anchors(spaces[i], spaces.front(), c.align.anchors));
    aligned.push_back(apply_rotation(spaces[i], map));
  }
  std::vector<const EmbeddingSpace*> ptrs;
  for (const auto& s : aligned) ptrs.push_back(&s);
  write_json(neighbor_trajectory(target, ptrs, neighbors), out);
}

std::vector<std::pair<std::string, FrequencyTable>> pooled_frequencies(const EmbeddingSpace& base,
                                                                       const std::vector<EmbeddingSpace>& later) {
  FrequencyTable event;
  for (const auto& s : later) {
    for (const auto& [w, n] : s.frequency_table()) event[w] += n;
  }
  return {{"base", base.frequency_table()}, {"event", std::move(event)}};
}

void stage_pipeline(const RunConfig& c, std::ostream& err) {
  const auto& p = c.pipeline;
  if (p.periods.size() < 2) throw UsageError("pipeline needs at least two periods (base first)");
  const fs::path raw = require_path(p.raw_dir, "raw_dir");
  const fs::path work = require_path(p.work_dir, "work_dir");
  for (const auto& period : p.periods) require_file(raw / (period + ".txt"));
  fs::create_directories(work);

  for (const auto& period : p.periods) {
    stage_preprocess(c, raw / (period + ".txt"), work / (period + ".tok"), work / (period + ".stats.json"), err);
  }

  // Each period is warm-started from the one before it.
  std::vector<EmbeddingSpace> spaces;
  for (std::size_t i = 0; i < p.periods.size(); ++i) {
    RunConfig ci = c;
    ci.train.seed = c.seed + i;
    spaces.push_back(stage_train(ci, work / (p.periods[i] + ".tok"), work / (p.periods[i] + ".vec"),
                                 i == 0 ? nullptr : &spaces[i - 1], err));
  }

  const EmbeddingSpace& base = spaces.front();
  std::vector<Comparison> comparisons;
  for (std::size_t i = 1; i < spaces.size(); ++i) {
    const fs::path file = work / "rotations" / (p.periods[0] + "__" + p.periods[i] + ".json");
    comparisons.push_back(Comparison{&base, &spaces[i], stage_align(c, base, spaces[i], file, err)});
  }
  const auto records = stage_stability(c, comparisons, work / "stability.csv", work / "stability_hist.json", err);

  std::string cluster_period = p.cluster_period.empty() ? p.periods.back() : p.cluster_period;
  const auto at = std::find(p.periods.begin(), p.periods.end(), cluster_period);
  if (at == p.periods.end()) throw InvalidArgument("cluster_period '" + cluster_period + "' is not a period");
  const EmbeddingSpace& clustered = spaces[static_cast<std::size_t>(at - p.periods.begin())];
  const std::size_t tags = select_hashtag_vectors(clustered, c.cluster.min_frequency).tokens.size();
  if (tags < 3) {
    warn("period '" + cluster_period + "' has " + std::to_string(tags) + " hashtags at min_frequency " +
         std::to_string(c.cluster.min_frequency) + "; clustering skipped");
  } else {
    stage_cluster(c, clustered, work / "cluster", err);
  }

  const std::vector<EmbeddingSpace> later(spaces.begin() + 1, spaces.end());
  stage_report(c, select_pair(records, ""), pooled_frequencies(base, later), work / "report", err);
  if (!p.target.empty()) stage_trajectory(c, spaces, p.target, p.neighbors, work / "report" / "trajectory.json");
  err << "pipeline: done -> " << work.string() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic shift analysis for diachronic word embeddings", "semshift"};
  app.set_version_flag("--version", std::string("semshift ") + SEMSHIFT_VERSION);
  app.require_subcommand(0, 1);
  app.fallthrough();

  Overrides o;
  std::string config_file;
  bool dump = false;
  app.add_option("--config", config_file, "INI run configuration");
  app.add_flag("--config-dump", dump, "Print the effective configuration and exit");
  app.add_option("--seed", o.seed, "Seed for every stage");
  app.add_option("--threads", o.threads, "Training threads (1 = deterministic)");

  std::string input, output, stats, init, base, rotation_out, aligned_out, histogram, space, out_dir, stability,
      pair, base_freq, event_freq;
  std::vector<std::string> targets, rotations, spaces;

  auto* pre = app.add_subcommand("preprocess", "Tokenize a raw corpus (one document per line)");
  pre->add_option("--input", input, "Raw corpus");
  pre->add_option("--output", output, "Token file");
  pre->add_option("--stats", stats, "Corpus statistics JSON (default <output>.stats.json)");
  add_preprocess_flags(pre, o);

  auto* tr = app.add_subcommand("train", "Train SGNS embeddings on a token file");
  tr->add_option("--input", input, "Token file");
  tr->add_option("--output", output, "word2vec text output; counts go to <output>.vocab");
  tr->add_option("--init", init, "Warm-start from this embedding file");
  add_train_flags(tr, o);

  auto* al = app.add_subcommand("align", "Fit rotations between two spaces in both directions");
  al->add_option("--base", base, "First space");
  al->add_option("--target", input, "Second space");
  al->add_option("--output", rotation_out, "Rotation pair JSON");
  al->add_option("--aligned-output", aligned_out, "Also write the second space moved into the first one's frame");
  al->add_option("--anchors", o.anchors, "Anchor words per direction");

  auto* stab = app.add_subcommand("stability", "Two-way stability of every word");
  stab->add_option("--base", base, "Base space");
  stab->add_option("--target", targets, "Compared space (repeatable)");
  stab->add_option("--rotation", rotations, "Rotation JSON per target, in order (fitted when omitted)");
  stab->add_option("--output", output, "Stability CSV");
  stab->add_option("--histogram", histogram, "Histogram and summary JSON (default <output>.hist.json)");
  stab->add_option("--scope", o.scope, "intersection or union");
  stab->add_option("--bins", o.stability_bins, "Histogram bins");
  stab->add_option("--anchors", o.anchors, "Anchor words per direction when fitting");

  auto* cl = app.add_subcommand("cluster", "Cluster hashtag vectors and choose k by silhouette");
  cl->add_option("--space", space, "Embedding file (with .vocab sidecar)");
  cl->add_option("--out-dir", out_dir, "Output directory");
  add_cluster_flags(cl, o);

  auto* rep = app.add_subcommand("report", "Frequency correlation, shift ranking and neighbor trajectories");
  rep->add_option("--stability", stability, "Stability CSV");
  rep->add_option("--pair", pair, "Pair to report (default: mean rows, or the only pair)");
  rep->add_option("--base-freq", base_freq, "Base-period frequency file");
  rep->add_option("--event-freq", event_freq, "Event-period frequency file");
  rep->add_option("--out-dir", out_dir, "Output directory");
  rep->add_option("--top-n", o.top_n, "Rows in the shift ranking");
  rep->add_option("--bins", o.report_bins, "Histogram bins");
  rep->add_option("--target", o.target, "Trajectory target word");
  rep->add_option("--neighbors", o.neighbors, "Trajectory neighbor words")->delimiter(',');
  rep->add_option("--space", spaces, "Trajectory spaces in time order (repeatable)");
  rep->add_option("--anchors", o.anchors, "Anchor words for trajectory alignment");

  auto* pipe = app.add_subcommand("pipeline", "Run every stage from the [pipeline] section");
  pipe->add_option("--periods", o.periods, "Period names, base first")->delimiter(',');
  pipe->add_option("--raw-dir", o.raw_dir, "Directory with <period>.txt raw corpora");
  pipe->add_option("--work-dir", o.work_dir, "Output directory");
  pipe->add_option("--cluster-period", o.cluster_period, "Period whose hashtags are clustered");
  pipe->add_option("--target", o.target, "Trajectory target word");
  pipe->add_option("--neighbors", o.neighbors, "Trajectory neighbor words")->delimiter(',');
  add_preprocess_flags(pipe, o);
  add_train_flags(pipe, o);
  add_cluster_flags(pipe, o);
  pipe->add_option("--anchors", o.anchors, "Anchor words per direction");
  pipe->add_option("--scope", o.scope, "intersection or union");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "semshift: error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }

  auto previous = set_warning_handler([&err](std::string_view m) { err << "semshift: warning: " << m << "\n"; });
  struct Restore {
    WarningHandler h;
    ~Restore() { set_warning_handler(std::move(h)); }
  } restore{std::move(previous)};

  try {
    RunConfig c = config_file.empty() ? RunConfig{} : load_run_config(config_file);
    c = merge(std::move(c), o);
    c.validate();
    if (dump) {
      out << format_run_config(c);
      return 0;
    }

    if (pre->parsed()) {
      const fs::path out_path = require_path(output, "--output");
      stage_preprocess(c, require_path(input, "--input"), out_path,
                       stats.empty() ? fs::path(out_path.string() + ".stats.json") : fs::path(stats), err);
    } else if (tr->parsed()) {
      const fs::path in_path = require_path(input, "--input");
      const fs::path out_path = require_path(output, "--output");
      std::optional<EmbeddingSpace> start;
      if (!init.empty()) start = load_space(init);
      stage_train(c, in_path, out_path, start ? &*start : nullptr, err);
    } else if (al->parsed()) {
      const EmbeddingSpace a = load_space(require_path(base, "--base"));
      const EmbeddingSpace b = load_space(require_path(input, "--target"));
      const RotationPair maps = stage_align(c, a, b, require_path(rotation_out, "--output"), err);
      if (!aligned_out.empty()) {
        ensure_parent(aligned_out);
        save_embeddings(apply_rotation(b, maps.backward), aligned_out);
      }
    } else if (stab->parsed()) {
      const fs::path out_path = require_path(output, "--output");
      if (targets.empty()) throw UsageError("missing required option --target");
      if (!rotations.empty() && rotations.size() != targets.size()) {
        throw UsageError("give one --rotation per --target or none");
      }
      const EmbeddingSpace b = load_space(require_path(base, "--base"));
      std::deque<EmbeddingSpace> others;
      std::vector<Comparison> comparisons;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        others.push_back(load_space(targets[i]));
        if (rotations.empty()) {
          comparisons.push_back(make_comparison(b, others.back(), c.align.anchors));
        } else {
          require_file(rotations[i]);
          RotationPair maps = load_rotation_pair(rotations[i]);
          check_pair(maps, b, others.back(), rotations[i]);
          comparisons.push_back(Comparison{&b, &others.back(), std::move(maps)});
        }
      }
      const fs::path hist =
          histogram.empty() ? fs::path(out_path).replace_extension(".hist.json") : fs::path(histogram);
      stage_stability(c, comparisons, out_path, hist, err);
    } else if (cl->parsed()) {
      const fs::path dir = require_path(out_dir, "--out-dir");
      stage_cluster(c, load_space(require_path(space, "--space")), dir, err);
    } else if (rep->parsed()) {
      const fs::path dir = require_path(out_dir, "--out-dir");
      const bool trajectory = !c.pipeline.target.empty();
      if (stability.empty() && !trajectory) throw UsageError("nothing to report: give --stability and/or --target");
      if (!stability.empty()) {
        require_file(stability);
        std::vector<std::pair<std::string, FrequencyTable>> freq;
        if (!base_freq.empty()) {
          require_file(base_freq);
          freq.emplace_back("base", load_frequencies(base_freq));
        }
        if (!event_freq.empty()) {
          require_file(event_freq);
          freq.emplace_back("event", load_frequencies(event_freq));
        }
        stage_report(c, select_pair(read_stability_csv(stability), pair), freq, dir, err);
      }
      if (trajectory) {
        std::vector<EmbeddingSpace> loaded;
        for (const auto& s : spaces) loaded.push_back(load_space(s));
        stage_trajectory(c, loaded, c.pipeline.target, c.pipeline.neighbors, dir / "trajectory.json");
      }
    } else if (pipe->parsed()) {
      stage_pipeline(c, err);
    } else {
      throw UsageError("no command given (try --help)");
    }
  } catch (const UsageError& e) {
    err << "semshift: error: usage: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "semshift: error: io: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const FormatError& e) {
    err << "semshift: error: format: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const InvalidArgument& e) {
    err << "semshift: error: invalid_argument: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "semshift: error: io: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "semshift: error: runtime: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace semshift::cli
