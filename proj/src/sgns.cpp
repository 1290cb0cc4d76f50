#include "semshift/sgns.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "semshift/error.hpp"
#include "util.hpp"

namespace semshift {
namespace {

using Documents = std::vector<std::vector<std::string>>;

// Token ids of in-vocabulary words, documents delimited by offsets.
struct EncodedCorpus {
  std::vector<std::uint32_t> tokens;
  std::vector<std::size_t> offsets{0};

  std::size_t documents() const { return offsets.size() - 1; }
};

Documents read_documents(const std::filesystem::path& corpus) {
  std::ifstream in(corpus, std::ios::binary);
  if (!in) throw IoError("cannot open token file " + corpus.string());
  Documents documents;
  std::string line;
  while (std::getline(in, line)) {
    auto& doc = documents.emplace_back();
    for (auto token : detail::split_whitespace(line)) doc.emplace_back(token);
  }
  if (in.bad()) throw IoError("failed reading token file " + corpus.string());
  return documents;
}

EncodedCorpus encode(const Documents& documents, const Vocabulary& vocab) {
  EncodedCorpus out;
  for (const auto& doc : documents) {
    for (const auto& token : doc) {
      if (auto id = vocab.index_of(token); id >= 0) out.tokens.push_back(static_cast<std::uint32_t>(id));
    }
    out.offsets.push_back(out.tokens.size());
  }
  return out;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Inverse-CDF sampler over count^0.75.
class NoiseDistribution {
 public:
  explicit NoiseDistribution(const std::vector<std::uint64_t>& counts) {
    cumulative_.reserve(counts.size());
    double total = 0.0;
    for (auto c : counts) {
      total += std::pow(static_cast<double>(c), 0.75);
      cumulative_.push_back(total);
    }
    for (auto& c : cumulative_) c /= total;
    cumulative_.back() = 1.0;
  }

  std::uint32_t sample(std::mt19937_64& rng) const {
    const double u = uniform01(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::uint32_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

struct Weights {
  std::size_t dim;
  std::vector<double> input;
  std::vector<double> context;

  double* in_row(std::uint32_t id) { return input.data() + static_cast<std::size_t>(id) * dim; }
  double* ctx_row(std::uint32_t id) { return context.data() + static_cast<std::size_t>(id) * dim; }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct WorkerResult {
  std::uint64_t words = 0;
  std::uint64_t pairs = 0;
  double last_lr = 0.0;
};

// One epoch over documents [first, last). `total_words` is the epoch length
// used for the learning-rate schedule; `words_before` is where this worker's
// range starts inside the epoch.
WorkerResult run_range(const EncodedCorpus& corpus, std::size_t first, std::size_t last,
                       std::uint64_t words_before, std::uint64_t total_words, const TrainConfig& config,
                       const Vocabulary& vocab, const NoiseDistribution& noise, Weights& weights,
                       std::mt19937_64& rng) {
  const std::size_t dim = config.dim;
  std::vector<double> grad(dim);
  std::vector<std::uint32_t> sentence;
  const double sample_scale = config.subsample_threshold * static_cast<double>(vocab.total_tokens());

  WorkerResult result;
  result.last_lr = config.lr_start;
  for (std::size_t d = first; d < last; ++d) {
    const std::size_t begin = corpus.offsets[d];
    const std::size_t end = corpus.offsets[d + 1];
    const double progress =
        total_words == 0 ? 0.0 : static_cast<double>(words_before + result.words) / static_cast<double>(total_words);
    const double lr = learning_rate(std::min(progress, 1.0), config);
    result.last_lr = lr;
    result.words += end - begin;

    sentence.clear();
    for (std::size_t t = begin; t < end; ++t) {
      const std::uint32_t id = corpus.tokens[t];
      if (sample_scale > 0.0) {
        const double freq = static_cast<double>(vocab.counts()[id]);
        const double keep = (std::sqrt(freq / sample_scale) + 1.0) * sample_scale / freq;
        if (keep < uniform01(rng)) continue;
      }
      sentence.push_back(id);
    }

    const std::size_t n = sentence.size();
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t span = 1 + static_cast<std::size_t>(rng() % config.window);
      const std::size_t lo = pos >= span ? pos - span : 0;
      const std::size_t hi = std::min(n - 1, pos + span);
      double* center = weights.in_row(sentence[pos]);
      for (std::size_t c = lo; c <= hi; ++c) {
        if (c == pos) continue;
        const std::uint32_t target_word = sentence[c];
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t s = 0; s <= config.negatives; ++s) {
          std::uint32_t target = target_word;
          double label = 1.0;
          if (s > 0) {
            target = noise.sample(rng);
            if (target == target_word) continue;
            label = 0.0;
          }
          double* out = weights.ctx_row(target);
          double dot = 0.0;
          for (std::size_t k = 0; k < dim; ++k) dot += center[k] * out[k];
          const double g = (label - sigmoid(dot)) * lr;
          for (std::size_t k = 0; k < dim; ++k) grad[k] += g * out[k];
          for (std::size_t k = 0; k < dim; ++k) out[k] += g * center[k];
        }
        for (std::size_t k = 0; k < dim; ++k) center[k] += grad[k];
        ++result.pairs;
      }
    }
  }
  return result;
}

EmbeddingSpace train_encoded(const Vocabulary& vocab, const EncodedCorpus& corpus, const TrainConfig& config,
                             const EmbeddingSpace* init, std::string label, const EpochCallback& on_epoch) {
  bool has_pair = false;
  for (std::size_t d = 0; d < corpus.documents() && !has_pair; ++d) {
    has_pair = corpus.offsets[d + 1] - corpus.offsets[d] >= 2;
  }
  if (!has_pair) {
    throw InvalidArgument("corpus shorter than one window: no document has two in-vocabulary tokens");
  }
  if (init && !init->empty() && init->dim() != config.dim) {
    throw InvalidArgument("warm-start space has dimension " + std::to_string(init->dim()) +
                          " but config.dim is " + std::to_string(config.dim));
  }

  const std::size_t dim = config.dim;
  const std::size_t vocab_size = vocab.size();
  Weights weights{dim, std::vector<double>(vocab_size * dim), std::vector<double>(vocab_size * dim, 0.0)};

  std::mt19937_64 rng(config.seed);
  const double half_range = 0.5 / static_cast<double>(dim);
  for (auto& w : weights.input) w = (uniform01(rng) * 2.0 - 1.0) * half_range;
  if (init) {
    for (std::size_t i = 0; i < vocab_size; ++i) {
      if (auto j = init->index_of(vocab.words()[i])) {
        auto row = init->row(*j);
        std::copy(row.data(), row.data() + dim, weights.in_row(static_cast<std::uint32_t>(i)));
      }
    }
  }

  const NoiseDistribution noise(vocab.counts());
  const std::uint64_t epoch_words = corpus.tokens.size();
  const std::size_t threads = std::max<std::size_t>(1, std::min(config.threads, corpus.documents()));

  // Per-worker document ranges and the number of words preceding each.
  std::vector<std::size_t> bounds(threads + 1, 0);
  for (std::size_t t = 0; t <= threads; ++t) bounds[t] = corpus.documents() * t / threads;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    EpochReport report;
    report.epoch = epoch + 1;
    if (threads == 1) {
      auto result = run_range(corpus, 0, corpus.documents(), 0, epoch_words, config, vocab, noise, weights, rng);
      report.words = result.words;
      report.pairs = result.pairs;
      report.final_learning_rate = result.last_lr;
    } else {
      std::vector<WorkerResult> results(threads);
      std::vector<std::thread> workers;
      workers.reserve(threads);
      for (std::size_t t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
          std::mt19937_64 local(config.seed + 0x9E3779B97F4A7C15ULL * (epoch * threads + t + 1));
          // Each worker schedules the learning rate over its own share.
          const std::uint64_t share = corpus.offsets[bounds[t + 1]] - corpus.offsets[bounds[t]];
          results[t] = run_range(corpus, bounds[t], bounds[t + 1], 0, share, config, vocab, noise, weights, local);
        });
      }
      for (auto& w : workers) w.join();
      for (const auto& r : results) {
        report.words += r.words;
        report.pairs += r.pairs;
        report.final_learning_rate = std::max(report.final_learning_rate, r.last_lr);
      }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report.words_per_second = seconds > 0.0 ? static_cast<double>(report.words) / seconds : 0.0;
    if (!weights.input.empty() &&
        !std::all_of(weights.input.begin(), weights.input.end(), [](double v) { return std::isfinite(v); })) {
      throw Error("training diverged: non-finite weights after epoch " + std::to_string(epoch + 1));
    }
    if (on_epoch) on_epoch(report);
  }

  Matrix vectors(static_cast<Eigen::Index>(vocab_size), static_cast<Eigen::Index>(dim));
  std::copy(weights.input.begin(), weights.input.end(), vectors.data());
  return EmbeddingSpace(std::move(label), vocab.words(), std::move(vectors), vocab.counts());
}

Vocabulary vocabulary_from_counts(const std::unordered_map<std::string, std::uint64_t>& counts,
                                  std::uint64_t min_count) {
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [token, count] : counts) {
    if (count >= min_count) kept.emplace_back(token, count);
  }
  if (kept.empty()) {
    throw InvalidArgument("empty vocabulary: no token occurs at least " + std::to_string(min_count) + " times");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  std::vector<std::uint64_t> freq;
  words.reserve(kept.size());
  freq.reserve(kept.size());
  for (auto& [token, count] : kept) {
    words.push_back(std::move(token));
    freq.push_back(count);
  }
  return Vocabulary(std::move(words), std::move(freq));
}

}  // namespace

void TrainConfig::validate() const {
  if (dim < 1) throw InvalidArgument("train config: dim must be >= 1");
  if (window < 1) throw InvalidArgument("train config: window must be >= 1");
  if (negatives < 1) throw InvalidArgument("train config: negatives must be >= 1");
  if (!(lr_end > 0.0) || !(lr_start >= lr_end)) {
    throw InvalidArgument("train config: need lr_start >= lr_end > 0");
  }
  if (lr_start > kMaxLearningRate) {
    throw InvalidArgument("train config: lr_start above " + detail::format_double(kMaxLearningRate) +
                          " is not supported (plain SGNS updates overflow)");
  }
  if (subsample_threshold < 0.0) throw InvalidArgument("train config: subsample_threshold must be >= 0");
  if (threads < 1) throw InvalidArgument("train config: threads must be >= 1");
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts)
    : words_(std::move(words)), counts_(std::move(counts)) {
  if (words_.size() != counts_.size()) throw InvalidArgument("vocabulary: words/counts size mismatch");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) throw InvalidArgument("vocabulary: duplicate token " + words_[i]);
    total_tokens_ += counts_[i];
  }
}

std::int64_t Vocabulary::index_of(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& documents, std::uint64_t min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& doc : documents) {
    for (const auto& token : doc) ++counts[token];
  }
  return vocabulary_from_counts(counts, min_count);
}

Vocabulary build_vocab(const std::filesystem::path& corpus, std::uint64_t min_count) {
  std::ifstream in(corpus, std::ios::binary);
  if (!in) throw IoError("cannot open token file " + corpus.string());
  std::unordered_map<std::string, std::uint64_t> counts;
  std::string line;
  while (std::getline(in, line)) {
    for (auto token : detail::split_whitespace(line)) ++counts[std::string(token)];
  }
  if (in.bad()) throw IoError("failed reading token file " + corpus.string());
  return vocabulary_from_counts(counts, min_count);
}

double learning_rate(double epoch_progress, const TrainConfig& config) {
  return std::lerp(config.lr_start, config.lr_end, std::clamp(epoch_progress, 0.0, 1.0));
}

EmbeddingSpace train(const std::vector<std::vector<std::string>>& documents, const TrainConfig& config,
                     const EmbeddingSpace* init, std::string label, const EpochCallback& on_epoch) {
  config.validate();
  const Vocabulary vocab = build_vocab(documents, config.min_count);
  return train_encoded(vocab, encode(documents, vocab), config, init, std::move(label), on_epoch);
}

EmbeddingSpace train(const std::filesystem::path& corpus, const TrainConfig& config, const EmbeddingSpace* init,
                     std::string label, const EpochCallback& on_epoch) {
  if (label.empty()) label = corpus.stem().string();
  return train(read_documents(corpus), config, init, std::move(label), on_epoch);
}

TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig defaults) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw FormatError("invalid train config: " + std::string(e.what()));
  }
  const pt::ptree& section = tree.get_child_optional("train") ? tree.get_child("train") : tree;
  TrainConfig c = defaults;
  try {
    for (const auto& [key, node] : section) {
      if (!node.empty()) continue;  // another section
      const auto value = node.get_value<std::string>();
      if (key == "dim") c.dim = node.get_value<std::size_t>();
      else if (key == "window") c.window = node.get_value<std::size_t>();
      else if (key == "min_count") c.min_count = node.get_value<std::uint64_t>();
      else if (key == "epochs") c.epochs = node.get_value<std::size_t>();
      else if (key == "lr_start") c.lr_start = node.get_value<double>();
      else if (key == "lr_end") c.lr_end = node.get_value<double>();
      else if (key == "negatives") c.negatives = node.get_value<std::size_t>();
      else if (key == "subsample_threshold") c.subsample_threshold = node.get_value<double>();
      else if (key == "seed") c.seed = node.get_value<std::uint64_t>();
      else if (key == "threads") c.threads = node.get_value<std::size_t>();
      else throw FormatError("unknown train config key '" + key + "' = " + value);
    }
  } catch (const pt::ptree_bad_data& e) {
    throw FormatError("invalid train config value: " + std::string(e.what()));
  }
  c.validate();
  return c;
}

std::string format_train_config(const TrainConfig& c) {
  std::ostringstream out;
  out << "dim = " << c.dim << '\n'
      << "window = " << c.window << '\n'
      << "min_count = " << c.min_count << '\n'
      << "epochs = " << c.epochs << '\n'
      << "lr_start = " << detail::format_double(c.lr_start) << '\n'
      << "lr_end = " << detail::format_double(c.lr_end) << '\n'
      << "negatives = " << c.negatives << '\n'
      << "subsample_threshold = " << detail::format_double(c.subsample_threshold) << '\n'
      << "seed = " << c.seed << '\n'
      << "threads = " << c.threads << '\n';
  return out.str();
}

}  // namespace semshift
