#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "semshift/embedding_store.hpp"

namespace semshift {

// Largest accepted lr_start. Plain SGNS updates have no norm control and
// blow up on small vocabularies somewhere above this.
inline constexpr double kMaxLearningRate = 0.25;

// Skip-gram negative-sampling hyper-parameters. Defaults follow the monthly
// training protocol: 200 dimensions, window 5, min count 10, 10 epochs and a
// per-epoch linear learning-rate decay from 0.025 to 0.0025.
struct TrainConfig {
  std::size_t dim = 200;
  std::size_t window = 5;
  std::uint64_t min_count = 10;
  std::size_t epochs = 10;
  double lr_start = 0.025;
  double lr_end = 0.0025;
  std::size_t negatives = 5;
  double subsample_threshold = 0.0;  // 0 disables frequent-word downsampling
  std::uint64_t seed = 1;
  // 1 selects the deterministic single-threaded mode. More threads update the
  // shared weights without locks and are not bit-reproducible.
  std::size_t threads = 1;

  void validate() const;
};

// Dense vocabulary sorted by descending count, ties in byte order of the token.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total_tokens() const { return total_tokens_; }

  // -1 when absent.
  std::int64_t index_of(const std::string& word) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_tokens_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

// Counts whitespace-separated tokens of a token file (one document per line)
// and keeps those occurring at least min_count times. Throws InvalidArgument
// when nothing survives the threshold.
Vocabulary build_vocab(const std::filesystem::path& corpus, std::uint64_t min_count);
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& documents, std::uint64_t min_count);

// Learning rate after `epoch_progress` (in [0, 1]) of the current epoch.
// Returns lr_start exactly at 0 and lr_end exactly at 1.
double learning_rate(double epoch_progress, const TrainConfig& config);

struct EpochReport {
  std::size_t epoch = 0;
  double final_learning_rate = 0.0;
  std::uint64_t words = 0;
  std::uint64_t pairs = 0;
  double words_per_second = 0.0;
};

using EpochCallback = std::function<void(const EpochReport&)>;

// Trains input vectors over the build_vocab vocabulary of `corpus`. With
// `init`, words present there start from its vectors and the rest are drawn
// uniformly from [-0.5/dim, 0.5/dim]; context vectors always start at zero.
// The returned space carries the vocabulary counts as its frequencies.
EmbeddingSpace train(const std::filesystem::path& corpus, const TrainConfig& config,
                     const EmbeddingSpace* init = nullptr, std::string label = {},
                     const EpochCallback& on_epoch = {});
EmbeddingSpace train(const std::vector<std::vector<std::string>>& documents, const TrainConfig& config,
                     const EmbeddingSpace* init = nullptr, std::string label = {},
                     const EpochCallback& on_epoch = {});

// Flat "key = value" file mirroring TrainConfig field names. '#' and ';'
// start comments; an optional [train] section header is accepted.
TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig defaults = {});
std::string format_train_config(const TrainConfig& config);

}  // namespace semshift
