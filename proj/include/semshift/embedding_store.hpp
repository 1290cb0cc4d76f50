#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

namespace semshift {

// Rows are words. Every linear map in this library acts on row vectors from
// the right (v * R).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::RowVectorXd;
using VectorRef = Eigen::Ref<const Vector>;

using FrequencyTable = std::unordered_map<std::string, std::uint64_t>;

// Vocabulary, vectors and optional occurrence counts for one corpus or period.
//
// Invariants (checked on construction): tokens are unique, row i belongs to
// words()[i], all components are finite, and frequencies (when present) have
// one entry per word.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  EmbeddingSpace(std::string label, std::vector<std::string> words, Matrix vectors,
                 std::optional<std::vector<std::uint64_t>> frequencies = std::nullopt);

  static EmbeddingSpace empty(std::string label, std::size_t dim);

  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  std::size_t size() const { return words_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  bool empty() const { return words_.empty(); }

  const std::vector<std::string>& words() const { return words_; }
  const Matrix& vectors() const { return vectors_; }
  const std::string& word(std::size_t index) const { return words_.at(index); }

  std::optional<std::size_t> index_of(std::string_view word) const;
  bool contains(std::string_view word) const { return index_of(word).has_value(); }

  Matrix::ConstRowXpr row(std::size_t index) const { return vectors_.row(static_cast<Eigen::Index>(index)); }
  // Throws InvalidArgument when the word is not in the vocabulary.
  Matrix::ConstRowXpr row(std::string_view word) const;

  bool has_frequencies() const { return frequencies_.has_value(); }
  // Throws InvalidArgument when the space carries no frequency data.
  const std::vector<std::uint64_t>& frequencies() const;
  std::uint64_t frequency(std::string_view word) const;

  // Replaces the frequency column; words absent from the table get count 0.
  void set_frequencies(const FrequencyTable& table);
  void set_frequencies(std::vector<std::uint64_t> counts);
  void clear_frequencies() { frequencies_.reset(); }

  FrequencyTable frequency_table() const;

 private:
  std::string label_;
  std::vector<std::string> words_;
  Matrix vectors_;
  std::optional<std::vector<std::uint64_t>> frequencies_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct VectorQueryResult {
  std::string word;
  double similarity = 0.0;

  friend bool operator==(const VectorQueryResult&, const VectorQueryResult&) = default;
};

// word2vec text format: header "<vocab_size> <dim>", then "<token> <dim floats>"
// per line. Input order is preserved. Errors carry the offending line number.
EmbeddingSpace load_embeddings(const std::filesystem::path& path, std::string label = {});

// Floats are written in shortest round-trip form, so load(save(s)) is exact.
void save_embeddings(const EmbeddingSpace& space, const std::filesystem::path& path);

// "<token> <count>" per line, the layout of word2vec's -save-vocab output.
FrequencyTable load_frequencies(const std::filesystem::path& path);
void save_frequencies(const EmbeddingSpace& space, const std::filesystem::path& path);

// dot(a, b) / (|a| |b|) clamped to [-1, 1]. Throws InvalidArgument on a zero
// vector or a dimension mismatch.
double cosine_similarity(const VectorRef& a, const VectorRef& b);

// The k most similar words to `query`, descending, ties by vocabulary order.
// Excluded tokens and zero rows are never returned; fewer than k results come
// back only when the space runs out of candidates.
std::vector<VectorQueryResult> nearest_neighbors(const EmbeddingSpace& space, const VectorRef& query,
                                                 std::size_t k,
                                                 const std::unordered_set<std::string>& exclude = {});

}  // namespace semshift
