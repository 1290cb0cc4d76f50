#include "semshift/embedding_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "semshift/error.hpp"
#include "util.hpp"

namespace semshift {

EmbeddingSpace::EmbeddingSpace(std::string label, std::vector<std::string> words, Matrix vectors,
                               std::optional<std::vector<std::uint64_t>> frequencies)
    : label_(std::move(label)),
      words_(std::move(words)),
      vectors_(std::move(vectors)),
      frequencies_(std::move(frequencies)) {
  if (static_cast<std::size_t>(vectors_.rows()) != words_.size()) {
    throw InvalidArgument("embedding space '" + label_ + "': " + std::to_string(words_.size()) +
                          " words but " + std::to_string(vectors_.rows()) + " vector rows");
  }
  if (!vectors_.allFinite()) {
    throw InvalidArgument("embedding space '" + label_ + "' contains non-finite values");
  }
  if (frequencies_ && frequencies_->size() != words_.size()) {
    throw InvalidArgument("embedding space '" + label_ + "': frequency column has " +
                          std::to_string(frequencies_->size()) + " entries for " +
                          std::to_string(words_.size()) + " words");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) {
      throw InvalidArgument("embedding space '" + label_ + "': duplicate token '" + words_[i] + "'");
    }
  }
}

EmbeddingSpace EmbeddingSpace::empty(std::string label, std::size_t dim) {
  return EmbeddingSpace(std::move(label), {}, Matrix(0, static_cast<Eigen::Index>(dim)));
}

std::optional<std::size_t> EmbeddingSpace::index_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Matrix::ConstRowXpr EmbeddingSpace::row(std::string_view word) const {
  auto index = index_of(word);
  if (!index) {
    throw InvalidArgument("word '" + std::string(word) + "' not in space '" + label_ + "'");
  }
  return row(*index);
}

const std::vector<std::uint64_t>& EmbeddingSpace::frequencies() const {
  if (!frequencies_) {
    throw InvalidArgument("embedding space '" + label_ + "' has no frequency data");
  }
  return *frequencies_;
}

std::uint64_t EmbeddingSpace::frequency(std::string_view word) const {
  auto index = index_of(word);
  if (!index) {
    throw InvalidArgument("word '" + std::string(word) + "' not in space '" + label_ + "'");
  }
  return frequencies()[*index];
}

void EmbeddingSpace::set_frequencies(const FrequencyTable& table) {
  std::vector<std::uint64_t> counts(words_.size(), 0);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (auto it = table.find(words_[i]); it != table.end()) counts[i] = it->second;
  }
  frequencies_ = std::move(counts);
}

void EmbeddingSpace::set_frequencies(std::vector<std::uint64_t> counts) {
  if (counts.size() != words_.size()) {
    throw InvalidArgument("frequency column size does not match vocabulary size");
  }
  frequencies_ = std::move(counts);
}

FrequencyTable EmbeddingSpace::frequency_table() const {
  const auto& counts = frequencies();
  FrequencyTable table;
  table.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) table.emplace(words_[i], counts[i]);
  return table;
}

EmbeddingSpace load_embeddings(const std::filesystem::path& path, std::string label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file " + path.string());
  if (label.empty()) label = path.stem().string();

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) {
    throw FormatError("malformed header at line 1: file is empty");
  }
  auto header = detail::split_whitespace(detail::trim(line));
  std::size_t vocab_size = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !detail::parse_unsigned(header[0], vocab_size) ||
      !detail::parse_unsigned(header[1], dim)) {
    throw FormatError("malformed header at line 1: expected '<vocab_size> <dim>'");
  }

  std::vector<std::string> words;
  words.reserve(vocab_size);
  Matrix vectors(static_cast<Eigen::Index>(vocab_size), static_cast<Eigen::Index>(dim));
  std::unordered_map<std::string, std::size_t> seen;
  seen.reserve(vocab_size);

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    if (words.size() == vocab_size) {
      throw FormatError("more rows than declared vocabulary size " + std::to_string(vocab_size) +
                        " at line " + std::to_string(line_no));
    }
    auto fields = detail::split_whitespace(view);
    if (fields.size() != dim + 1) {
      throw FormatError("dimension mismatch at line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " components, found " +
                        std::to_string(fields.empty() ? 0 : fields.size() - 1));
    }
    std::string token(fields[0]);
    if (auto [it, inserted] = seen.emplace(token, line_no); !inserted) {
      throw FormatError("duplicate token '" + token + "' at line " + std::to_string(line_no) +
                        " (first seen at line " + std::to_string(it->second) + ")");
    }
    const auto row = static_cast<Eigen::Index>(words.size());
    for (std::size_t c = 0; c < dim; ++c) {
      double value = 0.0;
      if (!detail::parse_double(fields[c + 1], value)) {
        throw FormatError("unparsable value '" + std::string(fields[c + 1]) + "' at line " +
                          std::to_string(line_no));
      }
      if (!std::isfinite(value)) {
        throw FormatError("non-finite value at line " + std::to_string(line_no));
      }
      vectors(row, static_cast<Eigen::Index>(c)) = value;
    }
    words.push_back(std::move(token));
  }
  if (words.size() != vocab_size) {
    throw FormatError("header declares " + std::to_string(vocab_size) + " rows but file has " +
                      std::to_string(words.size()));
  }
  return EmbeddingSpace(std::move(label), std::move(words), std::move(vectors));
}

void save_embeddings(const EmbeddingSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write embedding file " + path.string());
  out << space.size() << ' ' << space.dim() << '\n';
  std::string buffer;
  for (std::size_t i = 0; i < space.size(); ++i) {
    buffer.clear();
    buffer += space.word(i);
    auto row = space.row(i);
    for (Eigen::Index c = 0; c < row.size(); ++c) {
      buffer += ' ';
      detail::append_double(buffer, row(c));
    }
    buffer += '\n';
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
  if (!out) throw IoError("failed writing embedding file " + path.string());
}

FrequencyTable load_frequencies(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open frequency file " + path.string());
  FrequencyTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    auto fields = detail::split_whitespace(view);
    std::uint64_t count = 0;
    if (fields.size() != 2 || !detail::parse_unsigned(fields[1], count)) {
      throw FormatError("expected '<token> <count>' at line " + std::to_string(line_no) + " of " +
                        path.string());
    }
    if (!table.emplace(std::string(fields[0]), count).second) {
      throw FormatError("duplicate token '" + std::string(fields[0]) + "' at line " +
                        std::to_string(line_no) + " of " + path.string());
    }
  }
  return table;
}

void save_frequencies(const EmbeddingSpace& space, const std::filesystem::path& path) {
  const auto& counts = space.frequencies();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write frequency file " + path.string());
  for (std::size_t i = 0; i < space.size(); ++i) out << space.word(i) << ' ' << counts[i] << '\n';
  if (!out) throw IoError("failed writing frequency file " + path.string());
}

double cosine_similarity(const VectorRef& a, const VectorRef& b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("cosine similarity: dimension mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw InvalidArgument("undefined similarity: zero vector");
  }
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

std::vector<VectorQueryResult> nearest_neighbors(const EmbeddingSpace& space, const VectorRef& query,
                                                 std::size_t k,
                                                 const std::unordered_set<std::string>& exclude) {
  if (space.empty()) throw InvalidArgument("nearest neighbors: empty space");
  if (k == 0 || k > space.size()) {
    throw InvalidArgument("nearest neighbors: k must be in [1, " + std::to_string(space.size()) + "]");
  }
  if (static_cast<std::size_t>(query.size()) != space.dim()) {
    throw InvalidArgument("nearest neighbors: query dimension mismatch");
  }
  const double query_norm = query.norm();
  if (query_norm == 0.0) throw InvalidArgument("undefined similarity: zero query vector");

  struct Candidate {
    double similarity;
    std::size_t index;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(space.size());
  const Eigen::VectorXd norms = space.vectors().rowwise().norm();
  const Eigen::VectorXd dots = space.vectors() * query.transpose();
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    if (norms(idx) == 0.0 || exclude.contains(space.word(i))) continue;
    candidates.push_back({std::clamp(dots(idx) / (norms(idx) * query_norm), -1.0, 1.0), i});
  }
  const std::size_t take = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), [](const Candidate& a, const Candidate& b) {
                      if (a.similarity != b.similarity) return a.similarity > b.similarity;
                      return a.index < b.index;
                    });
  std::vector<VectorQueryResult> results;
  results.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    results.push_back({space.word(candidates[i].index), candidates[i].similarity});
  }
  return results;
}

}  // namespace semshift
