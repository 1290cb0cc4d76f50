#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "semshift/embedding_store.hpp"

namespace semshift {

struct PipelineConfig {
  std::unordered_set<std::string> stopwords;  // lowercase entries only
  std::size_t min_tokens = 10;
  bool keep_hashtags = true;

  // Throws InvalidArgument if a stop word contains an uppercase letter.
  void validate() const;
};

struct CorpusStats {
  std::uint64_t documents_kept = 0;
  std::uint64_t documents_dropped = 0;
  FrequencyTable word_frequencies;
  FrequencyTable hashtag_frequencies;  // '#'-prefixed subset of word_frequencies

  void add_document(const std::vector<std::string>& tokens);
  void merge(const CorpusStats& other);
};

void to_json(nlohmann::json& j, const CorpusStats& stats);
void from_json(const nlohmann::json& j, CorpusStats& stats);

CorpusStats load_corpus_stats(const std::filesystem::path& path);
void save_corpus_stats(const CorpusStats& stats, const std::filesystem::path& path);

// One stop word per line; blank lines and lines starting with ';' or "//" are
// skipped. Entries are lowercased.
std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path);

// Tokenizes one raw document:
//   1. lowercase ASCII letters
//   2. remove URLs (http:// or https:// up to whitespace) and mentions
//      ('@' followed by [a-z0-9_]); each removed span becomes a space
//   3. delete every byte outside [a-z0-9#] and whitespace (emoji, punctuation,
//      all non-ASCII); '#' is deleted too when keep_hashtags is false
//   4. split on whitespace; a '#' inside a token starts a new hashtag token,
//      repeated '#' collapse and a bare '#' is dropped
//   5. drop stop words
//   6. return nullopt when fewer than min_tokens tokens remain
std::optional<std::vector<std::string>> preprocess_document(std::string_view raw,
                                                            const PipelineConfig& config);

// Runs preprocess_document over every line of `input` and writes one
// space-joined token line per kept document to `output`. Frequencies are
// counted over kept documents only.
CorpusStats run_corpus(const std::filesystem::path& input, const PipelineConfig& config,
                       const std::filesystem::path& output);

}  // namespace semshift
