#include "semshift/text_pipeline.hpp"

#include <cctype>
#include <fstream>

#include "semshift/error.hpp"
#include "util.hpp"

namespace semshift {
namespace {

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

bool starts_with_at(std::string_view s, std::size_t pos, std::string_view prefix) {
  return s.substr(pos, prefix.size()) == prefix;
}

// Steps 1-3: lowercase, strip URLs and mentions, whitelist characters.
std::string normalize(std::string_view raw, bool keep_hashtags) {
  std::string lowered(raw);
  for (char& c : lowered) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }

  std::string stripped;
  stripped.reserve(lowered.size());
  std::size_t i = 0;
  while (i < lowered.size()) {
    if (starts_with_at(lowered, i, "http://") || starts_with_at(lowered, i, "https://")) {
      while (i < lowered.size() && !detail::is_space(lowered[i])) ++i;
      stripped += ' ';
      continue;
    }
    if (lowered[i] == '@' && i + 1 < lowered.size() && is_word_char(lowered[i + 1])) {
      ++i;
      while (i < lowered.size() && is_word_char(lowered[i])) ++i;
      stripped += ' ';
      continue;
    }
    stripped += lowered[i++];
  }

  std::string kept;
  kept.reserve(stripped.size());
  for (char c : stripped) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || (keep_hashtags && c == '#')) {
      kept += c;
    } else if (detail::is_space(c)) {
      kept += ' ';
    }
  }
  return kept;
}

// Step 4 for a single whitespace-delimited chunk.
void split_hashtags(std::string_view chunk, std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < chunk.size()) {
    if (chunk[i] == '#') {
      while (i < chunk.size() && chunk[i] == '#') ++i;
      std::size_t start = i;
      while (i < chunk.size() && chunk[i] != '#') ++i;
      if (i > start) out.push_back("#" + std::string(chunk.substr(start, i - start)));
    } else {
      std::size_t start = i;
      while (i < chunk.size() && chunk[i] != '#') ++i;
      out.emplace_back(chunk.substr(start, i - start));
    }
  }
}

}  // namespace

void PipelineConfig::validate() const {
  for (const auto& word : stopwords) {
    for (char c : word) {
      if (c >= 'A' && c <= 'Z') {
        throw InvalidArgument("stop word '" + word + "' is not lowercase");
      }
    }
  }
}

void CorpusStats::add_document(const std::vector<std::string>& tokens) {
  ++documents_kept;
  for (const auto& token : tokens) {
    ++word_frequencies[token];
    if (token.front() == '#') ++hashtag_frequencies[token];
  }
}

void CorpusStats::merge(const CorpusStats& other) {
  documents_kept += other.documents_kept;
  documents_dropped += other.documents_dropped;
  for (const auto& [token, count] : other.word_frequencies) word_frequencies[token] += count;
  for (const auto& [token, count] : other.hashtag_frequencies) hashtag_frequencies[token] += count;
}

void to_json(nlohmann::json& j, const CorpusStats& stats) {
  // nlohmann::json objects are key-sorted, which keeps the output stable.
  nlohmann::json words = nlohmann::json::object();
  for (const auto& [token, count] : stats.word_frequencies) words[token] = count;
  nlohmann::json tags = nlohmann::json::object();
  for (const auto& [token, count] : stats.hashtag_frequencies) tags[token] = count;
  j = nlohmann::json{{"documents_kept", stats.documents_kept},
                     {"documents_dropped", stats.documents_dropped},
                     {"word_frequencies", std::move(words)},
                     {"hashtag_frequencies", std::move(tags)}};
}

void from_json(const nlohmann::json& j, CorpusStats& stats) {
  stats = CorpusStats{};
  j.at("documents_kept").get_to(stats.documents_kept);
  j.at("documents_dropped").get_to(stats.documents_dropped);
  for (const auto& [token, count] : j.at("word_frequencies").items()) {
    stats.word_frequencies[token] = count.get<std::uint64_t>();
  }
  for (const auto& [token, count] : j.at("hashtag_frequencies").items()) {
    stats.hashtag_frequencies[token] = count.get<std::uint64_t>();
  }
}

CorpusStats load_corpus_stats(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus stats " + path.string());
  try {
    return nlohmann::json::parse(in).get<CorpusStats>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid corpus stats " + path.string() + ": " + e.what());
  }
}

void save_corpus_stats(const CorpusStats& stats, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write corpus stats " + path.string());
  out << nlohmann::json(stats).dump(2) << '\n';
  if (!out) throw IoError("failed writing corpus stats " + path.string());
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stop-word list " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == ';' || view.starts_with("//")) continue;
    std::string word(view);
    for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    words.insert(std::move(word));
  }
  return words;
}

std::optional<std::vector<std::string>> preprocess_document(std::string_view raw,
                                                            const PipelineConfig& config) {
  const std::string text = normalize(raw, config.keep_hashtags);
  std::vector<std::string> pieces;
  for (auto chunk : detail::split_whitespace(text)) split_hashtags(chunk, pieces);

  std::vector<std::string> tokens;
  tokens.reserve(pieces.size());
  for (auto& piece : pieces) {
    if (!config.stopwords.contains(piece)) tokens.push_back(std::move(piece));
  }
  if (tokens.size() < config.min_tokens) return std::nullopt;
  return tokens;
}

CorpusStats run_corpus(const std::filesystem::path& input, const PipelineConfig& config,
                       const std::filesystem::path& output) {
  config.validate();
  std::ifstream in(input, std::ios::binary);
  if (!in) throw IoError("cannot open corpus " + input.string());
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write token file " + output.string());

  CorpusStats stats;
  std::string line;
  std::string joined;
  while (std::getline(in, line)) {
    auto tokens = preprocess_document(line, config);
    if (!tokens) {
      ++stats.documents_dropped;
      continue;
    }
    // An empty kept document (min_tokens == 0) still occupies one output line.
    joined.clear();
    for (std::size_t i = 0; i < tokens->size(); ++i) {
      if (i) joined += ' ';
      joined += (*tokens)[i];
    }
    joined += '\n';
    out.write(joined.data(), static_cast<std::streamsize>(joined.size()));
    stats.add_document(*tokens);
  }
  if (in.bad()) throw IoError("failed reading corpus " + input.string());
  if (!out) throw IoError("failed writing token file " + output.string());
  return stats;
}

}  // namespace semshift
