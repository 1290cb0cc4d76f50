#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semshift/alignment.hpp"
#include "semshift/embedding_store.hpp"

namespace semshift {

// Stability value recorded for a word absent from at least one compared
// space. StabilityRecord::missing disambiguates it from a genuine -1.
inline constexpr double kMissingStability = -1.0;

struct StabilityRecord {
  std::string word;
  std::string pair;  // "<label_i>|<label_j>", or "mean" for averaged tables
  std::optional<double> sim_ij;
  std::optional<double> sim_ji;
  double stab = kMissingStability;
  bool missing = true;
};

// Two spaces plus the independently fitted maps between them. The spaces are
// borrowed and must outlive the comparison.
struct Comparison {
  const EmbeddingSpace* first = nullptr;
  const EmbeddingSpace* second = nullptr;
  RotationPair maps;

  std::string label() const;
};

// Fits both directions on each space's own top-k words.
Comparison make_comparison(const EmbeddingSpace& first, const EmbeddingSpace& second, std::size_t anchor_count);

enum class VocabularyScope { kIntersection, kUnion };

VocabularyScope parse_scope(const std::string& name);
std::string to_string(VocabularyScope scope);

// cos(v_i R_ij, v_j). Throws InvalidArgument for a missing word or a map that
// does not go from space_i to space_j.
double one_way_similarity(const std::string& word, const EmbeddingSpace& space_i, const EmbeddingSpace& space_j,
                          const RotationMap& map_ij);

// Back-and-forth stability:
//   (cos(v_i R_ij R_ji, v_i) + cos(v_j R_ji R_ij, v_j)) / 2
// Returns kMissingStability when the word is absent from either space.
double two_way_stability(const std::string& word, const EmbeddingSpace& space_i, const EmbeddingSpace& space_j,
                         const RotationMap& map_ij, const RotationMap& map_ji);

StabilityRecord stability_record(const std::string& word, const Comparison& comparison);

// Mean two-way stability over the comparisons containing the word in both
// spaces; kMissingStability when no comparison does.
double averaged_stability(const std::string& word, const std::vector<Comparison>& comparisons);

// One record per word in scope. Words are listed in vocabulary order of the
// first space, then words only found in the second.
std::vector<StabilityRecord> stability_table(const Comparison& comparison, VocabularyScope scope);

// Averaged stability per word over several comparisons. Intersection scope
// keeps words present in every space of every comparison.
std::vector<StabilityRecord> averaged_stability_table(const std::vector<Comparison>& comparisons,
                                                      VocabularyScope scope);

struct Histogram {
  std::vector<double> edges;          // bins + 1 uniform edges over [lo, hi]
  std::vector<std::uint64_t> counts;  // last bin is closed on the right
  std::uint64_t excluded = 0;         // missing-flag records left out
};

// Histogram of stab over non-missing records, uniform bins over [-1, 1].
Histogram stability_histogram(const std::vector<StabilityRecord>& records, std::size_t bins = 50);

void to_json(nlohmann::json& j, const Histogram& h);
void from_json(const nlohmann::json& j, Histogram& h);

// CSV columns: word,pair,sim_ij,sim_ji,stab,missing. Absent similarities are
// empty fields; missing is 0 or 1.
void write_stability_csv(const std::vector<StabilityRecord>& records, const std::filesystem::path& path);
std::vector<StabilityRecord> read_stability_csv(const std::filesystem::path& path);

}  // namespace semshift
