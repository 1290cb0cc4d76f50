#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semshift/embedding_store.hpp"
#include "semshift/stability.hpp"

namespace semshift {

struct TrajectoryPoint {
  std::string space;
  std::string word;
  bool is_target = false;
  double x = 0.0;
  double y = 0.0;
};

// Cosine similarity of one neighbor to the target in each space. Entries are
// exactly 0 with absent[s] set when either word is missing from space s.
struct SimilaritySeries {
  std::string neighbor;
  std::vector<double> similarity;
  std::vector<bool> absent;
};

struct TrajectoryReport {
  std::string target;
  std::vector<std::string> spaces;
  std::vector<TrajectoryPoint> points;  // one shared 2-D PCA basis
  std::vector<SimilaritySeries> series;
};

// `spaces` must already share one coordinate frame (rotations applied).
// Throws when the target is absent from every space.
TrajectoryReport neighbor_trajectory(const std::string& target, const std::vector<const EmbeddingSpace*>& spaces,
                                     const std::vector<std::string>& neighbors);

struct DistributionSummary {
  Histogram histogram;
  std::size_t included = 0;
  std::size_t excluded_missing = 0;
  double mean = 0.0;
  double median = 0.0;
  // Adjusted Fisher-Pearson skewness; empty for zero variance or n < 3.
  std::optional<double> skewness;
};

// Missing-flag records are counted but left out of every statistic. Throws
// when no usable record remains.
DistributionSummary stability_distribution(const std::vector<StabilityRecord>& records, std::size_t bins = 50);

// Spearman rank correlation with average ranks for ties. Throws when the
// inputs differ in length, have fewer than 3 points, or either is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct ScatterRow {
  std::string word;
  double stab = kMissingStability;
  std::optional<std::uint64_t> frequency;
  bool missing = false;
};

struct CorrelationReport {
  std::string frequency_source;
  std::vector<ScatterRow> rows;  // every record, including missing ones
  double coefficient = 0.0;
  std::size_t sample_size = 0;
};

// Spearman(stab, frequency) over non-missing records whose word has a
// positive count in `frequencies`. Needs at least 3 such pairs.
CorrelationReport frequency_stability_correlation(const std::vector<StabilityRecord>& records,
                                                  const FrequencyTable& frequencies,
                                                  const std::string& frequency_source);

struct ShiftedWord {
  std::string word;
  double stab = 0.0;
};

// Least stable non-missing words first, ties by token.
std::vector<ShiftedWord> shift_ranking(const std::vector<StabilityRecord>& records, std::size_t top_n);

void to_json(nlohmann::json& j, const TrajectoryReport& report);
void to_json(nlohmann::json& j, const DistributionSummary& summary);
void to_json(nlohmann::json& j, const CorrelationReport& report);  // summary only, no rows

// word,stab,frequency,log10_frequency,missing_flag
void write_scatter_csv(const CorrelationReport& report, const std::filesystem::path& path);
// rank,word,stab
void write_shift_ranking_csv(const std::vector<ShiftedWord>& ranking, const std::filesystem::path& path);

}  // namespace semshift
