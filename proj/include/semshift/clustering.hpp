#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semshift/embedding_store.hpp"

namespace semshift {

struct HashtagSelection {
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> frequencies;
  Matrix vectors;  // unit L2 rows, aligned with tokens
};

// '#'-prefixed words with frequency >= min_frequency, rows L2-normalized.
// Zero vectors are skipped with a warning. Throws if nothing qualifies.
HashtagSelection select_hashtag_vectors(const EmbeddingSpace& space, std::uint64_t min_frequency = 10);

struct KMeansOptions {
  std::size_t max_iters = 300;
  std::size_t restarts = 10;
  std::uint64_t seed = 1;
};

struct ClusterResult {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;
  Matrix centroids;
  std::vector<double> silhouette;  // empty when k < 2
  double mean_silhouette = 0.0;
  double inertia = 0.0;
  std::size_t iterations = 0;
  // Inertia after each Lloyd update of the winning run.
  std::vector<double> inertia_trace;
};

// Lloyd's algorithm with k-means++ seeding; the run with the lowest inertia
// over `restarts` wins. Restart r uses seed + r. An emptied cluster takes
// over the point farthest from its centroid. Silhouettes are filled in for
// k >= 2 (all zero when k = n).
ClusterResult kmeans(const Matrix& data, std::size_t k, const KMeansOptions& options = {});

struct SilhouetteResult {
  std::vector<double> values;
  double mean = 0.0;
};

// Rousseeuw silhouettes with Euclidean distance; members of singleton
// clusters score exactly 0. Needs at least two non-empty clusters.
SilhouetteResult silhouette(const Matrix& data, const std::vector<std::size_t>& assignments);

struct SweepResult {
  std::vector<std::size_t> ks;
  std::vector<double> mean_silhouettes;
  std::size_t best_k = 0;
  ClusterResult best;
};

// Runs kmeans for every k in [k_min, k_max] and keeps the highest mean
// silhouette, ties going to the smaller k.
SweepResult sweep_k(const Matrix& data, std::size_t k_min, std::size_t k_max, const KMeansOptions& options = {});

struct PcaProjection {
  Matrix points;      // n x 2
  Matrix components;  // 2 x d, rows are unit principal axes
  Vector mean;
  std::vector<double> explained_variance;  // per component, sample variance
};

// Mean-centers and projects onto the two leading right singular vectors.
// Each axis is signed so its largest-magnitude loading is non-negative.
// Rank-1 input yields a zero second coordinate (with a warning).
PcaProjection pca_2d(const Matrix& data);

struct RankedHashtag {
  std::string token;
  std::uint64_t frequency = 0;
};

// For each cluster, its m most frequent members (ties by token order).
std::vector<std::vector<RankedHashtag>> top_hashtags_per_cluster(const ClusterResult& result,
                                                                 const std::vector<std::string>& tokens,
                                                                 const std::vector<std::uint64_t>& frequencies,
                                                                 std::size_t m);

void to_json(nlohmann::json& j, const ClusterResult& result);
void from_json(const nlohmann::json& j, ClusterResult& result);

// CSV exports: token,cluster,silhouette / token,x,y,cluster /
// cluster,rank,hashtag,frequency.
void write_silhouette_csv(const ClusterResult& result, const std::vector<std::string>& tokens,
                          const std::filesystem::path& path);
void write_pca_csv(const PcaProjection& pca, const std::vector<std::string>& tokens,
                   const std::vector<std::size_t>& assignments, const std::filesystem::path& path);
void write_top_hashtags_csv(const std::vector<std::vector<RankedHashtag>>& tables, const std::filesystem::path& path);

}  // namespace semshift
