#include "semshift/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/SVD>

#include "csv.hpp"
#include "semshift/error.hpp"
#include "util.hpp"

namespace semshift {
namespace {

double squared_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

struct Run {
  std::vector<std::size_t> assignments;
  Matrix centroids;
  double inertia = 0.0;
  std::size_t iterations = 0;
  std::vector<double> trace;
};

Matrix plus_plus_seeds(const Matrix& data, std::size_t k, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(data.rows());
  Matrix centroids(static_cast<Eigen::Index>(k), data.cols());
  std::vector<bool> chosen(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

  std::size_t pick = static_cast<std::size_t>(rng() % n);
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
      if (total > 0.0) {
        const double target = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
        double running = 0.0;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          running += nearest[i];
          if (nearest[i] > 0.0 && running > target) {
            pick = i;
            break;
          }
        }
        if (pick == n) {  // rounding at the tail
          for (std::size_t i = n; i-- > 0;) {
            if (nearest[i] > 0.0) {
              pick = i;
              break;
            }
          }
        }
      } else {
        // Every point coincides with a chosen seed; take an unused index.
        std::vector<std::size_t> unused;
        for (std::size_t i = 0; i < n; ++i) {
          if (!chosen[i]) unused.push_back(i);
        }
        pick = unused[static_cast<std::size_t>(rng() % unused.size())];
      }
    }
    chosen[pick] = true;
    centroids.row(static_cast<Eigen::Index>(c)) = data.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(data, static_cast<Eigen::Index>(i), centroids,
                                                         static_cast<Eigen::Index>(c)));
    }
  }
  return centroids;
}

Run lloyd(const Matrix& data, std::size_t k, std::size_t max_iters, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.rows());
  std::mt19937_64 rng(seed);
  Run run;
  run.centroids = plus_plus_seeds(data, k, rng);
  run.assignments.assign(n, k);  // k marks "unassigned"
  std::vector<double> dist(n);

  for (std::size_t iter = 0; iter < std::max<std::size_t>(1, max_iters); ++iter) {
    std::vector<std::size_t> next(n);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(data, static_cast<Eigen::Index>(i), run.centroids, static_cast<Eigen::Index>(c));
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      next[i] = best_c;
      dist[i] = best;
      ++sizes[best_c];
    }
    // Refill empty clusters with the farthest point of a multi-member cluster.
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[next[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
      }
      --sizes[next[far]];
      next[far] = c;
      dist[far] = 0.0;
      sizes[c] = 1;
    }

    const bool changed = next != run.assignments;
    run.assignments = std::move(next);
    run.iterations = iter + 1;

    run.centroids.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      run.centroids.row(static_cast<Eigen::Index>(run.assignments[i])) += data.row(static_cast<Eigen::Index>(i));
    }
    for (std::size_t c = 0; c < k; ++c) run.centroids.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(sizes[c]);

    run.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      run.inertia += squared_distance(data, static_cast<Eigen::Index>(i), run.centroids,
                                      static_cast<Eigen::Index>(run.assignments[i]));
    }
    run.trace.push_back(run.inertia);
    if (!changed) break;
  }
  return run;
}

void require_finite(const Matrix& data, const char* what) {
  if (!data.allFinite()) throw InvalidArgument(std::string(what) + ": input contains non-finite values");
}

}  // namespace

HashtagSelection select_hashtag_vectors(const EmbeddingSpace& space, std::uint64_t min_frequency) {
  const auto& freq = space.frequencies();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& word = space.word(i);
    if (word.size() < 2 || word.front() != '#' || freq[i] < min_frequency) continue;
    if (space.row(i).norm() == 0.0) {
      warn("hashtag '" + word + "' has a zero vector and is skipped");
      continue;
    }
    rows.push_back(i);
  }
  if (rows.empty()) {
    throw InvalidArgument("no hashtags with frequency >= " + std::to_string(min_frequency) + " in space '" +
                          space.label() + "'");
  }
  HashtagSelection out;
  out.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(space.dim()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.tokens.push_back(space.word(rows[r]));
    out.frequencies.push_back(freq[rows[r]]);
    out.vectors.row(static_cast<Eigen::Index>(r)) = space.row(rows[r]).normalized();
  }
  return out;
}

ClusterResult kmeans(const Matrix& data, std::size_t k, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (k < 1) throw InvalidArgument("kmeans: k must be >= 1");
  if (k > n) throw InvalidArgument("kmeans: k = " + std::to_string(k) + " exceeds sample count " + std::to_string(n));
  require_finite(data, "kmeans");

  Run best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, options.restarts); ++r) {
    Run run = lloyd(data, k, options.max_iters, options.seed + r);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }

  ClusterResult result;
  result.k = k;
  result.assignments = std::move(best.assignments);
  result.centroids = std::move(best.centroids);
  result.inertia = best.inertia;
  result.iterations = best.iterations;
  result.inertia_trace = std::move(best.trace);
  if (k >= 2) {
    auto s = silhouette(data, result.assignments);
    result.silhouette = std::move(s.values);
    result.mean_silhouette = s.mean;
  }
  return result;
}

SilhouetteResult silhouette(const Matrix& data, const std::vector<std::size_t>& assignments) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (assignments.size() != n) throw InvalidArgument("silhouette: assignment count does not match rows");
  if (n == 0) throw InvalidArgument("silhouette: no samples");
  const std::size_t k = *std::max_element(assignments.begin(), assignments.end()) + 1;
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignments) ++sizes[a];
  if (std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }) < 2) {
    throw InvalidArgument("silhouette: need at least two non-empty clusters");
  }

  // sums(i, c): total distance from sample i to the members of cluster c.
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::sqrt(squared_distance(data, static_cast<Eigen::Index>(i), data, static_cast<Eigen::Index>(j)));
      sums(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(assignments[j])) += d;
      sums(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(assignments[i])) += d;
    }
  }

  SilhouetteResult out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = assignments[i];
    if (sizes[own] == 1) {
      out.values[i] = 0.0;
      continue;
    }
    const double a = sums(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(own)) /
                     static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || sizes[c] == 0) continue;
      b = std::min(b, sums(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    out.values[i] = denom > 0.0 ? std::clamp((b - a) / denom, -1.0, 1.0) : 0.0;
  }
  out.mean = std::accumulate(out.values.begin(), out.values.end(), 0.0) / static_cast<double>(n);
  return out;
}

SweepResult sweep_k(const Matrix& data, std::size_t k_min, std::size_t k_max, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (k_min > k_max) throw InvalidArgument("sweep_k: empty k range");
  if (k_min < 2 || k_max + 1 > n) {
    throw InvalidArgument("sweep_k: k range must lie within [2, " + std::to_string(n > 0 ? n - 1 : 0) + "]");
  }
  SweepResult sweep;
  bool have = false;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    ClusterResult result = kmeans(data, k, options);
    sweep.ks.push_back(k);
    sweep.mean_silhouettes.push_back(result.mean_silhouette);
    if (!have || result.mean_silhouette > sweep.best.mean_silhouette) {
      sweep.best = std::move(result);
      sweep.best_k = k;
      have = true;
    }
  }
  return sweep;
}

PcaProjection pca_2d(const Matrix& data) {
  const auto n = data.rows();
  const auto d = data.cols();
  if (n < 2) throw InvalidArgument("pca_2d: need at least two samples");
  if (d < 1) throw InvalidArgument("pca_2d: zero-dimensional input");
  require_finite(data, "pca_2d");

  PcaProjection out;
  out.mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - out.mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();

  const double tol = static_cast<double>(std::max(n, d)) * std::numeric_limits<double>::epsilon() *
                     (sigma.size() > 0 ? sigma(0) : 0.0);
  out.components = Matrix::Zero(2, d);
  out.explained_variance.assign(2, 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index c = 0; c < std::min<Eigen::Index>(2, sigma.size()); ++c) {
    if (!(sigma(c) > tol)) break;
    Eigen::RowVectorXd axis = v.col(c).transpose();
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0.0) axis = -axis;
    out.components.row(c) = axis;
    out.explained_variance[static_cast<std::size_t>(c)] = sigma(c) * sigma(c) / static_cast<double>(n - 1);
    ++rank;
  }
  if (rank < 2) warn("pca_2d: input has rank " + std::to_string(rank) + "; missing coordinates are zero");
  out.points = centered * out.components.transpose();
  return out;
}

std::vector<std::vector<RankedHashtag>> top_hashtags_per_cluster(const ClusterResult& result,
                                                                 const std::vector<std::string>& tokens,
                                                                 const std::vector<std::uint64_t>& frequencies,
                                                                 std::size_t m) {
  if (tokens.size() != result.assignments.size() || frequencies.size() != tokens.size()) {
    throw InvalidArgument("top_hashtags_per_cluster: tokens, frequencies and assignments differ in length");
  }
  std::vector<std::vector<RankedHashtag>> tables(result.k);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    tables.at(result.assignments[i]).push_back({tokens[i], frequencies[i]});
  }
  for (auto& table : tables) {
    std::sort(table.begin(), table.end(), [](const RankedHashtag& a, const RankedHashtag& b) {
      if (a.frequency != b.frequency) return a.frequency > b.frequency;
      return a.token < b.token;
    });
    if (table.size() > m) table.resize(m);
  }
  return tables;
}

void to_json(nlohmann::json& j, const ClusterResult& r) {
  std::vector<std::vector<double>> centroids;
  for (Eigen::Index c = 0; c < r.centroids.rows(); ++c) {
    centroids.emplace_back(r.centroids.row(c).data(), r.centroids.row(c).data() + r.centroids.cols());
  }
  j = nlohmann::json{{"k", r.k},
                     {"assignments", r.assignments},
                     {"centroids", centroids},
                     {"silhouettes", r.silhouette},
                     {"mean_silhouette", r.mean_silhouette},
                     {"inertia", r.inertia},
                     {"iterations", r.iterations}};
}

void from_json(const nlohmann::json& j, ClusterResult& r) {
  j.at("k").get_to(r.k);
  j.at("assignments").get_to(r.assignments);
  j.at("silhouettes").get_to(r.silhouette);
  j.at("mean_silhouette").get_to(r.mean_silhouette);
  j.at("inertia").get_to(r.inertia);
  r.iterations = j.value("iterations", std::size_t{0});
  const auto rows = j.at("centroids").get<std::vector<std::vector<double>>>();
  const auto cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  r.centroids.resize(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t c = 0; c < rows.size(); ++c) {
    if (static_cast<Eigen::Index>(rows[c].size()) != cols) throw FormatError("cluster result: ragged centroids");
    r.centroids.row(static_cast<Eigen::Index>(c)) = Eigen::Map<const Vector>(rows[c].data(), cols);
  }
}

void write_silhouette_csv(const ClusterResult& result, const std::vector<std::string>& tokens,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "token,cluster,silhouette\n";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    detail::write_csv_row(out, {tokens[i], std::to_string(result.assignments.at(i)),
                                i < result.silhouette.size() ? detail::format_double(result.silhouette[i]) : ""});
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_pca_csv(const PcaProjection& pca, const std::vector<std::string>& tokens,
                   const std::vector<std::size_t>& assignments, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "token,x,y,cluster\n";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    detail::write_csv_row(out, {tokens[i], detail::format_double(pca.points(r, 0)),
                                detail::format_double(pca.points(r, 1)),
                                i < assignments.size() ? std::to_string(assignments[i]) : ""});
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_top_hashtags_csv(const std::vector<std::vector<RankedHashtag>>& tables, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "cluster,rank,hashtag,frequency\n";
  for (std::size_t c = 0; c < tables.size(); ++c) {
    for (std::size_t r = 0; r < tables[c].size(); ++r) {
      detail::write_csv_row(out, {std::to_string(c), std::to_string(r + 1), tables[c][r].token,
                                  std::to_string(tables[c][r].frequency)});
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace semshift
