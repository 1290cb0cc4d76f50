#include "semshift/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "csv.hpp"
#include "semshift/clustering.hpp"
#include "semshift/error.hpp"
#include "util.hpp"

namespace semshift {
namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

TrajectoryReport neighbor_trajectory(const std::string& target, const std::vector<const EmbeddingSpace*>& spaces,
                                     const std::vector<std::string>& neighbors) {
  if (spaces.empty()) throw InvalidArgument("neighbor_trajectory: no spaces");
  for (const auto* s : spaces) {
    if (s->dim() != spaces.front()->dim()) {
      throw InvalidArgument("neighbor_trajectory: spaces have different dimensions");
    }
  }
  if (std::none_of(spaces.begin(), spaces.end(), [&](const EmbeddingSpace* s) { return s->contains(target); })) {
    throw InvalidArgument("neighbor_trajectory: target '" + target + "' is absent from every space");
  }

  TrajectoryReport report;
  report.target = target;
  std::vector<std::pair<const EmbeddingSpace*, std::size_t>> rows;
  for (const auto* s : spaces) {
    report.spaces.push_back(s->label());
    if (auto i = s->index_of(target)) {
      report.points.push_back({s->label(), target, true});
      rows.emplace_back(s, *i);
    }
    for (const auto& n : neighbors) {
      if (auto i = s->index_of(n)) {
        report.points.push_back({s->label(), n, false});
        rows.emplace_back(s, *i);
      }
    }
  }

  if (rows.size() >= 2) {
    Matrix stacked(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(spaces.front()->dim()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      stacked.row(static_cast<Eigen::Index>(r)) = rows[r].first->row(rows[r].second);
    }
    const auto pca = pca_2d(stacked);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      report.points[r].x = pca.points(static_cast<Eigen::Index>(r), 0);
      report.points[r].y = pca.points(static_cast<Eigen::Index>(r), 1);
    }
  }

  for (const auto& n : neighbors) {
    SimilaritySeries series;
    series.neighbor = n;
    for (const auto* s : spaces) {
      auto ti = s->index_of(target);
      auto ni = s->index_of(n);
      if (ti && ni) {
        series.similarity.push_back(cosine_similarity(s->row(*ti), s->row(*ni)));
        series.absent.push_back(false);
      } else {
        series.similarity.push_back(0.0);
        series.absent.push_back(true);
      }
    }
    report.series.push_back(std::move(series));
  }
  return report;
}

DistributionSummary stability_distribution(const std::vector<StabilityRecord>& records, std::size_t bins) {
  if (records.empty()) throw InvalidArgument("stability_distribution: no records");
  DistributionSummary summary;
  summary.histogram = stability_histogram(records, bins);
  std::vector<double> values;
  for (const auto& r : records) {
    if (!r.missing) values.push_back(r.stab);
  }
  summary.excluded_missing = records.size() - values.size();
  summary.included = values.size();
  if (values.empty()) throw InvalidArgument("stability_distribution: every record is a missing-word sentinel");

  const auto n = static_cast<double>(values.size());
  summary.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  summary.median = sorted.size() % 2 == 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;

  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : values) {
    const double d = v - summary.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (values.size() >= 3 && m2 > 0.0) {
    const double g1 = m3 / std::pow(m2, 1.5);
    summary.skewness = std::sqrt(n * (n - 1.0)) / (n - 2.0) * g1;
  }
  return summary;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("spearman: inputs differ in length");
  if (x.size() < 3) throw InvalidArgument("spearman: need at least 3 pairs, got " + std::to_string(x.size()));
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mean = (static_cast<double>(x.size()) + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw InvalidArgument("spearman: constant input has no rank correlation");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationReport frequency_stability_correlation(const std::vector<StabilityRecord>& records,
                                                  const FrequencyTable& frequencies,
                                                  const std::string& frequency_source) {
  CorrelationReport report;
  report.frequency_source = frequency_source;
  std::vector<double> stabs;
  std::vector<double> counts;
  for (const auto& r : records) {
    ScatterRow row{r.word, r.stab, std::nullopt, r.missing};
    if (auto it = frequencies.find(r.word); it != frequencies.end() && it->second > 0) {
      row.frequency = it->second;
      if (!r.missing) {
        stabs.push_back(r.stab);
        counts.push_back(static_cast<double>(it->second));
      }
    }
    report.rows.push_back(std::move(row));
  }
  if (stabs.size() < 3) {
    throw InvalidArgument("frequency_stability_correlation: only " + std::to_string(stabs.size()) +
                          " usable (stability, frequency) pairs");
  }
  report.sample_size = stabs.size();
  report.coefficient = spearman(stabs, counts);
  return report;
}

std::vector<ShiftedWord> shift_ranking(const std::vector<StabilityRecord>& records, std::size_t top_n) {
  std::vector<ShiftedWord> ranking;
  for (const auto& r : records) {
    if (!r.missing) ranking.push_back({r.word, r.stab});
  }
  std::sort(ranking.begin(), ranking.end(), [](const ShiftedWord& a, const ShiftedWord& b) {
    if (a.stab != b.stab) return a.stab < b.stab;
    return a.word < b.word;
  });
  if (ranking.size() > top_n) ranking.resize(top_n);
  return ranking;
}

void to_json(nlohmann::json& j, const TrajectoryReport& report) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : report.points) {
    points.push_back({{"space", p.space}, {"word", p.word}, {"target", p.is_target}, {"x", p.x}, {"y", p.y}});
  }
  nlohmann::json series = nlohmann::json::array();
  for (const auto& s : report.series) {
    series.push_back({{"neighbor", s.neighbor}, {"similarity", s.similarity}, {"absent", s.absent}});
  }
  j = nlohmann::json{{"target", report.target}, {"spaces", report.spaces}, {"points", points}, {"series", series}};
}

void to_json(nlohmann::json& j, const DistributionSummary& s) {
  j = nlohmann::json{{"histogram", s.histogram},
                     {"included", s.included},
                     {"excluded_missing", s.excluded_missing},
                     {"mean", s.mean},
                     {"median", s.median},
                     {"skewness", s.skewness ? nlohmann::json(*s.skewness) : nlohmann::json(nullptr)},
                     {"skewness_defined", s.skewness.has_value()}};
}

void to_json(nlohmann::json& j, const CorrelationReport& r) {
  j = nlohmann::json{{"frequency_source", r.frequency_source},
                     {"method", "spearman"},
                     {"coefficient", r.coefficient},
                     {"sample_size", r.sample_size},
                     {"rows", r.rows.size()}};
}

void write_scatter_csv(const CorrelationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "word,stab,frequency,log10_frequency,missing_flag\n";
  for (const auto& row : report.rows) {
    std::string freq;
    std::string log_freq;
    if (row.frequency) {
      freq = std::to_string(*row.frequency);
      log_freq = detail::format_double(std::log10(static_cast<double>(*row.frequency)));
    }
    detail::write_csv_row(out, {row.word, detail::format_double(row.stab), freq, log_freq, row.missing ? "1" : "0"});
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_shift_ranking_csv(const std::vector<ShiftedWord>& ranking, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "rank,word,stab\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    detail::write_csv_row(out, {std::to_string(i + 1), ranking[i].word, detail::format_double(ranking[i].stab)});
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace semshift
