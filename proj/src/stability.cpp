#include "semshift/stability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "csv.hpp"
#include "semshift/error.hpp"
#include "util.hpp"

namespace semshift {
namespace {

void check_map(const RotationMap& map, const EmbeddingSpace& from, const EmbeddingSpace& to) {
  if (map.dim() != from.dim() || map.dim() != to.dim()) {
    throw InvalidArgument("rotation map dimension " + std::to_string(map.dim()) + " does not match spaces '" +
                          from.label() + "' (" + std::to_string(from.dim()) + ") and '" + to.label() + "' (" +
                          std::to_string(to.dim()) + ")");
  }
  if (map.from_label != from.label() || map.to_label != to.label()) {
    throw InvalidArgument("rotation map '" + map.from_label + "' -> '" + map.to_label + "' does not connect '" +
                          from.label() + "' -> '" + to.label() + "'");
  }
}

// cos(v R_a R_b, v) for the word's home vector v.
double round_trip(const VectorRef& v, const RotationMap& there, const RotationMap& back) {
  const Vector mapped = (v * there.rotation) * back.rotation;
  return cosine_similarity(mapped, v);
}

std::vector<std::string> scoped_words(const std::vector<const EmbeddingSpace*>& spaces, VocabularyScope scope) {
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  for (const auto* space : spaces) {
    for (const auto& word : space->words()) {
      if (!seen.insert(word).second) continue;
      if (scope == VocabularyScope::kIntersection &&
          !std::all_of(spaces.begin(), spaces.end(), [&](const EmbeddingSpace* s) { return s->contains(word); })) {
        continue;
      }
      words.push_back(word);
    }
  }
  return words;
}

}  // namespace

std::string Comparison::label() const { return first->label() + "|" + second->label(); }

Comparison make_comparison(const EmbeddingSpace& first, const EmbeddingSpace& second, std::size_t anchor_count) {
  return Comparison{&first, &second, fit_rotation_pair(first, second, anchor_count)};
}

VocabularyScope parse_scope(const std::string& name) {
  if (name == "intersection") return VocabularyScope::kIntersection;
  if (name == "union") return VocabularyScope::kUnion;
  throw InvalidArgument("unknown vocabulary scope '" + name + "' (expected intersection or union)");
}

std::string to_string(VocabularyScope scope) {
  return scope == VocabularyScope::kIntersection ? "intersection" : "union";
}

double one_way_similarity(const std::string& word, const EmbeddingSpace& space_i, const EmbeddingSpace& space_j,
                          const RotationMap& map_ij) {
  check_map(map_ij, space_i, space_j);
  const Vector mapped = space_i.row(word) * map_ij.rotation;
  return cosine_similarity(mapped, space_j.row(word));
}

double two_way_stability(const std::string& word, const EmbeddingSpace& space_i, const EmbeddingSpace& space_j,
                         const RotationMap& map_ij, const RotationMap& map_ji) {
  check_map(map_ij, space_i, space_j);
  check_map(map_ji, space_j, space_i);
  auto ii = space_i.index_of(word);
  auto jj = space_j.index_of(word);
  if (!ii || !jj) return kMissingStability;
  const double home_i = round_trip(space_i.row(*ii), map_ij, map_ji);
  const double home_j = round_trip(space_j.row(*jj), map_ji, map_ij);
  return (home_i + home_j) / 2.0;
}

StabilityRecord stability_record(const std::string& word, const Comparison& comparison) {
  const auto& si = *comparison.first;
  const auto& sj = *comparison.second;
  StabilityRecord record;
  record.word = word;
  record.pair = comparison.label();
  record.stab = two_way_stability(word, si, sj, comparison.maps.forward, comparison.maps.backward);
  record.missing = !(si.contains(word) && sj.contains(word));
  if (!record.missing) {
    record.sim_ij = one_way_similarity(word, si, sj, comparison.maps.forward);
    record.sim_ji = one_way_similarity(word, sj, si, comparison.maps.backward);
  }
  return record;
}

double averaged_stability(const std::string& word, const std::vector<Comparison>& comparisons) {
  if (comparisons.empty()) throw InvalidArgument("averaged_stability: no comparisons");
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& c : comparisons) {
    if (!c.first->contains(word) || !c.second->contains(word)) continue;
    sum += two_way_stability(word, *c.first, *c.second, c.maps.forward, c.maps.backward);
    ++used;
  }
  return used == 0 ? kMissingStability : sum / static_cast<double>(used);
}

std::vector<StabilityRecord> stability_table(const Comparison& comparison, VocabularyScope scope) {
  std::vector<StabilityRecord> records;
  for (const auto& word : scoped_words({comparison.first, comparison.second}, scope)) {
    records.push_back(stability_record(word, comparison));
  }
  return records;
}

std::vector<StabilityRecord> averaged_stability_table(const std::vector<Comparison>& comparisons,
                                                      VocabularyScope scope) {
  if (comparisons.empty()) throw InvalidArgument("averaged_stability_table: no comparisons");
  std::vector<const EmbeddingSpace*> spaces;
  for (const auto& c : comparisons) {
    for (const auto* s : {c.first, c.second}) {
      if (std::find(spaces.begin(), spaces.end(), s) == spaces.end()) spaces.push_back(s);
    }
  }
  std::vector<StabilityRecord> records;
  for (const auto& word : scoped_words(spaces, scope)) {
    StabilityRecord record;
    record.word = word;
    record.pair = "mean";
    record.stab = averaged_stability(word, comparisons);
    record.missing = std::none_of(comparisons.begin(), comparisons.end(), [&](const Comparison& c) {
      return c.first->contains(word) && c.second->contains(word);
    });
    records.push_back(std::move(record));
  }
  return records;
}

Histogram stability_histogram(const std::vector<StabilityRecord>& records, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("histogram: bins must be positive");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    h.edges[b] = -1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(bins);
  }
  h.counts.assign(bins, 0);
  for (const auto& r : records) {
    if (r.missing) {
      ++h.excluded;
      continue;
    }
    const double scaled = (std::clamp(r.stab, -1.0, 1.0) + 1.0) / 2.0 * static_cast<double>(bins);
    const auto bin = std::min(bins - 1, static_cast<std::size_t>(std::floor(scaled)));
    ++h.counts[bin];
  }
  return h;
}

void to_json(nlohmann::json& j, const Histogram& h) {
  j = nlohmann::json{{"edges", h.edges}, {"counts", h.counts}, {"excluded_missing", h.excluded}};
}

void from_json(const nlohmann::json& j, Histogram& h) {
  j.at("edges").get_to(h.edges);
  j.at("counts").get_to(h.counts);
  h.excluded = j.value("excluded_missing", std::uint64_t{0});
}

void write_stability_csv(const std::vector<StabilityRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write stability table " + path.string());
  out << "word,pair,sim_ij,sim_ji,stab,missing\n";
  auto opt = [](const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); };
  for (const auto& r : records) {
    detail::write_csv_row(out, {r.word, r.pair, opt(r.sim_ij), opt(r.sim_ji), detail::format_double(r.stab),
                                r.missing ? "1" : "0"});
  }
  if (!out) throw IoError("failed writing stability table " + path.string());
}

std::vector<StabilityRecord> read_stability_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open stability table " + path.string());
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "word,pair,sim_ij,sim_ji,stab,missing") {
    throw FormatError("stability table " + path.string() + ": unexpected header");
  }
  std::vector<StabilityRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::parse_csv_row(line);
    auto fail = [&] { return FormatError("stability table " + path.string() + ": bad row at line " + std::to_string(line_no)); };
    if (fields.size() != 6) throw fail();
    StabilityRecord r;
    r.word = fields[0];
    r.pair = fields[1];
    for (int k = 0; k < 2; ++k) {
      if (!fields[2 + k].empty()) {
        double v = 0.0;
        if (!detail::parse_double(fields[2 + k], v)) throw fail();
        (k == 0 ? r.sim_ij : r.sim_ji) = v;
      }
    }
    if (!detail::parse_double(fields[4], r.stab)) throw fail();
    if (fields[5] != "0" && fields[5] != "1") throw fail();
    r.missing = fields[5] == "1";
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace semshift
