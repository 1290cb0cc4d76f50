#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semshift/embedding_store.hpp"

namespace semshift {

// Correspondence words for a Procrustes fit, ordered by descending frequency
// in the space named by `source`.
struct AnchorSet {
  std::vector<std::string> words;
  std::string source;
};

// Orthogonal map between two embedding spaces. Row vectors of `from` are
// carried into the coordinates of `to` as v * rotation.
struct RotationMap {
  Matrix rotation;
  std::string from_label;
  std::string to_label;
  AnchorSet anchors;
  double residual = 0.0;  // |W0 R - W|_F over the anchors

  std::size_t dim() const { return static_cast<std::size_t>(rotation.rows()); }
  // Transposed map with swapped labels; residual and anchors are carried over.
  RotationMap transposed() const;
};

// Both directions between a pair of spaces, each fitted on its own source
// space's most frequent words.
struct RotationPair {
  RotationMap forward;   // first -> second
  RotationMap backward;  // second -> first
};

// The k most frequent words of `base` that also occur in `target`. If `base`
// carries no frequencies its vocabulary order is taken as the ranking (the
// order word2vec-family tools write). Warns when fewer than k words are
// shared or k is below the dimension; throws when nothing is shared.
AnchorSet select_anchors(const EmbeddingSpace& base, const EmbeddingSpace& target, std::size_t k);

// Orthogonal Procrustes: with W0 and W holding the anchor rows of base and
// target, R = U V^T where W0^T W = U S V^T minimizes |W0 Q - W|_F over
// orthogonal Q. Reflections are allowed and no centering or scaling is done.
RotationMap fit_rotation(const EmbeddingSpace& base, const EmbeddingSpace& target, const AnchorSet& anchors);

RotationPair fit_rotation_pair(const EmbeddingSpace& first, const EmbeddingSpace& second, std::size_t k);

// Multiplies every row by map.rotation. The space must live in the frame of
// map.from_label: either carry that label or be an "<label>@<from_label>"
// space produced by a previous apply_rotation.
EmbeddingSpace apply_rotation(const EmbeddingSpace& space, const RotationMap& map);

// Label of a space after moving it into `frame`.
std::string aligned_label(const std::string& label, const std::string& frame);
// Label part before any "@frame" annotation.
std::string home_label(const std::string& label);

void to_json(nlohmann::json& j, const RotationMap& map);
void from_json(const nlohmann::json& j, RotationMap& map);
void to_json(nlohmann::json& j, const RotationPair& pair);
void from_json(const nlohmann::json& j, RotationPair& pair);

void save_rotation_pair(const RotationPair& pair, const std::filesystem::path& path);
RotationPair load_rotation_pair(const std::filesystem::path& path);

}  // namespace semshift
