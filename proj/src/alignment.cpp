#include "semshift/alignment.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <Eigen/SVD>

#include "semshift/error.hpp"

namespace semshift {

RotationMap RotationMap::transposed() const {
  RotationMap out;
  out.rotation = rotation.transpose();
  out.from_label = to_label;
  out.to_label = from_label;
  out.anchors = anchors;
  out.residual = residual;
  return out;
}

AnchorSet select_anchors(const EmbeddingSpace& base, const EmbeddingSpace& target, std::size_t k) {
  if (k == 0) throw InvalidArgument("select_anchors: k must be positive");
  std::vector<std::size_t> order(base.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (base.has_frequencies()) {
    const auto& freq = base.frequencies();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return freq[a] > freq[b]; });
  } else {
    warn("space '" + base.label() + "' has no frequencies; using its vocabulary order as the frequency ranking");
  }

  AnchorSet anchors;
  anchors.source = base.label();
  for (std::size_t i : order) {
    if (anchors.words.size() == k) break;
    if (target.contains(base.word(i))) anchors.words.push_back(base.word(i));
  }
  if (anchors.words.empty()) {
    throw InvalidArgument("select_anchors: spaces '" + base.label() + "' and '" + target.label() +
                          "' share no words");
  }
  if (anchors.words.size() < k) {
    warn("only " + std::to_string(anchors.words.size()) + " shared words available for " + std::to_string(k) +
         " requested anchors between '" + base.label() + "' and '" + target.label() + "'");
  }
  if (anchors.words.size() < base.dim()) {
    warn("anchor count " + std::to_string(anchors.words.size()) + " is below the dimension " +
         std::to_string(base.dim()) + "; the rotation is underdetermined");
  }
  return anchors;
}

RotationMap fit_rotation(const EmbeddingSpace& base, const EmbeddingSpace& target, const AnchorSet& anchors) {
  if (base.dim() != target.dim()) {
    throw InvalidArgument("fit_rotation: dimension mismatch (" + std::to_string(base.dim()) + " vs " +
                          std::to_string(target.dim()) + ")");
  }
  if (anchors.words.size() < 2) throw InvalidArgument("fit_rotation: need at least 2 anchors");

  const auto n = static_cast<Eigen::Index>(anchors.words.size());
  const auto d = static_cast<Eigen::Index>(base.dim());
  Matrix w0(n, d);
  Matrix w(n, d);
  std::unordered_set<std::string> seen;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& word = anchors.words[static_cast<std::size_t>(i)];
    if (!seen.insert(word).second) throw InvalidArgument("fit_rotation: duplicate anchor '" + word + "'");
    auto bi = base.index_of(word);
    auto ti = target.index_of(word);
    if (!bi || !ti) throw InvalidArgument("fit_rotation: anchor '" + word + "' missing from one of the spaces");
    w0.row(i) = base.row(*bi);
    w.row(i) = target.row(*ti);
  }

  const Eigen::MatrixXd cross = w0.transpose() * w;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd u = svd.matrixU();
  Eigen::MatrixXd v = svd.matrixV();

  // Fix the sign of each singular pair: largest-magnitude entry of u_i >= 0.
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    u.col(c).cwiseAbs().maxCoeff(&arg);
    if (u(arg, c) < 0.0) {
      u.col(c) *= -1.0;
      v.col(c) *= -1.0;
    }
  }
  const auto& sigma = svd.singularValues();
  if (sigma.size() > 0 && sigma.minCoeff() < 1e-12) {
    warn("fit_rotation '" + base.label() + "' -> '" + target.label() +
         "': cross-covariance is rank deficient (smallest singular value " + std::to_string(sigma.minCoeff()) +
         "); the rotation is not unique");
  }

  RotationMap map;
  map.rotation = u * v.transpose();
  map.from_label = base.label();
  map.to_label = target.label();
  map.anchors = anchors;
  map.residual = (w0 * map.rotation - w).norm();
  return map;
}

RotationPair fit_rotation_pair(const EmbeddingSpace& first, const EmbeddingSpace& second, std::size_t k) {
  RotationPair pair;
  pair.forward = fit_rotation(first, second, select_anchors(first, second, k));
  pair.backward = fit_rotation(second, first, select_anchors(second, first, k));
  return pair;
}

std::string home_label(const std::string& label) { return label.substr(0, label.find('@')); }

std::string aligned_label(const std::string& label, const std::string& frame) {
  const std::string home = home_label(label);
  return home == frame ? home : home + "@" + frame;
}

EmbeddingSpace apply_rotation(const EmbeddingSpace& space, const RotationMap& map) {
  if (space.dim() != map.dim() || map.rotation.rows() != map.rotation.cols()) {
    throw InvalidArgument("apply_rotation: space '" + space.label() + "' has dimension " +
                          std::to_string(space.dim()) + " but the map is " + std::to_string(map.rotation.rows()) +
                          "x" + std::to_string(map.rotation.cols()));
  }
  const auto at = space.label().find('@');
  const std::string frame = at == std::string::npos ? space.label() : space.label().substr(at + 1);
  if (frame != map.from_label) {
    throw InvalidArgument("apply_rotation: map expects space '" + map.from_label + "' but got '" +
                          space.label() + "'");
  }
  Matrix rotated = space.vectors() * map.rotation;
  std::optional<std::vector<std::uint64_t>> freq;
  if (space.has_frequencies()) freq = space.frequencies();
  return EmbeddingSpace(aligned_label(space.label(), map.to_label), space.words(), std::move(rotated),
                        std::move(freq));
}

void to_json(nlohmann::json& j, const RotationMap& map) {
  std::vector<double> flat(map.rotation.data(), map.rotation.data() + map.rotation.size());
  j = nlohmann::json{{"from", map.from_label},
                     {"to", map.to_label},
                     {"dim", map.rotation.rows()},
                     {"residual", map.residual},
                     {"anchor_source", map.anchors.source},
                     {"anchors", map.anchors.words},
                     {"rotation", flat}};
}

void from_json(const nlohmann::json& j, RotationMap& map) {
  j.at("from").get_to(map.from_label);
  j.at("to").get_to(map.to_label);
  j.at("residual").get_to(map.residual);
  j.at("anchor_source").get_to(map.anchors.source);
  j.at("anchors").get_to(map.anchors.words);
  const auto d = j.at("dim").get<Eigen::Index>();
  const auto flat = j.at("rotation").get<std::vector<double>>();
  if (d < 0 || static_cast<std::size_t>(d * d) != flat.size()) {
    throw FormatError("rotation map: expected " + std::to_string(d * d) + " entries, found " +
                      std::to_string(flat.size()));
  }
  map.rotation = Eigen::Map<const Matrix>(flat.data(), d, d);
}

void to_json(nlohmann::json& j, const RotationPair& pair) {
  j = nlohmann::json{{"forward", pair.forward}, {"backward", pair.backward}};
}

void from_json(const nlohmann::json& j, RotationPair& pair) {
  j.at("forward").get_to(pair.forward);
  j.at("backward").get_to(pair.backward);
}

void save_rotation_pair(const RotationPair& pair, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write rotation file " + path.string());
  out << nlohmann::json(pair).dump(1) << '\n';
  if (!out) throw IoError("failed writing rotation file " + path.string());
}

RotationPair load_rotation_pair(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rotation file " + path.string());
  try {
    return nlohmann::json::parse(in).get<RotationPair>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid rotation file " + path.string() + ": " + e.what());
  }
}

}  // namespace semshift
