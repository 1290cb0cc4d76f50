#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "semshift/alignment.hpp"
#include "semshift/error.hpp"
#include "test_util.hpp"

using namespace semshift;
using semshift::testing::TempDir;
using semshift::testing::WarningCapture;

namespace {

EmbeddingSpace rotated_copy(const EmbeddingSpace& s, const Matrix& q, const std::string& label) {
  return EmbeddingSpace(label, s.words(), s.vectors() * q, s.frequencies());
}

AnchorSet all_words(const EmbeddingSpace& s) { return {s.words(), s.label()}; }

// Polar factor M (M^T M)^{-1/2} through a symmetric eigendecomposition; an
// independent route to the Procrustes solution for full-rank M = W0^T W.
Matrix polar_oracle(const Matrix& w0, const Matrix& w) {
  const Matrix m = w0.transpose() * w;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.transpose() * m);
  const Matrix inv_sqrt =
      eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return m * inv_sqrt;
}

double residual_of(const Matrix& w0, const Matrix& w, const Matrix& r) { return (w0 * r - w).norm(); }

}  // namespace

TEST_CASE("select_anchors ranks by base frequency and filters by target") {
  Matrix v(3, 2);
  v << 1, 0, 0, 1, 1, 1;
  EmbeddingSpace base("base", {"c", "a", "b"}, v, std::vector<std::uint64_t>{1, 5, 3});
  EmbeddingSpace target("target", {"a", "c"}, v.topRows(2), std::nullopt);
  WarningCapture warnings;
  const auto anchors = select_anchors(base, target, 2);
  CHECK(anchors.words == std::vector<std::string>{"a", "c"});
  CHECK(anchors.source == "base");

  const auto saturated = select_anchors(base, target, 10);
  CHECK(saturated.words == std::vector<std::string>{"a", "c"});
  CHECK(warnings.contains("only 2 shared words"));
  CHECK_THROWS_AS(select_anchors(base, target, 0), InvalidArgument);

  EmbeddingSpace disjoint("other", {"x"}, v.topRows(1), std::nullopt);
  CHECK_THROWS_AS(select_anchors(base, disjoint, 2), InvalidArgument);
}

TEST_CASE("select_anchors returns exactly k words when enough are shared") {
  const auto base = semshift::testing::random_space(1500, 8, 1, "base");
  const auto target = semshift::testing::random_space(1500, 8, 2, "target");
  const auto anchors = select_anchors(base, target, 1000);
  REQUIRE(anchors.words.size() == 1000);
  // random_space frequencies are n..1, so the top k are t0..t999
  CHECK(anchors.words.front() == "t0");
  CHECK(anchors.words.back() == "t999");
}

TEST_CASE("select_anchors falls back to vocabulary order without frequencies") {
  auto base = semshift::testing::random_space(10, 3, 1, "base");
  base.clear_frequencies();
  WarningCapture warnings;
  const auto anchors = select_anchors(base, base, 4);
  CHECK(anchors.words == std::vector<std::string>{"t0", "t1", "t2", "t3"});
  CHECK(warnings.contains("no frequencies"));
  CHECK(warnings.contains("below the dimension") == false);
}

TEST_CASE("self-alignment gives the identity") {
  const auto s = semshift::testing::random_space(200, 20, 5, "s");
  const auto map = fit_rotation(s, s, all_words(s));
  CHECK((map.rotation - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(map.residual < 1e-10);
  CHECK(map.from_label == "s");
  CHECK(map.to_label == "s");
}

TEST_CASE("planted rotation is recovered") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto base = semshift::testing::random_space(300, 16, 100 + seed, "base");
    const Matrix q = semshift::testing::random_orthogonal(16, 200 + seed);
    const auto target = rotated_copy(base, q, "target");
    const auto map = fit_rotation(base, target, select_anchors(base, target, 100));
    CHECK((map.rotation - q).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(map.residual < 1e-8);
  }
}

TEST_CASE("fit matches the polar-factor oracle and is orthogonal on noisy data") {
  const auto base = semshift::testing::random_space(120, 10, 7, "base");
  const auto noise = semshift::testing::random_space(120, 10, 8, "noise");
  const Matrix q = semshift::testing::random_orthogonal(10, 9);
  const EmbeddingSpace target("target", base.words(), base.vectors() * q + 0.3 * noise.vectors(), std::nullopt);
  const auto map = fit_rotation(base, target, all_words(base));

  CHECK((map.rotation - polar_oracle(base.vectors(), target.vectors())).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((map.rotation.transpose() * map.rotation - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(map.residual == doctest::Approx(residual_of(base.vectors(), target.vectors(), map.rotation)).epsilon(1e-12));
}

TEST_CASE("fitted residual never exceeds the identity or any other orthogonal map") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = semshift::testing::random_space(60, 6, seed, "a");
    const auto b = semshift::testing::random_space(60, 6, seed + 1000, "b");
    const auto map = fit_rotation(a, b, all_words(a));
    CHECK(map.residual <= residual_of(a.vectors(), b.vectors(), Matrix::Identity(6, 6)) + 1e-12);
    for (std::uint64_t t = 0; t < 5; ++t) {
      const Matrix q = semshift::testing::random_orthogonal(6, seed * 31 + t);
      CHECK(map.residual <= residual_of(a.vectors(), b.vectors(), q) + 1e-12);
    }
  }
}

TEST_CASE("fit_rotation validates its inputs") {
  const auto a = semshift::testing::random_space(10, 4, 1, "a");
  const auto b = semshift::testing::random_space(10, 5, 2, "b");
  CHECK_THROWS_AS(fit_rotation(a, b, all_words(a)), InvalidArgument);
  CHECK_THROWS_AS(fit_rotation(a, a, AnchorSet{{"t0"}, "a"}), InvalidArgument);
  CHECK_THROWS_AS(fit_rotation(a, a, AnchorSet{{"t0", "t0"}, "a"}), InvalidArgument);
  CHECK_THROWS_AS(fit_rotation(a, a, AnchorSet{{"t0", "nope"}, "a"}), InvalidArgument);
}

TEST_CASE("too few anchors for the dimension warns") {
  const auto a = semshift::testing::random_space(10, 4, 1, "a");
  WarningCapture warnings;
  select_anchors(a, a, 3);
  CHECK(warnings.contains("below the dimension"));
  fit_rotation(a, a, AnchorSet{{"t0", "t1"}, "a"});
  CHECK(warnings.contains("rank deficient"));
}

TEST_CASE("fit_rotation_pair fits each direction on its own source anchors") {
  auto a = semshift::testing::random_space(50, 5, 1, "a");
  auto b = semshift::testing::random_space(50, 5, 2, "b");
  std::vector<std::uint64_t> reversed(50);
  for (std::size_t i = 0; i < 50; ++i) reversed[i] = i + 1;
  b.set_frequencies(reversed);
  const auto pair = fit_rotation_pair(a, b, 10);
  CHECK(pair.forward.from_label == "a");
  CHECK(pair.forward.to_label == "b");
  CHECK(pair.backward.from_label == "b");
  CHECK(pair.backward.anchors.source == "b");
  CHECK(pair.forward.anchors.words.front() == "t0");
  CHECK(pair.backward.anchors.words.front() == "t49");
  // different anchors, so not an exact transpose
  CHECK((pair.forward.rotation - pair.backward.rotation.transpose()).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("apply_rotation with the identity leaves the space unchanged") {
  const auto s = semshift::testing::random_space(30, 6, 3, "s");
  RotationMap id{Matrix::Identity(6, 6), "s", "t", {}, 0.0};
  const auto moved = apply_rotation(s, id);
  CHECK(moved.vectors() == s.vectors());
  CHECK(moved.words() == s.words());
  CHECK(moved.label() == "s@t");
  CHECK(moved.frequencies() == s.frequencies());
}

TEST_CASE("apply_rotation preserves intra-space cosines and inverts with the transpose") {
  const auto s = semshift::testing::random_space(80, 12, 4, "s");
  RotationMap map{semshift::testing::random_orthogonal(12, 5), "s", "t", {}, 0.0};
  const auto moved = apply_rotation(s, map);

  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      worst = std::max(worst, std::abs(cosine_similarity(s.row(i), s.row(j)) - cosine_similarity(moved.row(i), moved.row(j))));
    }
  }
  CHECK(worst < 1e-10);

  const auto back = apply_rotation(moved, map.transposed());
  CHECK(back.label() == "s");
  CHECK((back.vectors() - s.vectors()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("apply_rotation checks the frame and dimension") {
  const auto s = semshift::testing::random_space(5, 3, 4, "s");
  RotationMap wrong_frame{Matrix::Identity(3, 3), "u", "t", {}, 0.0};
  CHECK_THROWS_AS(apply_rotation(s, wrong_frame), InvalidArgument);
  RotationMap wrong_dim{Matrix::Identity(4, 4), "s", "t", {}, 0.0};
  CHECK_THROWS_AS(apply_rotation(s, wrong_dim), InvalidArgument);
  CHECK(home_label("s@t") == "s");
  CHECK(home_label("s") == "s");
  CHECK(aligned_label("s@t", "u") == "s@u");
  CHECK(aligned_label("s@t", "s") == "s");
}

TEST_CASE("rotation pairs round-trip through JSON") {
  const auto a = semshift::testing::random_space(40, 7, 1, "2020-04");
  const auto b = semshift::testing::random_space(40, 7, 2, "2020-05");
  const auto pair = fit_rotation_pair(a, b, 20);
  TempDir dir;
  save_rotation_pair(pair, dir / "r.json");
  const auto loaded = load_rotation_pair(dir / "r.json");
  CHECK(loaded.forward.rotation == pair.forward.rotation);
  CHECK(loaded.backward.rotation == pair.backward.rotation);
  CHECK(loaded.forward.from_label == "2020-04");
  CHECK(loaded.backward.anchors.words == pair.backward.anchors.words);
  CHECK(loaded.forward.residual == pair.forward.residual);

  semshift::testing::write_file(dir / "bad.json", R"({"forward": {"from": "a", "to": "b", "dim": 2, "rotation": [1, 0, 0]}})");
  CHECK_THROWS_AS(load_rotation_pair(dir / "bad.json"), FormatError);
  CHECK_THROWS_AS(load_rotation_pair(dir / "missing.json"), IoError);
}
