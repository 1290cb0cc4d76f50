#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "semshift/embedding_store.hpp"
#include "semshift/error.hpp"
#include "test_util.hpp"

using namespace semshift;
using semshift::testing::TempDir;

namespace {

std::string load_error(const std::string& content) {
  TempDir dir;
  semshift::testing::write_file(dir / "v.txt", content);
  try {
    load_embeddings(dir / "v.txt");
  } catch (const FormatError& e) {
    return e.what();
  }
  return {};
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("load_embeddings parses the word2vec text format") {
  TempDir dir;
  semshift::testing::write_file(dir / "v.txt", "2 3\na 1 0 0\nb 0 1 0\n");
  const auto space = load_embeddings(dir / "v.txt", "base");
  CHECK(space.size() == 2);
  CHECK(space.dim() == 3);
  CHECK(space.label() == "base");
  CHECK(space.words() == std::vector<std::string>{"a", "b"});
  CHECK(space.row("b")(1) == 1.0);
  CHECK_FALSE(space.has_frequencies());
}

TEST_CASE("load_embeddings label defaults to the file stem") {
  TempDir dir;
  semshift::testing::write_file(dir / "2020-04.vec", "1 2\nx 1 2\n");
  CHECK(load_embeddings(dir / "2020-04.vec").label() == "2020-04");
}

TEST_CASE("load_embeddings rejects malformed input") {
  CHECK(load_error("2 3\na 1 0\nb 0 1 0\n").find("dimension mismatch at line 2") != std::string::npos);
  CHECK(load_error("2 3\na 1 0 0\na 0 1 0\n").find("duplicate token 'a' at line 3") != std::string::npos);
  CHECK(load_error("two 3\n").find("malformed header") != std::string::npos);
  CHECK(load_error("2\n").find("malformed header") != std::string::npos);
  CHECK(load_error("").find("malformed header") != std::string::npos);
  CHECK(load_error("1 2\na nan 1\n").find("non-finite value at line 2") != std::string::npos);
  CHECK(load_error("1 2\na inf 1\n").find("non-finite") != std::string::npos);
  CHECK(load_error("1 2\na 1 x\n").find("unparsable value 'x' at line 2") != std::string::npos);
  CHECK(load_error("2 2\na 1 1\n").find("declares 2 rows") != std::string::npos);
  CHECK(load_error("1 2\na 1 1\nb 1 1\n").find("more rows") != std::string::npos);
  CHECK_THROWS_AS(load_embeddings("/nonexistent/file.vec"), IoError);
}

TEST_CASE("gensim-style rows with trailing spaces and exponents parse unmodified") {
  TempDir dir;
  semshift::testing::write_file(dir / "g.txt", "3 2\nthe 0.1 -2.5e-05 \n#covid19 1.25E+01 -0.0 \n, 3 4\n");
  const auto space = load_embeddings(dir / "g.txt");
  CHECK(space.size() == 3);
  CHECK(space.row("#covid19")(0) == doctest::Approx(12.5));
  CHECK(space.row(",")(1) == 4.0);
}

TEST_CASE("save_embeddings writes header plus one row per word") {
  TempDir dir;
  Matrix m(2, 2);
  m << 1, 0.5, -3, 2;
  EmbeddingSpace space("s", {"x", "y"}, m);
  save_embeddings(space, dir / "out.txt");
  CHECK(semshift::testing::read_file(dir / "out.txt") == "2 2\nx 1 0.5\ny -3 2\n");

  save_embeddings(EmbeddingSpace::empty("e", 7), dir / "empty.txt");
  CHECK(semshift::testing::read_file(dir / "empty.txt") == "0 7\n");
  const auto back = load_embeddings(dir / "empty.txt");
  CHECK(back.size() == 0);
  CHECK(back.dim() == 7);
}

TEST_CASE("save then load is the identity on tokens and values") {
  TempDir dir;
  const auto space = semshift::testing::random_space(50, 10, 7);
  save_embeddings(space, dir / "rt.txt");
  const auto back = load_embeddings(dir / "rt.txt");
  CHECK(back.words() == space.words());
  CHECK((back.vectors() - space.vectors()).cwiseAbs().maxCoeff() <= 1e-6);
  // Shortest round-trip formatting makes it exact.
  CHECK(back.vectors() == space.vectors());
}

TEST_CASE("save_embeddings reports unwritable paths") {
  const auto space = semshift::testing::random_space(2, 2, 1);
  CHECK_THROWS_AS(save_embeddings(space, "/nonexistent-dir/x.txt"), IoError);
}

TEST_CASE("frequency sidecar round-trips and attaches to a space") {
  TempDir dir;
  const auto space = semshift::testing::random_space(5, 3, 2);
  save_frequencies(space, dir / "f.vocab");
  const auto table = load_frequencies(dir / "f.vocab");
  CHECK(table.at("t0") == 5);
  CHECK(table.at("t4") == 1);

  auto copy = load_embeddings([&] {
    save_embeddings(space, dir / "s.vec");
    return dir / "s.vec";
  }());
  copy.set_frequencies(table);
  CHECK(copy.frequencies() == space.frequencies());

  semshift::testing::write_file(dir / "bad.vocab", "a 1\nb x\n");
  CHECK_THROWS_AS(load_frequencies(dir / "bad.vocab"), FormatError);
}

TEST_CASE("EmbeddingSpace enforces its invariants") {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  CHECK_THROWS_AS(EmbeddingSpace("s", {"a", "a"}, m), InvalidArgument);
  CHECK_THROWS_AS(EmbeddingSpace("s", {"a"}, m), InvalidArgument);
  CHECK_THROWS_AS(EmbeddingSpace("s", {"a", "b"}, m, std::vector<std::uint64_t>{1}), InvalidArgument);
  Matrix bad = m;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(EmbeddingSpace("s", {"a", "b"}, bad), InvalidArgument);
  EmbeddingSpace ok("s", {"a", "b"}, m);
  CHECK_THROWS_AS(ok.frequencies(), InvalidArgument);
  CHECK_THROWS_AS(ok.row("zzz"), InvalidArgument);
}

TEST_CASE("cosine_similarity basic identities") {
  const Vector v = vec({0.3, -1.2, 4.0});
  CHECK(cosine_similarity(v, v) == doctest::Approx(1.0));
  CHECK(cosine_similarity(v, -v) == doctest::Approx(-1.0));
  CHECK(cosine_similarity(vec({1, 0}), vec({0, 1})) == 0.0);
  CHECK_THROWS_WITH_AS(cosine_similarity(vec({0, 0}), vec({1, 0})), doctest::Contains("undefined similarity"),
                       InvalidArgument);
  CHECK_THROWS_AS(cosine_similarity(vec({1, 0}), vec({1, 0, 0})), InvalidArgument);
}

TEST_CASE("cosine_similarity is symmetric, bounded and scale invariant") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int trial = 0; trial < 500; ++trial) {
    Vector a(8);
    Vector b(8);
    for (int i = 0; i < 8; ++i) {
      a(i) = normal(rng);
      b(i) = normal(rng);
    }
    const double ab = cosine_similarity(a, b);
    CHECK(ab == cosine_similarity(b, a));
    CHECK(std::abs(ab) <= 1.0);
    const Vector scaled = a * scale(rng);
    CHECK(cosine_similarity(a, scaled) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Parallel vectors whose dot overshoots 1 in floating point are clamped.
  const Vector tiny = vec({0.1, 0.1, 0.1});
  CHECK(cosine_similarity(tiny, tiny * 3.0) <= 1.0);
}

TEST_CASE("nearest_neighbors on constructed spaces") {
  Matrix m(3, 3);
  m.setIdentity();
  EmbeddingSpace space("o", {"a", "b", "c"}, m);
  const auto result = nearest_neighbors(space, space.row("a"), 2, {"a"});
  REQUIRE(result.size() == 2);
  CHECK(result[0] == VectorQueryResult{"b", 0.0});
  CHECK(result[1] == VectorQueryResult{"c", 0.0});

  Matrix n(3, 2);
  n << 1, 0, 0.9, 0.1, -1, 0;
  EmbeddingSpace near("n", {"x", "y", "z"}, n);
  const auto top = nearest_neighbors(near, near.row("x"), 1, {"x"});
  REQUIRE(top.size() == 1);
  CHECK(top[0].word == "y");
}

TEST_CASE("nearest_neighbors errors") {
  const auto space = semshift::testing::random_space(4, 3, 5);
  CHECK_THROWS_AS(nearest_neighbors(EmbeddingSpace::empty("e", 3), Vector::Ones(3), 1), InvalidArgument);
  CHECK_THROWS_AS(nearest_neighbors(space, Vector::Zero(3), 1), InvalidArgument);
  CHECK_THROWS_AS(nearest_neighbors(space, Vector::Ones(3), 5), InvalidArgument);
  CHECK_THROWS_AS(nearest_neighbors(space, Vector::Ones(3), 0), InvalidArgument);
  CHECK_THROWS_AS(nearest_neighbors(space, Vector::Ones(2), 1), InvalidArgument);
}

TEST_CASE("nearest_neighbors matches an exhaustive ranking") {
  const auto space = semshift::testing::random_space(100, 12, 31);
  for (std::size_t q = 0; q < 10; ++q) {
    const Vector query = space.row(q * 7);
    const std::unordered_set<std::string> exclude{space.word(q * 7), space.word((q * 13 + 1) % 100)};

    // Oracle: score every word with an explicit loop, sort everything.
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < space.size(); ++i) {
      if (exclude.count(space.word(i))) continue;
      double dot = 0, na = 0, nb = 0;
      for (Eigen::Index c = 0; c < query.size(); ++c) {
        dot += query(c) * space.row(i)(c);
        na += query(c) * query(c);
        nb += space.row(i)(c) * space.row(i)(c);
      }
      all.emplace_back(dot / std::sqrt(na * nb), i);
    }
    std::sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });

    const auto result = nearest_neighbors(space, query, 15, exclude);
    REQUIRE(result.size() == 15);
    std::set<std::string> seen;
    for (std::size_t r = 0; r < result.size(); ++r) {
      CHECK(result[r].word == space.word(all[r].second));
      CHECK(result[r].similarity == doctest::Approx(all[r].first).epsilon(1e-12));
      CHECK(seen.insert(result[r].word).second);
      CHECK_FALSE(exclude.count(result[r].word));
      if (r > 0) CHECK(result[r - 1].similarity >= result[r].similarity);
    }
  }
}

TEST_CASE("nearest_neighbors breaks ties by vocabulary order") {
  Matrix m(4, 2);
  m << 1, 0, 2, 0, 3, 0, 0, 1;
  EmbeddingSpace space("t", {"q", "b", "a", "z"}, m);
  const auto result = nearest_neighbors(space, Vector::Unit(2, 0), 3);
  CHECK(result[0].word == "q");
  CHECK(result[1].word == "b");
  CHECK(result[2].word == "a");
}
