#include <doctest.h>

#include <random>
#include <regex>
#include <sstream>

#include "semshift/error.hpp"
#include "semshift/text_pipeline.hpp"
#include "test_util.hpp"

using namespace semshift;
using semshift::testing::TempDir;

namespace {

PipelineConfig config(std::unordered_set<std::string> stop = {}, std::size_t min_tokens = 0) {
  PipelineConfig c;
  c.stopwords = std::move(stop);
  c.min_tokens = min_tokens;
  return c;
}

using Tokens = std::vector<std::string>;

}  // namespace

TEST_CASE("preprocess_document applies the cleaning steps in order") {
  const auto tokens = preprocess_document("Check THIS https://t.co/x @user #COVID19 now", config({"this", "now"}));
  REQUIRE(tokens);
  CHECK(*tokens == Tokens{"check", "#covid19"});
}

TEST_CASE("hashtags and bare words stay distinct") {
  const auto tokens = preprocess_document("#Corona #corona CORONA", config());
  REQUIRE(tokens);
  CHECK(*tokens == Tokens{"#corona", "#corona", "corona"});
}

TEST_CASE("documents below min_tokens are dropped") {
  PipelineConfig c = config({}, 10);
  CHECK_FALSE(preprocess_document("one two three four five six seven eight nine", c));
  CHECK(preprocess_document("one two three four five six seven eight nine ten", c));
  // Stop words do not count toward the minimum.
  c.stopwords = {"the"};
  CHECK_FALSE(preprocess_document("the one two three four five six seven eight nine", c));
}

TEST_CASE("emoji, punctuation and non-ASCII bytes are deleted") {
  auto tokens = preprocess_document("Stay safe!!! \xF0\x9F\x98\xB7 covid-19, caf\xC3\xA9 :)", config());
  REQUIRE(tokens);
  CHECK(*tokens == Tokens{"stay", "safe", "covid19", "caf"});
}

TEST_CASE("URLs and mentions never leave residue") {
  auto tokens = preprocess_document("see HTTP://Example.com/a?b=1 and https://x.y/z,@Bob_1:hi mail@host", config());
  REQUIRE(tokens);
  CHECK(*tokens == Tokens{"see", "and", "mail"});
  // '@' without a word character after it is just a special character.
  tokens = preprocess_document("@ @! a", config());
  REQUIRE(tokens);
  CHECK(*tokens == Tokens{"a"});
}

TEST_CASE("hash marks inside tokens are normalized") {
  auto tokens = preprocess_document("a#b ##double # x# #", config());
  REQUIRE(tokens);
  CHECK(*tokens == Tokens{"a", "#b", "#double", "x"});
}

TEST_CASE("keep_hashtags=false deletes the '#'") {
  PipelineConfig c = config();
  c.keep_hashtags = false;
  auto tokens = preprocess_document("#Stay #home", c);
  REQUIRE(tokens);
  CHECK(*tokens == Tokens{"stay", "home"});
}

TEST_CASE("stop words must be lowercase") {
  PipelineConfig c = config({"The"});
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("random input always yields whitelisted tokens") {
  std::mt19937_64 rng(5);
  const std::string alphabet = "aZ9#@:/._ -!\t\xC3\xA9\xF0\x9F\x98httpsHTTPS";
  const std::regex token_re("[a-z0-9#]+");
  for (int trial = 0; trial < 2000; ++trial) {
    std::string raw;
    const std::size_t len = rng() % 80;
    for (std::size_t i = 0; i < len; ++i) raw += alphabet[rng() % alphabet.size()];
    if (rng() % 4 == 0) raw += " https://t.co/abc";
    const auto tokens = preprocess_document(raw, config());
    REQUIRE(tokens);
    for (const auto& t : *tokens) {
      CHECK(std::regex_match(t, token_re));
      if (t.find('#') != std::string::npos) {
        CHECK(t.front() == '#');
        CHECK(t.size() >= 2);
        CHECK(t.find('#', 1) == std::string::npos);
      }
    }
  }
}

TEST_CASE("run_corpus counts kept and dropped documents") {
  TempDir dir;
  semshift::testing::write_file(dir / "in.txt", "a a #b\nshort\n");
  PipelineConfig c = config({}, 2);
  const auto stats = run_corpus(dir / "in.txt", c, dir / "out.txt");
  CHECK(stats.documents_kept == 1);
  CHECK(stats.documents_dropped == 1);
  CHECK(stats.word_frequencies == FrequencyTable{{"a", 2}, {"#b", 1}});
  CHECK(stats.hashtag_frequencies == FrequencyTable{{"#b", 1}});
  CHECK(semshift::testing::read_file(dir / "out.txt") == "a a #b\n");
}

TEST_CASE("run_corpus frequencies match a recount of the emitted file") {
  TempDir dir;
  std::mt19937_64 rng(17);
  const std::vector<std::string> pool = {"Covid", "#COVID19", "stay", "home", "@who", "https://t.co/q",
                                         "the", "mask", "#Mask", "!!", "2020", "lockdown"};
  std::ostringstream raw;
  const int lines = 400;
  for (int l = 0; l < lines; ++l) {
    const std::size_t n = rng() % 15;
    for (std::size_t i = 0; i < n; ++i) raw << pool[rng() % pool.size()] << ' ';
    raw << '\n';
  }
  semshift::testing::write_file(dir / "in.txt", raw.str());
  PipelineConfig c = config({"the"}, 4);
  const auto stats = run_corpus(dir / "in.txt", c, dir / "out.txt");
  CHECK(stats.documents_kept + stats.documents_dropped == lines);

  // Oracle: one pass over the output file.
  FrequencyTable words;
  FrequencyTable tags;
  std::istringstream out(semshift::testing::read_file(dir / "out.txt"));
  std::string line;
  std::uint64_t kept = 0;
  while (std::getline(out, line)) {
    ++kept;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      ++words[tok];
      if (tok[0] == '#') ++tags[tok];
    }
  }
  CHECK(kept == stats.documents_kept);
  CHECK(words == stats.word_frequencies);
  CHECK(tags == stats.hashtag_frequencies);

  // Deterministic: a second run produces byte-identical output.
  run_corpus(dir / "in.txt", c, dir / "out2.txt");
  CHECK(semshift::testing::read_file(dir / "out.txt") == semshift::testing::read_file(dir / "out2.txt"));
}

TEST_CASE("corpus stats JSON round-trips") {
  TempDir dir;
  CorpusStats stats;
  stats.add_document({"a", "#b", "a"});
  stats.documents_dropped = 3;
  save_corpus_stats(stats, dir / "s.json");
  const auto back = load_corpus_stats(dir / "s.json");
  CHECK(back.documents_kept == 1);
  CHECK(back.documents_dropped == 3);
  CHECK(back.word_frequencies == stats.word_frequencies);
  CHECK(back.hashtag_frequencies == stats.hashtag_frequencies);

  CorpusStats other;
  other.add_document({"a"});
  stats.merge(other);
  CHECK(stats.word_frequencies.at("a") == 3);
  CHECK(stats.documents_kept == 2);
}

TEST_CASE("stop-word list loading lowercases and skips comments") {
  TempDir dir;
  semshift::testing::write_file(dir / "stop.txt", "The\n; comment\n\n  AND \n// note\n");
  CHECK(load_stopwords(dir / "stop.txt") == std::unordered_set<std::string>{"the", "and"});
  CHECK_THROWS_AS(load_stopwords(dir / "missing.txt"), IoError);
}

TEST_CASE("run_corpus reports a missing input") {
  TempDir dir;
  CHECK_THROWS_AS(run_corpus(dir / "nope.txt", config(), dir / "out.txt"), IoError);
}
