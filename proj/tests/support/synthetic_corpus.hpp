#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

namespace semshift::testing {

using Documents = std::vector<std::vector<std::string>>;

// Topic-mixture corpus generator with two periods. A handful of background
// words occur everywhere; every other word belongs to one topic and is drawn
// with a Zipf weight inside it. "Event" topics are rare in the base period and
// boosted in the event period. Shifted words live in a general topic in the
// base period and are moved into an event topic for the event period.
struct SyntheticSpec {
  std::size_t vocab_size = 2000;
  std::size_t background_words = 40;
  std::size_t topics = 40;
  std::size_t event_topics = 8;
  std::size_t doc_length = 20;
  std::size_t tokens_per_period = 200000;
  std::size_t shifted = 20;
  double zipf = 1.0;
  double background_rate = 0.2;      // share of tokens drawn from background words
  double base_event_weight = 0.1;    // weight of each event topic in the base period
  double event_event_weight = 4.0;   // weight of each event topic in the event period
  std::size_t shifted_rank_lo = 2;   // within-topic rank range shifted words come from
  std::size_t shifted_rank_hi = 12;
  std::uint64_t seed = 2024;
};

struct SyntheticCorpus {
  Documents base;
  Documents event;
  std::vector<std::string> shifted;
  std::vector<std::string> vocabulary;
};

SyntheticCorpus generate_corpus(const SyntheticSpec& spec);

}  // namespace semshift::testing
