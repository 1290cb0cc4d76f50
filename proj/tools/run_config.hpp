#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semshift/sgns.hpp"

namespace semshift::cli {

// Everything a run needs besides the per-command file arguments. Loaded from
// an INI file (global keys first, then one section per stage) and then
// overridden by command-line flags.
struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  struct Preprocess {
    std::string stopwords;  // path, empty for none
    std::size_t min_tokens = 10;
    bool keep_hashtags = true;
  } preprocess;

  TrainConfig train;

  struct Align {
    std::size_t anchors = 1000;
  } align;

  struct Stability {
    std::string scope = "intersection";
    std::size_t bins = 50;
  } stability;

  struct Cluster {
    std::size_t k_min = 2;
    std::size_t k_max = 60;
    std::uint64_t min_frequency = 10;
    std::size_t restarts = 10;
    std::size_t max_iters = 300;
    std::size_t top = 10;
  } cluster;

  struct Report {
    std::size_t top_n = 50;
    std::size_t bins = 50;
  } report;

  struct Pipeline {
    std::vector<std::string> periods;  // first one is the base period
    std::string raw_dir;               // <raw_dir>/<period>.txt
    std::string work_dir;
    std::string cluster_period;        // default: last period
    std::string target;                // optional trajectory target
    std::vector<std::string> neighbors;
  } pipeline;

  // Throws InvalidArgument on inconsistent values.
  void validate() const;
};

// Unknown sections or keys are errors, so typos do not silently fall back to
// defaults.
RunConfig load_run_config(const std::filesystem::path& path, RunConfig defaults = {});
std::string format_run_config(const RunConfig& config);

}  // namespace semshift::cli
