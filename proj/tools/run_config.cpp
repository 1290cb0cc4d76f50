#include "run_config.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "semshift/error.hpp"

namespace semshift::cli {
namespace {

namespace pt = boost::property_tree;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  for (char c : s + ",") {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item += c;
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::string path) : tree_(tree), path_(std::move(path)) {}

  template <typename T>
  void get(const std::string& key, T& value) {
    seen_.insert(key);
    auto node = tree_.get_child_optional(pt::ptree::path_type(key, '.'));
    if (!node) return;
    const std::string raw = node->get_value<std::string>();
    if constexpr (std::is_same_v<T, std::string>) {
      value = raw;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (raw == "true" || raw == "1" || raw == "yes") {
        value = true;
      } else if (raw == "false" || raw == "0" || raw == "no") {
        value = false;
      } else {
        bad(key, raw);
      }
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      value = split_list(raw);
    } else if constexpr (std::is_floating_point_v<T>) {
      std::size_t used = 0;
      try {
        value = std::stod(raw, &used);
      } catch (const std::exception&) {
        bad(key, raw);
      }
      if (used != raw.size()) bad(key, raw);
    } else {
      const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
      if (ec != std::errc() || ptr != raw.data() + raw.size()) bad(key, raw);
    }
  }

  void reject_unknown() const {
    for (const auto& [name, child] : tree_) {
      if (child.empty()) {
        if (!seen_.count(name)) throw FormatError(path_ + ": unknown key '" + name + "'");
        continue;
      }
      for (const auto& [key, leaf] : child) {
        if (!seen_.count(name + "." + key)) throw FormatError(path_ + ": unknown key '" + key + "' in [" + name + "]");
      }
    }
  }

 private:
  [[noreturn]] void bad(const std::string& key, const std::string& raw) const {
    throw FormatError(path_ + ": invalid value '" + raw + "' for " + key);
  }

  const pt::ptree& tree_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

void RunConfig::validate() const {
  train.validate();
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
  if (align.anchors < 2) throw InvalidArgument("align.anchors must be >= 2");
  if (stability.scope != "intersection" && stability.scope != "union") {
    throw InvalidArgument("stability.scope must be intersection or union");
  }
  if (stability.bins < 1 || report.bins < 1) throw InvalidArgument("histogram bins must be >= 1");
  if (cluster.k_min < 2 || cluster.k_min > cluster.k_max) {
    throw InvalidArgument("cluster k range must satisfy 2 <= k_min <= k_max");
  }
  if (cluster.top < 1) throw InvalidArgument("cluster.top must be >= 1");
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig c) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    if (!std::filesystem::exists(path)) throw IoError("cannot open config file " + path.string());
    throw FormatError("config file " + path.string() + ": " + e.message() + " at line " + std::to_string(e.line()));
  }
  Reader r(tree, path.string());
  r.get("seed", c.seed);
  r.get("threads", c.threads);
  r.get("preprocess.stopwords", c.preprocess.stopwords);
  r.get("preprocess.min_tokens", c.preprocess.min_tokens);
  r.get("preprocess.keep_hashtags", c.preprocess.keep_hashtags);
  r.get("train.dim", c.train.dim);
  r.get("train.window", c.train.window);
  r.get("train.min_count", c.train.min_count);
  r.get("train.epochs", c.train.epochs);
  r.get("train.lr_start", c.train.lr_start);
  r.get("train.lr_end", c.train.lr_end);
  r.get("train.negatives", c.train.negatives);
  r.get("train.subsample_threshold", c.train.subsample_threshold);
  r.get("align.anchors", c.align.anchors);
  r.get("stability.scope", c.stability.scope);
  r.get("stability.bins", c.stability.bins);
  r.get("cluster.k_min", c.cluster.k_min);
  r.get("cluster.k_max", c.cluster.k_max);
  r.get("cluster.min_frequency", c.cluster.min_frequency);
  r.get("cluster.restarts", c.cluster.restarts);
  r.get("cluster.max_iters", c.cluster.max_iters);
  r.get("cluster.top", c.cluster.top);
  r.get("report.top_n", c.report.top_n);
  r.get("report.bins", c.report.bins);
  r.get("pipeline.periods", c.pipeline.periods);
  r.get("pipeline.raw_dir", c.pipeline.raw_dir);
  r.get("pipeline.work_dir", c.pipeline.work_dir);
  r.get("pipeline.cluster_period", c.pipeline.cluster_period);
  r.get("pipeline.target", c.pipeline.target);
  r.get("pipeline.neighbors", c.pipeline.neighbors);
  r.reject_unknown();
  return c;
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream o;
  o << "seed = " << c.seed << "\n"
    << "threads = " << c.threads << "\n"
    << "\n[preprocess]\n"
    << "stopwords = " << c.preprocess.stopwords << "\n"
    << "min_tokens = " << c.preprocess.min_tokens << "\n"
    << "keep_hashtags = " << (c.preprocess.keep_hashtags ? "true" : "false") << "\n"
    << "\n[train]\n"
    << "dim = " << c.train.dim << "\n"
    << "window = " << c.train.window << "\n"
    << "min_count = " << c.train.min_count << "\n"
    << "epochs = " << c.train.epochs << "\n"
    << "lr_start = " << shortest(c.train.lr_start) << "\n"
    << "lr_end = " << shortest(c.train.lr_end) << "\n"
    << "negatives = " << c.train.negatives << "\n"
    << "subsample_threshold = " << shortest(c.train.subsample_threshold) << "\n"
    << "\n[align]\n"
    << "anchors = " << c.align.anchors << "\n"
    << "\n[stability]\n"
    << "scope = " << c.stability.scope << "\n"
    << "bins = " << c.stability.bins << "\n"
    << "\n[cluster]\n"
    << "k_min = " << c.cluster.k_min << "\n"
    << "k_max = " << c.cluster.k_max << "\n"
    << "min_frequency = " << c.cluster.min_frequency << "\n"
    << "restarts = " << c.cluster.restarts << "\n"
    << "max_iters = " << c.cluster.max_iters << "\n"
    << "top = " << c.cluster.top << "\n"
    << "\n[report]\n"
    << "top_n = " << c.report.top_n << "\n"
    << "bins = " << c.report.bins << "\n"
    << "\n[pipeline]\n"
    << "periods = " << join(c.pipeline.periods) << "\n"
    << "raw_dir = " << c.pipeline.raw_dir << "\n"
    << "work_dir = " << c.pipeline.work_dir << "\n"
    << "cluster_period = " << c.pipeline.cluster_period << "\n"
    << "target = " << c.pipeline.target << "\n"
    << "neighbors = " << join(c.pipeline.neighbors) << "\n";
  return o.str();
}

}  // namespace semshift::cli
