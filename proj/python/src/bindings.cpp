#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "semshift/semshift.hpp"

namespace py = pybind11;
using namespace semshift;

namespace {

std::vector<StabilityRecord> pair_table(const EmbeddingSpace& first, const EmbeddingSpace& second,
                                        std::size_t anchors, const std::string& scope) {
  return stability_table(make_comparison(first, second, anchors), parse_scope(scope));
}

// Mean two-way stability of base against every space in `others`.
std::vector<StabilityRecord> mean_table(const EmbeddingSpace& base, const std::vector<const EmbeddingSpace*>& others,
                                        std::size_t anchors, const std::string& scope) {
  std::vector<Comparison> comparisons;
  for (const auto* s : others) comparisons.push_back(make_comparison(base, *s, anchors));
  return averaged_stability_table(comparisons, parse_scope(scope));
}

}  // namespace

PYBIND11_MODULE(_semshift, m) {
  m.doc() = "Embedding alignment, two-way stability and hashtag clustering";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  // library warnings become Python RuntimeWarnings
  set_warning_handler([](std::string_view msg) {
    py::gil_scoped_acquire gil;
    PyErr_WarnEx(PyExc_RuntimeWarning, std::string(msg).c_str(), 1);
  });

  m.attr("MISSING_STABILITY") = kMissingStability;
  m.attr("MAX_LEARNING_RATE") = kMaxLearningRate;

  py::class_<EmbeddingSpace>(m, "EmbeddingSpace")
      .def(py::init([](std::string label, std::vector<std::string> words, Matrix vectors,
                       std::optional<std::vector<std::uint64_t>> frequencies) {
             return EmbeddingSpace(std::move(label), std::move(words), std::move(vectors), std::move(frequencies));
           }),
           py::arg("label"), py::arg("words"), py::arg("vectors"), py::arg("frequencies") = py::none())
      .def_property("label", &EmbeddingSpace::label, &EmbeddingSpace::set_label)
      .def_property_readonly("words", &EmbeddingSpace::words)
      .def_property_readonly("vectors", &EmbeddingSpace::vectors)
      .def_property_readonly("dim", &EmbeddingSpace::dim)
      .def_property_readonly("frequencies", [](const EmbeddingSpace& s) -> std::optional<std::vector<std::uint64_t>> {
        if (!s.has_frequencies()) return std::nullopt;
        return s.frequencies();
      })
      .def("set_frequencies", py::overload_cast<const FrequencyTable&>(&EmbeddingSpace::set_frequencies))
      .def("vector", [](const EmbeddingSpace& s, const std::string& w) { return Vector(s.row(w)); })
      .def("__len__", &EmbeddingSpace::size)
      .def("__contains__", [](const EmbeddingSpace& s, const std::string& w) { return s.contains(w); })
      .def("__repr__", [](const EmbeddingSpace& s) {
        return "<EmbeddingSpace '" + s.label() + "' " + std::to_string(s.size()) + "x" + std::to_string(s.dim()) + ">";
      });

  m.def("load_embeddings", &load_embeddings, py::arg("path"), py::arg("label") = "");
  m.def("save_embeddings", &save_embeddings, py::arg("space"), py::arg("path"));
  m.def("load_frequencies", &load_frequencies, py::arg("path"));
  m.def("nearest_neighbors",
        [](const EmbeddingSpace& s, const std::string& w, std::size_t k) {
          std::vector<std::pair<std::string, double>> out;
          for (const auto& r : nearest_neighbors(s, s.row(w), k + 1)) {
            if (r.word != w && out.size() < k) out.emplace_back(r.word, r.similarity);
          }
          return out;
        },
        py::arg("space"), py::arg("word"), py::arg("k") = 10);

  m.def("preprocess_document",
        [](std::string_view raw, std::vector<std::string> stopwords, std::size_t min_tokens, bool keep_hashtags) {
          PipelineConfig c;
          c.stopwords.insert(stopwords.begin(), stopwords.end());
          c.min_tokens = min_tokens;
          c.keep_hashtags = keep_hashtags;
          c.validate();
          return preprocess_document(raw, c);
        },
        py::arg("raw"), py::arg("stopwords") = std::vector<std::string>{}, py::arg("min_tokens") = 10,
        py::arg("keep_hashtags") = true);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("dim", &TrainConfig::dim)
      .def_readwrite("window", &TrainConfig::window)
      .def_readwrite("min_count", &TrainConfig::min_count)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("lr_start", &TrainConfig::lr_start)
      .def_readwrite("lr_end", &TrainConfig::lr_end)
      .def_readwrite("negatives", &TrainConfig::negatives)
      .def_readwrite("subsample_threshold", &TrainConfig::subsample_threshold)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("threads", &TrainConfig::threads)
      .def("validate", &TrainConfig::validate);

  m.def("train",
        [](const std::vector<std::vector<std::string>>& docs, const TrainConfig& c, const EmbeddingSpace* init,
           std::string label) { return train(docs, c, init, std::move(label)); },
        py::arg("documents"), py::arg("config") = TrainConfig{}, py::arg("init") = nullptr, py::arg("label") = "");

  py::class_<RotationMap>(m, "RotationMap")
      .def_readonly("rotation", &RotationMap::rotation)
      .def_readonly("from_label", &RotationMap::from_label)
      .def_readonly("to_label", &RotationMap::to_label)
      .def_property_readonly("anchors", [](const RotationMap& r) { return r.anchors.words; })
      .def_readonly("residual", &RotationMap::residual)
      .def("transposed", &RotationMap::transposed);
  py::class_<RotationPair>(m, "RotationPair")
      .def_readonly("forward", &RotationPair::forward)
      .def_readonly("backward", &RotationPair::backward);

  m.def("fit_rotation",
        [](const EmbeddingSpace& base, const EmbeddingSpace& target, std::size_t anchors) {
          return fit_rotation(base, target, select_anchors(base, target, anchors));
        },
        py::arg("base"), py::arg("target"), py::arg("anchors") = 1000);
  m.def("fit_rotation_pair", &fit_rotation_pair, py::arg("first"), py::arg("second"), py::arg("anchors") = 1000);
  m.def("apply_rotation", &apply_rotation, py::arg("space"), py::arg("map"));

  py::class_<StabilityRecord>(m, "StabilityRecord")
      .def_readonly("word", &StabilityRecord::word)
      .def_readonly("pair", &StabilityRecord::pair)
      .def_readonly("sim_ij", &StabilityRecord::sim_ij)
      .def_readonly("sim_ji", &StabilityRecord::sim_ji)
      .def_readonly("stab", &StabilityRecord::stab)
      .def_readonly("missing", &StabilityRecord::missing)
      .def("__repr__", [](const StabilityRecord& r) {
        return "<StabilityRecord " + r.word + " " + std::to_string(r.stab) + (r.missing ? " missing>" : ">");
      });

  m.def("two_way_stability", &two_way_stability, py::arg("word"), py::arg("space_i"), py::arg("space_j"),
        py::arg("map_ij"), py::arg("map_ji"));
  m.def("one_way_similarity", &one_way_similarity, py::arg("word"), py::arg("space_i"), py::arg("space_j"),
        py::arg("map_ij"));
  m.def("stability_table", &pair_table, py::arg("first"), py::arg("second"), py::arg("anchors") = 1000,
        py::arg("scope") = "intersection");
  m.def("averaged_stability_table", &mean_table, py::arg("base"), py::arg("others"), py::arg("anchors") = 1000,
        py::arg("scope") = "intersection");
  m.def("read_stability_csv", &read_stability_csv, py::arg("path"));
  m.def("write_stability_csv", &write_stability_csv, py::arg("records"), py::arg("path"));

  m.def("spearman", &spearman, py::arg("x"), py::arg("y"));
  m.def("shift_ranking",
        [](const std::vector<StabilityRecord>& records, std::size_t n) {
          std::vector<std::pair<std::string, double>> out;
          for (const auto& s : shift_ranking(records, n)) out.emplace_back(s.word, s.stab);
          return out;
        },
        py::arg("records"), py::arg("top_n") = 50);

  py::class_<ClusterResult>(m, "ClusterResult")
      .def_readonly("k", &ClusterResult::k)
      .def_readonly("assignments", &ClusterResult::assignments)
      .def_readonly("centroids", &ClusterResult::centroids)
      .def_readonly("silhouette", &ClusterResult::silhouette)
      .def_readonly("mean_silhouette", &ClusterResult::mean_silhouette)
      .def_readonly("inertia", &ClusterResult::inertia);
  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("ks", &SweepResult::ks)
      .def_readonly("mean_silhouettes", &SweepResult::mean_silhouettes)
      .def_readonly("best_k", &SweepResult::best_k)
      .def_readonly("best", &SweepResult::best);
  py::class_<PcaProjection>(m, "PcaProjection")
      .def_readonly("points", &PcaProjection::points)
      .def_readonly("components", &PcaProjection::components)
      .def_readonly("mean", &PcaProjection::mean)
      .def_readonly("explained_variance", &PcaProjection::explained_variance);

  auto opts = [](std::size_t restarts, std::size_t max_iters, std::uint64_t seed) {
    KMeansOptions o;
    o.restarts = restarts;
    o.max_iters = max_iters;
    o.seed = seed;
    return o;
  };
  m.def("kmeans",
        [opts](const Matrix& data, std::size_t k, std::size_t restarts, std::size_t max_iters, std::uint64_t seed) {
          return kmeans(data, k, opts(restarts, max_iters, seed));
        },
        py::arg("data"), py::arg("k"), py::arg("restarts") = 10, py::arg("max_iters") = 300, py::arg("seed") = 1);
  m.def("sweep_k",
        [opts](const Matrix& data, std::size_t k_min, std::size_t k_max, std::size_t restarts, std::size_t max_iters,
               std::uint64_t seed) { return sweep_k(data, k_min, k_max, opts(restarts, max_iters, seed)); },
        py::arg("data"), py::arg("k_min"), py::arg("k_max"), py::arg("restarts") = 10, py::arg("max_iters") = 300,
        py::arg("seed") = 1);
  m.def("silhouette",
        [](const Matrix& data, const std::vector<std::size_t>& a) { return silhouette(data, a).values; },
        py::arg("data"), py::arg("assignments"));
  m.def("pca_2d", &pca_2d, py::arg("data"));
  m.def("select_hashtags",
        [](const EmbeddingSpace& s, std::uint64_t min_frequency) {
          auto sel = select_hashtag_vectors(s, min_frequency);
          return py::make_tuple(sel.tokens, sel.frequencies, sel.vectors);
        },
        py::arg("space"), py::arg("min_frequency") = 10);
}
