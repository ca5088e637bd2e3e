#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nohgnn/errors.hpp"
#include "nohgnn/graph_data.hpp"
#include "nohgnn/trainer.hpp"

namespace py = pybind11;
using namespace nohgnn;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// numpy (d1, d2, d3) <-> Tensor3; the tensor stores slices contiguously.
Tensor3 to_tensor(const Array& a) {
  if (a.ndim() != 3) throw ShapeError("expected a 3-d array, got " + std::to_string(a.ndim()) + " dims");
  const auto r = a.unchecked<3>();
  Tensor3 t(r.shape(0), r.shape(1), r.shape(2));
  for (py::ssize_t i = 0; i < r.shape(0); ++i)
    for (py::ssize_t j = 0; j < r.shape(1); ++j)
      for (py::ssize_t k = 0; k < r.shape(2); ++k) t(i, j, k) = r(i, j, k);
  return t;
}

Array to_array(const Tensor3& t) {
  Array a({t.d1(), t.d2(), t.d3()});
  auto w = a.mutable_unchecked<3>();
  for (std::size_t i = 0; i < t.d1(); ++i)
    for (std::size_t j = 0; j < t.d2(); ++j)
      for (std::size_t k = 0; k < t.d3(); ++k) w(i, j, k) = t(i, j, k);
  return a;
}

SliceSparse3 to_sparse(const Tensor3& t) {
  std::vector<CsrMatrix> slices;
  for (std::size_t k = 0; k < t.d3(); ++k) {
    std::vector<Triplet> trip;
    for (std::size_t i = 0; i < t.d1(); ++i)
      for (std::size_t j = 0; j < t.d2(); ++j)
        if (t(i, j, k) != 0.0) trip.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), t(i, j, k)});
    slices.push_back(CsrMatrix::from_triplets(t.d1(), t.d2(), std::move(trip)));
  }
  return SliceSparse3(t.d1(), t.d2(), std::move(slices));
}

Transform transform_for(const std::string& kind, std::size_t T) { return make_transform(parse_transform_kind(kind), T); }

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["f1"] = m.f1;
  d["accuracy"] = m.accuracy;
  d["loss"] = m.loss;
  d["tp"] = m.tp;
  d["fp"] = m.fp;
  d["tn"] = m.tn;
  d["fn"] = m.fn;
  return d;
}

}  // namespace

PYBIND11_MODULE(_nohgnn, m) {
  m.doc() = "NO-HGNN core: tensor M-product algebra, dynamic graph ingestion and training";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  // Tensor algebra -----------------------------------------------------------

  m.def("dct2_matrix", &dct2_matrix, py::arg("T"), "Orthonormal DCT-II matrix of size T x T.");
  m.def(
      "transform_matrices",
      [](const std::string& kind, std::size_t T) {
        const Transform tf = transform_for(kind, T);
        return py::make_tuple(Matrix(tf.forward), Matrix(tf.inverse));
      },
      py::arg("kind"), py::arg("T"), "(M, M^-1) for 'identity' or 'dct'.");
  m.def(
      "mode3_product", [](const Array& x, const Matrix& mat) { return to_array(mode3_product(to_tensor(x), mat)); },
      py::arg("x"), py::arg("m"));
  m.def(
      "facewise_product",
      [](const Array& x, const Array& y) { return to_array(facewise_product(to_tensor(x), to_tensor(y))); },
      py::arg("x"), py::arg("y"));
  m.def(
      "m_product",
      [](const Array& x, const Array& y, const std::string& transform) {
        const Tensor3 a = to_tensor(x);
        return to_array(m_product(a, to_tensor(y), transform_for(transform, a.d3())));
      },
      py::arg("x"), py::arg("y"), py::arg("transform") = "identity");
  m.def(
      "m_product",
      [](const Array& x, const Array& y, const Matrix& mat) {
        return to_array(m_product(to_tensor(x), to_tensor(y), make_custom_transform(mat)));
      },
      py::arg("x"), py::arg("y"), py::arg("m"));
  m.def(
      "matpower_sum",
      [](const Array& a, std::size_t k) { return to_array(sparse_matpower_sum(to_sparse(to_tensor(a)), k).to_dense()); },
      py::arg("adjacency"), py::arg("K"), "Sum of A^1..A^K per frontal slice.");

  // Data ----------------------------------------------------------------------

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("nodes", [](const Dataset& d) { return d.graph.node_count(); })
      .def_property_readonly("slots", [](const Dataset& d) { return d.graph.slot_count(); })
      .def_property_readonly("events", [](const Dataset& d) { return d.graph.event_count; })
      .def_property_readonly("distinct_edges", [](const Dataset& d) { return d.graph.edge_count(); })
      .def_property_readonly("split_sizes",
                             [](const Dataset& d) {
                               py::dict out;
                               out["train"] = d.split.train.size();
                               out["val"] = d.split.val.size();
                               out["test"] = d.split.test.size();
                               return out;
                             })
      .def_property_readonly("fingerprint", &Dataset::fingerprint)
      .def("adjacency", [](const Dataset& d) { return to_array(d.graph.adjacency().to_dense()); })
      .def("save", [](const Dataset& d, const std::string& path) { save_dataset(d, path); }, py::arg("path"));

  m.def(
      "ingest",
      [](const std::string& path, std::size_t slots, const std::string& columns, bool undirected, bool binarize,
         std::uint64_t seed, std::size_t neg_ratio) {
        const EdgeList edges = load_edge_list(path, EdgeListFormat::parse(columns));
        return prepare_dataset(bin_snapshots(edges, slots, undirected, binarize), seed, neg_ratio);
      },
      py::arg("path"), py::arg("slots"), py::arg("columns") = "src,dst,ts,weight", py::arg("undirected") = true,
      py::arg("binarize") = true, py::arg("seed") = 0, py::arg("neg_ratio") = 1);
  m.def("load_dataset", [](const std::string& path) { return load_dataset(path); }, py::arg("path"));
  m.def(
      "planted_partition",
      [](std::size_t nodes, std::size_t slots, double p_in, double p_out, std::uint64_t seed, std::size_t neg_ratio) {
        return prepare_dataset(planted_partition(nodes, slots, p_in, p_out, seed), seed, neg_ratio);
      },
      py::arg("nodes"), py::arg("slots"), py::arg("p_in") = 0.2, py::arg("p_out") = 0.02, py::arg("seed") = 0,
      py::arg("neg_ratio") = 1, "Seeded planted-partition dynamic graph, split and ready to train.");

  // Training ------------------------------------------------------------------

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("lr", &TrainConfig::learning_rate)
      .def_readwrite("beta", &TrainConfig::beta_reg)
      .def_readwrite("epochs", &TrainConfig::max_epochs)
      .def_readwrite("patience", &TrainConfig::patience)
      .def_readwrite("k_hops", &TrainConfig::hops)
      .def_readwrite("layers", &TrainConfig::layers)
      .def_readwrite("dim", &TrainConfig::dim)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("neg_ratio", &TrainConfig::neg_ratio)
      .def_readwrite("threshold", &TrainConfig::threshold)
      .def_property(
          "transform", [](const TrainConfig& c) { return to_string(c.transform); },
          [](TrainConfig& c, const std::string& v) { c.transform = parse_transform_kind(v); })
      .def("validate", &TrainConfig::validate);

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("f1", &Metrics::f1)
      .def_readonly("accuracy", &Metrics::accuracy)
      .def_readonly("loss", &Metrics::loss)
      .def_readonly("tp", &Metrics::tp)
      .def_readonly("fp", &Metrics::fp)
      .def_readonly("tn", &Metrics::tn)
      .def_readonly("fn", &Metrics::fn)
      .def("as_dict", &metrics_dict);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("epochs_run", &TrainResult::epochs_run)
      .def_readonly("best_epoch", &TrainResult::best_epoch)
      .def_readonly("stop_reason", &TrainResult::stop_reason)
      .def_readonly("best_val", &TrainResult::best_val)
      .def_readonly("test", &TrainResult::test)
      .def_property_readonly("history", [](const TrainResult& r) {
        py::list out;
        for (const auto& e : r.history) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["loss"] = e.loss;
          d["val_f1"] = e.val_f1;
          d["val_acc"] = e.val_acc;
          out.append(d);
        }
        return out;
      });

  m.def(
      "train",
      [](const Dataset& data, const TrainConfig& config) {
        py::gil_scoped_release release;
        return train_loop(data, config);
      },
      py::arg("dataset"), py::arg("config") = TrainConfig{});
  m.def(
      "evaluate",
      [](const std::vector<double>& probs, const std::vector<double>& labels, double threshold) {
        return evaluate(probs, labels, threshold);
      },
      py::arg("probs"), py::arg("labels"), py::arg("threshold") = 0.5);

  py::class_<GradCheckReport>(m, "GradCheckReport")
      .def_readonly("max_rel_error", &GradCheckReport::max_rel_error)
      .def_readonly("worst_param", &GradCheckReport::worst_param)
      .def_readonly("worst_index", &GradCheckReport::worst_index)
      .def_readonly("entries_checked", &GradCheckReport::entries_checked);
  m.def(
      "gradcheck",
      [](const std::string& transform, std::uint64_t seed) {
        return tiny_gradcheck(parse_transform_kind(transform), seed);
      },
      py::arg("transform") = "identity", py::arg("seed") = 7,
      "Tape gradients of a tiny model against central differences.");
}
