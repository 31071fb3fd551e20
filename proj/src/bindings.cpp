#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "sea/error.hpp"
#include "sea/gradcheck_suite.hpp"
#include "sea/graph.hpp"
#include "sea/metrics.hpp"
#include "sea/spectral.hpp"
#include "sea/train.hpp"

namespace py = pybind11;
using namespace sea;

namespace {

py::array_t<double> tensor_to_numpy(const Tensor& t) {
    py::array_t<double> a({t.rows(), t.cols()});
    auto buf = a.mutable_unchecked<2>();
    for (std::size_t i = 0; i < t.rows(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j) buf(i, j) = t.at(i, j);
    return a;
}

Tensor numpy_to_tensor(const py::array_t<double, py::array::c_style |
                                                      py::array::forcecast>& a) {
    require(a.ndim() == 2, "expected a 2-d array");
    Tensor t({static_cast<std::size_t>(a.shape(0)),
              static_cast<std::size_t>(a.shape(1))});
    auto buf = a.unchecked<2>();
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
        for (py::ssize_t j = 0; j < a.shape(1); ++j)
            t.at(i, j) = buf(i, j);
    return t;
}

Graph graph_from_parts(int num_nodes,
                       const std::vector<std::pair<int, int>>& edges,
                       const std::vector<std::int64_t>& node_tokens,
                       std::optional<double> y_graph,
                       const std::vector<int>& y_node) {
    Graph::Builder b;
    b.num_nodes = num_nodes;
    b.edges = edges;
    b.node_tokens = node_tokens;
    b.y_graph = y_graph;
    b.y_node = y_node;
    return b.build();
}

// Inference wrapper: checkpoint + datasets in, predictions and routing out.
struct PyModel {
    SeaModel model;

    explicit PyModel(const std::string& checkpoint_path)
        : model(load_model(checkpoint_path)) {}

    py::dict predict(const std::vector<Graph>& graphs) {
        Dataset ds = prepare_dataset(graphs, model.cfg);
        std::vector<int> indices(graphs.size());
        for (std::size_t i = 0; i < indices.size(); ++i)
            indices[i] = static_cast<int>(i);
        BatchInputs in = batch_inputs_for(ds, indices, model.cfg);
        ForwardResult fr =
            model_forward(model, model.params.values(), in, 0.0, 0);
        py::dict out;
        out["predictions"] = tensor_to_numpy(fr.predictions);
        out["expert"] = fr.routing.expert;
        out["probs"] = tensor_to_numpy(fr.routing.probs);
        return out;
    }
};

}  // namespace

PYBIND11_MODULE(seacore, m) {
    m.doc() = "Graph shell attention engine: graphs, spectra, training";

    py::register_exception<Error>(m, "SeaError");

    py::class_<Graph>(m, "Graph")
        .def(py::init(&graph_from_parts), py::arg("num_nodes"),
             py::arg("edges") = std::vector<std::pair<int, int>>{},
             py::arg("node_tokens") = std::vector<std::int64_t>{},
             py::arg("y_graph") = std::nullopt,
             py::arg("y_node") = std::vector<int>{})
        .def_property_readonly("num_nodes", &Graph::num_nodes)
        .def_property_readonly("num_edges", &Graph::num_edges)
        .def_property_readonly("edges", &Graph::edges)
        .def("neighbors",
             [](const Graph& g, int u) {
                 auto nb = g.neighbors(u);
                 return std::vector<int>(nb.begin(), nb.end());
             })
        .def_property_readonly("node_tokens", &Graph::node_tokens)
        .def_property_readonly("y_node", &Graph::y_node)
        .def("y_graph", &Graph::y_graph);

    m.def(
        "generate_sbm",
        [](int num_graphs, int nodes_per_block, int num_blocks, double p_intra,
           double p_inter, int feature_vocab, std::uint64_t seed) {
            SbmConfig c;
            c.num_graphs = num_graphs;
            c.nodes_per_block = nodes_per_block;
            c.num_blocks = num_blocks;
            c.p_intra = p_intra;
            c.p_inter = p_inter;
            c.feature_vocab = feature_vocab;
            c.seed = seed;
            return generate_sbm(c);
        },
        py::arg("num_graphs"), py::arg("nodes_per_block"), py::arg("num_blocks"),
        py::arg("p_intra"), py::arg("p_inter"), py::arg("feature_vocab") = 1,
        py::arg("seed") = 0);

    m.def("load_jsonl", &load_jsonl_dataset, py::arg("path"));
    m.def("save_jsonl", &save_jsonl_dataset, py::arg("graphs"), py::arg("path"));

    m.def(
        "khop_rings",
        [](const Graph& g, int max_k) { return khop_index(g, max_k).rings; },
        py::arg("graph"), py::arg("max_k"),
        "Per node, per hop distance, the sorted node lists");

    m.def(
        "normalized_laplacian",
        [](const Graph& g) { return tensor_to_numpy(normalized_laplacian(g)); },
        py::arg("graph"));

    m.def(
        "eigendecompose",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
               mat,
           double tol) {
            Spectrum sp = eigendecompose_symmetric(numpy_to_tensor(mat), tol);
            return py::make_tuple(sp.eigenvalues,
                                  tensor_to_numpy(sp.eigenvectors));
        },
        py::arg("matrix"), py::arg("tol") = 1e-12,
        "Eigenvalues (ascending) and eigenvector columns of a symmetric matrix");

    m.def(
        "lpe",
        [](const Graph& g, int dim, bool skip_trivial) {
            return tensor_to_numpy(lpe(g, dim, skip_trivial));
        },
        py::arg("graph"), py::arg("dim"), py::arg("skip_trivial") = false);

    m.def("roc_auc", &roc_auc, py::arg("scores"), py::arg("labels"));

    m.def(
        "train",
        [](const std::string& config_json) {
            TrainResult r = train(TrainConfig::from_json_text(config_json));
            py::dict out;
            out["checkpoint"] = r.checkpoint_path;
            out["log"] = r.log_path;
            out["experts_report"] = r.experts_report_path;
            out["oversmoothing"] = r.oversmoothing_path;
            out["epochs_run"] = r.epochs_run;
            out["best_val_metric"] = r.best_val_metric;
            out["best_test_metric"] = r.best_test_metric;
            out["stop_reason"] = r.stop_reason;
            return out;
        },
        py::arg("config_json"), "Run training from a JSON config string");

    m.def("gradcheck_max_error", [] {
        double worst = 0.0;
        for (const auto& c : gradcheck_tensor_ops()) worst = std::max(worst, c.error);
        return worst;
    });

    py::class_<PyModel>(m, "Model")
        .def(py::init<const std::string&>(), py::arg("checkpoint_path"))
        .def("predict", &PyModel::predict, py::arg("graphs"));
}
