#include <fstream>
#include <nlohmann/json.hpp>

#include "sea/error.hpp"
#include "sea/graph.hpp"

namespace sea {

using nlohmann::json;

namespace {

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
    fail("line ", line_no, ": ", what);
}

Graph parse_record(const json& j, std::size_t line_no) {
    Graph::Builder b;
    try {
        if (!j.contains("num_nodes") || !j["num_nodes"].is_number_integer())
            fail_line(line_no, "missing or non-integer num_nodes");
        b.num_nodes = j["num_nodes"].get<int>();

        if (j.contains("edges")) {
            for (const auto& e : j["edges"]) {
                if (!e.is_array() || e.size() != 2)
                    fail_line(line_no, "edge entries must be [u,v] pairs");
                b.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
            }
        }

        if (j.contains("node_feat")) {
            const auto& nf = j["node_feat"];
            if (!nf.is_array() || nf.empty())
                fail_line(line_no, "node_feat must be a nonempty array");
            if (nf.front().is_array()) {
                b.node_dense_dim = static_cast<int>(nf.front().size());
                for (const auto& row : nf) {
                    if (!row.is_array() ||
                        static_cast<int>(row.size()) != b.node_dense_dim)
                        fail_line(line_no, "ragged dense node features");
                    for (const auto& x : row)
                        b.node_dense.push_back(x.get<double>());
                }
            } else {
                for (const auto& x : nf) {
                    if (!x.is_number_integer())
                        fail_line(line_no, "token node features must be integers");
                    b.node_tokens.push_back(x.get<std::int64_t>());
                }
            }
        }

        if (j.contains("edge_feat")) {
            const auto& ef = j["edge_feat"];
            if (!ef.is_array()) fail_line(line_no, "edge_feat must be an array");
            if (!ef.empty() && ef.front().is_array()) {
                b.edge_dense_dim = static_cast<int>(ef.front().size());
                for (const auto& row : ef) {
                    if (!row.is_array() ||
                        static_cast<int>(row.size()) != b.edge_dense_dim)
                        fail_line(line_no, "ragged dense edge features");
                    for (const auto& x : row)
                        b.edge_dense.push_back(x.get<double>());
                }
            } else {
                for (const auto& x : ef) {
                    if (!x.is_number_integer())
                        fail_line(line_no, "token edge features must be integers");
                    b.edge_tokens.push_back(x.get<std::int64_t>());
                }
            }
        }

        if (j.contains("y_graph") && j.contains("y_node"))
            fail_line(line_no, "record has both y_graph and y_node");
        if (j.contains("y_graph")) {
            if (!j["y_graph"].is_number())
                fail_line(line_no, "y_graph must be a number");
            b.y_graph = j["y_graph"].get<double>();
        }
        if (j.contains("y_node")) {
            for (const auto& x : j["y_node"]) {
                if (!x.is_number_integer())
                    fail_line(line_no, "y_node entries must be integers");
                b.y_node.push_back(x.get<int>());
            }
        }
        return b.build();
    } catch (const Error& e) {
        std::string w = e.what();
        if (w.rfind("line ", 0) == 0) throw;
        fail_line(line_no, w);
    } catch (const json::exception& e) {
        fail_line(line_no, e.what());
    }
}

}  // namespace

std::vector<Graph> load_jsonl_dataset(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open dataset file: ", path);

    std::vector<Graph> graphs;
    std::string line;
    std::size_t line_no = 0;
    TargetKind seen_target = TargetKind::None;
    NodeFeatureKind seen_nodes = NodeFeatureKind::None;
    int seen_node_dim = -1;
    bool first = true;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) fail_line(line_no, "invalid JSON");
        Graph g = parse_record(j, line_no);

        if (first) {
            seen_target = g.target_kind();
            seen_nodes = g.node_feature_kind();
            seen_node_dim = g.node_dense_dim();
            first = false;
        } else {
            if (g.target_kind() != seen_target)
                fail_line(line_no, "mixed target kinds in dataset");
            if (g.node_feature_kind() != seen_nodes ||
                g.node_dense_dim() != seen_node_dim)
                fail_line(line_no, "mixed node feature kinds in dataset");
        }
        graphs.push_back(std::move(g));
    }
    return graphs;
}

void save_jsonl_dataset(const std::vector<Graph>& graphs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot open output file: ", path);
    for (const Graph& g : graphs) {
        json j;
        j["num_nodes"] = g.num_nodes();
        auto edges = json::array();
        for (auto [u, v] : g.edges()) edges.push_back({u, v});
        j["edges"] = std::move(edges);
        if (g.node_feature_kind() == NodeFeatureKind::Token) {
            j["node_feat"] = g.node_tokens();
        } else if (g.node_feature_kind() == NodeFeatureKind::Dense) {
            auto rows = json::array();
            const int d = g.node_dense_dim();
            for (int u = 0; u < g.num_nodes(); ++u) {
                auto row = json::array();
                for (int c = 0; c < d; ++c) row.push_back(g.node_dense()[u * d + c]);
                rows.push_back(std::move(row));
            }
            j["node_feat"] = std::move(rows);
        }
        if (g.edge_feature_kind() == EdgeFeatureKind::Token)
            j["edge_feat"] = g.edge_tokens();
        if (g.target_kind() == TargetKind::GraphScalar) j["y_graph"] = g.y_graph();
        if (g.target_kind() == TargetKind::NodeLabels) j["y_node"] = g.y_node();
        out << j.dump() << "\n";
    }
}

}  // namespace sea
