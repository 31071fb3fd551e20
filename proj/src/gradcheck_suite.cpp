#include "sea/gradcheck_suite.hpp"

#include <cmath>

#include "sea/error.hpp"
#include "sea/rng.hpp"
#include "sea/sea_model.hpp"
#include "sea/tensor.hpp"
#include "sea/train.hpp"

namespace sea {

namespace {

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0,
                     double hi = 1.0) {
    Tensor t({r, c});
    for (double& x : t.values()) x = lo + rng.u01() * (hi - lo);
    return t;
}

std::vector<int> random_indices(Rng& rng, std::size_t count, int bound) {
    std::vector<int> idx(count);
    for (auto& i : idx)
        i = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(bound)));
    return idx;
}

void check(std::vector<GradCheckCase>& out, const std::string& name,
           const std::function<Tensor(const Tensor&)>& f, const Tensor& x) {
    out.push_back({name, finite_diff_gradcheck(f, x)});
}

}  // namespace

std::vector<GradCheckCase> gradcheck_tensor_ops(std::uint64_t seed,
                                                int instances_per_op) {
    std::vector<GradCheckCase> out;
    Rng rng(seed);
    for (int inst = 0; inst < instances_per_op; ++inst) {
        const std::size_t r = 2 + rng.bounded(4);
        const std::size_t c = 2 + rng.bounded(4);
        const std::string tag = "#" + std::to_string(inst);
        Tensor a = random_tensor(rng, r, c);
        Tensor b = random_tensor(rng, r, c);
        Tensor m2 = random_tensor(rng, c, r);
        Tensor rowv = random_tensor(rng, 1, c);
        Tensor colv = random_tensor(rng, r, 1);

        check(out, "matmul.lhs" + tag,
              [&](const Tensor& x) { return sum_all(matmul(x, m2)); }, a);
        check(out, "matmul.rhs" + tag,
              [&](const Tensor& x) { return sum_all(matmul(a, x)); }, m2);
        check(out, "add" + tag,
              [&](const Tensor& x) { return sum_all(mul_elementwise(add(x, b), b)); },
              a);
        check(out, "sub" + tag,
              [&](const Tensor& x) { return sum_all(mul_elementwise(sub(b, x), b)); },
              a);
        check(out, "add_rowvec" + tag,
              [&](const Tensor& x) {
                  return sum_all(mul_elementwise(add_rowvec(a, x), b));
              },
              rowv);
        check(out, "mul_elementwise" + tag,
              [&](const Tensor& x) { return sum_all(mul_elementwise(x, b)); }, a);
        check(out, "scale" + tag,
              [&](const Tensor& x) { return sum_all(scale(x, 1.7)); }, a);
        check(out, "scale_rows.mat" + tag,
              [&](const Tensor& x) { return sum_all(scale_rows(x, colv)); }, a);
        check(out, "scale_rows.col" + tag,
              [&](const Tensor& x) { return sum_all(scale_rows(a, x)); }, colv);
        check(out, "concat_last_dim" + tag,
              [&](const Tensor& x) {
                  return sum_all(mul_elementwise(concat_last_dim({x, b}),
                                                 concat_last_dim({b, x})));
              },
              a);
        check(out, "concat_rows" + tag,
              [&](const Tensor& x) {
                  Tensor joined = concat_rows({x, b});
                  return sum_all(mul_elementwise(joined, joined));
              },
              a);
        check(out, "relu" + tag,
              [&](const Tensor& x) { return sum_all(relu(x)); },
              random_tensor(rng, r, c, -2.0, 2.0));
        check(out, "softplus" + tag,
              [&](const Tensor& x) { return sum_all(softplus(x)); },
              random_tensor(rng, r, c, -3.0, 3.0));
        check(out, "sum_rows" + tag,
              [&](const Tensor& x) {
                  return sum_all(mul_elementwise(sum_rows(x), colv));
              },
              a);
        check(out, "sum_all" + tag,
              [&](const Tensor& x) { return sum_all(x); }, a);

        auto gidx = random_indices(rng, r + 2, static_cast<int>(r));
        check(out, "gather_rows" + tag,
              [&](const Tensor& x) {
                  Tensor g = gather_rows(x, gidx);
                  return sum_all(mul_elementwise(g, g));
              },
              a);
        auto sidx = random_indices(rng, r, static_cast<int>(r + 1));
        check(out, "scatter_add_rows" + tag,
              [&](const Tensor& x) {
                  Tensor s = scatter_add_rows(x, sidx, r + 1);
                  return sum_all(mul_elementwise(s, s));
              },
              a);
        check(out, "scatter_max_rows" + tag,
              [&](const Tensor& x) {
                  Tensor s = scatter_max_rows(x, sidx, r + 1);
                  return sum_all(mul_elementwise(s, s));
              },
              a);
        check(out, "reshape" + tag,
              [&](const Tensor& x) {
                  Tensor s = reshape(x, {c, r});
                  return sum_all(mul_elementwise(s, s));
              },
              a);

        Tensor mask({r, c});
        bool any = false;
        for (double& v : mask.values()) {
            v = rng.u01() < 0.7 ? 1.0 : 0.0;
            any = any || v != 0.0;
        }
        if (!any) mask.values()[0] = 1.0;
        check(out, "masked_row_softmax" + tag,
              [&](const Tensor& x) {
                  Tensor y = masked_row_softmax(x, mask);
                  return sum_all(mul_elementwise(y, b));
              },
              a);
        check(out, "log_softmax_rows" + tag,
              [&](const Tensor& x) {
                  Tensor y = log_softmax_rows(x);
                  return sum_all(mul_elementwise(y, b));
              },
              a);
        auto pidx = random_indices(rng, r, static_cast<int>(c));
        check(out, "pick_per_row" + tag,
              [&](const Tensor& x) {
                  Tensor y = pick_per_row(x, pidx);
                  return sum_all(mul_elementwise(y, colv));
              },
              a);
    }
    return out;
}

namespace {

// Small random graph as a one-graph batch with dense node features.
struct TinyCase {
    Dataset ds;
    SeaConfig cfg;
    DataSchema schema;
};

TinyCase make_tiny_case(Rng& rng, Variant variant, bool augmented) {
    TinyCase tc;
    tc.cfg.variant = variant;
    tc.cfg.augmented = augmented;
    tc.cfg.num_experts = 2 + static_cast<int>(rng.bounded(2));
    tc.cfg.khop = 2;
    tc.cfg.num_heads = 2;
    tc.cfg.model_dim = 4 + 2 * static_cast<int>(rng.bounded(3));  // 4, 6, 8
    tc.cfg.lpe_dim = 3;
    tc.cfg.task = Task::GraphRegression;
    tc.cfg.use_bias = rng.u01() < 0.5;

    const int n = 4 + static_cast<int>(rng.bounded(5));  // 4..8 nodes
    Graph::Builder b;
    b.num_nodes = n;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.u01() < 0.45) b.edges.emplace_back(u, v);
    if (b.edges.empty()) b.edges.emplace_back(0, 1);
    const int d_in = 3;
    b.node_dense_dim = d_in;
    for (int i = 0; i < n * d_in; ++i)
        b.node_dense.push_back(rng.u01() * 2 - 1);
    b.y_graph = rng.u01();
    tc.ds = prepare_dataset({b.build()}, tc.cfg);

    tc.schema.node_kind = NodeFeatureKind::Dense;
    tc.schema.node_dense_dim = d_in;
    return tc;
}

}  // namespace

std::vector<GradCheckCase> gradcheck_gtl(std::uint64_t seed, int instances) {
    std::vector<GradCheckCase> out;
    Rng rng(seed);
    for (int inst = 0; inst < instances; ++inst) {
        TinyCase tc = make_tiny_case(rng, Variant::SeaGnn, false);
        SeaModel model = SeaModel::build(tc.cfg, tc.schema, rng.next());
        BatchInputs in = batch_inputs_for(tc.ds, {0}, tc.cfg);
        const int n = in.batch.merged.num_nodes();
        Tensor h = random_tensor(rng, n, tc.cfg.model_dim);
        const LayerConfig lc = tc.cfg.layer_config();

        // Differentiate through the node states with fixed layer weights.
        auto f = [&](const Tensor& x) {
            GtlOutput o = gtl_forward(model.params.values(), x, std::nullopt,
                                      in.support, model.layers[0], lc);
            return sum_all(mul_elementwise(o.h, o.h));
        };
        out.push_back({"gtl.h#" + std::to_string(inst),
                       finite_diff_gradcheck(f, h)});

        // And through one weight matrix with fixed states.
        const int wid = model.layers[0].ring_heads[0][0].q;
        auto fw = [&](const Tensor& x) {
            std::vector<Tensor> params = model.params.values();
            params[wid] = x;
            GtlOutput o = gtl_forward(params, h, std::nullopt, in.support,
                                      model.layers[0], lc);
            return sum_all(mul_elementwise(o.h, o.h));
        };
        out.push_back({"gtl.q0#" + std::to_string(inst),
                       finite_diff_gradcheck(fw, model.params.value(wid))});
    }
    return out;
}

std::vector<GradCheckCase> gradcheck_model(std::uint64_t seed,
                                           int instances_per_variant) {
    std::vector<GradCheckCase> out;
    Rng rng(seed);
    struct Mode {
        Variant variant;
        bool augmented;
        const char* name;
    };
    const Mode modes[] = {{Variant::SeaGnn, false, "gnn"},
                          {Variant::SeaAggregated, false, "aggregated"},
                          {Variant::SeaKhop, false, "khop"},
                          {Variant::SeaKhop, true, "khop_aug"}};
    for (const Mode& mode : modes) {
        for (int inst = 0; inst < instances_per_variant; ++inst) {
            TinyCase tc = make_tiny_case(rng, mode.variant, mode.augmented);
            SeaModel model = SeaModel::build(tc.cfg, tc.schema, rng.next());
            BatchInputs in = batch_inputs_for(tc.ds, {0}, tc.cfg);
            Tensor target = Tensor::matrix(1, 1, {tc.ds.graphs[0].y_graph()});
            TaskSpec spec;
            spec.task = Task::GraphRegression;

            // Loss as a function of one parameter tensor at a time, all
            // others fixed; routing stays fixed because epsilon is 0 and the
            // router weight is untouched between evaluations.
            for (std::size_t p = 0; p < model.params.size(); ++p) {
                if (static_cast<int>(p) == model.router_w) continue;
                if (model.params.value(static_cast<int>(p)).size() > 200) continue;
                auto f = [&, p](const Tensor& x) {
                    std::vector<Tensor> params = model.params.values();
                    params[p] = x;
                    ForwardResult fr = model_forward(model, params, in, 0.0, 0);
                    return batch_loss(fr.predictions, in, spec, target);
                };
                const std::string name = std::string("model.") + mode.name +
                                         "#" + std::to_string(inst) + "." +
                                         model.params.name(static_cast<int>(p));
                out.push_back({name, finite_diff_gradcheck(
                                         f, model.params.value(
                                                static_cast<int>(p)))});
            }
        }
    }
    return out;
}

}  // namespace sea
