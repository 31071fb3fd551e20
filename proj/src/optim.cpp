#include "sea/optim.hpp"

#include <cmath>

#include "sea/error.hpp"
#include "sea/rng.hpp"

namespace sea {

Tensor glorot_init(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
    require(fan_in >= 1 && fan_out >= 1, "glorot_init: dims must be positive");
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Rng rng(seed);
    Tensor out({fan_in, fan_out});
    for (double& x : out.values()) x = (rng.u01() * 2.0 - 1.0) * bound;
    return out;
}

AdamState AdamState::init(const std::vector<Tensor>& params, double lr) {
    AdamState s;
    s.lr = lr;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Tensor& p : params) {
        s.m.emplace_back(p.shape());
        s.v.emplace_back(p.shape());
    }
    return s;
}

void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
               AdamState& state) {
    require(params.size() == grads.size() && params.size() == state.m.size(),
            "adam_step: parameter/gradient/state count mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t p = 0; p < params.size(); ++p) {
        require(params[p].shape() == grads[p].shape(),
                "adam_step: shape mismatch at parameter ", p, ": ",
                params[p].shape_str(), " vs ", grads[p].shape_str());
        auto& th = params[p].values();
        const auto& g = grads[p].values();
        auto& m = state.m[p].values();
        auto& v = state.v[p].values();
        for (std::size_t i = 0; i < th.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            th[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace sea
