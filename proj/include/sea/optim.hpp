#pragma once

#include <cstdint>
#include <vector>

#include "sea/tensor.hpp"

namespace sea {

// Glorot-uniform init: values in +-sqrt(6 / (fan_in + fan_out)), seeded.
Tensor glorot_init(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed);

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t t = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    static AdamState init(const std::vector<Tensor>& params, double lr);
};

// One Adam update with bias correction over aligned parameter/gradient lists.
void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
               AdamState& state);

}  // namespace sea
