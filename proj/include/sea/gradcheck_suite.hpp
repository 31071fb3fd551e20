#pragma once

#include <string>
#include <vector>

namespace sea {

struct GradCheckCase {
    std::string name;
    double error = 0.0;
    bool passed(double tol = 1e-4) const { return error <= tol; }
};

// Finite-difference checks for every differentiable primitive on random
// small inputs.
std::vector<GradCheckCase> gradcheck_tensor_ops(std::uint64_t seed = 7,
                                                int instances_per_op = 2);

// Checks a full graph transformer layer end to end.
std::vector<GradCheckCase> gradcheck_gtl(std::uint64_t seed = 11,
                                         int instances = 4);

// Checks model_forward for all variants with epsilon = 0 (routing fixed),
// differentiating through every parameter.
std::vector<GradCheckCase> gradcheck_model(std::uint64_t seed = 13,
                                           int instances_per_variant = 2);

}  // namespace sea
