#pragma once

#include <string>
#include <vector>

#include "sea/tensor.hpp"

namespace sea {

// Ordered name -> tensor container for model parameters. Order is fixed at
// build time and defines gradient merge and optimizer slot order.
class ParamStore {
public:
    int add(std::string name, Tensor value);
    int index_of(const std::string& name) const;  // -1 if absent

    std::size_t size() const { return names_.size(); }
    const std::string& name(int i) const { return names_[i]; }
    const Tensor& value(int i) const { return values_[i]; }
    Tensor& value(int i) { return values_[i]; }
    const std::vector<Tensor>& values() const { return values_; }
    std::vector<Tensor>& values() { return values_; }

    std::size_t num_scalars() const;

private:
    std::vector<std::string> names_;
    std::vector<Tensor> values_;
};

// JSON checkpoint with exact float round-trip (shortest round-trip decimals).
// `extra` travels alongside the parameters (model config, schema, ...).
void save_checkpoint(const ParamStore& params, const std::string& extra_json,
                     const std::string& path);

struct LoadedCheckpoint {
    ParamStore params;
    std::string extra_json;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace sea
