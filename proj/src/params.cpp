#include "sea/params.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "sea/error.hpp"

namespace sea {

using nlohmann::json;

int ParamStore::add(std::string name, Tensor value) {
    require(index_of(name) < 0, "params: duplicate parameter name ", name);
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
    return static_cast<int>(names_.size()) - 1;
}

int ParamStore::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return -1;
}

std::size_t ParamStore::num_scalars() const {
    std::size_t n = 0;
    for (const Tensor& t : values_) n += t.size();
    return n;
}

void save_checkpoint(const ParamStore& params, const std::string& extra_json,
                     const std::string& path) {
    json j;
    j["format_version"] = 1;
    if (!extra_json.empty()) j["extra"] = json::parse(extra_json);
    auto plist = json::array();
    for (std::size_t i = 0; i < params.size(); ++i) {
        json p;
        p["name"] = params.name(static_cast<int>(i));
        p["shape"] = params.value(static_cast<int>(i)).shape();
        p["values"] = params.value(static_cast<int>(i)).values();
        plist.push_back(std::move(p));
    }
    j["params"] = std::move(plist);
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot open checkpoint file for writing: ", path);
    out << j.dump() << "\n";
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open checkpoint file: ", path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("checkpoint parse error: ", e.what());
    }
    require(j.contains("format_version") && j["format_version"] == 1,
            "checkpoint: unsupported format version");
    LoadedCheckpoint ck;
    if (j.contains("extra")) ck.extra_json = j["extra"].dump();
    for (const auto& p : j["params"]) {
        std::vector<std::size_t> shape = p["shape"].get<std::vector<std::size_t>>();
        std::vector<double> values = p["values"].get<std::vector<double>>();
        ck.params.add(p["name"].get<std::string>(),
                      Tensor(std::move(shape), std::move(values)));
    }
    return ck;
}

}  // namespace sea
