#pragma once

#include <map>
#include <string>

#include "core/tensor.hpp"

namespace lvc {

// Named parameter map. std::map keeps iteration lexicographic, which makes
// checkpoint layout and optimizer order deterministic.
template <typename T>
class ParamStore {
public:
    Tensor<T>& add(const std::string& name, Tensor<T> t) {
        if (params_.count(name)) throw ConfigError("duplicate parameter: " + name);
        auto [it, ok] = params_.emplace(name, std::move(t));
        (void)ok;
        return it->second;
    }

    Tensor<T>& at(const std::string& name) {
        auto it = params_.find(name);
        if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }
    const Tensor<T>& at(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }
    bool contains(const std::string& name) const { return params_.count(name) != 0; }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }
    size_t size() const { return params_.size(); }

    void zero_grad() {
        for (auto& [name, t] : params_) t.zero_grad();
    }

    void set_requires_grad(bool rg) {
        for (auto& [name, t] : params_) t.set_requires_grad(rg);
    }

private:
    std::map<std::string, Tensor<T>> params_;
};

}  // namespace lvc
