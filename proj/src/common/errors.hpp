#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lvc {

// Error classes map to CLI exit codes: ConfigError -> 2, IoError -> 3,
// NumericError -> 4. ShapeError is a usage/validation error (-> 2).
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string shape_str(const std::vector<int64_t>& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) os << ",";
        os << s[i];
    }
    os << "]";
    return os.str();
}

}  // namespace lvc
