#pragma once

#include <iosfwd>
#include <string>

#include "core/tensor.hpp"

namespace lvc {

// ".ten" container: magic "TEN1", u8 dtype (0=f32, 1=f64), u8 rank,
// rank x u64 little-endian dims, then the raw little-endian payload.
void write_ten(std::ostream& os, const Tensor<float>& t);
void write_ten(std::ostream& os, const Tensor<double>& t);
void save_ten(const std::string& path, const Tensor<float>& t);
void save_ten(const std::string& path, const Tensor<double>& t);

// Reads either dtype and converts to the requested element type.
template <typename T>
Tensor<T> read_ten(std::istream& is, const std::string& what = "<stream>");
template <typename T>
Tensor<T> load_ten(const std::string& path);

}  // namespace lvc
