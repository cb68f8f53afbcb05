// Integers and floats are written little-endian; this targets little-endian
// hosts (x86-64, aarch64) and writes fields byte-by-byte where order matters.
#include "core/tensor_io.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace lvc {

namespace {

void put_u64(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

template <typename T>
void write_ten_impl(std::ostream& os, const Tensor<T>& t, uint8_t dtype) {
    os.write("TEN1", 4);
    os.put(static_cast<char>(dtype));
    os.put(static_cast<char>(t.rank()));
    for (int i = 0; i < t.rank(); ++i) put_u64(os, static_cast<uint64_t>(t.dim(i)));
    os.write(reinterpret_cast<const char*>(t.data().data()),
             static_cast<std::streamsize>(sizeof(T) * t.numel()));
    if (!os) throw IoError("failed writing .ten record");
}

}  // namespace

void write_ten(std::ostream& os, const Tensor<float>& t) { write_ten_impl(os, t, 0); }
void write_ten(std::ostream& os, const Tensor<double>& t) { write_ten_impl(os, t, 1); }

void save_ten(const std::string& path, const Tensor<float>& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    write_ten(f, t);
}

void save_ten(const std::string& path, const Tensor<double>& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    write_ten(f, t);
}

template <typename T>
Tensor<T> read_ten(std::istream& is, const std::string& what) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "TEN1", 4) != 0)
        throw IoError(what + ": bad .ten magic");
    int dtype = is.get();
    int rank = is.get();
    if (dtype < 0 || dtype > 1 || rank < 0 || rank > 8)
        throw IoError(what + ": corrupt .ten header");
    Shape shape(static_cast<size_t>(rank));
    for (int i = 0; i < rank; ++i) shape[i] = static_cast<int64_t>(get_u64(is));
    int64_t n = shape_numel(shape);
    std::vector<T> data(static_cast<size_t>(n));
    if (dtype == 0) {
        std::vector<float> raw(static_cast<size_t>(n));
        is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(4 * n));
        for (int64_t i = 0; i < n; ++i) data[i] = static_cast<T>(raw[i]);
    } else {
        std::vector<double> raw(static_cast<size_t>(n));
        is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(8 * n));
        for (int64_t i = 0; i < n; ++i) data[i] = static_cast<T>(raw[i]);
    }
    if (!is) throw IoError(what + ": truncated .ten payload");
    return Tensor<T>::from_data(std::move(shape), std::move(data));
}

template <typename T>
Tensor<T> load_ten(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    return read_ten<T>(f, path);
}

template Tensor<float> read_ten<float>(std::istream&, const std::string&);
template Tensor<double> read_ten<double>(std::istream&, const std::string&);
template Tensor<float> load_ten<float>(const std::string&);
template Tensor<double> load_ten<double>(const std::string&);

}  // namespace lvc
