#pragma once

#include "mrp/matrix.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mrp {

// Minimal tensor container I/O: 8-byte little-endian header length, JSON
// header, raw row-major payload. Tensors are written as F64; F32 and F64 are
// accepted on read (F32 widens to F64). Other dtypes are rejected.
struct NamedTensors {
    std::vector<std::pair<std::string, Matrix>> tensors; // header order
    std::map<std::string, std::string> metadata;

    const Matrix* find(const std::string& name) const;
};

void write_safetensors(const std::string& path, const NamedTensors& nt);
NamedTensors read_safetensors(const std::string& path);

} // namespace mrp
