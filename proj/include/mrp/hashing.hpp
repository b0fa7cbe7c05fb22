#pragma once

#include <cstdint>
#include <string>

namespace mrp {

std::uint64_t fnv1a64(const std::string& s);

// 16 lowercase hex digits of fnv1a64(s); used for config provenance hashes.
std::string fnv1a_hex(const std::string& s);

} // namespace mrp
