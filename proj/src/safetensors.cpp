#include "mrp/safetensors.hpp"

#include "mrp/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace mrp {

using nlohmann::json;

const Matrix* NamedTensors::find(const std::string& name) const {
    for (const auto& [n, m] : tensors) {
        if (n == name) return &m;
    }
    return nullptr;
}

void write_safetensors(const std::string& path, const NamedTensors& nt) {
    // Offsets follow lexicographic tensor order, matching the sorted-key
    // serialization of the header object.
    std::vector<const std::pair<std::string, Matrix>*> ordered;
    ordered.reserve(nt.tensors.size());
    for (const auto& t : nt.tensors) ordered.push_back(&t);
    std::sort(ordered.begin(), ordered.end(),
              [](const auto* a, const auto* b) { return a->first < b->first; });

    json header = json::object();
    if (!nt.metadata.empty()) {
        json meta = json::object();
        for (const auto& [k, v] : nt.metadata) meta[k] = v;
        header["__metadata__"] = meta;
    }

    std::uint64_t offset = 0;
    for (const auto* t : ordered) {
        const std::uint64_t nbytes = t->second.size() * sizeof(double);
        header[t->first] = {
            {"dtype", "F64"},
            {"shape", {t->second.rows, t->second.cols}},
            {"data_offsets", {offset, offset + nbytes}},
        };
        offset += nbytes;
    }

    std::string header_str = header.dump();
    while (header_str.size() % 8 != 0) header_str.push_back(' ');
    const std::uint64_t header_len = header_str.size();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open '" + path + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto* t : ordered) {
        out.write(reinterpret_cast<const char*>(t->second.data.data()),
                  static_cast<std::streamsize>(t->second.size() * sizeof(double)));
    }
    if (!out) {
        throw io_error("failed writing tensor data to '" + path + "'");
    }
}

NamedTensors read_safetensors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open '" + path + "'");
    }
    in.seekg(0, std::ios::end);
    const std::uint64_t file_size = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0, std::ios::beg);

    std::uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
    if (!in || header_len + 8 > file_size) {
        throw io_error("'" + path + "' is not a tensor container (bad header length)");
    }
    std::string header_str(header_len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(header_len));
    if (!in) {
        throw io_error("failed reading header of '" + path + "'");
    }

    json header;
    try {
        header = json::parse(header_str);
    } catch (const json::parse_error& e) {
        throw io_error("'" + path + "' has a malformed JSON header: " + e.what());
    }

    NamedTensors nt;
    const std::uint64_t data_start = 8 + header_len;
    for (const auto& [name, info] : header.items()) {
        if (name == "__metadata__") {
            for (const auto& [k, v] : info.items()) {
                nt.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
            }
            continue;
        }
        const std::string dtype = info.value("dtype", "");
        if (dtype != "F64" && dtype != "F32") {
            throw io_error("tensor '" + name + "' in '" + path + "' has unsupported dtype '" +
                           dtype + "' (expected F32 or F64)");
        }
        const auto shape = info.value("shape", std::vector<std::uint64_t>{});
        if (shape.size() != 2 || shape[0] == 0 || shape[1] == 0) {
            throw io_error("tensor '" + name + "' must be a non-empty 2-D tensor");
        }
        const auto offsets = info.value("data_offsets", std::vector<std::uint64_t>{});
        if (offsets.size() != 2 || offsets[1] < offsets[0] ||
            data_start + offsets[1] > file_size) {
            throw io_error("tensor '" + name + "' has data offsets outside the file");
        }
        const std::uint64_t count = shape[0] * shape[1];
        const std::uint64_t elem = dtype == "F64" ? 8 : 4;
        if (offsets[1] - offsets[0] != count * elem) {
            throw io_error("tensor '" + name + "' payload size does not match its shape");
        }

        Matrix m(shape[0], shape[1]);
        in.seekg(static_cast<std::streamoff>(data_start + offsets[0]));
        if (dtype == "F64") {
            in.read(reinterpret_cast<char*>(m.data.data()),
                    static_cast<std::streamsize>(count * 8));
        } else {
            std::vector<float> tmp(count);
            in.read(reinterpret_cast<char*>(tmp.data()),
                    static_cast<std::streamsize>(count * 4));
            for (std::uint64_t k = 0; k < count; ++k) m.data[k] = static_cast<double>(tmp[k]);
        }
        if (!in) {
            throw io_error("failed reading tensor '" + name + "' from '" + path + "'");
        }
        nt.tensors.emplace_back(name, std::move(m));
    }
    return nt;
}

} // namespace mrp
