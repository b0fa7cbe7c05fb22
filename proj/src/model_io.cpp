#include "mrp/model_io.hpp"

#include "mrp/errors.hpp"
#include "mrp/safetensors.hpp"
#include "mrp/serialize.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>

namespace mrp {

namespace {

struct ParsedName {
    std::size_t block;
    std::string layer;
};

// block.{i}.{layer}.weight
std::optional<ParsedName> parse_weight_name(const std::string& name) {
    if (name.rfind("block.", 0) != 0) return std::nullopt;
    const std::size_t idx_start = 6;
    const std::size_t idx_end = name.find('.', idx_start);
    if (idx_end == std::string::npos) return std::nullopt;
    std::size_t block = 0;
    const char* first = name.data() + idx_start;
    const char* last = name.data() + idx_end;
    auto [p, ec] = std::from_chars(first, last, block);
    if (ec != std::errc{} || p != last) return std::nullopt;
    if (name.size() < idx_end + 8 || name.compare(name.size() - 7, 7, ".weight") != 0) {
        return std::nullopt;
    }
    std::string layer = name.substr(idx_end + 1, name.size() - 7 - (idx_end + 1));
    if (layer.empty()) return std::nullopt;
    return ParsedName{block, std::move(layer)};
}

std::map<std::string, std::string> load_remap(const std::string& path) {
    std::map<std::string, std::string> remap;
    if (path.empty()) return remap;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error("remap file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw io_error("remap file '" + path + "' must hold a JSON object of "
                       "source name -> canonical name");
    }
    for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) {
            throw io_error("remap entry '" + k + "' must map to a string");
        }
        remap[k] = v.get<std::string>();
    }
    return remap;
}

std::vector<std::string> split_csv_names(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        if (comma == std::string::npos) {
            if (start < s.size()) out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

} // namespace

BlockStack import_model(const std::string& path, const std::string& remap_path,
                        std::vector<std::string>* warnings) {
    const NamedTensors nt = read_safetensors(path);
    const auto remap = load_remap(remap_path);

    std::map<std::size_t, std::map<std::string, const Matrix*>> found;
    for (const auto& [raw_name, m] : nt.tensors) {
        std::string name = raw_name;
        if (auto it = remap.find(raw_name); it != remap.end()) name = it->second;
        const auto parsed = parse_weight_name(name);
        if (!parsed) {
            if (warnings) warnings->push_back("ignoring unrelated tensor '" + raw_name + "'");
            continue;
        }
        found[parsed->block][parsed->layer] = &m;
    }
    if (found.empty()) {
        throw io_error("'" + path + "' holds no block.{i}.{layer}.weight tensors");
    }

    const std::size_t block_count = found.rbegin()->first + 1;
    for (std::size_t b = 0; b < block_count; ++b) {
        if (!found.count(b)) {
            throw io_error("'" + path + "' is missing block." + std::to_string(b));
        }
    }

    BlockStack model;
    auto meta = [&nt](const std::string& key) -> std::optional<std::string> {
        auto it = nt.metadata.find(key);
        if (it == nt.metadata.end()) return std::nullopt;
        return it->second;
    };
    if (auto v = meta("nonlinearity")) model.act = nonlinearity_from_string(*v);
    if (auto v = meta("residual")) model.residual = (*v == "1" || *v == "true");

    model.blocks.resize(block_count);
    for (std::size_t b = 0; b < block_count; ++b) {
        std::vector<std::string> order;
        if (auto v = meta("block." + std::to_string(b) + ".layers")) {
            order = split_csv_names(*v);
            for (const std::string& layer : order) {
                if (!found[b].count(layer)) {
                    throw io_error("'" + path + "' metadata names layer '" + layer +
                                   "' missing from block." + std::to_string(b));
                }
            }
        } else {
            for (const auto& [layer, _] : found[b]) order.push_back(layer);
        }
        for (const std::string& layer : order) {
            model.blocks[b].layers.emplace_back(layer, *found[b][layer]);
        }
    }

    if (auto v = meta("dim")) {
        model.dim = static_cast<std::size_t>(std::stoull(*v));
    } else {
        model.dim = model.blocks[0].layers[0].weights.cols;
    }

    try {
        model.validate();
        for (const Block& blk : model.blocks) {
            for (const LinearLayer& l : blk.layers) {
                require_finite(l.weights, "block weight '" + l.name + "'");
            }
        }
    } catch (const validation_error& e) {
        throw io_error("'" + path + "' holds an inconsistent model: " + e.what());
    }
    return model;
}

void export_model(const BlockStack& model, const std::string& path, bool apply_masks,
                  const std::string& provenance) {
    NamedTensors nt;
    for (std::size_t b = 0; b < model.block_count(); ++b) {
        std::string order;
        for (const LinearLayer& l : model.blocks[b].layers) {
            if (!order.empty()) order += ",";
            order += l.name;
            nt.tensors.emplace_back("block." + std::to_string(b) + "." + l.name + ".weight",
                                    apply_masks ? l.effective_weights() : l.weights);
        }
        nt.metadata["block." + std::to_string(b) + ".layers"] = order;
    }
    nt.metadata["format"] = "mrp-blockstack-v1";
    nt.metadata["dim"] = std::to_string(model.dim);
    nt.metadata["blocks"] = std::to_string(model.block_count());
    nt.metadata["residual"] = model.residual ? "1" : "0";
    nt.metadata["nonlinearity"] = to_string(model.act);
    if (!provenance.empty()) nt.metadata["provenance"] = provenance;
    write_safetensors(path, nt);
}

CalibrationBatch import_calibration(const std::string& path) {
    const NamedTensors nt = read_safetensors(path);
    const Matrix* m = nt.find("calibration");
    if (!m) {
        throw io_error("'" + path + "' holds no 'calibration' tensor");
    }
    CalibrationBatch calib;
    calib.inputs = *m;
    auto it = nt.metadata.find("provenance");
    calib.provenance = it != nt.metadata.end() ? it->second : path;
    require_finite(calib.inputs, "calibration");
    return calib;
}

void export_calibration(const CalibrationBatch& calib, const std::string& path) {
    NamedTensors nt;
    nt.tensors.emplace_back("calibration", calib.inputs);
    nt.metadata["format"] = "mrp-calibration-v1";
    if (!calib.provenance.empty()) nt.metadata["provenance"] = calib.provenance;
    write_safetensors(path, nt);
}

ActivationSet import_activations(const std::string& path, std::size_t expected_blocks) {
    const NamedTensors nt = read_safetensors(path);
    ActivationSet acts;
    for (std::size_t b = 0; b < expected_blocks; ++b) {
        const std::string name = "block." + std::to_string(b) + ".input";
        const Matrix* m = nt.find(name);
        if (!m) {
            throw io_error("'" + path + "' is missing activation tensor '" + name + "'");
        }
        acts.push_back(*m);
    }
    return acts;
}

void export_activations(const ActivationSet& acts, const std::string& path) {
    NamedTensors nt;
    for (std::size_t b = 0; b < acts.size(); ++b) {
        nt.tensors.emplace_back("block." + std::to_string(b) + ".input", acts[b]);
    }
    nt.metadata["format"] = "mrp-activations-v1";
    write_safetensors(path, nt);
}

void export_masks(const BlockStack& model, const SparsityPlan& plan,
                  const std::string& bin_path, const std::string& json_path) {
    std::string payload;
    std::string entries;
    std::size_t offset = 0;
    for (std::size_t b = 0; b < model.block_count(); ++b) {
        for (const LinearLayer& l : model.blocks[b].layers) {
            const Mask& mask = l.mask;
            const std::size_t nbytes = (mask.size() + 7) / 8;
            std::string bits(nbytes, '\0');
            for (std::size_t k = 0; k < mask.size(); ++k) {
                if (mask.keep[k]) bits[k / 8] |= static_cast<char>(1u << (k % 8));
            }
            payload += bits;

            if (!entries.empty()) entries += ",\n    ";
            const std::size_t pruned = mask.pruned_count();
            entries += "{\"name\": \"block." + std::to_string(b) + "." + l.name + ".weight\"";
            entries += ", \"rows\": " + std::to_string(mask.rows);
            entries += ", \"cols\": " + std::to_string(mask.cols);
            entries += ", \"offset_bytes\": " + std::to_string(offset);
            entries += ", \"pruned\": " + std::to_string(pruned);
            entries += ", \"ratio\": " +
                       format_g9(static_cast<double>(pruned) / static_cast<double>(mask.size()));
            entries += "}";
            offset += nbytes;
        }
    }

    std::string header = "{\n  \"schema_version\": 1,\n";
    header += "  \"bit_order\": \"row-major, least significant bit first, keep=1\",\n";
    header += "  \"plan\": {\n";
    header += "    \"allocator\": \"" + json_escape(plan.allocator) + "\",\n";
    header += "    \"config_hash\": \"" + json_escape(plan.config_hash) + "\",\n";
    header += "    \"granularity\": \"" + json_escape(to_string(plan.granularity)) + "\",\n";
    header += "    \"metric\": \"" + json_escape(plan.metric) + "\"\n";
    header += "  },\n";
    header += "  \"tensors\": [\n    " + entries + "\n  ]\n}\n";

    write_text_file(bin_path, payload);
    write_text_file(json_path, header);
}

} // namespace mrp
