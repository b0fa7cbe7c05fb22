#include "mrp/serialize.hpp"

#include "mrp/errors.hpp"
#include "mrp/model_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace mrp {

std::string format_g9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

namespace {

std::string ratios_json(const std::vector<double>& ratios) {
    std::string out = "[";
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (i) out += ", ";
        out += format_g9(ratios[i]);
    }
    out += "]";
    return out;
}

std::string plan_body(const SparsityPlan& plan, const std::string& indent) {
    std::string out;
    out += indent + "\"allocator\": \"" + json_escape(plan.allocator) + "\",\n";
    out += indent + "\"config_hash\": \"" + json_escape(plan.config_hash) + "\",\n";
    out += indent + "\"granularity\": \"" + json_escape(to_string(plan.granularity)) + "\",\n";
    out += indent + "\"metric\": \"" + json_escape(plan.metric) + "\",\n";
    out += indent + "\"ratios\": " + ratios_json(plan.ratios) + "\n";
    return out;
}

} // namespace

std::string plan_to_json(const SparsityPlan& plan) {
    std::string out = "{\n  \"schema_version\": 1,\n";
    out += plan_body(plan, "  ");
    out += "}\n";
    return out;
}

std::string trace_to_json(const MrpTrace& trace, const SparsityPlan& final_plan) {
    std::string out = "{\n  \"schema_version\": 1,\n";
    out += "  \"achieved_sparsity\": " + format_g9(trace.achieved_sparsity) + ",\n";
    out += "  \"iterations\": [";
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const MrpTrace::Step& s = trace.steps[i];
        out += i ? ",\n    " : "\n    ";
        out += "{\"iteration\": " + std::to_string(s.iteration);
        out += ", \"block\": " + std::to_string(s.block);
        out += ", \"step\": " + format_g9(s.step);
        out += ", \"global_sparsity\": " + format_g9(s.global_sparsity);
        out += ", \"redundancy\": " + ratios_json(s.redundancy) + "}";
    }
    out += trace.steps.empty() ? "],\n" : "\n  ],\n";
    out += "  \"plan\": {\n";
    out += plan_body(final_plan, "    ");
    out += "  }\n}\n";
    return out;
}

std::string redundancy_to_json(const RedundancyProfile& profile) {
    std::string out = "{\n  \"schema_version\": 1,\n";
    out += "  \"metric\": \"" + json_escape(profile.metric) + "\",\n";
    out += "  \"outlier_multiplier\": " + format_g9(profile.outlier_multiplier) + ",\n";
    out += "  \"values\": {";
    for (std::size_t i = 0; i < profile.values.size(); ++i) {
        out += i ? ", " : "";
        out += "\"" + std::to_string(i) + "\": " + format_g9(profile.values[i]);
    }
    out += "}\n}\n";
    return out;
}

std::string profile_to_csv(const std::vector<double>& values, const std::string& value_header) {
    std::string out = "block," + value_header + "\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += std::to_string(i) + "," + format_g9(values[i]) + "\n";
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open '" + path + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw io_error("failed writing '" + path + "'");
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open '" + path + "'");
    }
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

void export_report(const BlockStack& model, const SparsityPlan& plan, const MrpTrace& trace,
                   const RedundancyProfile& lrl, const LpsProfile& lps,
                   const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const std::filesystem::path dir(out_dir);
    write_text_file((dir / "plan.json").string(), plan_to_json(plan));
    write_text_file((dir / "trace.json").string(), trace_to_json(trace, plan));
    write_text_file((dir / "lrl.csv").string(), profile_to_csv(lrl.values, "redundancy"));
    write_text_file((dir / "lps.csv").string(), profile_to_csv(lps.values, "sensitivity"));
    export_masks(model, plan, (dir / "masks.bin").string(), (dir / "masks.json").string());
}

} // namespace mrp
