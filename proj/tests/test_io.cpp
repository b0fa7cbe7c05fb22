#include "mrp/errors.hpp"
#include "mrp/hashing.hpp"
#include "mrp/model_io.hpp"
#include "mrp/pruning.hpp"
#include "mrp/safetensors.hpp"
#include "mrp/serialize.hpp"
#include "mrp/synthetic.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>

using namespace mrp;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "mrp-io-tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("safetensors round-trips tensors and metadata") {
    NamedTensors nt;
    nt.tensors.emplace_back("b", mrp_test::random_matrix(1, 3, 5));
    nt.tensors.emplace_back("a", mrp_test::random_matrix(2, 2, 2));
    nt.metadata["note"] = "fixture";

    const auto path = temp_file("roundtrip.safetensors");
    write_safetensors(path.string(), nt);
    const NamedTensors back = read_safetensors(path.string());

    REQUIRE(back.tensors.size() == 2);
    CHECK(*back.find("a") == *nt.find("a"));
    CHECK(*back.find("b") == *nt.find("b"));
    CHECK(back.metadata.at("note") == "fixture");
}

TEST_CASE("safetensors reads F32 payloads and rejects other dtypes") {
    // Hand-build a container holding one F32 and one F16 tensor.
    auto build = [](const std::string& dtype) {
        std::string header = R"({"t":{"dtype":")" + dtype +
                             R"(","shape":[1,2],"data_offsets":[0,4]}})";
        while (header.size() % 8 != 0) header.push_back(' ');
        std::string blob;
        const std::uint64_t len = header.size();
        blob.append(reinterpret_cast<const char*>(&len), 8);
        blob += header;
        const float payload[2] = {1.5f, -2.0f};
        blob.append(reinterpret_cast<const char*>(payload), 4); // only 2 bytes/elem for F16
        return blob;
    };

    const auto f32_path = temp_file("f32.safetensors");
    {
        std::string header = R"({"t":{"dtype":"F32","shape":[1,2],"data_offsets":[0,8]}})";
        while (header.size() % 8 != 0) header.push_back(' ');
        std::ofstream out(f32_path, std::ios::binary);
        const std::uint64_t len = header.size();
        out.write(reinterpret_cast<const char*>(&len), 8);
        out.write(header.data(), static_cast<std::streamsize>(header.size()));
        const float payload[2] = {1.5f, -2.0f};
        out.write(reinterpret_cast<const char*>(payload), 8);
    }
    const NamedTensors f32 = read_safetensors(f32_path.string());
    CHECK(f32.find("t")->data == std::vector<double>{1.5, -2.0});

    const auto f16_path = temp_file("f16.safetensors");
    {
        std::ofstream out(f16_path, std::ios::binary);
        const std::string blob = build("F16");
        out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    }
    CHECK_THROWS_WITH_AS(read_safetensors(f16_path.string()), doctest::Contains("F16"),
                         io_error);
}

TEST_CASE("model export/import round-trips bit-exactly") {
    BlockStack model = gen_model(3, 3, 16, OutlierSpec::uniform(3, 0.1, 5.0));
    model.residual = false;
    model.act = Nonlinearity::identity;

    const auto path = temp_file("model.safetensors");
    export_model(model, path.string());
    const BlockStack back = import_model(path.string());

    CHECK(back.block_count() == 3);
    CHECK(back.dim == 16);
    CHECK(back.residual == false);
    CHECK(back.act == Nonlinearity::identity);
    for (std::size_t b = 0; b < 3; ++b) {
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(back.blocks[b].layers[k].name == model.blocks[b].layers[k].name);
            CHECK(back.blocks[b].layers[k].weights == model.blocks[b].layers[k].weights);
            CHECK(back.blocks[b].layers[k].mask.all_keep());
        }
    }
}

TEST_CASE("masked export bakes zeros into the weights") {
    BlockStack model = gen_model(4, 1, 8, OutlierSpec{});
    model.blocks[0].layers[0].mask.keep[3] = 0;
    const auto path = temp_file("masked.safetensors");
    export_model(model, path.string(), /*apply_masks=*/true);
    const BlockStack back = import_model(path.string());
    CHECK(back.blocks[0].layers[0].weights.data[3] == 0.0);
}

TEST_CASE("import names the missing block") {
    NamedTensors nt;
    nt.tensors.emplace_back("block.0.fc1.weight", Matrix(4, 4, 1.0));
    nt.tensors.emplace_back("block.2.fc1.weight", Matrix(4, 4, 1.0));
    const auto path = temp_file("gap.safetensors");
    write_safetensors(path.string(), nt);
    CHECK_THROWS_WITH_AS(import_model(path.string()), doctest::Contains("block.1"), io_error);
}

TEST_CASE("unrelated tensors are ignored with a warning") {
    NamedTensors nt;
    nt.tensors.emplace_back("block.0.fc1.weight", Matrix(4, 4, 1.0));
    nt.tensors.emplace_back("optimizer.state", Matrix(2, 2, 0.0));
    const auto path = temp_file("extra.safetensors");
    write_safetensors(path.string(), nt);

    std::vector<std::string> warnings;
    const BlockStack model = import_model(path.string(), "", &warnings);
    CHECK(model.block_count() == 1);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("optimizer.state") != std::string::npos);
}

TEST_CASE("import rejects inconsistent shapes") {
    NamedTensors nt;
    nt.tensors.emplace_back("block.0.fc1.weight", Matrix(4, 4, 1.0));
    nt.tensors.emplace_back("block.0.fc2.weight", Matrix(4, 8, 1.0)); // wrong C_in
    const auto path = temp_file("badshape.safetensors");
    write_safetensors(path.string(), nt);
    CHECK_THROWS_AS(import_model(path.string()), io_error);
}

TEST_CASE("remap file renames foreign tensors onto the canonical scheme") {
    NamedTensors nt;
    nt.tensors.emplace_back("h.0.up.w", mrp_test::random_matrix(5, 4, 4));
    nt.tensors.emplace_back("h.0.down.w", mrp_test::random_matrix(6, 4, 4));
    const auto path = temp_file("foreign.safetensors");
    write_safetensors(path.string(), nt);

    const auto remap_path = temp_file("remap.json");
    write_text_file(remap_path.string(),
                    R"({"h.0.up.w": "block.0.fc1.weight", "h.0.down.w": "block.0.fc2.weight"})");

    const BlockStack model = import_model(path.string(), remap_path.string());
    CHECK(model.block_count() == 1);
    CHECK(model.blocks[0].layers[0].weights == *nt.find("h.0.up.w"));
}

TEST_CASE("calibration and activation sets round-trip") {
    const CalibrationBatch calib = gen_calibration(7, 8, 16, {});
    const auto cpath = temp_file("calib.safetensors");
    export_calibration(calib, cpath.string());
    const CalibrationBatch cback = import_calibration(cpath.string());
    CHECK(cback.inputs == calib.inputs);
    CHECK(cback.provenance == calib.provenance);

    ActivationSet acts;
    acts.push_back(mrp_test::random_matrix(8, 4, 16));
    acts.push_back(mrp_test::random_matrix(9, 4, 16));
    const auto apath = temp_file("acts.safetensors");
    export_activations(acts, apath.string());
    const ActivationSet aback = import_activations(apath.string(), 2);
    CHECK(aback[0] == acts[0]);
    CHECK(aback[1] == acts[1]);
    CHECK_THROWS_AS(import_activations(apath.string(), 3), io_error);
}

TEST_CASE("mask payload uses LSB-first row-major bits") {
    BlockStack model = gen_model(10, 1, 8, OutlierSpec{});
    // Prune flat indices 0 and 9 of fc1: byte 0 -> 0b11111110, byte 1 -> 0b11111101.
    model.blocks[0].layers[0].mask.keep[0] = 0;
    model.blocks[0].layers[0].mask.keep[9] = 0;

    SparsityPlan plan = allocate_uniform(1, 0.0);
    const auto bin = temp_file("masks.bin");
    const auto json = temp_file("masks.json");
    export_masks(model, plan, bin.string(), json.string());

    const std::string payload = read_text_file(bin.string());
    REQUIRE(payload.size() == 2 * 8); // two 8x8 layers, 8 bytes each
    CHECK(static_cast<unsigned char>(payload[0]) == 0xFE);
    CHECK(static_cast<unsigned char>(payload[1]) == 0xFD);
    CHECK(static_cast<unsigned char>(payload[2]) == 0xFF);

    const std::string header = read_text_file(json.string());
    CHECK(header.find("\"offset_bytes\": 8") != std::string::npos);
    CHECK(header.find("\"pruned\": 2") != std::string::npos);
}

TEST_CASE("report JSON/CSV writers are deterministic with 9-digit floats") {
    SparsityPlan plan;
    plan.ratios = {0.123456789123, 0.7};
    plan.metric = "wanda";
    plan.allocator = "mrp";
    plan.config_hash = fnv1a_hex("test");

    const std::string a = plan_to_json(plan);
    CHECK(a == plan_to_json(plan));
    CHECK(a.find("0.123456789") != std::string::npos);
    CHECK(a.find("0.1234567891") == std::string::npos);

    MrpTrace trace;
    const std::string t = trace_to_json(trace, plan);
    CHECK(t.find("\"iterations\": []") != std::string::npos);
    CHECK(t.find("\"allocator\": \"mrp\"") != std::string::npos);

    const std::string csv = profile_to_csv({0.5, 0.25, 0.125}, "redundancy");
    CHECK(csv == "block,redundancy\n0,0.5\n1,0.25\n2,0.125\n");

    RedundancyProfile lrl{{0.9, 0.8}, "wanda", 5.0};
    const std::string j = redundancy_to_json(lrl);
    CHECK(j.find("\"0\": 0.9") != std::string::npos);
    CHECK(j.find("\"1\": 0.8") != std::string::npos);
}

TEST_CASE("export_report writes the full artifact set byte-identically") {
    BlockStack model = gen_model(11, 2, 8, OutlierSpec{});
    SparsityPlan plan = allocate_uniform(2, 0.5);
    MrpTrace trace;
    trace.achieved_sparsity = 0.5;
    RedundancyProfile lrl{{0.9, 0.8}, "magnitude", 5.0};
    LpsProfile lps{{0.1, 0.2}, "magnitude", 0.5, "output-distance"};

    const auto dir_a = temp_file("report-a");
    const auto dir_b = temp_file("report-b");
    export_report(model, plan, trace, lrl, lps, dir_a.string());
    export_report(model, plan, trace, lrl, lps, dir_b.string());

    for (const char* name : {"plan.json", "trace.json", "lrl.csv", "lps.csv", "masks.json",
                             "masks.bin"}) {
        CAPTURE(name);
        const std::string a = read_text_file((dir_a / name).string());
        const std::string b = read_text_file((dir_b / name).string());
        CHECK(a == b);
        CHECK(!a.empty());
    }

    const std::string lrl_csv = read_text_file((dir_a / "lrl.csv").string());
    CHECK(std::count(lrl_csv.begin(), lrl_csv.end(), '\n') == 3); // header + 2 rows
}

TEST_CASE("config hashes are stable") {
    CHECK(fnv1a_hex("abc") == fnv1a_hex("abc"));
    CHECK(fnv1a_hex("abc") != fnv1a_hex("abd"));
    CHECK(fnv1a_hex("abc").size() == 16);
}

TEST_CASE("io errors carry the path") {
    CHECK_THROWS_WITH_AS(read_safetensors("/nonexistent/file.safetensors"),
                         doctest::Contains("/nonexistent/file.safetensors"), io_error);
    CHECK_THROWS_AS(import_calibration("/nonexistent/calib.safetensors"), io_error);
}

TEST_CASE("malformed containers are rejected, not crashed on") {
    const auto write_raw = [](const std::string& name, const std::string& bytes) {
        const auto p = temp_file(name);
        std::ofstream out(p, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        return p.string();
    };

    // header length pointing past the end of the file
    {
        std::string blob;
        const std::uint64_t len = 1 << 20;
        blob.append(reinterpret_cast<const char*>(&len), 8);
        blob += "{}";
        CHECK_THROWS_AS(read_safetensors(write_raw("hdr-overrun.safetensors", blob)), io_error);
    }
    // tensor payload truncated relative to its offsets
    {
        std::string header = R"({"t":{"dtype":"F64","shape":[2,2],"data_offsets":[0,32]}})";
        while (header.size() % 8 != 0) header.push_back(' ');
        std::string blob;
        const std::uint64_t len = header.size();
        blob.append(reinterpret_cast<const char*>(&len), 8);
        blob += header;
        blob.append(16, '\0'); // only half the payload
        CHECK_THROWS_AS(read_safetensors(write_raw("truncated.safetensors", blob)), io_error);
    }
    // header that is not JSON at all
    {
        std::string header = "this is not json";
        while (header.size() % 8 != 0) header.push_back(' ');
        std::string blob;
        const std::uint64_t len = header.size();
        blob.append(reinterpret_cast<const char*>(&len), 8);
        blob += header;
        CHECK_THROWS_AS(read_safetensors(write_raw("notjson.safetensors", blob)), io_error);
    }
    // offsets inconsistent with the declared shape
    {
        std::string header = R"({"t":{"dtype":"F64","shape":[2,2],"data_offsets":[0,16]}})";
        while (header.size() % 8 != 0) header.push_back(' ');
        std::string blob;
        const std::uint64_t len = header.size();
        blob.append(reinterpret_cast<const char*>(&len), 8);
        blob += header;
        blob.append(16, '\0');
        CHECK_THROWS_AS(read_safetensors(write_raw("shapemismatch.safetensors", blob)), io_error);
    }
}

TEST_CASE("tensors with unparsable block indices count as unrelated") {
    NamedTensors nt;
    nt.tensors.emplace_back("block.0.fc1.weight", Matrix(4, 4, 1.0));
    nt.tensors.emplace_back("block.x.fc1.weight", Matrix(4, 4, 1.0));
    nt.tensors.emplace_back("block.1.fc1", Matrix(4, 4, 1.0)); // missing .weight
    const auto path = temp_file("oddnames.safetensors");
    write_safetensors(path.string(), nt);

    std::vector<std::string> warnings;
    const BlockStack model = import_model(path.string(), "", &warnings);
    CHECK(model.block_count() == 1);
    CHECK(warnings.size() == 2);
}
