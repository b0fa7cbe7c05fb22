#pragma once

#include "mrp/allocation.hpp"
#include "mrp/model.hpp"

#include <string>
#include <vector>

namespace mrp {

// Tensor naming scheme: block.{i}.{layer}.weight. A remap file (JSON object
// of source name -> canonical name) adapts foreign checkpoints. Unrelated
// tensors are skipped and reported through `warnings`.
BlockStack import_model(const std::string& path, const std::string& remap_path = "",
                        std::vector<std::string>* warnings = nullptr);

// apply_masks bakes pruned entries to zero in the written weights.
void export_model(const BlockStack& model, const std::string& path, bool apply_masks = false,
                  const std::string& provenance = "");

CalibrationBatch import_calibration(const std::string& path);
void export_calibration(const CalibrationBatch& calib, const std::string& path);

// One tensor per block, named block.{i}.input.
ActivationSet import_activations(const std::string& path, std::size_t expected_blocks);
void export_activations(const ActivationSet& acts, const std::string& path);

// Compact keep-bit payload (row-major, LSB-first within each byte, each
// tensor padded to a whole byte) plus a JSON index of shapes and offsets.
void export_masks(const BlockStack& model, const SparsityPlan& plan,
                  const std::string& bin_path, const std::string& json_path);

} // namespace mrp
