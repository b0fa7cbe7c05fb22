#pragma once

#include "mrp/matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mrp {

enum class Nonlinearity { relu, identity };

Nonlinearity nonlinearity_from_string(const std::string& s);
std::string to_string(Nonlinearity n);

// Keep-bit mask over a weight matrix: 1 = keep, 0 = pruned.
struct Mask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> keep;

    Mask() = default;
    Mask(std::size_t r, std::size_t c) : rows(r), cols(c), keep(r * c, 1) {}

    std::size_t size() const { return rows * cols; }
    std::size_t pruned_count() const;
    bool all_keep() const;

    bool operator==(const Mask& o) const {
        return rows == o.rows && cols == o.cols && keep == o.keep;
    }
};

// A named linear layer. Weights are never modified; pruning only flips mask
// bits, so single-layer probes restore cheaply.
struct LinearLayer {
    std::string name;
    Matrix weights; // C_out x C_in
    Mask mask;      // same shape

    LinearLayer() = default;
    LinearLayer(std::string layer_name, Matrix w);

    // Weights with masked entries read as exactly zero.
    Matrix effective_weights() const;
};

struct Block {
    std::vector<LinearLayer> layers;
};

// Stack of blocks with width d. Block transfer: h = act(W_k * h) through the
// layer chain, plus the block input when residual is set.
struct BlockStack {
    std::vector<Block> blocks;
    std::size_t dim = 0;
    Nonlinearity act = Nonlinearity::relu;
    bool residual = true;

    std::size_t block_count() const { return blocks.size(); }
    std::size_t total_weights() const;
    std::size_t total_pruned() const;
    std::size_t block_weights(std::size_t b) const;
    void clear_masks();

    // Checks dimension compatibility across the stack and mask shapes.
    void validate() const;
};

struct CalibrationBatch {
    Matrix inputs;          // N x d
    std::string provenance; // synthesis seed or source path
};

// Input activations entering each block's first linear layer.
using ActivationSet = std::vector<Matrix>;

} // namespace mrp
