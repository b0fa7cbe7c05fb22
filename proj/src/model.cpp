#include "mrp/model.hpp"

#include "mrp/errors.hpp"

#include <numeric>

namespace mrp {

Nonlinearity nonlinearity_from_string(const std::string& s) {
    if (s == "relu") return Nonlinearity::relu;
    if (s == "identity" || s == "linear") return Nonlinearity::identity;
    throw validation_error("unknown nonlinearity '" + s + "' (expected relu or identity)");
}

std::string to_string(Nonlinearity n) {
    return n == Nonlinearity::relu ? "relu" : "identity";
}

std::size_t Mask::pruned_count() const {
    std::size_t pruned = 0;
    for (std::uint8_t k : keep) {
        if (!k) ++pruned;
    }
    return pruned;
}

bool Mask::all_keep() const {
    for (std::uint8_t k : keep) {
        if (!k) return false;
    }
    return true;
}

LinearLayer::LinearLayer(std::string layer_name, Matrix w)
    : name(std::move(layer_name)), weights(std::move(w)), mask(weights.rows, weights.cols) {}

Matrix LinearLayer::effective_weights() const {
    Matrix out = weights;
    for (std::size_t k = 0; k < out.data.size(); ++k) {
        if (!mask.keep[k]) out.data[k] = 0.0;
    }
    return out;
}

std::size_t BlockStack::total_weights() const {
    std::size_t total = 0;
    for (const Block& b : blocks) {
        for (const LinearLayer& l : b.layers) total += l.weights.size();
    }
    return total;
}

std::size_t BlockStack::total_pruned() const {
    std::size_t pruned = 0;
    for (const Block& b : blocks) {
        for (const LinearLayer& l : b.layers) pruned += l.mask.pruned_count();
    }
    return pruned;
}

std::size_t BlockStack::block_weights(std::size_t b) const {
    std::size_t total = 0;
    for (const LinearLayer& l : blocks[b].layers) total += l.weights.size();
    return total;
}

void BlockStack::clear_masks() {
    for (Block& b : blocks) {
        for (LinearLayer& l : b.layers) {
            l.mask = Mask(l.weights.rows, l.weights.cols);
        }
    }
}

void BlockStack::validate() const {
    if (dim == 0) throw validation_error("model width must be positive");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const Block& blk = blocks[b];
        if (blk.layers.empty()) {
            throw validation_error("block " + std::to_string(b) + " has no linear layers");
        }
        std::size_t width = dim;
        for (const LinearLayer& l : blk.layers) {
            require_nonempty(l.weights, "block." + std::to_string(b) + "." + l.name + ".weight");
            if (l.weights.cols != width) {
                throw validation_error("block " + std::to_string(b) + " layer '" + l.name +
                                       "' expects input width " + std::to_string(l.weights.cols) +
                                       " but receives " + std::to_string(width));
            }
            if (l.mask.rows != l.weights.rows || l.mask.cols != l.weights.cols) {
                throw validation_error("mask shape mismatch on block " + std::to_string(b) +
                                       " layer '" + l.name + "'");
            }
            width = l.weights.rows;
        }
        if (width != dim) {
            throw validation_error("block " + std::to_string(b) + " output width " +
                                   std::to_string(width) + " does not match model width " +
                                   std::to_string(dim));
        }
    }
}

} // namespace mrp
