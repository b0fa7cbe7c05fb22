#pragma once

#include "mrp/model.hpp"

namespace mrp {

// Input matrices feeding each linear layer of one block, given the block
// input: layer k sees act(W_{k-1} * ... ) of the chain before it.
std::vector<Matrix> block_layer_inputs(const Block& b, const Matrix& input, Nonlinearity act);

Matrix block_forward(const Block& b, const Matrix& input, Nonlinearity act, bool residual);

// Per-block input activations with all current masks in effect.
ActivationSet forward_collect(const BlockStack& model, const CalibrationBatch& calib);

// Output of the final block.
Matrix forward_output(const BlockStack& model, const CalibrationBatch& calib);

} // namespace mrp
