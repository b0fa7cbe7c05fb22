#include "mrp/propagation.hpp"

#include "mrp/errors.hpp"
#include "mrp/kernels.hpp"

namespace mrp {

namespace {

void apply_nonlinearity(Matrix& m, Nonlinearity act) {
    if (act == Nonlinearity::relu) kernels::relu_inplace(m);
}

void require_calib(const BlockStack& model, const CalibrationBatch& calib) {
    require_nonempty(calib.inputs, "calibration");
    require_finite(calib.inputs, "calibration");
    if (calib.inputs.cols != model.dim) {
        throw validation_error("calibration width " + std::to_string(calib.inputs.cols) +
                               " does not match model width " + std::to_string(model.dim));
    }
}

} // namespace

std::vector<Matrix> block_layer_inputs(const Block& b, const Matrix& input, Nonlinearity act) {
    std::vector<Matrix> inputs;
    inputs.reserve(b.layers.size());
    Matrix h = input;
    for (std::size_t k = 0; k < b.layers.size(); ++k) {
        inputs.push_back(h);
        if (k + 1 < b.layers.size()) {
            h = kernels::matmul_masked_wt(h, b.layers[k].weights, b.layers[k].mask.keep.data());
            apply_nonlinearity(h, act);
        }
    }
    return inputs;
}

Matrix block_forward(const Block& b, const Matrix& input, Nonlinearity act, bool residual) {
    Matrix h = input;
    for (const LinearLayer& l : b.layers) {
        h = kernels::matmul_masked_wt(h, l.weights, l.mask.keep.data());
        apply_nonlinearity(h, act);
    }
    return residual ? kernels::add(input, h) : h;
}

ActivationSet forward_collect(const BlockStack& model, const CalibrationBatch& calib) {
    require_calib(model, calib);
    ActivationSet acts;
    acts.reserve(model.blocks.size());
    Matrix h = calib.inputs;
    for (const Block& b : model.blocks) {
        acts.push_back(h);
        h = block_forward(b, h, model.act, model.residual);
    }
    return acts;
}

Matrix forward_output(const BlockStack& model, const CalibrationBatch& calib) {
    require_calib(model, calib);
    Matrix h = calib.inputs;
    for (const Block& b : model.blocks) {
        h = block_forward(b, h, model.act, model.residual);
    }
    return h;
}

} // namespace mrp
