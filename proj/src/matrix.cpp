#include "mrp/matrix.hpp"

#include "mrp/errors.hpp"

#include <cmath>

namespace mrp {

std::string shape_string(const Matrix& m) {
    return "(" + std::to_string(m.rows) + ", " + std::to_string(m.cols) + ")";
}

void require_finite(const Matrix& m, const std::string& name) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (!std::isfinite(m.at(i, j))) {
                throw validation_error("non-finite value in " + name + "[" +
                                       std::to_string(i) + "][" + std::to_string(j) + "]");
            }
        }
    }
}

void require_nonempty(const Matrix& m, const std::string& name) {
    if (m.rows == 0 || m.cols == 0) {
        throw validation_error(name + " must be non-empty, got shape " + shape_string(m));
    }
    if (m.data.size() != m.rows * m.cols) {
        throw validation_error(name + " storage size does not match shape " + shape_string(m));
    }
}

} // namespace mrp
