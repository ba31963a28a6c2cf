#pragma once

#include "tenseg/random.hpp"
#include "tenseg/tensor.hpp"

#include <random>
#include <vector>

namespace tenseg::testing {

inline DenseTensor random_tensor(const Shape& shape, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> data(shape_volume(shape));
    for (auto& v : data) v = normal(rng);
    return DenseTensor(shape, std::move(data));
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
}

/// Zero-based multi-index of flat position i (mode 1 fastest).
inline std::vector<std::size_t> unravel(std::size_t i, const Shape& shape) {
    std::vector<std::size_t> idx(shape.size());
    for (std::size_t k = 0; k < shape.size(); ++k) {
        idx[k] = i % shape[k];
        i /= shape[k];
    }
    return idx;
}

inline double relative_error(const DenseTensor& a, const DenseTensor& b) {
    const double n = frobenius_norm(b);
    const double d = (a.vec() - b.vec()).norm();
    return n == 0.0 ? d : d / n;
}

}  // namespace tenseg::testing
