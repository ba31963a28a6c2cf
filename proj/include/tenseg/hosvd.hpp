#pragma once

// Truncated higher-order SVD.

#include "tenseg/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tenseg {

struct HOSVDModel {
    DenseTensor core;
    /// n_k × R_k, orthonormal columns.
    std::vector<Matrix> factors;

    [[nodiscard]] DenseTensor reconstruct() const {
        DenseTensor out = core;
        for (std::size_t k = 0; k < factors.size(); ++k) out = mode_product(out, factors[k], k + 1);
        return out;
    }
};

namespace detail {

/// X_(k) X_(k)ᵀ without materializing the unfolding.
inline Matrix mode_gram(const DenseTensor& t, std::size_t mode) {
    const auto [left, right] = split_extents(t.shape(), mode);
    const auto n = static_cast<Eigen::Index>(t.extent(mode));
    Matrix gram = Matrix::Zero(n, n);
    if (left == 1) {
        Eigen::Map<const Matrix> x(t.data().data(), n, static_cast<Eigen::Index>(right));
        gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
    } else {
        const auto L = static_cast<Eigen::Index>(left);
        for (std::size_t r = 0; r < right; ++r) {
            Eigen::Map<const Matrix> block(t.data().data() + r * left * static_cast<std::size_t>(n), L, n);
            gram.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
        }
    }
    return gram.selfadjointView<Eigen::Lower>();
}

/// Leading `count` left singular vectors of X_(mode), largest first, each with
/// its largest-magnitude entry nonnegative.
inline Matrix leading_left_singular_vectors(const DenseTensor& t, std::size_t mode,
                                            std::size_t count) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(mode_gram(t, mode));
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("hosvd: eigendecomposition failed on mode " + std::to_string(mode));
    const Eigen::Index n = eig.eigenvectors().rows();
    const auto c = static_cast<Eigen::Index>(count);
    Matrix u(n, c);
    for (Eigen::Index j = 0; j < c; ++j) {
        u.col(j) = eig.eigenvectors().col(n - 1 - j);
        Eigen::Index idx = 0;
        u.col(j).cwiseAbs().maxCoeff(&idx);
        if (u(idx, j) < 0.0) u.col(j) *= -1.0;
    }
    return u;
}

}  // namespace detail

/// Truncated HOSVD with multilinear ranks `ranks` (one per mode, 1 <= R_k <= n_k).
inline HOSVDModel hosvd(const DenseTensor& t, std::span<const std::size_t> ranks) {
    const std::size_t K = t.order();
    if (ranks.size() != K)
        throw std::invalid_argument("hosvd: expected " + std::to_string(K) + " ranks");
    for (std::size_t k = 0; k < K; ++k)
        if (ranks[k] < 1 || ranks[k] > t.shape()[k])
            throw std::invalid_argument("hosvd: rank " + std::to_string(ranks[k]) + " invalid for mode " +
                                        std::to_string(k + 1) + " of extent " +
                                        std::to_string(t.shape()[k]));
    if (has_non_finite(t)) throw std::invalid_argument("hosvd: tensor contains NaN or Inf");

    HOSVDModel model;
    model.factors.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        model.factors[k] = detail::leading_left_singular_vectors(t, k + 1, ranks[k]);

    // project the most-shrinking modes first
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return static_cast<double>(ranks[a]) / static_cast<double>(t.shape()[a]) <
               static_cast<double>(ranks[b]) / static_cast<double>(t.shape()[b]);
    });
    DenseTensor core = t;
    for (std::size_t k : order) core = mode_product(core, model.factors[k].transpose(), k + 1);
    model.core = std::move(core);
    return model;
}

inline HOSVDModel hosvd(const DenseTensor& t, std::initializer_list<std::size_t> ranks) {
    return hosvd(t, std::span<const std::size_t>(ranks.begin(), ranks.size()));
}

/// R_time × T series: row j is ||core slice j along the time mode||_F · U_time[:,j]ᵀ.
inline Matrix time_series_from_hosvd(const HOSVDModel& model, std::size_t time_mode) {
    if (time_mode < 1 || time_mode > model.factors.size())
        throw std::out_of_range("time_series_from_hosvd: time mode out of range");
    const Matrix& u = model.factors[time_mode - 1];
    const Matrix core_unfolded = unfold(model.core, time_mode);
    const Vector scale = core_unfolded.rowwise().norm();
    return scale.asDiagonal() * u.transpose();
}

}  // namespace tenseg
