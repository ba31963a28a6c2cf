#pragma once

// Dense N-mode tensors stored mode-1 fastest, and the mode-wise algebra on them.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tenseg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Shape = std::vector<std::size_t>;

inline std::size_t shape_volume(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

/// N-mode real array. Flat storage has mode 1 varying fastest, so the flat
/// buffer is vec(X).
class DenseTensor {
public:
    DenseTensor() = default;

    explicit DenseTensor(Shape shape) : shape_(std::move(shape)) {
        validate_shape(shape_);
        data_.assign(shape_volume(shape_), 0.0);
    }

    DenseTensor(Shape shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        validate_shape(shape_);
        if (data_.size() != shape_volume(shape_))
            throw std::invalid_argument("DenseTensor: data length " + std::to_string(data_.size()) +
                                        " does not match shape volume " +
                                        std::to_string(shape_volume(shape_)));
    }

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t order() const noexcept { return shape_.size(); }
    [[nodiscard]] std::size_t extent(std::size_t mode) const { return shape_.at(mode - 1); }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

    /// Zero-based multi-index access.
    [[nodiscard]] double operator()(std::span<const std::size_t> index) const {
        return data_[linear_index(index)];
    }
    double& operator()(std::span<const std::size_t> index) { return data_[linear_index(index)]; }

    [[nodiscard]] double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    [[nodiscard]] std::size_t linear_index(std::span<const std::size_t> index) const {
        if (index.size() != shape_.size())
            throw std::out_of_range("DenseTensor: index arity does not match tensor order");
        std::size_t flat = 0;
        std::size_t stride = 1;
        for (std::size_t k = 0; k < shape_.size(); ++k) {
            if (index[k] >= shape_[k]) throw std::out_of_range("DenseTensor: index out of range");
            flat += index[k] * stride;
            stride *= shape_[k];
        }
        return flat;
    }

    /// vec(X) as an Eigen view.
    [[nodiscard]] Eigen::Map<const Vector> vec() const {
        return {data_.data(), static_cast<Eigen::Index>(data_.size())};
    }
    [[nodiscard]] Eigen::Map<Vector> vec() {
        return {data_.data(), static_cast<Eigen::Index>(data_.size())};
    }

    DenseTensor& operator*=(double c) {
        for (double& v : data_) v *= c;
        return *this;
    }
    friend DenseTensor operator*(double c, DenseTensor t) { return t *= c; }

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    static void validate_shape(const Shape& shape) {
        if (shape.empty()) throw std::invalid_argument("DenseTensor: shape needs at least one mode");
        for (std::size_t n : shape)
            if (n == 0) throw std::invalid_argument("DenseTensor: mode extents must be positive");
    }

    Shape shape_;
    std::vector<double> data_;
};

namespace detail {

inline void check_mode(const Shape& shape, std::size_t mode) {
    if (mode < 1 || mode > shape.size())
        throw std::out_of_range("mode " + std::to_string(mode) + " outside 1.." +
                                std::to_string(shape.size()));
}

/// Product of extents strictly before / after `mode` (1-based).
inline std::pair<std::size_t, std::size_t> split_extents(const Shape& shape, std::size_t mode) {
    std::size_t left = 1;
    std::size_t right = 1;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (k + 1 < mode) left *= shape[k];
        if (k + 1 > mode) right *= shape[k];
    }
    return {left, right};
}

}  // namespace detail

/// Mode-k matricization. Column j enumerates the remaining modes with the
/// lowest one varying fastest.
inline Matrix unfold(const DenseTensor& t, std::size_t mode) {
    detail::check_mode(t.shape(), mode);
    const auto [left, right] = detail::split_extents(t.shape(), mode);
    const std::size_t n = t.extent(mode);
    Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(left * right));
    const double* src = t.data().data();
    for (std::size_t r = 0; r < right; ++r)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < left; ++a)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a + left * r)) =
                    src[a + left * (i + n * r)];
    return out;
}

inline DenseTensor fold(const Matrix& mat, std::size_t mode, const Shape& shape) {
    detail::check_mode(shape, mode);
    const std::size_t n = shape[mode - 1];
    const std::size_t volume = shape_volume(shape);
    if (static_cast<std::size_t>(mat.rows()) != n ||
        static_cast<std::size_t>(mat.cols()) * n != volume)
        throw std::invalid_argument("fold: matrix dimensions inconsistent with shape and mode");
    const auto [left, right] = detail::split_extents(shape, mode);
    DenseTensor out(shape);
    double* dst = out.data().data();
    for (std::size_t r = 0; r < right; ++r)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < left; ++a)
                dst[a + left * (i + n * r)] =
                    mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a + left * r));
    return out;
}

/// Y = X ×_k M, i.e. Y_(k) = M · X_(k).
inline DenseTensor mode_product(const DenseTensor& t, const Matrix& mat, std::size_t mode) {
    detail::check_mode(t.shape(), mode);
    const std::size_t n = t.extent(mode);
    if (static_cast<std::size_t>(mat.cols()) != n)
        throw std::invalid_argument("mode_product: matrix has " + std::to_string(mat.cols()) +
                                    " columns, mode extent is " + std::to_string(n));
    const auto [left, right] = detail::split_extents(t.shape(), mode);
    const auto rows = static_cast<std::size_t>(mat.rows());
    Shape out_shape = t.shape();
    out_shape[mode - 1] = rows;
    DenseTensor out(out_shape);

    const auto L = static_cast<Eigen::Index>(left);
    const auto N = static_cast<Eigen::Index>(n);
    const auto J = static_cast<Eigen::Index>(rows);
    if (left == 1) {
        Eigen::Map<const Matrix> src(t.data().data(), N, static_cast<Eigen::Index>(right));
        Eigen::Map<Matrix> dst(out.data().data(), J, static_cast<Eigen::Index>(right));
        dst.noalias() = mat * src;
        return out;
    }
    const Matrix mat_t = mat.transpose();
    for (std::size_t r = 0; r < right; ++r) {
        Eigen::Map<const Matrix> src(t.data().data() + r * left * n, L, N);
        Eigen::Map<Matrix> dst(out.data().data() + r * left * rows, L, J);
        dst.noalias() = src * mat_t;
    }
    return out;
}

inline double frobenius_norm(const DenseTensor& t) { return t.vec().norm(); }

/// Outer product v_1 ∘ … ∘ v_K.
inline DenseTensor rank1_outer(std::span<const Vector> vectors) {
    if (vectors.empty()) throw std::invalid_argument("rank1_outer: need at least one vector");
    Shape shape;
    shape.reserve(vectors.size());
    for (const auto& v : vectors) {
        if (v.size() == 0) throw std::invalid_argument("rank1_outer: empty vector");
        shape.push_back(static_cast<std::size_t>(v.size()));
    }
    std::vector<double> data(vectors.front().data(), vectors.front().data() + vectors.front().size());
    for (std::size_t k = 1; k < vectors.size(); ++k) {
        const auto& v = vectors[k];
        std::vector<double> next;
        next.reserve(data.size() * static_cast<std::size_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i)
            for (double x : data) next.push_back(x * v[i]);
        data = std::move(next);
    }
    return DenseTensor(std::move(shape), std::move(data));
}

inline DenseTensor rank1_outer(std::initializer_list<Vector> vectors) {
    return rank1_outer(std::span<const Vector>(vectors.begin(), vectors.size()));
}

inline bool has_non_finite(const DenseTensor& t) {
    for (double v : t.data())
        if (!std::isfinite(v)) return true;
    return false;
}

}  // namespace tenseg
