#pragma once

// CP decomposition by alternating least squares.

#include "tenseg/random.hpp"
#include "tenseg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tenseg {

struct AlsConfig {
    std::size_t rank = 1;
    std::size_t max_iters = 100;
    /// Stop when |fit_k - fit_{k-1}| < rel_tol, fit = ||X - Xhat|| / ||X||.
    double rel_tol = 1e-6;
    std::uint64_t seed = 0;
    std::size_t restarts = 1;

    void validate() const {
        if (rank < 1) throw std::invalid_argument("AlsConfig: rank must be >= 1");
        if (max_iters < 1) throw std::invalid_argument("AlsConfig: max_iters must be >= 1");
        if (!(rel_tol > 0.0)) throw std::invalid_argument("AlsConfig: rel_tol must be > 0");
        if (restarts < 1) throw std::invalid_argument("AlsConfig: restarts must be >= 1");
    }
};

/// Sum_l weights[l] * U_1[:,l] ∘ … ∘ U_K[:,l] with unit-norm factor columns.
struct CPModel {
    Vector weights;
    std::vector<Matrix> factors;
    /// Absolute reconstruction error ||X - Xhat||_F after each sweep.
    std::vector<double> error_history;
    std::size_t iterations = 0;
    double relative_error = 0.0;

    [[nodiscard]] std::size_t rank() const { return static_cast<std::size_t>(weights.size()); }

    [[nodiscard]] Shape shape() const {
        Shape s;
        for (const auto& f : factors) s.push_back(static_cast<std::size_t>(f.rows()));
        return s;
    }

    [[nodiscard]] DenseTensor reconstruct() const {
        DenseTensor out(shape());
        std::vector<Vector> cols(factors.size());
        for (std::size_t l = 0; l < rank(); ++l) {
            for (std::size_t k = 0; k < factors.size(); ++k)
                cols[k] = factors[k].col(static_cast<Eigen::Index>(l));
            out.vec() += weights[static_cast<Eigen::Index>(l)] * rank1_outer(cols).vec();
        }
        return out;
    }
};

namespace detail {

/// Columns u_{K}[:,l] ⊗ … ⊗ u_{1}[:,l] for the given factors (first one fastest).
inline Matrix khatri_rao(std::span<const Matrix> factors) {
    const Eigen::Index r = factors.front().cols();
    Eigen::Index rows = 1;
    for (const auto& f : factors) rows *= f.rows();
    Matrix out(rows, r);
    for (Eigen::Index l = 0; l < r; ++l) {
        Eigen::Index len = factors.front().rows();
        out.col(l).head(len) = factors.front().col(l);
        for (std::size_t k = 1; k < factors.size(); ++k) {
            const Eigen::Index n = factors[k].rows();
            // expand in place from the back so earlier entries are read before overwritten
            for (Eigen::Index i = n - 1; i >= 0; --i)
                out.col(l).segment(i * len, len) = out.col(l).head(len) * factors[k](i, l);
            len *= n;
        }
    }
    return out;
}

/// Contract a tensor (given as a flat vector with `shape`) with one vector per
/// mode except `keep` (0-based). Returns a vector of length shape[keep].
inline Vector contract_all_but(const double* data, const Shape& shape, std::size_t keep,
                               const std::vector<const double*>& vecs) {
    std::vector<double> buf(data, data + shape_volume(shape));
    std::size_t len = buf.size();
    // trailing modes
    for (std::size_t j = shape.size(); j-- > keep + 1;) {
        const std::size_t n = shape[j];
        const std::size_t p = len / n;
        Eigen::Map<Matrix> m(buf.data(), static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(n));
        Eigen::Map<const Vector> u(vecs[j], static_cast<Eigen::Index>(n));
        Vector next = m * u;
        std::copy(next.data(), next.data() + p, buf.begin());
        len = p;
    }
    // leading modes
    for (std::size_t j = 0; j < keep; ++j) {
        const std::size_t n = shape[j];
        const std::size_t q = len / n;
        Eigen::Map<Matrix> m(buf.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q));
        Eigen::Map<const Vector> u(vecs[j], static_cast<Eigen::Index>(n));
        Vector next = m.transpose() * u;
        std::copy(next.data(), next.data() + q, buf.begin());
        len = q;
    }
    return Eigen::Map<Vector>(buf.data(), static_cast<Eigen::Index>(len));
}

/// Least-squares update U = M · V^{-1} for symmetric PSD V; pseudo-inverse when V
/// is singular or badly conditioned.
inline Matrix solve_normal(const Matrix& mttkrp, const Matrix& gram) {
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-12)
        return llt.solve(mttkrp.transpose()).transpose();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(gram);
    return mttkrp * cod.pseudoInverse();
}

/// Normalize columns in place, returning their former norms. A zero column is
/// replaced by a constant unit vector and reports norm 0.
inline Vector normalize_columns(Matrix& u) {
    Vector norms(u.cols());
    for (Eigen::Index l = 0; l < u.cols(); ++l) {
        const double n = u.col(l).norm();
        norms[l] = n;
        if (n > 0.0)
            u.col(l) /= n;
        else
            u.col(l).setConstant(1.0 / std::sqrt(static_cast<double>(u.rows())));
    }
    return norms;
}

struct AlsRun {
    CPModel model;
    double error = 0.0;
};

inline AlsRun als_single(const DenseTensor& t, const AlsConfig& cfg, std::uint64_t seed,
                         double norm_x) {
    const Shape& shape = t.shape();
    const std::size_t K = shape.size();
    const auto r = static_cast<Eigen::Index>(cfg.rank);

    CPModel model;
    model.factors.resize(K);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < K; ++k) {
        Matrix u(static_cast<Eigen::Index>(shape[k]), r);
        for (Eigen::Index l = 0; l < r; ++l)
            for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, l) = normal(rng);
        normalize_columns(u);
        model.factors[k] = std::move(u);
    }
    model.weights = Vector::Zero(r);

    if (norm_x == 0.0) return {std::move(model), 0.0};

    // X viewed as (P × n_K): the last mode is split off so the expensive
    // contraction with U_K is shared by the updates of modes 1..K-1.
    const std::size_t nk = shape.back();
    const std::size_t p = t.size() / nk;
    const Shape lead(shape.begin(), shape.end() - 1);
    Eigen::Map<const Matrix> xmat(t.data().data(), static_cast<Eigen::Index>(p),
                                  static_cast<Eigen::Index>(nk));

    std::vector<Matrix> grams(K);
    for (std::size_t k = 0; k < K; ++k) grams[k] = model.factors[k].transpose() * model.factors[k];

    const double norm_sq = norm_x * norm_x;
    double prev_fit = std::numeric_limits<double>::infinity();
    double err = norm_x;

    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        const Matrix z = xmat * model.factors[K - 1];  // P × r

        for (std::size_t n = 0; n + 1 < K; ++n) {
            Matrix mttkrp(static_cast<Eigen::Index>(shape[n]), r);
            if (K == 2) {
                mttkrp = z;
            } else {
                std::vector<const double*> vecs(K - 1);
                for (Eigen::Index l = 0; l < r; ++l) {
                    for (std::size_t k = 0; k + 1 < K; ++k)
                        vecs[k] = model.factors[k].col(l).data();
                    mttkrp.col(l) = contract_all_but(z.col(l).data(), lead, n, vecs);
                }
            }
            Matrix v = Matrix::Ones(r, r);
            for (std::size_t k = 0; k < K; ++k)
                if (k != n) v = v.cwiseProduct(grams[k]);
            model.factors[n] = solve_normal(mttkrp, v);
            model.weights = normalize_columns(model.factors[n]);
            grams[n] = model.factors[n].transpose() * model.factors[n];
        }

        const Matrix kr = khatri_rao(std::span<const Matrix>(model.factors.data(), K - 1));
        const Matrix mttkrp = xmat.transpose() * kr;  // n_K × r
        Matrix v = Matrix::Ones(r, r);
        for (std::size_t k = 0; k + 1 < K; ++k) v = v.cwiseProduct(grams[k]);
        model.factors[K - 1] = solve_normal(mttkrp, v);
        model.weights = normalize_columns(model.factors[K - 1]);
        grams[K - 1] = model.factors[K - 1].transpose() * model.factors[K - 1];

        const Matrix all = v.cwiseProduct(grams[K - 1]);
        const double norm_hat_sq = model.weights.dot(all * model.weights);
        const double inner =
            (mttkrp.cwiseProduct(model.factors[K - 1]).colwise().sum().transpose())
                .dot(model.weights);
        err = std::sqrt(std::max(0.0, norm_sq - 2.0 * inner + norm_hat_sq));
        model.error_history.push_back(err);
        model.iterations = iter + 1;

        const double fit = err / norm_x;
        if (std::abs(prev_fit - fit) < cfg.rel_tol) break;
        prev_fit = fit;
    }
    model.relative_error = err / norm_x;
    return {std::move(model), err};
}

/// Largest-magnitude entry of every factor column made nonnegative (signs move
/// into the weights), then components sorted by |weight| descending.
inline void canonicalize(CPModel& model) {
    const Eigen::Index r = model.weights.size();
    for (auto& f : model.factors) {
        for (Eigen::Index l = 0; l < r; ++l) {
            Eigen::Index idx = 0;
            f.col(l).cwiseAbs().maxCoeff(&idx);
            if (f(idx, l) < 0.0) {
                f.col(l) *= -1.0;
                model.weights[l] *= -1.0;
            }
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(r));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(model.weights[a]) > std::abs(model.weights[b]);
    });
    Vector w(r);
    for (Eigen::Index l = 0; l < r; ++l) w[l] = model.weights[order[static_cast<std::size_t>(l)]];
    model.weights = w;
    for (auto& f : model.factors) {
        Matrix g(f.rows(), r);
        for (Eigen::Index l = 0; l < r; ++l) g.col(l) = f.col(order[static_cast<std::size_t>(l)]);
        f = std::move(g);
    }
}

}  // namespace detail

/// Rank-`cfg.rank` CP fit of `t`. The best of `cfg.restarts` seeded random
/// initializations is returned; its error history is non-increasing.
inline CPModel cp_als(const DenseTensor& t, const AlsConfig& cfg) {
    cfg.validate();
    if (t.order() < 2) throw std::invalid_argument("cp_als: tensor needs at least 2 modes");
    if (has_non_finite(t)) throw std::invalid_argument("cp_als: tensor contains NaN or Inf");

    const double norm_x = frobenius_norm(t);
    detail::AlsRun best;
    best.error = std::numeric_limits<double>::infinity();
    for (std::size_t rs = 0; rs < cfg.restarts; ++rs) {
        auto run = detail::als_single(t, cfg, derive_seed(cfg.seed, {stream::als_init, rs}), norm_x);
        if (run.error < best.error) best = std::move(run);
    }
    detail::canonicalize(best.model);
    // the sweep errors come from a cancellation-prone expansion; report the exact final one
    if (norm_x > 0.0)
        best.model.relative_error = (t.vec() - best.model.reconstruct().vec()).norm() / norm_x;
    return std::move(best.model);
}

/// r × T series: row l is weights[l] · U_time[:,l]ᵀ.
inline Matrix time_series_from_cp(const CPModel& model, std::size_t time_mode) {
    if (time_mode < 1 || time_mode > model.factors.size())
        throw std::out_of_range("time_series_from_cp: time mode out of range");
    const Matrix& u = model.factors[time_mode - 1];
    return model.weights.asDiagonal() * u.transpose();
}

}  // namespace tenseg
