#pragma once

// Tensor time series with planted changes in their network (precision) structure.
// Each time slice solves the Sylvester tensor equation sum_k X ×_k Psi_k = noise,
// with the time mode contributing an identity precision.

#include "tenseg/random.hpp"
#include "tenseg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tenseg {

enum class Structure { ar1, star_block, erdos_renyi };
enum class Scenario { cp0, cp1, cp4, cp10, custom };
enum class NoiseKind { iid, ar1 };
enum class Magnitude { standard, small };

struct PrecisionSpec {
    Structure kind = Structure::ar1;
    std::size_t n = 20;
    /// AR1 / star-block correlation.
    double rho = 0.2;
    /// Star-block subgraph count.
    std::size_t blocks = 4;
    /// Erdős–Rényi edge count and weight range.
    std::size_t edges = 20;
    double gamma_low = 0.7;
    double gamma_high = 0.9;
    std::uint64_t seed = 0;
};

/// Inverse of the AR(1) correlation matrix (rho^|i-j|), which is tridiagonal.
inline Matrix ar1_precision(std::size_t n, double rho) {
    if (n < 1) throw std::invalid_argument("ar1_precision: n must be >= 1");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("ar1_precision: rho must be in [0,1)");
    const auto N = static_cast<Eigen::Index>(n);
    const double c = 1.0 / (1.0 - rho * rho);
    Matrix psi = Matrix::Zero(N, N);
    if (N == 1) {
        psi(0, 0) = 1.0;
        return psi;
    }
    for (Eigen::Index i = 0; i < N; ++i) {
        psi(i, i) = (i == 0 || i == N - 1) ? c : c * (1.0 + rho * rho);
        if (i + 1 < N) psi(i, i + 1) = psi(i + 1, i) = -rho * c;
    }
    return psi;
}

/// Star-block covariance: `blocks` diagonal blocks (remainder joins the last one),
/// hub = first node of a block, hub–leaf entries rho, leaf–leaf rho^2, unit
/// diagonal. Returns its inverse.
inline Matrix star_block_covariance(std::size_t n, double rho, std::size_t blocks) {
    if (blocks < 1 || blocks > n) throw std::invalid_argument("star_block_precision: need 1 <= blocks <= n");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("star_block_precision: rho must be in (0,1)");
    const auto N = static_cast<Eigen::Index>(n);
    Matrix a = Matrix::Identity(N, N);
    const std::size_t size = n / blocks;
    for (std::size_t blk = 0; blk < blocks; ++blk) {
        const auto first = static_cast<Eigen::Index>(blk * size);
        const auto last = static_cast<Eigen::Index>(blk + 1 == blocks ? n : (blk + 1) * size);
        for (Eigen::Index i = first; i < last; ++i)
            for (Eigen::Index j = first; j < last; ++j) {
                if (i == j) continue;
                a(i, j) = (i == first || j == first) ? rho : rho * rho;
            }
    }
    return a;
}

inline Matrix star_block_precision(std::size_t n, double rho, std::size_t blocks) {
    const Matrix a = star_block_covariance(n, rho, blocks);
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw std::runtime_error("star_block_precision: covariance not PD");
    Matrix psi = llt.solve(Matrix::Identity(a.rows(), a.cols()));
    return 0.5 * (psi + psi.transpose());
}

/// Adds edge (i, j) with weight gamma: off-diagonals drop by gamma, both
/// diagonals grow by gamma.
inline void add_weighted_edge(Matrix& a, Eigen::Index i, Eigen::Index j, double gamma) {
    a(i, j) -= gamma;
    a(j, i) -= gamma;
    a(i, i) += gamma;
    a(j, j) += gamma;
}

/// 0.25 I plus `edges` random graph edges, each adding a Laplacian-style weight
/// gamma ~ U[gamma_low, gamma_high]; diagonally dominant, hence PD.
inline Matrix er_precision(std::size_t n, std::size_t edges, double gamma_low, double gamma_high,
                           std::uint64_t seed) {
    if (edges > n * (n - 1) / 2) throw std::invalid_argument("er_precision: too many edges");
    if (!(gamma_low >= 0.0 && gamma_low < gamma_high))
        throw std::invalid_argument("er_precision: need 0 <= gamma_low < gamma_high");
    const auto N = static_cast<Eigen::Index>(n);
    Matrix a = 0.25 * Matrix::Identity(N, N);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = i + 1; j < N; ++j) pairs.emplace_back(i, j);
    Rng rng(seed);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> chosen;
    std::sample(pairs.begin(), pairs.end(), std::back_inserter(chosen), static_cast<std::ptrdiff_t>(edges), rng);
    std::uniform_real_distribution<double> weight(gamma_low, gamma_high);
    for (const auto& [i, j] : chosen) {
        add_weighted_edge(a, i, j, weight(rng));
    }
    return a;
}

inline Matrix build_precision(const PrecisionSpec& spec) {
    switch (spec.kind) {
        case Structure::ar1: return ar1_precision(spec.n, spec.rho);
        case Structure::star_block: return star_block_precision(spec.n, spec.rho, spec.blocks);
        case Structure::erdos_renyi:
            return er_precision(spec.n, spec.edges, spec.gamma_low, spec.gamma_high, spec.seed);
    }
    throw std::invalid_argument("build_precision: unknown structure");
}

namespace detail {

/// Psi = Q diag(values) Qᵀ. An empty basis stands for the identity.
struct ModeSpectrum {
    Matrix basis;
    Vector values;
};

inline ModeSpectrum identity_spectrum(std::size_t n) {
    return {Matrix{}, Vector::Ones(static_cast<Eigen::Index>(n))};
}

inline ModeSpectrum spectrum_of(const Matrix& psi) {
    if (psi.rows() != psi.cols()) throw std::invalid_argument("sylvester_solve: precision must be square");
    if ((psi - psi.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, psi.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("sylvester_solve: precision must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(psi);
    if (eig.info() != Eigen::Success) throw std::runtime_error("sylvester_solve: eigendecomposition failed");
    if (eig.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("sylvester_solve: precision must be positive definite");
    return {eig.eigenvectors(), eig.eigenvalues()};
}

/// Solves sum_k X ×_k Psi_k = rhs given the eigendecompositions of the Psi_k.
inline DenseTensor sylvester_solve_spectral(const std::vector<ModeSpectrum>& spectra, const DenseTensor& rhs) {
    const std::size_t K = rhs.order();
    if (spectra.size() != K) throw std::invalid_argument("sylvester_solve: one precision per mode required");
    for (std::size_t k = 0; k < K; ++k)
        if (static_cast<std::size_t>(spectra[k].values.size()) != rhs.shape()[k])
            throw std::invalid_argument("sylvester_solve: precision size does not match mode " + std::to_string(k + 1));

    DenseTensor x = rhs;
    for (std::size_t k = 0; k < K; ++k)
        if (spectra[k].basis.size() > 0) x = mode_product(x, spectra[k].basis.transpose(), k + 1);

    const Shape& shape = rhs.shape();
    std::vector<std::size_t> idx(K, 0);
    double* data = x.data().data();
    for (std::size_t flat = 0; flat < x.size(); ++flat) {
        double denom = 0.0;
        for (std::size_t k = 0; k < K; ++k) denom += spectra[k].values[static_cast<Eigen::Index>(idx[k])];
        if (denom <= 1e-12) throw std::runtime_error("sylvester_solve: eigenvalue sum underflow");
        data[flat] /= denom;
        for (std::size_t k = 0; k < K; ++k) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }

    for (std::size_t k = 0; k < K; ++k)
        if (spectra[k].basis.size() > 0) x = mode_product(x, spectra[k].basis, k + 1);
    return x;
}

}  // namespace detail

/// X with sum_k X ×_k Psi_k = rhs, i.e. (⊕_k Psi_k) vec(X) = vec(rhs).
inline DenseTensor sylvester_solve(std::span<const Matrix> psis, const DenseTensor& rhs) {
    std::vector<detail::ModeSpectrum> spectra;
    spectra.reserve(psis.size());
    for (const auto& psi : psis) spectra.push_back(detail::spectrum_of(psi));
    return detail::sylvester_solve_spectral(spectra, rhs);
}

/// Sylvester residual ||sum_k X ×_k Psi_k - rhs|| / ||rhs||.
inline double sylvester_residual(std::span<const Matrix> psis, const DenseTensor& x, const DenseTensor& rhs) {
    DenseTensor lhs(x.shape());
    for (std::size_t k = 0; k < psis.size(); ++k) lhs.vec() += mode_product(x, psis[k], k + 1).vec();
    const double denom = frobenius_norm(rhs);
    return denom == 0.0 ? (lhs.vec() - rhs.vec()).norm() : (lhs.vec() - rhs.vec()).norm() / denom;
}

struct ScenarioSpec {
    Scenario scenario = Scenario::cp0;
    Structure structure = Structure::ar1;
    Magnitude magnitude = Magnitude::standard;
    NoiseKind noise = NoiseKind::iid;
    /// AR(1) noise coefficient along time.
    double alpha = 0.7;
    Shape spatial{20, 20, 20};
    /// Used by Scenario::custom only; presets fix their own.
    std::size_t length = 0;
    std::vector<std::size_t> change_points;
    /// Per-segment precision parameters for Scenario::custom (n is overridden per mode).
    std::vector<PrecisionSpec> segments;
};

struct ScenarioLayout {
    std::size_t length = 0;
    std::vector<std::size_t> change_points;
    std::vector<PrecisionSpec> segments;
};

namespace detail {

inline PrecisionSpec pattern_parameters(const ScenarioSpec& spec, bool second) {
    PrecisionSpec p;
    p.kind = spec.structure;
    const bool cp0 = spec.scenario == Scenario::cp0;
    if (spec.magnitude == Magnitude::small && spec.structure != Structure::ar1)
        throw std::invalid_argument("small-magnitude profile is defined for the AR structure only");
    switch (spec.structure) {
        case Structure::ar1:
            if (spec.magnitude == Magnitude::small)
                p.rho = second ? 0.6 : 0.4;
            else
                p.rho = second ? 0.8 : 0.2;
            break;
        case Structure::star_block:
            if (cp0) {
                p.rho = 0.2;
                p.blocks = 4;
            } else {
                p.rho = second ? 0.2 : 0.8;
                p.blocks = second ? 2 : 4;
            }
            break;
        case Structure::erdos_renyi:
            p.edges = 20;
            if (cp0 || spec.scenario == Scenario::cp1) {
                p.gamma_low = second ? 0.1 : 0.7;
                p.gamma_high = second ? 0.2 : 0.9;
            } else {
                p.gamma_low = second ? 0.05 : 0.8;
                p.gamma_high = second ? 0.1 : 0.9;
            }
            break;
    }
    return p;
}

}  // namespace detail

/// `count` segment parameter sets alternating between the structure's A and B patterns.
inline std::vector<PrecisionSpec> alternating_segments(const ScenarioSpec& spec, std::size_t count) {
    std::vector<PrecisionSpec> out;
    for (std::size_t s = 0; s < count; ++s) out.push_back(detail::pattern_parameters(spec, s % 2 == 1));
    return out;
}

/// Lengths, change-points and alternating ABAB… segment parameters of a scenario.
inline ScenarioLayout scenario_layout(const ScenarioSpec& spec) {
    ScenarioLayout layout;
    switch (spec.scenario) {
        case Scenario::cp0: layout.length = 200; break;
        case Scenario::cp1:
            layout.length = 200;
            layout.change_points = {100};
            break;
        case Scenario::cp4:
            layout.length = 300;
            layout.change_points = {100, 150, 200, 250};
            break;
        case Scenario::cp10:
            layout.length = 660;
            for (std::size_t t = 60; t <= 600; t += 60) layout.change_points.push_back(t);
            break;
        case Scenario::custom:
            layout.length = spec.length;
            layout.change_points = spec.change_points;
            layout.segments = spec.segments;
            break;
    }
    for (std::size_t i = 0; i < layout.change_points.size(); ++i) {
        const std::size_t c = layout.change_points[i];
        if (c == 0 || c >= layout.length || (i > 0 && c <= layout.change_points[i - 1]))
            throw std::invalid_argument("scenario: change-points must be strictly increasing within (0, T)");
    }
    if (spec.scenario != Scenario::custom) layout.segments = alternating_segments(spec, layout.change_points.size() + 1);
    if (layout.segments.size() != layout.change_points.size() + 1)
        throw std::invalid_argument("scenario: need one precision spec per segment");
    if (layout.length < 2) throw std::invalid_argument("scenario: series length must be >= 2");
    return layout;
}

struct Simulation {
    DenseTensor tensor;
    std::vector<std::size_t> change_points;
};

/// Generates the (spatial..., T) tensor. Noise slice t is drawn from stream
/// (seed, noise_slice, t); segment pattern A/B precision draws use stream
/// (seed, precision, pattern, mode).
inline Simulation generate(const ScenarioSpec& spec, std::uint64_t seed) {
    const ScenarioLayout layout = scenario_layout(spec);
    if (spec.spatial.empty()) throw std::invalid_argument("generate: need at least one spatial mode");
    if (spec.noise == NoiseKind::ar1 && !(std::abs(spec.alpha) < 1.0))
        throw std::invalid_argument("generate: AR(1) noise coefficient must satisfy |alpha| < 1");

    const std::size_t T = layout.length;
    const std::size_t slice = shape_volume(spec.spatial);
    Shape shape = spec.spatial;
    shape.push_back(T);
    DenseTensor noise(shape);
    {
        std::normal_distribution<double> normal(0.0, 1.0);
        const double innovation = spec.noise == NoiseKind::ar1 ? std::sqrt(1.0 - spec.alpha * spec.alpha) : 1.0;
        double* data = noise.data().data();
        for (std::size_t t = 0; t < T; ++t) {
            Rng rng = make_rng(seed, {stream::noise_slice, t});
            normal.reset();  // the distribution caches a spare draw from the previous slice's stream
            double* cur = data + t * slice;
            for (std::size_t i = 0; i < slice; ++i) cur[i] = normal(rng);
            if (spec.noise == NoiseKind::ar1 && t > 0) {
                const double* prev = cur - slice;
                for (std::size_t i = 0; i < slice; ++i) cur[i] = spec.alpha * prev[i] + innovation * cur[i];
            }
        }
    }

    Simulation sim{DenseTensor(shape), layout.change_points};
    std::size_t start = 0;
    for (std::size_t seg = 0; seg <= layout.change_points.size(); ++seg) {
        const std::size_t end = seg < layout.change_points.size() ? layout.change_points[seg] : T;
        const std::size_t len = end - start;
        // custom segments are their own patterns; presets alternate A/B
        const std::uint64_t pattern = spec.scenario == Scenario::custom ? seg : seg % 2;

        std::vector<detail::ModeSpectrum> spectra;
        for (std::size_t k = 0; k < spec.spatial.size(); ++k) {
            PrecisionSpec p = layout.segments[seg];
            p.n = spec.spatial[k];
            p.seed = derive_seed(seed, {stream::precision, pattern, p.n});
            spectra.push_back(detail::spectrum_of(build_precision(p)));
        }
        spectra.push_back(detail::identity_spectrum(len));

        Shape seg_shape = spec.spatial;
        seg_shape.push_back(len);
        const auto offset = static_cast<std::ptrdiff_t>(start * slice);
        DenseTensor rhs(seg_shape, std::vector<double>(noise.values().begin() + offset,
                                                       noise.values().begin() + offset + static_cast<std::ptrdiff_t>(len * slice)));
        const DenseTensor x = detail::sylvester_solve_spectral(spectra, rhs);
        std::copy(x.values().begin(), x.values().end(), sim.tensor.data().begin() + offset);
        start = end;
    }
    return sim;
}

}  // namespace tenseg
