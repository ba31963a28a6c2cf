#pragma once

// Tensor -> decomposition -> time-mode series -> CCID.

#include "tenseg/ccid.hpp"
#include "tenseg/cp_als.hpp"
#include "tenseg/hosvd.hpp"
#include "tenseg/normo.hpp"

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace tenseg {

enum class Decomposition { cp, hosvd };

struct PipelineConfig {
    Decomposition decomposition = Decomposition::cp;
    /// CP rank, or the per-mode HOSVD rank (capped at each extent).
    std::size_t rank = 10;
    /// Choose the CP rank with NORMO instead of `rank`.
    bool auto_rank = false;
    NormoConfig normo{};
    /// rank and seed are set per run.
    AlsConfig als{.rank = 1, .max_iters = 25, .rel_tol = 1e-5, .seed = 0, .restarts = 1};
    /// 1-based; 0 means the last mode.
    std::size_t time_mode = 0;
    /// Center each time slice and scale it to unit Frobenius norm before decomposing.
    bool normalize_slices = true;
    CcidConfig ccid{};
    /// Subsampling step (0 = off) and its vote quorum.
    std::size_t subsample = 0;
    std::size_t quorum = 0;
    /// Pre-averaging window (0 = off).
    std::size_t preaverage = 0;
};

struct PipelineResult {
    DetectionResult detection;
    std::size_t rank = 0;
    Matrix series;
    double seconds = 0.0;
};

inline std::size_t resolve_time_mode(const DenseTensor& t, std::size_t time_mode) {
    const std::size_t mode = time_mode == 0 ? t.order() : time_mode;
    if (mode < 1 || mode > t.order()) throw std::out_of_range("time mode out of range");
    return mode;
}

inline DenseTensor normalize_time_slices(const DenseTensor& t, std::size_t time_mode) {
    Matrix slices = unfold(t, time_mode);
    for (Eigen::Index i = 0; i < slices.rows(); ++i) {
        slices.row(i).array() -= slices.row(i).mean();
        const double n = slices.row(i).norm();
        if (n > 0.0) slices.row(i) /= n;
    }
    return fold(slices, time_mode, t.shape());
}

/// Multivariate series (components × T) extracted from the decomposition.
inline Matrix decompose_series(const DenseTensor& input, const PipelineConfig& cfg, std::uint64_t seed,
                               std::size_t* used_rank = nullptr) {
    const std::size_t mode = resolve_time_mode(input, cfg.time_mode);
    const DenseTensor t = cfg.normalize_slices ? normalize_time_slices(input, mode) : input;
    if (cfg.decomposition == Decomposition::hosvd) {
        std::vector<std::size_t> ranks;
        for (std::size_t n : t.shape()) ranks.push_back(std::min(cfg.rank, n));
        if (used_rank) *used_rank = ranks[mode - 1];
        return time_series_from_hosvd(hosvd(t, ranks), mode);
    }
    std::size_t rank = cfg.rank;
    if (cfg.auto_rank) {
        NormoConfig normo = cfg.normo;
        normo.als.seed = seed;
        rank = normo_select(t, normo);
    }
    AlsConfig als = cfg.als;
    als.rank = rank;
    als.seed = seed;
    if (used_rank) *used_rank = rank;
    return time_series_from_cp(cp_als(t, als), mode);
}

inline DetectionResult detect_series(const Matrix& series, const PipelineConfig& cfg) {
    if (cfg.subsample > 0 && cfg.preaverage > 0)
        throw std::invalid_argument("subsampling and pre-averaging are mutually exclusive");
    if (cfg.subsample > 0)
        return subsample_detect(series, cfg.ccid, cfg.subsample, cfg.quorum == 0 ? cfg.subsample / 2 + 1 : cfg.quorum);
    if (cfg.preaverage > 0) return preaverage_detect(series, cfg.ccid, cfg.preaverage);
    return detect(series, cfg.ccid);
}

inline PipelineResult run_pipeline(const DenseTensor& t, const PipelineConfig& cfg, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    PipelineResult out;
    out.series = decompose_series(t, cfg, seed, &out.rank);
    out.detection = detect_series(out.series, cfg);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace tenseg
