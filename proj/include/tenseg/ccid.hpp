#pragma once

// Cross-covariance isolate-detect: change-points in the second-order structure
// of a p-variate series, located by scaled CUSUM statistics on a nonnegative
// periodogram panel within right/left expanding intervals.

#include "tenseg/tensor.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tenseg {

enum class Norm { l2, linf };
enum class StopRule { threshold, information_criterion };

// The two threshold constants and the penalty scale are the smallest values
// with no false positive on the CP0 runs of scripts/calibrate.sh; see
// calibration/constants.json. The penalty's shape in d and T follows the
// growth of the largest single-split gain on Gaussian white noise.
inline constexpr double default_linf_constant = 8.2;
inline constexpr double default_l2_constant = 3.0;
inline constexpr double default_suboptimal_factor = 0.15;
inline constexpr double default_penalty_alpha = 3.04;
inline constexpr double default_penalty_d_exponent = 0.85;
inline constexpr double default_penalty_d_offset = 1.5;
inline constexpr double default_penalty_log_exponent = 0.5;

struct CcidConfig {
    /// Expansion step of the right/left intervals.
    std::size_t lambda_t = 3;
    Norm norm = Norm::l2;
    StopRule stop = StopRule::information_criterion;
    /// Threshold constant C; unset means the per-norm default.
    std::optional<double> constant;
    /// Overestimation pass threshold is suboptimal_factor * zeta.
    double suboptimal_factor = default_suboptimal_factor;
    /// Minimum number of panel points on each side of a candidate; 0 means lambda_t.
    std::size_t min_segment = 0;
    /// Information-criterion penalty per change-point: alpha * (d^beta + kappa) * (log T)^gamma.
    double penalty_alpha = default_penalty_alpha;
    double penalty_d_exponent = default_penalty_d_exponent;
    double penalty_d_offset = default_penalty_d_offset;
    double penalty_log_exponent = default_penalty_log_exponent;
    /// Aggregation used for the solution-path scores CS*.
    Norm path_norm = Norm::l2;
    /// Re-locate the change-points of every scored model by the
    /// likelihood-optimal split between neighbours.
    bool refine = true;

    [[nodiscard]] double threshold_constant() const {
        if (constant) return *constant;
        return norm == Norm::linf ? default_linf_constant : default_l2_constant;
    }
    [[nodiscard]] std::size_t min_seg() const { return min_segment == 0 ? lambda_t : min_segment; }

    void validate() const {
        if (lambda_t < 1) throw std::invalid_argument("CcidConfig: lambda_t must be >= 1");
        if (!(threshold_constant() > 0.0)) throw std::invalid_argument("CcidConfig: threshold constant must be > 0");
        if (!(suboptimal_factor > 0.0 && suboptimal_factor < 1.0))
            throw std::invalid_argument("CcidConfig: suboptimal factor must be in (0,1)");
        if (!(penalty_alpha > 0.0)) throw std::invalid_argument("CcidConfig: penalty alpha must be > 0");
        if (!std::isfinite(penalty_d_exponent) || !std::isfinite(penalty_log_exponent))
            throw std::invalid_argument("CcidConfig: penalty exponents must be finite");
        if (!(penalty_d_offset >= 0.0)) throw std::invalid_argument("CcidConfig: penalty offset must be >= 0");
    }
};

/// d × T nonnegative panel; row k is derived from source series pair sources[k] (i <= j).
struct PeriodogramPanel {
    Matrix values;
    std::vector<std::pair<std::size_t, std::size_t>> sources;

    [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    [[nodiscard]] std::size_t length() const { return static_cast<std::size_t>(values.cols()); }
};

struct Interval {
    std::size_t start = 0;
    std::size_t end = 0;
    friend bool operator==(const Interval&, const Interval&) = default;
};

struct DetectionResult {
    /// Sorted, 1-based: b means the segment ends at series index b.
    std::vector<std::size_t> change_points;
    /// Candidates ordered from most to least important.
    std::vector<std::size_t> solution_path;
    /// CS* of each solution-path entry when it was removed.
    std::vector<double> path_scores;
    /// IC(M_0), ..., IC(M_N) for the model-selection rule; empty otherwise.
    std::vector<double> ic_values;
    std::size_t chosen_model = 0;
    /// Interval in which each isolate-detect detection fired (panel coordinates).
    std::vector<Interval> detection_intervals;
    /// Raw isolate-detect detections, in detection order.
    std::vector<std::size_t> candidates;
    double elapsed_seconds = 0.0;
};

/// Haar finest-scale periodograms: squares of w_t^(i) = (x_t - x_{t+1})/sqrt(2) on
/// the diagonal and ((w^(i) + w^(j))/sqrt(2))^2 for i < j.
inline PeriodogramPanel build_panel(const Matrix& x) {
    const Eigen::Index p = x.rows();
    const Eigen::Index T = x.cols();
    if (p < 1) throw std::invalid_argument("build_panel: need at least one series");
    if (T < 2) throw std::invalid_argument("build_panel: need at least two time points");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const Matrix w = (x.leftCols(T - 1) - x.rightCols(T - 1)) * inv_sqrt2;

    PeriodogramPanel panel;
    const Eigen::Index d = p * (p + 1) / 2;
    panel.values.resize(d, T - 1);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < p; ++i, ++k) {
        panel.values.row(k) = w.row(i).array().square();
        panel.sources.emplace_back(i, i);
    }
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j, ++k) {
            panel.values.row(k) = ((w.row(i) + w.row(j)) * inv_sqrt2).array().square();
            panel.sources.emplace_back(i, j);
        }
    return panel;
}

/// Scaled CUSUM of `y` on [s, e] split after b (1-based, s <= b < e <= len).
/// Zero when the interval mean is zero.
inline double scaled_cusum(std::span<const double> y, std::size_t s, std::size_t b, std::size_t e) {
    if (s < 1 || b < s || e <= b || e > y.size())
        throw std::invalid_argument("scaled_cusum: need 1 <= s <= b < e <= length");
    double left = 0.0;
    double right = 0.0;
    for (std::size_t t = s; t <= b; ++t) left += y[t - 1];
    for (std::size_t t = b + 1; t <= e; ++t) right += y[t - 1];
    const double n = static_cast<double>(e - s + 1);
    const double nl = static_cast<double>(b - s + 1);
    const double nr = static_cast<double>(e - b);
    const double mean = (left + right) / n;
    if (mean <= 0.0) return 0.0;
    return std::sqrt(nr * nl / n) * std::abs(left / nl - right / nr) / mean;
}

inline double aggregate(std::span<const double> stats, Norm norm) {
    if (stats.empty()) return 0.0;
    if (norm == Norm::linf) return *std::max_element(stats.begin(), stats.end());
    double sq = 0.0;
    for (double v : stats) sq += v * v;
    return std::sqrt(sq / static_cast<double>(stats.size()));
}

/// zeta = C * sqrt(log(T * d^{1/4})).
inline double threshold(double T, double d, double C) {
    if (!(T >= 2.0) || !(d >= 1.0) || !(C > 0.0)) throw std::invalid_argument("threshold: need T >= 2, d >= 1, C > 0");
    return C * std::sqrt(std::log(T * std::pow(d, 0.25)));
}

inline double information_penalty(std::size_t T, std::size_t d, const CcidConfig& cfg) {
    return cfg.penalty_alpha * (std::pow(static_cast<double>(d), cfg.penalty_d_exponent) + cfg.penalty_d_offset) *
           std::pow(std::log(static_cast<double>(T)), cfg.penalty_log_exponent);
}

namespace detail {

/// Row-wise prefix sums for O(1) segment means.
class PanelSums {
public:
    explicit PanelSums(const PeriodogramPanel& panel)
        : d_(panel.values.rows()), T_(panel.values.cols()), sums_(d_, T_ + 1) {
        sums_.col(0).setZero();
        for (Eigen::Index t = 0; t < T_; ++t) sums_.col(t + 1) = sums_.col(t) + panel.values.col(t);
    }

    [[nodiscard]] Eigen::Index rows() const { return d_; }
    [[nodiscard]] Eigen::Index length() const { return T_; }

    /// Sum of row k over [s, e], 1-based inclusive.
    [[nodiscard]] double sum(Eigen::Index k, std::size_t s, std::size_t e) const {
        return sums_(k, static_cast<Eigen::Index>(e)) - sums_(k, static_cast<Eigen::Index>(s) - 1);
    }

    [[nodiscard]] double cusum(Eigen::Index k, std::size_t s, std::size_t b, std::size_t e) const {
        const double total = sum(k, s, e);
        const double n = static_cast<double>(e - s + 1);
        if (total <= 0.0) return 0.0;
        const double left = sum(k, s, b);
        const double nl = static_cast<double>(b - s + 1);
        const double nr = static_cast<double>(e - b);
        return std::sqrt(nl * nr / n) * std::abs(left / nl - (total - left) / nr) / (total / n);
    }

    /// Scaled CUSUM at (s, b, e) aggregated over rows.
    [[nodiscard]] double aggregate_cusum(std::size_t s, std::size_t b, std::size_t e, Norm norm) const {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < d_; ++k) {
            const double v = cusum(k, s, b, e);
            acc = norm == Norm::linf ? std::max(acc, v) : acc + v * v;
        }
        return norm == Norm::linf ? acc : std::sqrt(acc / static_cast<double>(d_));
    }

    /// Aggregated CUSUM maximized over b in [s + m - 1, e - m]; smallest b wins ties.
    /// Returns {b, value}, with b = 0 when no admissible split exists.
    [[nodiscard]] std::pair<std::size_t, double> best_split(std::size_t s, std::size_t e,
                                                           std::size_t m, Norm norm) const {
        if (e + 1 < s + 2 * m) return {0, 0.0};
        const std::size_t b_lo = s + m - 1;
        const std::size_t b_hi = e - m;
        const std::size_t nb = b_hi - b_lo + 1;
        std::vector<double> agg(nb, 0.0);
        const double n = static_cast<double>(e - s + 1);
        for (Eigen::Index k = 0; k < d_; ++k) {
            const double total = sum(k, s, e);
            if (total <= 0.0) continue;
            const double inv_mean = n / total;
            for (std::size_t i = 0; i < nb; ++i) {
                const std::size_t b = b_lo + i;
                const double left = sum(k, s, b);
                const double nl = static_cast<double>(b - s + 1);
                const double nr = static_cast<double>(e - b);
                const double v = std::sqrt(nl * nr / n) * std::abs(left / nl - (total - left) / nr) * inv_mean;
                if (norm == Norm::linf)
                    agg[i] = std::max(agg[i], v);
                else
                    agg[i] += v * v;
            }
        }
        std::size_t best_b = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < nb; ++i) {
            const double v = norm == Norm::linf ? agg[i] : std::sqrt(agg[i] / static_cast<double>(d_));
            if (v > best) {
                best = v;
                best_b = b_lo + i;
            }
        }
        return {best_b, best};
    }

    /// Split of [s, e] minimizing the two-segment log-likelihood term, with
    /// b in [s + m - 1, e - m]; {0, 0} when no admissible split exists.
    [[nodiscard]] std::pair<std::size_t, double> likelihood_split(std::size_t s, std::size_t e, std::size_t m) const {
        if (e + 1 < s + 2 * m) return {0, 0.0};
        const std::size_t b_lo = s + m - 1;
        const std::size_t b_hi = e - m;
        std::vector<double> cost(b_hi - b_lo + 1, 0.0);
        for (Eigen::Index k = 0; k < d_; ++k) {
            const double total = sum(k, s, e);
            if (total <= 0.0) continue;
            for (std::size_t b = b_lo; b <= b_hi; ++b) {
                const double left = sum(k, s, b);
                const double nl = static_cast<double>(b - s + 1);
                const double nr = static_cast<double>(e - b);
                if (left > 0.0) cost[b - b_lo] += nl * std::log(left / nl);
                if (total - left > 0.0) cost[b - b_lo] += nr * std::log((total - left) / nr);
            }
        }
        const auto it = std::min_element(cost.begin(), cost.end());
        return {b_lo + static_cast<std::size_t>(it - cost.begin()), *it};
    }

    /// Negative log-likelihood of [s, e] (up to a constant) when column b sits
    /// between the segments [s, b - 1] and [b + 1, e] and has the average of
    /// their means. Requires s < b < e.
    [[nodiscard]] double straddle_cost(std::size_t s, std::size_t b, std::size_t e) const {
        const double nl = static_cast<double>(b - s);
        const double nr = static_cast<double>(e - b);
        double cost = 0.0;
        for (Eigen::Index k = 0; k < d_; ++k) {
            const double ml = sum(k, s, b - 1) / nl;
            const double mr = sum(k, b + 1, e) / nr;
            const double mid = 0.5 * (ml + mr);
            if (ml > 0.0) cost += nl * std::log(ml);
            if (mr > 0.0) cost += nr * std::log(mr);
            if (mid > 0.0) cost += std::log(mid) + sum(k, b, b) / mid;
        }
        return cost;
    }

    /// Sum over rows and segments of n_i log(mean_i); zero-mean segments skipped.
    [[nodiscard]] double log_likelihood_term(std::span<const std::size_t> sorted_cps) const {
        double total = 0.0;
        for (Eigen::Index k = 0; k < d_; ++k) {
            std::size_t s = 1;
            for (std::size_t i = 0; i <= sorted_cps.size(); ++i) {
                const std::size_t e = i < sorted_cps.size() ? sorted_cps[i] : static_cast<std::size_t>(T_);
                const double n = static_cast<double>(e - s + 1);
                const double mean = sum(k, s, e) / n;
                if (mean > 0.0) total += n * std::log(mean);
                s = e + 1;
            }
        }
        return total;
    }

private:
    Eigen::Index d_;
    Eigen::Index T_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sums_;
};

inline DetectionResult isolate_detect_with(const PanelSums& sums, const CcidConfig& cfg, double zeta) {
    DetectionResult result;
    const auto T = static_cast<std::size_t>(sums.length());
    const std::size_t lambda = cfg.lambda_t;
    const std::size_t m = cfg.min_seg();
    std::size_t s = 1;
    std::size_t e = T;
    while (e > s) {
        const std::size_t len = e - s + 1;
        const std::size_t steps = (len + lambda - 1) / lambda;
        bool detected = false;
        for (std::size_t i = 1; i <= steps && !detected; ++i) {
            const std::size_t r_end = std::min(s - 1 + i * lambda, e);
            const std::size_t l_start = std::max(s, e + 1 > i * lambda ? e + 1 - i * lambda : s);
            const std::array<Interval, 2> intervals{Interval{s, r_end}, Interval{l_start, e}};
            for (std::size_t side = 0; side < 2; ++side) {
                const Interval iv = intervals[side];
                const auto [b, value] = sums.best_split(iv.start, iv.end, m, cfg.norm);
                if (b == 0 || !(value > zeta)) continue;
                result.candidates.push_back(b);
                result.detection_intervals.push_back(iv);
                // restart from the end-point of a right interval, the start-point of a left one
                if (side == 0)
                    s = iv.end;
                else
                    e = iv.start;
                detected = true;
                break;
            }
        }
        if (!detected) break;
    }
    result.change_points = result.candidates;
    std::sort(result.change_points.begin(), result.change_points.end());
    return result;
}

/// Removal order of the candidates: repeatedly drop the one with the smallest
/// triplet CS*. Returns {path (most important first), scores}.
inline std::pair<std::vector<std::size_t>, std::vector<double>> solution_path_with(
    const PanelSums& sums, std::vector<std::size_t> cands, Norm norm) {
    const auto T = static_cast<std::size_t>(sums.length());
    std::vector<std::size_t> removed;
    std::vector<double> removed_scores;
    while (!cands.empty()) {
        std::size_t worst = 0;
        double worst_score = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < cands.size(); ++j) {
            const std::size_t prev = j == 0 ? 0 : cands[j - 1];
            const std::size_t next = j + 1 == cands.size() ? T : cands[j + 1];
            const double score = sums.aggregate_cusum(prev + 1, cands[j], next, norm);
            if (score < worst_score) {
                worst_score = score;
                worst = j;
            }
        }
        removed.push_back(cands[worst]);
        removed_scores.push_back(worst_score);
        cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    std::reverse(removed.begin(), removed.end());
    std::reverse(removed_scores.begin(), removed_scores.end());
    return {removed, removed_scores};
}

/// Moves each change-point to the likelihood-optimal split of the segment
/// between its neighbours, sweeping left to right until nothing moves.
inline void refine_locations(const PanelSums& sums, std::vector<std::size_t>& cps, std::size_t m) {
    const auto T = static_cast<std::size_t>(sums.length());
    for (std::size_t pass = 0; pass < 20; ++pass) {
        bool moved = false;
        for (std::size_t j = 0; j < cps.size(); ++j) {
            const std::size_t s = j == 0 ? 1 : cps[j - 1] + 1;
            const std::size_t e = j + 1 == cps.size() ? T : cps[j + 1];
            const auto [b, cost] = sums.likelihood_split(s, e, m);
            if (b != 0 && b != cps[j]) {
                cps[j] = b;
                moved = true;
            }
        }
        if (!moved) break;
    }
}

/// On a Haar panel the coefficient at b straddles a change after series
/// index b, so a split there is only resolved to one of two neighbouring
/// columns. Moves each change-point by at most one column to where the
/// straddling coefficient fits best.
inline void polish_haar_locations(const PanelSums& sums, std::vector<std::size_t>& cps) {
    const auto T = static_cast<std::size_t>(sums.length());
    for (std::size_t j = 0; j < cps.size(); ++j) {
        const std::size_t s = j == 0 ? 1 : cps[j - 1] + 1;
        const std::size_t e = j + 1 == cps.size() ? T : cps[j + 1] - 1;
        std::size_t best_b = cps[j];
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t b = cps[j] - 1; b <= cps[j] + 1; ++b) {
            if (b <= s || b >= e) continue;
            const double c = sums.straddle_cost(s, b, e);
            if (c < best) {
                best = c;
                best_b = b;
            }
        }
        cps[j] = best_b;
    }
}

inline std::vector<std::size_t> validated_candidates(std::span<const std::size_t> candidates,
                                                     std::size_t T) {
    std::vector<std::size_t> c(candidates.begin(), candidates.end());
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] < 1 || c[i] >= T) throw std::invalid_argument("candidate outside (0, T)");
        if (i > 0 && c[i] <= c[i - 1]) throw std::invalid_argument("candidates must be strictly increasing");
    }
    return c;
}

}  // namespace detail

/// Thresholded isolate-detect at zeta = threshold(T, d, C).
inline DetectionResult isolate_detect(const PeriodogramPanel& panel, const CcidConfig& cfg) {
    cfg.validate();
    if (panel.length() < 2 * cfg.lambda_t)
        throw std::invalid_argument("isolate_detect: panel shorter than 2 * lambda_t");
    const detail::PanelSums sums(panel);
    const double zeta = threshold(panel.length(), panel.rows(), cfg.threshold_constant());
    auto result = detail::isolate_detect_with(sums, cfg, zeta);
    auto [path, scores] = detail::solution_path_with(sums, result.change_points, cfg.path_norm);
    result.solution_path = std::move(path);
    result.path_scores = std::move(scores);
    result.chosen_model = result.change_points.size();
    return result;
}

struct SolutionPath {
    std::vector<std::size_t> order;
    std::vector<double> scores;
};

inline SolutionPath solution_path(const PeriodogramPanel& panel, std::span<const std::size_t> candidates,
                                  Norm norm = Norm::l2) {
    const auto c = detail::validated_candidates(candidates, panel.length());
    const detail::PanelSums sums(panel);
    auto [order, scores] = detail::solution_path_with(sums, c, norm);
    return {std::move(order), std::move(scores)};
}

/// IC(M_j) = sum_k sum_segments n_i log(mean_i^(k)) + j * penalty.
inline double information_criterion(const PeriodogramPanel& panel, std::span<const std::size_t> change_points,
                                    const CcidConfig& cfg) {
    const detail::PanelSums sums(panel);
    std::vector<std::size_t> sorted(change_points.begin(), change_points.end());
    std::sort(sorted.begin(), sorted.end());
    return sums.log_likelihood_term(sorted) +
           static_cast<double>(sorted.size()) * information_penalty(panel.length(), panel.rows(), cfg);
}

/// Picks the nested model M_j = {path[0..j)} minimizing the information
/// criterion; with cfg.refine each M_j is re-located before it is scored.
inline DetectionResult model_select(const PeriodogramPanel& panel, const SolutionPath& path,
                                    const CcidConfig& cfg) {
    const detail::PanelSums sums(panel);
    const double penalty = information_penalty(panel.length(), panel.rows(), cfg);
    DetectionResult result;
    result.solution_path = path.order;
    result.path_scores = path.scores;
    std::vector<std::size_t> model;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= path.order.size(); ++j) {
        if (j > 0) model.insert(std::upper_bound(model.begin(), model.end(), path.order[j - 1]), path.order[j - 1]);
        std::vector<std::size_t> scored = model;
        if (cfg.refine) detail::refine_locations(sums, scored, cfg.min_seg());
        const double ic = sums.log_likelihood_term(scored) + static_cast<double>(j) * penalty;
        result.ic_values.push_back(ic);
        if (ic < best) {
            best = ic;
            result.chosen_model = j;
            result.change_points = std::move(scored);
        }
    }
    return result;
}

/// Panel construction followed by thresholded isolate-detect, or by an
/// overestimating pass, solution path and information-criterion selection.
inline DetectionResult detect_panel(const PeriodogramPanel& panel, const CcidConfig& cfg) {
    cfg.validate();
    if (panel.length() < 2 * cfg.lambda_t)
        throw std::invalid_argument("detect: series too short for lambda_t = " + std::to_string(cfg.lambda_t));
    const detail::PanelSums sums(panel);
    if (cfg.stop == StopRule::threshold) {
        DetectionResult result = isolate_detect(panel, cfg);
        if (cfg.refine) detail::refine_locations(sums, result.change_points, cfg.min_seg());
        return result;
    }

    const double zeta = cfg.suboptimal_factor * threshold(panel.length(), panel.rows(), cfg.threshold_constant());
    DetectionResult over = detail::isolate_detect_with(sums, cfg, zeta);
    auto [order, scores] = detail::solution_path_with(sums, over.change_points, cfg.path_norm);
    DetectionResult result = model_select(panel, SolutionPath{std::move(order), std::move(scores)}, cfg);
    result.candidates = std::move(over.candidates);
    result.detection_intervals = std::move(over.detection_intervals);
    return result;
}

inline DetectionResult detect(const Matrix& x, const CcidConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const PeriodogramPanel panel = build_panel(x);
    DetectionResult result = detect_panel(panel, cfg);
    if (cfg.refine) detail::polish_haar_locations(detail::PanelSums(panel), result.change_points);
    result.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

/// Runs detect on the s interleaved subsequences, maps estimates back to the
/// original axis and keeps clusters found by at least `quorum` subsequences.
inline DetectionResult subsample_detect(const Matrix& x, const CcidConfig& cfg, std::size_t step,
                                        std::size_t quorum) {
    if (step < 2) throw std::invalid_argument("subsample_detect: step must be >= 2");
    if (quorum < 1 || quorum > step) throw std::invalid_argument("subsample_detect: quorum must be in [1, step]");
    const auto T = static_cast<std::size_t>(x.cols());
    if (T / step < 2 * cfg.lambda_t) throw std::invalid_argument("subsample_detect: subsequences too short");
    const auto start = std::chrono::steady_clock::now();

    struct Hit {
        std::size_t location;
        std::size_t source;
    };
    std::vector<Hit> hits;
    for (std::size_t j = 0; j < step; ++j) {
        const std::size_t len = (T - j + step - 1) / step;
        Matrix sub(x.rows(), static_cast<Eigen::Index>(len));
        for (std::size_t i = 0; i < len; ++i) sub.col(static_cast<Eigen::Index>(i)) = x.col(static_cast<Eigen::Index>(j + i * step));
        const DetectionResult r = detect(sub, cfg);
        // subsequence change after element b' lies between original (1-based)
        // j + (b'-1)s + 1 and j + b's + 1; report the midpoint.
        for (std::size_t b : r.change_points) hits.push_back({j + (b - 1) * step + 1 + step / 2, j});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        return a.location < b.location || (a.location == b.location && a.source < b.source);
    });

    DetectionResult result;
    const std::size_t gap = cfg.lambda_t * step;
    for (std::size_t i = 0; i < hits.size();) {
        std::size_t k = i + 1;
        while (k < hits.size() && hits[k].location - hits[k - 1].location <= gap) ++k;
        std::vector<std::size_t> sources;
        std::vector<std::size_t> locs;
        for (std::size_t q = i; q < k; ++q) {
            sources.push_back(hits[q].source);
            locs.push_back(hits[q].location);
        }
        std::sort(sources.begin(), sources.end());
        const auto votes = static_cast<std::size_t>(std::unique(sources.begin(), sources.end()) - sources.begin());
        if (votes >= quorum) result.change_points.push_back(locs[(locs.size() - 1) / 2]);
        i = k;
    }
    result.solution_path = result.change_points;
    result.chosen_model = result.change_points.size();
    result.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

/// Runs detect on non-overlapping window means (the remainder joins the last
/// window); a change after window b' maps to original index b' * w.
inline DetectionResult preaverage_detect(const Matrix& x, const CcidConfig& cfg, std::size_t window) {
    if (window < 1) throw std::invalid_argument("preaverage_detect: window must be >= 1");
    if (window == 1) return detect(x, cfg);
    const auto T = static_cast<std::size_t>(x.cols());
    const std::size_t n = T / window;
    if (n < 2 * cfg.lambda_t) throw std::invalid_argument("preaverage_detect: too few windows");
    const auto start = std::chrono::steady_clock::now();
    Matrix avg(x.rows(), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t from = i * window;
        const std::size_t to = i + 1 == n ? T : from + window;
        avg.col(static_cast<Eigen::Index>(i)) =
            x.middleCols(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to - from)).rowwise().mean();
    }
    DetectionResult result = detect(avg, cfg);
    for (auto& b : result.change_points) b *= window;
    for (auto& b : result.solution_path) b *= window;
    for (auto& b : result.candidates) b *= window;
    result.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace tenseg
