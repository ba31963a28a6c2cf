#pragma once

// NORMO rank selection: the largest CP rank whose components are not redundant.

#include "tenseg/cp_als.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <vector>

namespace tenseg {

struct NormoConfig {
    std::size_t r_max = 10;
    /// Two components are redundant when their mode-averaged |correlation| exceeds this.
    double delta = 0.7;
    /// Template for every candidate fit; `rank` and `seed` are overridden per candidate.
    AlsConfig als{};

    void validate() const {
        if (r_max < 1) throw std::invalid_argument("NormoConfig: r_max must be >= 1");
        if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("NormoConfig: delta must be in (0,1)");
    }
};

/// Pearson correlation; a zero-variance input yields 0 and sets `degenerate`.
inline double pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                      bool* degenerate = nullptr) {
    const Vector ca = a.array() - a.mean();
    const Vector cb = b.array() - b.mean();
    const double na = ca.norm();
    const double nb = cb.norm();
    if (na == 0.0 || nb == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return std::clamp(ca.dot(cb) / (na * nb), -1.0, 1.0);
}

/// c_A(r1, r2): mean over all modes of |cor(U_k[:,r1], U_k[:,r2])|. Components
/// are zero-based.
inline double component_correlation(const CPModel& model, std::size_t r1, std::size_t r2) {
    if (r1 == r2 || r1 >= model.rank() || r2 >= model.rank())
        throw std::invalid_argument("component_correlation: need two distinct components below rank");
    bool degenerate = false;
    double sum = 0.0;
    for (const auto& f : model.factors)
        sum += std::abs(pearson(f.col(static_cast<Eigen::Index>(r1)), f.col(static_cast<Eigen::Index>(r2)),
                                &degenerate));
    if (degenerate)
        std::cerr << "warning: constant factor column in components " << r1 << "," << r2
                  << "; its correlation is taken as 0\n";
    return sum / static_cast<double>(model.factors.size());
}

struct NormoAuditRow {
    std::size_t rank = 0;
    double max_correlation = 0.0;
    bool redundant = false;
};

struct NormoResult {
    std::size_t selected_rank = 1;
    /// One row per fitted rank, in ascending order, up to the first redundant one.
    std::vector<NormoAuditRow> audit;
};

inline double max_component_correlation(const CPModel& model) {
    double best = 0.0;
    for (std::size_t a = 0; a < model.rank(); ++a)
        for (std::size_t b = a + 1; b < model.rank(); ++b)
            best = std::max(best, component_correlation(model, a, b));
    return best;
}

/// Ascending sweep R = 1..r_max; stops at the first R containing a redundant
/// pair and returns R-1 (or r_max when none appears).
inline NormoResult normo_select_audit(const DenseTensor& t, const NormoConfig& cfg) {
    cfg.validate();
    NormoResult result;
    result.selected_rank = 1;
    for (std::size_t r = 1; r <= cfg.r_max; ++r) {
        NormoAuditRow row{r, 0.0, false};
        if (r > 1) {
            AlsConfig als = cfg.als;
            als.rank = r;
            als.seed = derive_seed(cfg.als.seed, {stream::normo_rank, r});
            const CPModel model = cp_als(t, als);
            row.max_correlation = max_component_correlation(model);
            row.redundant = row.max_correlation > cfg.delta;
        }
        result.audit.push_back(row);
        if (row.redundant) break;
        result.selected_rank = r;
    }
    return result;
}

inline std::size_t normo_select(const DenseTensor& t, const NormoConfig& cfg) {
    return normo_select_audit(t, cfg).selected_rank;
}

}  // namespace tenseg
