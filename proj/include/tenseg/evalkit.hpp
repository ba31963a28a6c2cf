#pragma once

// Scoring of estimated change-points against the truth.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tenseg {

enum class EmptySetPolicy {
    /// An empty side is replaced by the boundary points {0, T}.
    anchor,
    /// An empty side (with the other non-empty) yields NaN.
    undefined,
};

/// Length of the longest segment the (sorted) change-points induce on [0, T].
inline std::size_t longest_segment(std::span<const std::size_t> cps, std::size_t T) {
    std::size_t prev = 0;
    std::size_t best = 0;
    for (std::size_t c : cps) {
        best = std::max(best, c - prev);
        prev = c;
    }
    return std::max(best, T - prev);
}

/// Scaled Hausdorff distance, scaled by the longest true segment.
inline double hausdorff(std::span<const std::size_t> truth, std::span<const std::size_t> estimate, std::size_t T,
                        EmptySetPolicy policy = EmptySetPolicy::anchor) {
    if (T < 2) throw std::invalid_argument("hausdorff: T must be >= 2");
    if (!std::is_sorted(truth.begin(), truth.end()) || !std::is_sorted(estimate.begin(), estimate.end()))
        throw std::invalid_argument("hausdorff: change-point lists must be sorted");
    if (truth.empty() && estimate.empty()) return 0.0;
    const std::vector<std::size_t> anchors{0, T};
    if (truth.empty() || estimate.empty()) {
        if (policy == EmptySetPolicy::undefined) return std::numeric_limits<double>::quiet_NaN();
    }
    const std::span<const std::size_t> a = truth.empty() ? std::span<const std::size_t>(anchors) : truth;
    const std::span<const std::size_t> b = estimate.empty() ? std::span<const std::size_t>(anchors) : estimate;

    auto directed = [](std::span<const std::size_t> from, std::span<const std::size_t> to) {
        std::size_t worst = 0;
        for (std::size_t x : from) {
            std::size_t nearest = std::numeric_limits<std::size_t>::max();
            for (std::size_t y : to) nearest = std::min(nearest, x > y ? x - y : y - x);
            worst = std::max(worst, nearest);
        }
        return worst;
    };
    const std::size_t dist = std::max(directed(a, b), directed(b, a));
    return static_cast<double>(dist) / static_cast<double>(longest_segment(truth, T));
}

struct EvalRecord {
    std::vector<std::size_t> true_cps;
    std::vector<std::size_t> est_cps;
    std::size_t T = 0;
    double d_h = 0.0;
    std::int64_t n_hat_minus_n = 0;
    double elapsed_seconds = 0.0;
};

inline EvalRecord evaluate(std::vector<std::size_t> truth, std::vector<std::size_t> estimate, std::size_t T,
                           double elapsed_seconds = 0.0) {
    EvalRecord rec;
    rec.d_h = hausdorff(truth, estimate, T);
    rec.n_hat_minus_n = static_cast<std::int64_t>(estimate.size()) - static_cast<std::int64_t>(truth.size());
    rec.true_cps = std::move(truth);
    rec.est_cps = std::move(estimate);
    rec.T = T;
    rec.elapsed_seconds = elapsed_seconds;
    return rec;
}

/// Frequency table of N̂ - N in bins <=-3, -2, -1, 0, 1, 2, >=3.
struct EvalTable {
    static constexpr std::array<const char*, 7> bin_labels{"<=-3", "-2", "-1", "0", "1", "2", ">=3"};

    std::array<std::size_t, 7> bins{};
    std::size_t count = 0;
    double mean_d_h = 0.0;
    double mean_seconds = 0.0;
    /// Largest true change-point count seen; bins below -max_true_count cannot occur.
    std::size_t max_true_count = 0;

    [[nodiscard]] std::size_t exact() const { return bins[3]; }
    [[nodiscard]] double exact_share() const {
        return count == 0 ? 0.0 : static_cast<double>(bins[3]) / static_cast<double>(count);
    }
    [[nodiscard]] bool bin_possible(std::size_t i) const {
        const int lower = static_cast<int>(i) - 3;  // -3 stands for <= -3
        return -lower <= static_cast<int>(max_true_count);
    }
};

inline std::size_t bin_index(std::int64_t diff) {
    return static_cast<std::size_t>(std::clamp<std::int64_t>(diff, -3, 3) + 3);
}

inline EvalTable tabulate(std::span<const EvalRecord> records) {
    EvalTable table;
    double d_h_sum = 0.0;
    double time_sum = 0.0;
    for (const auto& r : records) {
        ++table.bins[bin_index(r.n_hat_minus_n)];
        d_h_sum += r.d_h;
        time_sum += r.elapsed_seconds;
        table.max_true_count = std::max(table.max_true_count, r.true_cps.size());
    }
    table.count = records.size();
    if (!records.empty()) {
        table.mean_d_h = d_h_sum / static_cast<double>(records.size());
        table.mean_seconds = time_sum / static_cast<double>(records.size());
    }
    return table;
}

inline std::string table_csv_header() {
    return "method,model,c_cp,le_m3,m2,m1,zero,p1,p2,ge_p3,d_h,time_s";
}

/// One CSV row; impossible bins and the d_H of runs without true change-points print "-".
inline std::string table_csv_row(const std::string& method, const std::string& model, const std::string& c_cp,
                                 const EvalTable& table) {
    std::ostringstream os;
    os << method << ',' << model << ',' << c_cp;
    for (std::size_t i = 0; i < table.bins.size(); ++i) {
        os << ',';
        if (table.bin_possible(i))
            os << table.bins[i];
        else
            os << '-';
    }
    os << ',';
    if (table.max_true_count == 0)
        os << '-';
    else
        os << std::fixed << std::setprecision(3) << table.mean_d_h;
    os << ',' << std::fixed << std::setprecision(3) << table.mean_seconds;
    return os.str();
}

}  // namespace tenseg
