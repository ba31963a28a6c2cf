#include "tenseg/evalkit.hpp"
#include "tenseg/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace tenseg;

namespace {

using Cps = std::vector<std::size_t>;

double oracle_hausdorff(const Cps& truth, const Cps& est, std::size_t T) {
    const Cps anchors{0, T};
    const Cps& a = truth.empty() ? anchors : truth;
    const Cps& b = est.empty() ? anchors : est;
    double ab = 0, ba = 0;
    for (std::size_t x : a) {
        double m = 1e300;
        for (std::size_t y : b) m = std::min(m, std::abs(static_cast<double>(x) - static_cast<double>(y)));
        ab = std::max(ab, m);
    }
    for (std::size_t y : b) {
        double m = 1e300;
        for (std::size_t x : a) m = std::min(m, std::abs(static_cast<double>(x) - static_cast<double>(y)));
        ba = std::max(ba, m);
    }
    double ns = 0;
    std::size_t prev = 0;
    for (std::size_t c : truth) {
        ns = std::max(ns, static_cast<double>(c - prev));
        prev = c;
    }
    ns = std::max(ns, static_cast<double>(T - prev));
    return std::max(ab, ba) / ns;
}

Cps random_sorted_set(Rng& rng, std::size_t T, std::size_t max_count) {
    std::uniform_int_distribution<std::size_t> count(0, max_count), pos(1, T - 1);
    Cps out(count(rng));
    for (auto& c : out) c = pos(rng);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

EvalRecord record_with_diff(std::int64_t diff) {
    EvalRecord r;
    r.n_hat_minus_n = diff;
    r.true_cps = {10, 20, 30, 40, 50};
    return r;
}

}  // namespace

TEST(Hausdorff, Examples) {
    EXPECT_EQ(hausdorff(Cps{100}, Cps{100}, 200), 0.0);
    EXPECT_DOUBLE_EQ(hausdorff(Cps{100}, Cps{98}, 200), 0.02);
    EXPECT_EQ(hausdorff(Cps{}, Cps{}, 200), 0.0);
    // one empty side is anchored at {0, T}
    EXPECT_DOUBLE_EQ(hausdorff(Cps{}, Cps{50}, 200), 150.0 / 200.0);
    EXPECT_DOUBLE_EQ(hausdorff(Cps{100}, Cps{}, 200), 100.0 / 100.0);
    EXPECT_TRUE(std::isnan(hausdorff(Cps{100}, Cps{}, 200, EmptySetPolicy::undefined)));
    EXPECT_THROW((void)hausdorff(Cps{5, 3}, Cps{}, 10), std::invalid_argument);
    EXPECT_THROW((void)hausdorff(Cps{}, Cps{}, 1), std::invalid_argument);
}

TEST(Hausdorff, MatchesBruteForceOracle) {
    Rng rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t T = 50 + static_cast<std::size_t>(trial % 300);
        const Cps a = random_sorted_set(rng, T, 6);
        const Cps b = random_sorted_set(rng, T, 6);
        EXPECT_DOUBLE_EQ(hausdorff(a, b, T), oracle_hausdorff(a, b, T));
        // swapping roles changes only the scale n_s
        if (!a.empty() && !b.empty()) {
            EXPECT_NEAR(hausdorff(a, b, T) * static_cast<double>(longest_segment(a, T)),
                        hausdorff(b, a, T) * static_cast<double>(longest_segment(b, T)), 1e-9);
        }
    }
}

TEST(Hausdorff, DuplicateEstimateInvariance) {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const Cps a = random_sorted_set(rng, 300, 5);
        const Cps b = random_sorted_set(rng, 300, 5);
        if (b.empty()) continue;
        Cps dup = b;
        dup.insert(dup.begin() + 1, b.front());
        EXPECT_EQ(hausdorff(a, dup, 300), hausdorff(a, b, 300));
    }
}

TEST(Hausdorff, TranslationInvariance) {
    Rng rng(4);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const Cps a = random_sorted_set(rng, 300, 5);
        const Cps b = random_sorted_set(rng, 300, 5);
        if (a.empty() || b.empty()) continue;
        const std::size_t shift = 23;
        Cps sa = a, sb = b;
        for (auto& x : sa) x += shift;
        for (auto& x : sb) x += shift;
        // the first segment grows with the shift; compare only when it stays shorter than the longest
        if (longest_segment(sa, 300 + shift) != longest_segment(a, 300)) continue;
        EXPECT_DOUBLE_EQ(hausdorff(sa, sb, 300 + shift), hausdorff(a, b, 300));
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

TEST(Evaluate, FillsRecord) {
    const EvalRecord r = evaluate({100, 150}, {99, 151, 180}, 300, 0.5);
    EXPECT_EQ(r.n_hat_minus_n, 1);
    EXPECT_DOUBLE_EQ(r.d_h, 30.0 / 150.0);
    EXPECT_EQ(r.T, 300u);
    EXPECT_EQ(r.elapsed_seconds, 0.5);
}

TEST(Tabulate, PerfectRecords) {
    std::vector<EvalRecord> recs(500, evaluate({100}, {100}, 200, 0.01));
    const EvalTable t = tabulate(recs);
    EXPECT_EQ(t.bins[3], 500u);
    EXPECT_EQ(t.count, 500u);
    EXPECT_EQ(t.mean_d_h, 0.0);
    EXPECT_NEAR(t.mean_seconds, 0.01, 1e-15);
    EXPECT_DOUBLE_EQ(t.exact_share(), 1.0);
}

TEST(Tabulate, Binning) {
    const std::vector<EvalRecord> recs{record_with_diff(-5), record_with_diff(3), record_with_diff(0)};
    const EvalTable t = tabulate(recs);
    EXPECT_EQ(t.bins, (std::array<std::size_t, 7>{1, 0, 0, 1, 0, 0, 1}));
    std::size_t total = 0;
    for (auto b : t.bins) total += b;
    EXPECT_EQ(total, recs.size());
}

TEST(Tabulate, PermutationInvariant) {
    std::vector<EvalRecord> recs;
    Rng rng(3);
    for (int i = 0; i < 40; ++i) {
        const Cps a = random_sorted_set(rng, 200, 4);
        const Cps b = random_sorted_set(rng, 200, 4);
        recs.push_back(evaluate(a, b, 200, 0.1 * i));
    }
    const EvalTable t1 = tabulate(recs);
    std::shuffle(recs.begin(), recs.end(), rng);
    const EvalTable t2 = tabulate(recs);
    EXPECT_EQ(t1.bins, t2.bins);
    EXPECT_NEAR(t1.mean_d_h, t2.mean_d_h, 1e-12);
    EXPECT_NEAR(t1.mean_seconds, t2.mean_seconds, 1e-12);
}

TEST(TableCsv, RowFormat) {
    std::vector<EvalRecord> recs(3, evaluate({100, 150, 200, 250}, {100, 150, 200, 250}, 300, 0.25));
    recs.push_back(evaluate({100, 150, 200, 250}, {100, 150, 200}, 300, 0.25));
    const EvalTable t = tabulate(recs);
    EXPECT_EQ(table_csv_header(), "method,model,c_cp,le_m3,m2,m1,zero,p1,p2,ge_p3,d_h,time_s");
    EXPECT_EQ(table_csv_row("tenseg", "AR-CP4", "20", t), "tenseg,AR-CP4,20,0,0,1,3,0,0,0,0.125,0.250");

    std::vector<EvalRecord> cp0(2, evaluate({}, {}, 200, 0.0));
    cp0.push_back(evaluate({}, {40}, 200, 0.0));
    EXPECT_EQ(table_csv_row("tenseg", "AR-CP0", "5", tabulate(cp0)), "tenseg,AR-CP0,5,-,-,-,2,1,0,0,-,0.000");
}
