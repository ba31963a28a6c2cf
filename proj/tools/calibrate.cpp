// Calibrates the detection constants on no-change (CP0) simulations.
//
// Each replication is decomposed once. From its panel we read the critical
// value of every constant, i.e. the smallest value at which the detector
// reports no change-point:
//   threshold rule: the largest scaled CUSUM over the intervals isolate-detect
//                   scans, divided by sqrt(log(T d^(1/4)));
//   information criterion: max_j (L_0 - L_j) / (j * penalty / alpha).
// The recommended constant is the `quantile` quantile of the critical values
// at the worst rank, rounded up. The information-criterion candidates come
// from a pass at a fraction of the threshold, so alpha is calibrated after
// the l2 constant and uses it.

#include "tenseg/bench.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace tenseg;
using json = nlohmann::ordered_json;

namespace {

struct Critical {
    double c_l2 = 0.0;
    double c_linf = 0.0;
    double alpha = 0.0;
};

double critical_threshold(const detail::PanelSums& sums, const CcidConfig& cfg, Norm norm) {
    const auto T = static_cast<std::size_t>(sums.length());
    const std::size_t lambda = cfg.lambda_t;
    double best = 0.0;
    for (std::size_t i = 1; i <= (T + lambda - 1) / lambda; ++i) {
        const std::size_t r_end = std::min(i * lambda, T);
        const std::size_t l_start = T + 1 > i * lambda ? T + 1 - i * lambda : 1;
        best = std::max(best, sums.best_split(1, r_end, cfg.min_seg(), norm).second);
        best = std::max(best, sums.best_split(l_start, T, cfg.min_seg(), norm).second);
    }
    return best / std::sqrt(std::log(static_cast<double>(T) * std::pow(static_cast<double>(sums.rows()), 0.25)));
}

double critical_alpha(const detail::PanelSums& sums, const CcidConfig& cfg) {
    const auto T = static_cast<std::size_t>(sums.length());
    const auto d = static_cast<std::size_t>(sums.rows());
    const double zeta = cfg.suboptimal_factor * threshold(static_cast<double>(T), static_cast<double>(d),
                                                          cfg.threshold_constant());
    const DetectionResult over = detail::isolate_detect_with(sums, cfg, zeta);
    const auto [order, scores] = detail::solution_path_with(sums, over.change_points, cfg.path_norm);
    const double unit = information_penalty(T, d, cfg) / cfg.penalty_alpha;
    const double base = sums.log_likelihood_term(std::span<const std::size_t>{});
    double best = 0.0;
    std::vector<std::size_t> model;
    for (std::size_t j = 1; j <= order.size(); ++j) {
        model.insert(std::upper_bound(model.begin(), model.end(), order[j - 1]), order[j - 1]);
        std::vector<std::size_t> scored = model;
        if (cfg.refine) detail::refine_locations(sums, scored, cfg.min_seg());
        best = std::max(best, (base - sums.log_likelihood_term(scored)) / (static_cast<double>(j) * unit));
    }
    return best;
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
    return v[std::min(v.size(), std::max<std::size_t>(k, 1)) - 1];
}

double round_up(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::ceil(v * scale - 1e-9) / scale;
}

double share(const std::vector<double>& crit, double value) {
    const auto n = std::count_if(crit.begin(), crit.end(), [&](double c) { return c <= value; });
    return static_cast<double>(n) / static_cast<double>(crit.size());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Calibrate the detection constants on no-change simulations"};
    std::size_t reps = 100;
    std::uint64_t seed = 20240601;
    std::vector<std::size_t> ranks{5, 10, 20};
    double q = 1.0;
    std::size_t power_reps = 100;
    std::string out = "calibration";
    app.add_option("--reps", reps, "CP0 replications per rank")->capture_default_str();
    app.add_option("--seed", seed, "Master seed")->capture_default_str();
    app.add_option("--ranks", ranks, "CP ranks")->delimiter(',')->capture_default_str();
    app.add_option("--quantile", q, "Quantile of the critical values to adopt")->check(CLI::Range(0.5, 1.0))->capture_default_str();
    app.add_option("--power-reps", power_reps, "CP1 replications used to report power (0 = skip)")->capture_default_str();
    app.add_option("--out", out, "Output directory")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    PipelineConfig base;
    const CcidConfig& ccid = base.ccid;
    ScenarioSpec cp0;
    cp0.scenario = Scenario::cp0;

    std::filesystem::create_directories(out);
    std::ofstream rows(std::filesystem::path(out) / "cp0_critical.csv");
    rows << "rank,replication,seed,c_l2,c_linf,alpha\n" << std::setprecision(10);

    std::vector<std::vector<detail::PanelSums>> panels;
    for (std::size_t rank : ranks) {
        PipelineConfig cfg = base;
        cfg.rank = rank;
        std::vector<detail::PanelSums> sums;
        for (std::size_t i = 0; i < reps; ++i) {
            const std::uint64_t rs = replication_seed(seed, i);
            const Simulation sim = generate(cp0, rs);
            const Matrix series = decompose_series(sim.tensor, cfg, derive_seed(rs, {stream::als_init}));
            sums.emplace_back(build_panel(series));
        }
        std::cerr << "rank " << rank << " decomposed\n";
        panels.push_back(std::move(sums));
    }

    std::vector<std::vector<Critical>> per_rank(ranks.size());
    double c_l2 = 0.0, c_linf = 0.0, alpha = 0.0;
    auto column = [&](std::size_t r, double Critical::*field) {
        std::vector<double> v;
        for (const Critical& c : per_rank[r]) v.push_back(c.*field);
        return v;
    };
    for (std::size_t r = 0; r < ranks.size(); ++r) {
        for (const auto& sums : panels[r])
            per_rank[r].push_back({critical_threshold(sums, ccid, Norm::l2), critical_threshold(sums, ccid, Norm::linf), 0.0});
        c_l2 = std::max(c_l2, round_up(quantile(column(r, &Critical::c_l2), q), 1));
        c_linf = std::max(c_linf, round_up(quantile(column(r, &Critical::c_linf), q), 1));
    }
    CcidConfig calibrated = ccid;
    calibrated.constant = c_l2;
    for (std::size_t r = 0; r < ranks.size(); ++r) {
        for (std::size_t i = 0; i < reps; ++i) per_rank[r][i].alpha = critical_alpha(panels[r][i], calibrated);
        alpha = std::max(alpha, round_up(quantile(column(r, &Critical::alpha), q), 2));
    }
    for (std::size_t r = 0; r < ranks.size(); ++r)
        for (std::size_t i = 0; i < reps; ++i) {
            const Critical& c = per_rank[r][i];
            rows << ranks[r] << ',' << i << ',' << replication_seed(seed, i) << ',' << c.c_l2 << ',' << c.c_linf << ','
                 << c.alpha << '\n';
        }

    json j;
    j["reps"] = reps;
    j["seed"] = seed;
    j["quantile"] = q;
    j["penalty_form"] = {{"d_exponent", ccid.penalty_d_exponent},
                         {"d_offset", ccid.penalty_d_offset},
                         {"log_exponent", ccid.penalty_log_exponent}};
    j["recommended"] = {{"l2_constant", c_l2}, {"linf_constant", c_linf}, {"penalty_alpha", alpha}};
    j["defaults"] = {{"l2_constant", default_l2_constant},
                     {"linf_constant", default_linf_constant},
                     {"penalty_alpha", default_penalty_alpha}};
    json shares = json::array();
    for (std::size_t r = 0; r < ranks.size(); ++r) {
        shares.push_back({{"rank", ranks[r]},
                          {"threshold_l2", share(column(r, &Critical::c_l2), c_l2)},
                          {"threshold_linf", share(column(r, &Critical::c_linf), c_linf)},
                          {"information_criterion", share(column(r, &Critical::alpha), alpha)}});
    }
    j["cp0_zero_share"] = shares;
    j["defaults_match"] = c_l2 == default_l2_constant && c_linf == default_linf_constant && alpha == default_penalty_alpha;

    if (power_reps > 0) {
        BenchConfig bench;
        bench.scenario.scenario = Scenario::cp1;
        bench.pipeline = base;
        bench.pipeline.rank = 20;
        bench.pipeline.ccid.constant = c_l2;
        bench.pipeline.ccid.penalty_alpha = alpha;
        bench.replications = power_reps;
        bench.master_seed = seed;
        const BenchResult res = run_bench(bench);
        j["cp1_rank20"] = {{"reps", power_reps}, {"share_correct", res.table.exact_share()}, {"mean_d_h", res.table.mean_d_h}};
    }

    std::ofstream(std::filesystem::path(out) / "constants.json") << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
    return 0;
}
