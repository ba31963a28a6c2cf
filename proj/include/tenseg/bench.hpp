#pragma once

// Monte Carlo replications of generate -> pipeline -> evaluate.

#include "tenseg/evalkit.hpp"
#include "tenseg/pipeline.hpp"
#include "tenseg/simgen.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace tenseg {

struct BenchConfig {
    ScenarioSpec scenario{};
    PipelineConfig pipeline{};
    std::size_t replications = 100;
    std::uint64_t master_seed = 1;
    std::size_t workers = 1;
};

struct BenchResult {
    std::vector<EvalRecord> records;
    EvalTable table;
};

/// Seed of replication i; independent of worker count and of which
/// replications run, so partial sweeps can be resumed.
inline std::uint64_t replication_seed(std::uint64_t master, std::size_t i) {
    return derive_seed(master, {stream::replication, i});
}

inline EvalRecord run_replication(const BenchConfig& cfg, std::size_t i) {
    const std::uint64_t seed = replication_seed(cfg.master_seed, i);
    const Simulation sim = generate(cfg.scenario, seed);
    const PipelineResult res = run_pipeline(sim.tensor, cfg.pipeline, derive_seed(seed, {stream::als_init}));
    const std::size_t T = sim.tensor.shape().back();
    return evaluate(sim.change_points, res.detection.change_points, T, res.seconds);
}

/// Runs replications [first, first + count) on `workers` threads; records are
/// stored by replication index.
inline BenchResult run_bench(const BenchConfig& cfg, std::size_t first = 0,
                             const std::function<void(std::size_t)>& on_done = {}) {
    BenchResult out;
    out.records.resize(cfg.replications);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.replications; i = next++) {
            try {
                out.records[i] = run_replication(cfg, first + i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                next = cfg.replications;
                return;
            }
            if (on_done) {
                std::lock_guard lock(mu);
                on_done(i);
            }
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(cfg.workers, cfg.replications));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    out.table = tabulate(out.records);
    return out;
}

}  // namespace tenseg
