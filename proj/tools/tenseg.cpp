// tenseg command-line frontend.
//
// Exit codes: 0 ok, 2 configuration error, 3 I/O error, 4 numeric failure.
// Data goes to stdout, diagnostics to stderr.

#include "tenseg/bench.hpp"
#include "tenseg/io.hpp"
#include "tenseg/pipeline.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unistd.h>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tenseg;

namespace {

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- option groups ---------------------------------------------------------

struct ScenarioOptions {
    std::string scenario = "cp4";
    std::string structure = "ar";
    std::string magnitude = "standard";
    std::string noise = "iid";
    double alpha = 0.7;
    std::vector<std::size_t> spatial{20, 20, 20};
    std::size_t length = 0;
    std::vector<std::size_t> change_points;
    std::vector<double> segment_rho;

    void add(CLI::App& app) {
        app.add_option("--scenario", scenario, "cp0, cp1, cp4, cp10 or custom")
            ->check(CLI::IsMember({"cp0", "cp1", "cp4", "cp10", "custom"}, CLI::ignore_case))
            ->capture_default_str();
        app.add_option("--structure", structure, "Precision structure: ar, sb or er")
            ->check(CLI::IsMember({"ar", "sb", "er"}, CLI::ignore_case))
            ->capture_default_str();
        app.add_option("--magnitude", magnitude, "standard or small")
            ->check(CLI::IsMember({"standard", "small"}, CLI::ignore_case))
            ->capture_default_str();
        app.add_option("--noise", noise, "iid or ar1")
            ->check(CLI::IsMember({"iid", "ar1"}, CLI::ignore_case))
            ->capture_default_str();
        app.add_option("--alpha", alpha, "AR(1) noise coefficient")->capture_default_str();
        app.add_option("--spatial", spatial, "Spatial mode extents")->delimiter(',')->capture_default_str();
        app.add_option("--length", length, "Series length (custom scenario)");
        app.add_option("--change-points", change_points, "Change-points (custom scenario)")->delimiter(',');
        app.add_option("--segment-rho", segment_rho, "Per-segment rho for ar/sb (custom scenario)")->delimiter(',');
    }

    [[nodiscard]] ScenarioSpec spec() const {
        ScenarioSpec s;
        static const std::map<std::string, Scenario> scenarios{
            {"cp0", Scenario::cp0}, {"cp1", Scenario::cp1}, {"cp4", Scenario::cp4}, {"cp10", Scenario::cp10},
            {"custom", Scenario::custom}};
        static const std::map<std::string, Structure> structures{
            {"ar", Structure::ar1}, {"sb", Structure::star_block}, {"er", Structure::erdos_renyi}};
        s.scenario = scenarios.at(lower(scenario));
        s.structure = structures.at(lower(structure));
        s.magnitude = lower(magnitude) == "small" ? Magnitude::small : Magnitude::standard;
        s.noise = lower(noise) == "ar1" ? NoiseKind::ar1 : NoiseKind::iid;
        s.alpha = alpha;
        s.spatial = spatial;
        if (s.scenario == Scenario::custom) {
            if (length == 0) throw std::invalid_argument("custom scenario needs --length");
            s.length = length;
            s.change_points = change_points;
            s.segments = alternating_segments(s, change_points.size() + 1);
            if (!segment_rho.empty()) {
                if (segment_rho.size() != s.segments.size())
                    throw std::invalid_argument("--segment-rho needs one value per segment");
                if (s.structure == Structure::erdos_renyi)
                    throw std::invalid_argument("--segment-rho applies to the ar and sb structures only");
                for (std::size_t i = 0; i < segment_rho.size(); ++i) s.segments[i].rho = segment_rho[i];
            }
        } else if (length != 0 || !change_points.empty() || !segment_rho.empty()) {
            throw std::invalid_argument("--length, --change-points and --segment-rho need --scenario custom");
        }
        return s;
    }

    [[nodiscard]] std::string model_label() const {
        std::string st = structure;
        for (auto& c : st) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        std::string sc = scenario;
        for (auto& c : sc) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return st + "-" + sc + (lower(magnitude) == "small" ? "-small" : "") + (lower(noise) == "ar1" ? "-ar1" : "");
    }

    static std::string lower(std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    }
};

struct DecompOptions {
    std::string decomp = "cp";
    std::size_t rank = 10;
    bool auto_rank = false;
    std::size_t rmax = 10;
    double delta = 0.7;
    std::size_t als_iters = 25;
    double als_tol = 1e-5;
    std::size_t restarts = 1;
    std::size_t time_mode = 0;
    bool normalize_slices = true;

    void add(CLI::App& app) {
        app.add_option("--decomp", decomp, "Decomposition: cp or hosvd")
            ->check(CLI::IsMember({"cp", "hosvd"}, CLI::ignore_case))
            ->capture_default_str();
        app.add_option("--rank", rank, "CP rank, or per-mode HOSVD rank")->check(CLI::PositiveNumber)->capture_default_str();
        app.add_flag("--auto-rank", auto_rank, "Choose the CP rank with NORMO");
        app.add_option("--rmax", rmax, "Largest rank NORMO tests")->check(CLI::PositiveNumber)->capture_default_str();
        app.add_option("--delta", delta, "NORMO redundancy threshold")->capture_default_str();
        app.add_option("--als-iters", als_iters, "ALS sweep limit")->check(CLI::PositiveNumber)->capture_default_str();
        app.add_option("--als-tol", als_tol, "ALS fit-change tolerance")->capture_default_str();
        app.add_option("--restarts", restarts, "ALS random restarts")->check(CLI::PositiveNumber)->capture_default_str();
        app.add_option("--time-mode", time_mode, "1-based time mode (0 = last)")->capture_default_str();
        app.add_flag("--normalize-slices,!--raw-slices", normalize_slices,
                     "Center and scale each time slice first (the default; --raw-slices turns it off)");
    }

    void apply(PipelineConfig& cfg) const {
        cfg.decomposition = ScenarioOptions::lower(decomp) == "hosvd" ? Decomposition::hosvd : Decomposition::cp;
        if (auto_rank && cfg.decomposition == Decomposition::hosvd)
            throw std::invalid_argument("--auto-rank applies to the cp decomposition only");
        cfg.rank = rank;
        cfg.auto_rank = auto_rank;
        cfg.normo.r_max = rmax;
        cfg.normo.delta = delta;
        cfg.als.max_iters = als_iters;
        cfg.als.rel_tol = als_tol;
        cfg.als.restarts = restarts;
        cfg.normo.als = cfg.als;
        cfg.time_mode = time_mode;
        cfg.normalize_slices = normalize_slices;
        cfg.normo.validate();
    }
};

struct CcidOptions {
    std::string norm = "l2";
    std::string stop = "ic";
    std::optional<double> constant;
    std::size_t lambda_t = 3;
    std::optional<double> rho_sub;
    std::size_t min_segment = 0;
    std::optional<double> penalty_alpha;
    bool no_refine = false;
    std::size_t subsample = 0;
    std::size_t quorum = 0;
    std::size_t preaverage = 0;

    void add(CLI::App& app) {
        app.add_option("--norm", norm, "CUSUM aggregation: l2 or linf")
            ->check(CLI::IsMember({"l2", "linf"}, CLI::ignore_case))
            ->capture_default_str();
        app.add_option("--stop", stop, "Stopping rule: threshold or ic")
            ->check(CLI::IsMember({"threshold", "ic"}, CLI::ignore_case))
            ->capture_default_str();
        app.add_option("--const", constant, "Threshold constant C (default depends on --norm)");
        app.add_option("--lambda-t", lambda_t, "Interval expansion step")->check(CLI::PositiveNumber)->capture_default_str();
        app.add_option("--rho-sub", rho_sub, "Overestimation threshold factor");
        app.add_option("--min-segment", min_segment, "Minimum points each side of a split (0 = lambda-t)");
        app.add_option("--penalty-alpha", penalty_alpha, "Information-criterion penalty scale");
        app.add_flag("--no-refine", no_refine, "Keep candidate locations as detected");
        app.add_option("--subsample", subsample, "Subsampling step (0 = off)");
        app.add_option("--quorum", quorum, "Subsampling vote quorum (0 = majority)");
        app.add_option("--preaverage", preaverage, "Pre-averaging window (0 = off)");
    }

    void apply(PipelineConfig& cfg) const {
        CcidConfig& c = cfg.ccid;
        c.norm = ScenarioOptions::lower(norm) == "linf" ? Norm::linf : Norm::l2;
        c.stop = ScenarioOptions::lower(stop) == "threshold" ? StopRule::threshold : StopRule::information_criterion;
        c.constant = constant;
        c.lambda_t = lambda_t;
        if (rho_sub) c.suboptimal_factor = *rho_sub;
        c.min_segment = min_segment;
        if (penalty_alpha) c.penalty_alpha = *penalty_alpha;
        c.refine = !no_refine;
        c.validate();
        cfg.subsample = subsample;
        cfg.quorum = quorum;
        cfg.preaverage = preaverage;
        if (subsample > 0 && preaverage > 0)
            throw std::invalid_argument("--subsample and --preaverage are mutually exclusive");
    }
};

// ---- helpers ---------------------------------------------------------------

const char* norm_name(Norm n) { return n == Norm::linf ? "linf" : "l2"; }

json config_json(const PipelineConfig& cfg) {
    const CcidConfig& c = cfg.ccid;
    json j;
    j["decomposition"] = cfg.decomposition == Decomposition::hosvd ? "hosvd" : "cp";
    j["rank"] = cfg.rank;
    j["auto_rank"] = cfg.auto_rank;
    if (cfg.auto_rank) j["normo"] = {{"r_max", cfg.normo.r_max}, {"delta", cfg.normo.delta}};
    j["als"] = {{"max_iters", cfg.als.max_iters}, {"rel_tol", cfg.als.rel_tol}, {"restarts", cfg.als.restarts}};
    j["time_mode"] = cfg.time_mode;
    j["normalize_slices"] = cfg.normalize_slices;
    j["ccid"] = {{"norm", norm_name(c.norm)},
                 {"stop", c.stop == StopRule::threshold ? "threshold" : "ic"},
                 {"constant", c.threshold_constant()},
                 {"lambda_t", c.lambda_t},
                 {"suboptimal_factor", c.suboptimal_factor},
                 {"min_segment", c.min_seg()},
                 {"penalty_alpha", c.penalty_alpha},
                 {"penalty_d_exponent", c.penalty_d_exponent},
                 {"penalty_d_offset", c.penalty_d_offset},
                 {"penalty_log_exponent", c.penalty_log_exponent},
                 {"path_norm", norm_name(c.path_norm)},
                 {"refine", c.refine}};
    j["subsample"] = cfg.subsample;
    j["quorum"] = cfg.quorum;
    j["preaverage"] = cfg.preaverage;
    return j;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os || !(os << text)) throw IoError("cannot write " + path.string());
}

DenseTensor load_tensor(const fs::path& path) {
    DenseTensor t = read_tsr1(path);
    if (has_non_finite(t)) throw NumericError(path.string() + " contains NaN or Inf");
    return t;
}

bool is_csv(const fs::path& path) {
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext == ".csv";
}

/// One row per change-point: index, importance rank (1 = most important), CS*.
/// Refinement keeps the order of the chosen model, so refined points are
/// matched to path entries by position.
std::string detection_csv(const DetectionResult& r) {
    std::vector<std::size_t> ranks(r.change_points.size(), 0);
    if (r.chosen_model == r.change_points.size() && r.chosen_model <= r.solution_path.size()) {
        std::vector<std::size_t> by_position(r.chosen_model);
        std::iota(by_position.begin(), by_position.end(), std::size_t{0});
        std::sort(by_position.begin(), by_position.end(),
                  [&](std::size_t a, std::size_t b) { return r.solution_path[a] < r.solution_path[b]; });
        for (std::size_t k = 0; k < by_position.size(); ++k) ranks[k] = by_position[k] + 1;
    } else {
        for (std::size_t k = 0; k < r.change_points.size(); ++k) {
            const auto it = std::find(r.solution_path.begin(), r.solution_path.end(), r.change_points[k]);
            if (it != r.solution_path.end()) ranks[k] = static_cast<std::size_t>(it - r.solution_path.begin()) + 1;
        }
    }
    std::ostringstream os;
    os << "index,importance_rank,cs_star\n" << std::setprecision(10);
    for (std::size_t k = 0; k < r.change_points.size(); ++k) {
        os << r.change_points[k] << ',';
        if (ranks[k] == 0) {
            os << ",\n";
            continue;
        }
        os << ranks[k] << ',';
        if (ranks[k] <= r.path_scores.size()) os << r.path_scores[ranks[k] - 1];
        os << '\n';
    }
    return os.str();
}

json detection_json(const DetectionResult& r) {
    json j;
    j["change_points"] = r.change_points;
    j["chosen_model"] = r.chosen_model;
    j["solution_path"] = r.solution_path;
    j["path_scores"] = r.path_scores;
    j["ic_values"] = r.ic_values;
    j["candidates"] = r.candidates;
    return j;
}

std::string matrix_csv(const Matrix& m, const std::string& header = {}) {
    std::ostringstream os;
    write_csv_matrix(os, m, header);
    return os.str();
}

std::string series_header(Eigen::Index p) {
    std::string h;
    for (Eigen::Index i = 0; i < p; ++i) h += (i ? ",s" : "s") + std::to_string(i + 1);
    return h;
}

// ---- subcommands -----------------------------------------------------------

struct Common {
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_simulate(const ScenarioOptions& so, const Common& co) {
    if (co.out.empty()) throw std::invalid_argument("simulate needs --out DIR");
    const ScenarioSpec spec = so.spec();
    const Simulation sim = generate(spec, co.seed);
    const fs::path dir(co.out);
    ensure_dir(dir);
    write_tsr1(dir / "tensor.tsr", sim.tensor);
    write_truth_csv(dir / "truth.csv", sim.change_points);
    json j;
    j["tensor"] = (dir / "tensor.tsr").string();
    j["truth"] = (dir / "truth.csv").string();
    j["shape"] = sim.tensor.shape();
    j["change_points"] = sim.change_points;
    j["seed"] = co.seed;
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_decompose(const std::string& input, const DecompOptions& dopt, const Common& co) {
    PipelineConfig cfg;
    dopt.apply(cfg);
    const DenseTensor t = load_tensor(input);
    const std::size_t mode = resolve_time_mode(t, cfg.time_mode);
    const DenseTensor x = cfg.normalize_slices ? normalize_time_slices(t, mode) : t;
    const fs::path dir(co.out);
    if (!co.out.empty()) ensure_dir(dir);

    json manifest;
    manifest["input"] = input;
    manifest["shape"] = t.shape();
    manifest["time_mode"] = mode;
    manifest["normalize_slices"] = cfg.normalize_slices;
    Matrix series;
    if (cfg.decomposition == Decomposition::hosvd) {
        std::vector<std::size_t> ranks;
        for (std::size_t n : t.shape()) ranks.push_back(std::min(cfg.rank, n));
        const HOSVDModel m = hosvd(x, ranks);
        series = time_series_from_hosvd(m, mode);
        manifest["kind"] = "hosvd";
        manifest["ranks"] = ranks;
        manifest["relative_error"] = (x.vec() - m.reconstruct().vec()).norm() / std::max(frobenius_norm(x), 1e-300);
        if (!co.out.empty()) {
            write_tsr1(dir / "core.tsr", m.core);
            manifest["core"] = "core.tsr";
        }
        std::vector<std::string> files;
        for (std::size_t k = 0; k < m.factors.size(); ++k) {
            files.push_back("factor_" + std::to_string(k + 1) + ".csv");
            if (!co.out.empty()) write_text(dir / files.back(), matrix_csv(m.factors[k]));
        }
        manifest["factors"] = files;
    } else {
        std::size_t rank = cfg.rank;
        if (cfg.auto_rank) {
            NormoConfig normo = cfg.normo;
            normo.als.seed = co.seed;
            rank = normo_select(x, normo);
        }
        AlsConfig als = cfg.als;
        als.rank = rank;
        als.seed = co.seed;
        const CPModel m = cp_als(x, als);
        series = time_series_from_cp(m, mode);
        manifest["kind"] = "cp";
        manifest["rank"] = rank;
        manifest["weights"] = std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size());
        manifest["iterations"] = m.iterations;
        manifest["relative_error"] = m.relative_error;
        std::vector<std::string> files;
        for (std::size_t k = 0; k < m.factors.size(); ++k) {
            files.push_back("factor_" + std::to_string(k + 1) + ".csv");
            if (!co.out.empty()) write_text(dir / files.back(), matrix_csv(m.factors[k]));
        }
        manifest["factors"] = files;
    }
    manifest["seed"] = co.seed;
    manifest["series"] = "series.csv";
    if (!co.out.empty()) {
        write_text(dir / "series.csv", matrix_csv(series.transpose(), series_header(series.rows())));
        write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    }
    std::cout << manifest.dump(2) << '\n';
    return 0;
}

int cmd_normo(const std::string& input, const DecompOptions& dopt, const Common& co) {
    PipelineConfig cfg;
    dopt.apply(cfg);
    const DenseTensor t = load_tensor(input);
    NormoConfig normo = cfg.normo;
    normo.als.seed = co.seed;
    const NormoResult r = normo_select_audit(t, normo);
    std::ostringstream os;
    os << "rank,max_correlation,redundant\n" << std::setprecision(10);
    for (const auto& row : r.audit) os << row.rank << ',' << row.max_correlation << ',' << (row.redundant ? 1 : 0) << '\n';
    if (!co.out.empty()) write_text(co.out, os.str());
    std::cout << os.str();
    std::cerr << "selected rank " << r.selected_rank << '\n';
    return 0;
}

int cmd_detect(const std::string& input, const DecompOptions& dopt, const CcidOptions& copt, const Common& co) {
    PipelineConfig cfg;
    dopt.apply(cfg);
    copt.apply(cfg);
    const auto start = std::chrono::steady_clock::now();
    Matrix series;
    std::size_t rank = 0;
    std::string source;
    if (is_csv(input)) {
        series = read_series_csv(input);
        if (!series.allFinite()) throw NumericError(input + " contains NaN or Inf");
        source = "csv";
    } else {
        const DenseTensor t = load_tensor(input);
        if (t.order() == 2) {
            const std::size_t mode = resolve_time_mode(t, cfg.time_mode);
            series = mode == 2 ? unfold(t, 1) : unfold(t, 2);
            source = "matrix";
        } else {
            series = decompose_series(t, cfg, derive_seed(co.seed, {stream::als_init}), &rank);
            source = "tensor";
        }
    }
    const double decompose_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const DetectionResult r = detect_series(series, cfg);
    const double total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json summary;
    summary["input"] = input;
    summary["source"] = source;
    summary["series"] = {{"components", series.rows()}, {"length", series.cols()}};
    if (source == "tensor") summary["rank"] = rank;
    summary["seed"] = co.seed;
    summary["config"] = config_json(cfg);
    summary["result"] = detection_json(r);
    summary["timing"] = {{"decompose_seconds", decompose_seconds}, {"total_seconds", total_seconds}};

    const std::string csv = detection_csv(r);
    if (!co.out.empty()) {
        const fs::path dir(co.out);
        ensure_dir(dir);
        write_text(dir / "detections.csv", csv);
        write_text(dir / "summary.json", summary.dump(2) + "\n");
    }
    std::cout << csv;
    return 0;
}

int cmd_eval(const std::string& truth_path, const std::string& estimate_path, std::size_t T) {
    const auto truth = read_truth_csv(fs::path(truth_path));
    // detection CSVs carry extra columns; the first one is the index
    const auto estimate = read_truth_csv(fs::path(estimate_path));
    if (T < 2) throw std::invalid_argument("eval needs --length T >= 2");
    for (std::size_t c : truth)
        if (c >= T) throw std::invalid_argument("true change-point " + std::to_string(c) + " outside (0, T)");
    const EvalRecord rec = evaluate(truth, estimate, T);
    std::cout << "n_true,n_est,n_hat_minus_n,d_h\n"
              << truth.size() << ',' << estimate.size() << ',' << rec.n_hat_minus_n << ',' << std::setprecision(10)
              << rec.d_h << '\n';
    return 0;
}

std::string records_csv(const BenchResult& res, std::uint64_t master) {
    std::ostringstream os;
    os << "replication,seed,n_true,n_est,n_hat_minus_n,d_h,time_s,estimates\n" << std::setprecision(10);
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const EvalRecord& r = res.records[i];
        os << i << ',' << replication_seed(master, i) << ',' << r.true_cps.size() << ',' << r.est_cps.size() << ','
           << r.n_hat_minus_n << ',' << r.d_h << ',' << r.elapsed_seconds << ',';
        for (std::size_t k = 0; k < r.est_cps.size(); ++k) os << (k ? " " : "") << r.est_cps[k];
        os << '\n';
    }
    return os.str();
}

struct BenchOptions {
    std::size_t reps = 100;
    std::size_t workers = 1;
    bool no_timing = false;
    std::string method = "tenseg";
    std::string records;
    bool header = true;
};

int cmd_bench(const ScenarioOptions& so, const DecompOptions& dopt, const CcidOptions& copt, const Common& co,
              const BenchOptions& bo) {
    BenchConfig cfg;
    cfg.scenario = so.spec();
    dopt.apply(cfg.pipeline);
    copt.apply(cfg.pipeline);
    if (bo.reps < 1) throw std::invalid_argument("--reps must be >= 1");
    cfg.replications = bo.reps;
    cfg.master_seed = co.seed;
    cfg.workers = std::max<std::size_t>(1, bo.workers);
    BenchResult res = run_bench(cfg);
    if (bo.no_timing) {
        for (auto& r : res.records) r.elapsed_seconds = 0.0;
        res.table = tabulate(res.records);
    }
    const std::string c_cp = cfg.pipeline.auto_rank ? "auto" : std::to_string(cfg.pipeline.rank);
    std::ostringstream os;
    if (bo.header) os << table_csv_header() << '\n';
    os << table_csv_row(bo.method, so.model_label(), c_cp, res.table) << '\n';
    if (!bo.records.empty()) write_text(bo.records, records_csv(res, co.seed));
    if (!co.out.empty()) write_text(co.out, os.str());
    std::cout << os.str();
    return 0;
}

int cmd_run(const ScenarioOptions& so, const DecompOptions& dopt, const CcidOptions& copt, const Common& co) {
    PipelineConfig cfg;
    dopt.apply(cfg);
    copt.apply(cfg);
    const ScenarioSpec spec = so.spec();
    const Simulation sim = generate(spec, co.seed);
    const PipelineResult res = run_pipeline(sim.tensor, cfg, derive_seed(co.seed, {stream::als_init}));
    const std::size_t T = sim.tensor.shape().back();
    const EvalRecord rec = evaluate(sim.change_points, res.detection.change_points, T, res.seconds);

    json summary;
    summary["scenario"] = so.model_label();
    summary["shape"] = sim.tensor.shape();
    summary["seed"] = co.seed;
    summary["truth"] = sim.change_points;
    summary["rank"] = res.rank;
    summary["config"] = config_json(cfg);
    summary["result"] = detection_json(res.detection);
    summary["evaluation"] = {{"n_hat_minus_n", rec.n_hat_minus_n}, {"d_h", rec.d_h}};
    summary["timing"] = {{"pipeline_seconds", res.seconds}};
    if (!co.out.empty()) {
        const fs::path dir(co.out);
        ensure_dir(dir);
        write_tsr1(dir / "tensor.tsr", sim.tensor);
        write_truth_csv(dir / "truth.csv", sim.change_points);
        write_text(dir / "detections.csv", detection_csv(res.detection));
        write_text(dir / "summary.json", summary.dump(2) + "\n");
    }
    std::cout << summary.dump(2) << '\n';
    return 0;
}

/// CLI11 reads subcommand options from a [subcommand] section. A config file
/// without sections is copied to a temporary file under the section of the
/// subcommand being run; returns that file so it can be removed.
std::optional<fs::path> scope_config(std::vector<std::string>& args, const CLI::App& app) {
    std::string sub;
    for (const auto& a : args)
        if (a.rfind("-", 0) != 0 && app.get_subcommand_no_throw(a)) {
            sub = a;
            break;
        }
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string* value = nullptr;
        std::string prefix;
        if (args[i] == "--config" && i + 1 < args.size()) {
            value = &args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            value = &args[i];
            prefix = "--config=";
        }
        if (!value || sub.empty()) continue;
        std::ifstream is(value->substr(prefix.size()));
        if (!is) return std::nullopt;
        std::stringstream text;
        text << is.rdbuf();
        std::string line;
        while (std::getline(text, line)) {
            const auto first = line.find_first_not_of(" \t");
            if (first != std::string::npos && line[first] == '[') return std::nullopt;
        }
        const fs::path scoped = fs::temp_directory_path() / ("tenseg-config-" + std::to_string(::getpid()) + ".toml");
        std::ofstream os(scoped);
        os << '[' << sub << "]\n" << text.str() << '\n';
        if (!os) return std::nullopt;
        *value = prefix + scoped.string();
        return scoped;
    }
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Change-point detection in the network structure of tensor time series"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key = value file of option values; flags take precedence");

    Common co;
    ScenarioOptions so;
    DecompOptions dopt;
    CcidOptions copt;
    BenchOptions bo;
    std::string input;
    std::string truth;
    std::string estimate;
    std::size_t length = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", co.seed, "Random seed")->capture_default_str();
        sub->add_option("--out", co.out, "Output path");
    };

    auto* simulate = app.add_subcommand("simulate", "Generate a tensor time series with planted change-points");
    so.add(*simulate);
    add_common(simulate);

    auto* decompose = app.add_subcommand("decompose", "CP or HOSVD decomposition of a TSR1 tensor");
    decompose->add_option("--input", input, "TSR1 tensor")->required();
    dopt.add(*decompose);
    add_common(decompose);

    auto* normo = app.add_subcommand("normo", "NORMO rank-selection audit");
    normo->add_option("--input", input, "TSR1 tensor")->required();
    dopt.add(*normo);
    add_common(normo);

    auto* detect_cmd = app.add_subcommand("detect", "Detect change-points in a tensor or a series CSV");
    detect_cmd->add_option("--input", input, "TSR1 tensor or CSV (one row per time point)")->required();
    dopt.add(*detect_cmd);
    copt.add(*detect_cmd);
    add_common(detect_cmd);

    auto* eval = app.add_subcommand("eval", "Score detections against the truth");
    eval->add_option("--truth", truth, "Truth CSV")->required();
    eval->add_option("--estimate", estimate, "Detection CSV")->required();
    eval->add_option("--length", length, "Series length T")->required();

    auto* bench = app.add_subcommand("bench", "Monte Carlo replications summarized as a table row");
    so.add(*bench);
    dopt.add(*bench);
    copt.add(*bench);
    add_common(bench);
    bench->add_option("--reps", bo.reps, "Replications")->capture_default_str();
    bench->add_option("--workers", bo.workers, "Worker threads")->capture_default_str();
    bench->add_flag("--no-timing", bo.no_timing, "Report zero timings (byte-reproducible output)");
    bench->add_option("--method", bo.method, "Method label of the table row")->capture_default_str();
    bench->add_option("--records", bo.records, "Per-replication CSV");
    bench->add_flag("!--no-header", bo.header, "Omit the CSV header");

    auto* run = app.add_subcommand("run", "Simulate, detect and evaluate one scenario");
    so.add(*run);
    dopt.add(*run);
    copt.add(*run);
    add_common(run);

    std::vector<std::string> args(argv + 1, argv + argc);
    struct TempFile {
        std::optional<fs::path> path;
        ~TempFile() {
            std::error_code ec;
            if (path) fs::remove(*path, ec);
        }
    } scoped_config;
    try {
        scoped_config.path = scope_config(args, app);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::FileError& e) {
        app.exit(e);
        return 3;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*simulate) return cmd_simulate(so, co);
        if (*decompose) return cmd_decompose(input, dopt, co);
        if (*normo) return cmd_normo(input, dopt, co);
        if (*detect_cmd) return cmd_detect(input, dopt, copt, co);
        if (*eval) return cmd_eval(truth, estimate, length);
        if (*bench) return cmd_bench(so, dopt, copt, co, bo);
        if (*run) return cmd_run(so, dopt, copt, co);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 2;
}
