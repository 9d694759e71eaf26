#pragma once

// Case-study presets, the simulate -> perturb -> sample -> train pipeline,
// the dataset-size ablation and the report/manifest writers.

#include "wildfire/config.hpp"
#include "wildfire/dataset.hpp"
#include "wildfire/fdsolver.hpp"
#include "wildfire/stochastic.hpp"
#include "wildfire/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace wildfire {

struct CaseSpec {
    std::string id;
    bool desk = false;
    std::string description;
    RunConfig config;
    std::size_t expected_points = 0; ///< dataset cardinality for the preset spacing
};

inline const std::vector<std::string>& case_ids()
{
    static const std::vector<std::string> ids{"1", "1A", "1B", "1C", "2", "3", "4"};
    return ids;
}

inline std::string case_list()
{
    std::string s;
    for (const auto& id : case_ids())
        s += (s.empty() ? "" : ", ") + id;
    return "{" + s + "}";
}

/// Full-scale presets, or their desk-scale variants when `desk` is set.
inline CaseSpec case_preset(const std::string& id, bool desk = false)
{
    const bool known = std::find(case_ids().begin(), case_ids().end(), id) != case_ids().end();
    if (!known)
        throw ConfigError("unknown case '" + id + "'; available cases: " + case_list());
    const bool two_d = id == "3" || id == "4";
    CaseSpec s;
    s.id = id;
    s.desk = desk;
    s.config = default_config(two_d ? 2 : 1);
    auto& c = s.config;
    c.noise.enabled = id == "2" || id == "4";

    double spacing = 1.0;
    if (id == "1A")
        spacing = 0.5;
    else if (id == "1B")
        spacing = 2.0;
    else if (id == "1C")
        spacing = 5.0;
    else if (two_d)
        spacing = 4.0;

    if (!desk) {
        c.schedule.adam_iters = two_d ? 60000 : 40000;
        c.schedule.adam.lr = 3e-4;
        c.schedule.lbfgs.max_iterations = 20000;
        c.schedule.log_every = 10;
    } else {
        c.schedule.adam_iters = 10000;
        c.schedule.adam.lr = 1e-3;
        c.schedule.lbfgs.max_iterations = 3000;
        c.schedule.log_every = 10;
        if (id == "2")
            spacing = 2.0;
        if (two_d)
            spacing = 10.0;
        if (id == "1A") {
            c.schedule.batch_size = 5151;
            c.schedule.lbfgs.max_iterations = 500;
        }
    }
    c.sampling = {spacing, two_d ? spacing : 0.0, spacing};

    const char* what = id == "2" || id == "4" ? "noisy" : "clean";
    s.description = std::string(two_d ? "2D " : "1D ") + what + " data, dx=dt=" + format_double(spacing) +
                    (desk ? " (desk scale)" : "");
    s.expected_points = expected_cardinality({c.grid.dim, c.grid.lx, two_d ? c.grid.ly : 0.0, c.grid.t_end},
                                             c.sampling);
    c.validate();
    return s;
}

// ---------------------------------------------------------------------------

struct SimulationResult {
    Trajectory trajectory;
    ParamSeries series;
    double seconds = 0.0;
};

/// Ground truth for a configuration; with noise enabled theta follows one GP
/// draw per component, sampled at the stored time levels.
inline SimulationResult simulate_config(const RunConfig& c)
{
    const auto t0 = std::chrono::steady_clock::now();
    Grid g = c.simulation_grid();
    ParamSeries series = ParamSeries::constant(c.theta_true, g);
    if (c.noise.enabled) {
        GpSpec spec;
        spec.delta = c.noise.delta;
        spec.zeta = c.noise.zeta;
        spec.seed = c.noise.seed;
        spec.times = dimensionless_times(g);
        series = perturb_params(c.theta_true, spec, g.t_end);
        if (c.grid.substeps == 0)
            g.substeps = required_substeps(g, series, c.constants);
    }
    SimulationResult r;
    r.trajectory = simulate(g, c.initial, series, c.constants);
    r.series = std::move(series);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

struct SliceRow {
    double t_dimless = 0.0;
    double x = 0.0;
    double y = 0.0;
    double T_true = 0.0;
    double T_pred = 0.0;
};

struct CaseReport {
    std::string id;
    bool desk = false;
    std::string description;
    int dim = 1;
    std::size_t points = 0;
    std::size_t expected_points = 0;
    Spacing spacing{};
    std::vector<double> theta_true;
    std::vector<double> theta_hat;
    std::vector<double> rel_error;
    double max_rel_error = 0.0;
    LossBreakdown final_loss{};
    std::string lbfgs_status;
    int adam_iters = 0;
    int lbfgs_iterations = 0;
    double simulate_seconds = 0.0;
    double train_seconds = 0.0;
    std::vector<TraceRow> trace;
    std::vector<SliceRow> slices;
    MlpParams params{};
    Normalization norm{};
    RunConfig config{};
};

inline std::vector<double> relative_errors(const std::vector<double>& est, const std::vector<double>& truth)
{
    if (est.size() != truth.size())
        throw DimensionError("relative_errors: length mismatch");
    std::vector<double> e(est.size());
    for (std::size_t k = 0; k < est.size(); ++k)
        e[k] = std::abs(est[k] - truth[k]) / std::abs(truth[k]);
    return e;
}

/// Temperature cross-sections at t/t_end = 0.5 and 1 (and y/Ly = 0.52 in 2D)
/// on the nodes of the sampling spacing.
inline std::vector<SliceRow> temperature_slices(const Trajectory& traj, const Spacing& spacing, const MlpParams& p,
                                                const Normalization& norm)
{
    const Grid& g = traj.grid;
    std::vector<SliceRow> rows;
    const int sx = std::max(1, static_cast<int>(std::lround(spacing.dx / g.dx())));
    const int j = g.dim == 2 ? static_cast<int>(std::lround(0.52 * (g.ny - 1))) : 0;
    for (double tau : {0.5, 1.0}) {
        const int n = static_cast<int>(std::lround(tau * (g.nt - 1)));
        const auto& f = traj.frames[static_cast<std::size_t>(n)];
        for (int i = 0; i < g.nx; i += sx) {
            SliceRow r;
            r.t_dimless = g.t(n) / g.t_end;
            r.x = g.x(i);
            r.y = g.y(j);
            r.T_true = f.T[g.index(i, j)];
            r.T_pred = predict_state(p, norm, r.x, r.y, g.t(n)).T;
            rows.push_back(r);
        }
    }
    return rows;
}

/// Trains on a dataset and fills the training part of a report.
inline CaseReport train_report(const Dataset& ds, const RunConfig& c, const CheckpointFn& checkpoint = {})
{
    CaseReport rep;
    rep.dim = ds.domain.dim;
    rep.points = ds.size();
    rep.expected_points = expected_cardinality(ds.domain, ds.spacing);
    rep.spacing = ds.spacing;
    rep.config = c;
    rep.adam_iters = c.schedule.adam_iters;
    const auto t0 = std::chrono::steady_clock::now();
    TrainResult tr = train(ds, c.network, c.schedule, c.constants, c.seeds, c.weights, checkpoint);
    rep.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.theta_hat = tr.theta.to_vector();
    rep.theta_true = c.theta_true.to_vector();
    rep.rel_error = relative_errors(rep.theta_hat, rep.theta_true);
    rep.max_rel_error = *std::max_element(rep.rel_error.begin(), rep.rel_error.end());
    rep.final_loss = tr.final_loss;
    rep.lbfgs_status = c.schedule.lbfgs.max_iterations > 0 ? to_string(tr.lbfgs_status) : "skipped";
    rep.lbfgs_iterations = tr.lbfgs_iterations;
    rep.trace = std::move(tr.trace);
    rep.params = std::move(tr.params);
    rep.norm = tr.norm;
    return rep;
}

using ProgressFn = std::function<void(const std::string&)>;

/// simulate -> (perturb) -> sample -> train -> report.
inline CaseReport run_config(const RunConfig& c, const ProgressFn& progress = {},
                             const CheckpointFn& checkpoint = {})
{
    c.validate();
    if (progress)
        progress("simulating");
    const SimulationResult sim = simulate_config(c);
    const Dataset ds = extract_dataset(sim.trajectory, c.sampling);
    if (progress)
        progress("training on " + std::to_string(ds.size()) + " points");
    CaseReport rep = train_report(ds, c, checkpoint);
    rep.simulate_seconds = sim.seconds;
    rep.slices = temperature_slices(sim.trajectory, c.sampling, rep.params, rep.norm);
    return rep;
}

inline CaseReport run_case(const CaseSpec& spec, const ProgressFn& progress = {},
                           const CheckpointFn& checkpoint = {})
{
    try {
        CaseReport rep = run_config(spec.config, progress, checkpoint);
        rep.id = spec.id;
        rep.desk = spec.desk;
        rep.description = spec.description;
        rep.expected_points = spec.expected_points;
        return rep;
    } catch (const DivergenceError& e) {
        throw DivergenceError("case " + spec.id + ": " + e.what(), e.trace());
    } catch (const NumericError& e) {
        throw NumericError("case " + spec.id + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError("case " + spec.id + ": " + e.what());
    }
}

struct AblationRow {
    std::string id;
    std::size_t points = 0;
    double dx = 0.0;
    double dt = 0.0;
    std::vector<double> theta_hat;
    std::vector<double> rel_error;
    double max_rel_error = 0.0;
    double seconds = 0.0;
};

inline std::vector<AblationRow> ablation_table(const std::vector<CaseReport>& reports)
{
    std::vector<AblationRow> rows;
    for (const auto& r : reports)
        rows.push_back({r.id, r.points, r.spacing.dx, r.spacing.dt, r.theta_hat, r.rel_error, r.max_rel_error,
                        r.simulate_seconds + r.train_seconds});
    return rows;
}

/// Runs every case in `ids` and tabulates the results.
inline std::vector<AblationRow> ablation(const std::vector<std::string>& ids, bool desk,
                                         std::vector<CaseReport>* reports = nullptr,
                                         const ProgressFn& progress = {})
{
    if (ids.empty())
        throw ConfigError("ablation: need at least one case");
    std::vector<CaseReport> all;
    for (const auto& id : ids) {
        if (progress)
            progress("case " + id);
        all.push_back(run_case(case_preset(id, desk), progress));
    }
    auto rows = ablation_table(all);
    if (reports)
        *reports = std::move(all);
    return rows;
}

/// True when the max-error column is non-decreasing along `rows`, allowing at
/// most one decrease of at most `slack` (absolute, in relative-error units).
inline bool error_trend_holds(const std::vector<AblationRow>& rows, double slack = 0.02)
{
    int inversions = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double drop = rows[k - 1].max_rel_error - rows[k].max_rel_error;
        if (drop > 0.0) {
            if (drop > slack)
                return false;
            ++inversions;
        }
    }
    return inversions <= 1;
}

// ---------------------------------------------------------------------------
// Output files

inline std::string trace_header(int dim)
{
    std::string h = "iteration,phase,L,L_D,L_PDE,L_BI";
    for (const auto& n : PhysParams::names(dim))
        h += "," + n;
    return h;
}

inline void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace, int dim)
{
    std::ofstream os(path);
    if (!os)
        throw ConfigError("cannot write '" + path + "'");
    os << trace_header(dim) << '\n';
    for (const auto& r : trace) {
        os << r.iteration << ',' << r.phase << ',' << format_double(r.loss.total) << ','
           << format_double(r.loss.data) << ',' << format_double(r.loss.pde) << ',' << format_double(r.loss.bi);
        for (double v : r.theta)
            os << ',' << format_double(v);
        os << '\n';
    }
}

inline void write_slices_csv(const std::string& path, const std::vector<SliceRow>& rows)
{
    std::ofstream os(path);
    if (!os)
        throw ConfigError("cannot write '" + path + "'");
    os << "t_dimless,x,y,T_true,T_pred\n";
    for (const auto& r : rows)
        os << format_double(r.t_dimless) << ',' << format_double(r.x) << ',' << format_double(r.y) << ','
           << format_double(r.T_true) << ',' << format_double(r.T_pred) << '\n';
}

inline void write_params_csv(const std::string& path, const MlpParams& p)
{
    std::ofstream os(path);
    if (!os)
        throw ConfigError("cannot write '" + path + "'");
    os << "index,value\n";
    for (std::size_t k = 0; k < p.flat.size(); ++k)
        os << k << ',' << format_double(p.flat[k]) << '\n';
}

inline std::vector<double> read_params_csv(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open '" + path + "'");
    std::string line;
    std::getline(is, line);
    if (split_csv(line) != std::vector<std::string>{"index", "value"})
        throw ConfigError(path + ": expected header 'index,value'");
    std::vector<double> v;
    std::size_t no = 1;
    while (std::getline(is, line)) {
        ++no;
        if (line.empty())
            continue;
        const auto f = split_csv(line);
        if (f.size() != 2)
            throw ConfigError(path + ": line " + std::to_string(no) + ": expected 2 fields");
        v.push_back(parse_double(f[1], no, "value"));
    }
    return v;
}

inline Json normalization_json(const Normalization& n)
{
    return {{"dim", n.dim},
            {"input_scale", n.input_scale},
            {"output_offset", n.output_offset},
            {"output_scale", n.output_scale}};
}

/// Checkpoint manifest: architecture, seed, iteration, theta estimate and the
/// output normalization needed to evaluate the network.
inline Json checkpoint_json(const MlpArch& arch, const TrainSeeds& seeds, long iteration, const PhysParams& theta,
                            const Normalization& norm)
{
    return {{"widths", arch.widths},
            {"output_activation", to_string(arch.output)},
            {"seed_init", seeds.init},
            {"iteration", iteration},
            {"theta_names", PhysParams::names(theta.dim)},
            {"theta", theta_json(theta)},
            {"normalization", normalization_json(norm)},
            {"params_file", "params.csv"}};
}

inline void write_checkpoint(const std::filesystem::path& dir, const MlpParams& p, const TrainSeeds& seeds,
                             long iteration, const PhysParams& theta, const Normalization& norm)
{
    std::filesystem::create_directories(dir);
    write_params_csv((dir / "params.csv").string(), p);
    write_json_file((dir / "checkpoint.json").string(), checkpoint_json(p.arch, seeds, iteration, theta, norm));
}

inline Json report_json(const CaseReport& r, bool include_timing = true)
{
    Json j;
    j["case"] = r.id;
    j["desk"] = r.desk;
    j["description"] = r.description;
    j["dim"] = r.dim;
    j["points"] = r.points;
    j["expected_points"] = r.expected_points;
    j["spacing"] = {{"dx", r.spacing.dx}, {"dy", r.spacing.dy}, {"dt", r.spacing.dt}};
    j["theta_names"] = PhysParams::names(r.dim);
    j["theta_true"] = r.theta_true;
    j["theta_hat"] = r.theta_hat;
    j["rel_error"] = r.rel_error;
    j["max_rel_error"] = r.max_rel_error;
    j["final_loss"] = {{"L", r.final_loss.total},
                       {"L_D", r.final_loss.data},
                       {"L_PDE", r.final_loss.pde},
                       {"L_BI", r.final_loss.bi}};
    j["adam_iters"] = r.adam_iters;
    j["lbfgs_iterations"] = r.lbfgs_iterations;
    j["lbfgs_status"] = r.lbfgs_status;
    j["trace_file"] = "trace.csv";
    j["slices_file"] = "slices.csv";
    if (include_timing)
        j["wall_time_s"] = {{"simulate", r.simulate_seconds}, {"train", r.train_seconds}};
    return j;
}

/// report.json, trace.csv, slices.csv, config.json and the final checkpoint.
inline void write_case_outputs(const std::filesystem::path& dir, const CaseReport& r)
{
    std::filesystem::create_directories(dir);
    write_json_file((dir / "config.json").string(), config_to_json(r.config));
    write_trace_csv((dir / "trace.csv").string(), r.trace, r.dim);
    if (!r.slices.empty())
        write_slices_csv((dir / "slices.csv").string(), r.slices);
    const long last = r.trace.empty() ? 0 : r.trace.back().iteration;
    write_checkpoint(dir / "checkpoint", r.params, r.config.seeds, last,
                     PhysParams::from_vector(r.theta_hat, r.dim), r.norm);
    write_json_file((dir / "report.json").string(), report_json(r));
}

inline void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows, int dim)
{
    std::ofstream os(path);
    if (!os)
        throw ConfigError("cannot write '" + path + "'");
    os << "case,points,dx,dt";
    for (const auto& n : PhysParams::names(dim))
        os << ",hat_" << n;
    for (const auto& n : PhysParams::names(dim))
        os << ",err_" << n;
    os << ",max_err,seconds\n";
    for (const auto& r : rows) {
        os << r.id << ',' << r.points << ',' << format_double(r.dx) << ',' << format_double(r.dt);
        for (double v : r.theta_hat)
            os << ',' << format_double(v);
        for (double v : r.rel_error)
            os << ',' << format_double(v);
        os << ',' << format_double(r.max_rel_error) << ',' << format_double(r.seconds) << '\n';
    }
}

/// Manifest for simulation and dataset outputs.
inline Json manifest_json(const RunConfig& c, const Grid& g, const std::optional<Spacing>& spacing,
                          std::size_t records = 0)
{
    Json j;
    j["grid"] = {{"dim", g.dim}, {"lx", g.lx}, {"ly", g.ly}, {"t_end", g.t_end}, {"nx", g.nx},
                 {"ny", g.ny},   {"nt", g.nt}, {"dx", g.dx()}, {"dy", g.dy()}, {"dt", g.dt()},
                 {"substeps", g.substeps}};
    if (spacing) {
        j["spacing"] = {{"dx", spacing->dx}, {"dy", spacing->dy}, {"dt", spacing->dt}};
        j["records"] = records;
    }
    j["theta_names"] = PhysParams::names(c.theta_true.dim);
    j["theta_true"] = theta_json(c.theta_true);
    j["noise"] = {{"enabled", c.noise.enabled}, {"delta", c.noise.delta}, {"zeta", c.noise.zeta},
                  {"seed", c.noise.seed}};
    j["constants"] = config_to_json(c)["constants"];
    j["initial"] = config_to_json(c)["initial"];
    return j;
}

inline void write_param_series_csv(const std::string& path, const ParamSeries& s)
{
    std::ofstream os(path);
    if (!os)
        throw ConfigError("cannot write '" + path + "'");
    os << "t";
    const int dim = s.values.empty() ? 1 : s.values.front().dim;
    for (const auto& n : PhysParams::names(dim))
        os << ',' << n;
    os << '\n';
    for (std::size_t k = 0; k < s.size(); ++k) {
        os << format_double(s.times[k]);
        for (double v : s.values[k].to_vector())
            os << ',' << format_double(v);
        os << '\n';
    }
}

} // namespace wildfire
