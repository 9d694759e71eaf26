// wildfire: simulate the spreading model, manufacture datasets, and recover
// the physical parameters with a physics-informed network.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numeric failure.

#include "wildfire.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace wildfire;

namespace {

struct Options {
    std::string config;
    std::string out = "out";
    std::string dataset;
    std::optional<std::uint64_t> seed;
    bool fast = false;
    std::string case_id;
    std::vector<std::string> cases{"1", "1B", "1C"};
};

void progress(const std::string& msg) { std::cerr << "[wildfire] " << msg << '\n'; }

RunConfig load_or_default(const Options& o, int dim_hint = 1)
{
    RunConfig c = o.config.empty() ? default_config(dim_hint) : load_config(o.config);
    return c;
}

void apply_fast(RunConfig& c)
{
    c.schedule.adam_iters = std::min(c.schedule.adam_iters, 10000);
    c.schedule.lbfgs.max_iterations = std::min(c.schedule.lbfgs.max_iterations, 3000);
}

std::string format_vector(const std::vector<double>& v)
{
    std::string s = "[";
    char buf[32];
    for (std::size_t k = 0; k < v.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s%.4f", k ? ", " : "", v[k]);
        s += buf;
    }
    return s + "]";
}

void print_result(const CaseReport& r, bool with_truth)
{
    std::cout << "points: " << r.points << '\n';
    std::cout << "theta_hat " << format_vector(r.theta_hat) << "  (";
    const auto names = PhysParams::names(r.dim);
    for (std::size_t k = 0; k < names.size(); ++k)
        std::cout << (k ? ", " : "") << names[k];
    std::cout << ")\n";
    if (with_truth) {
        std::cout << "theta_true " << format_vector(r.theta_true) << '\n';
        std::cout << "rel_error " << format_vector(r.rel_error) << "  max " << r.max_rel_error << '\n';
    }
    std::cout << "final loss " << r.final_loss.total << " (L_D " << r.final_loss.data << ", L_PDE "
              << r.final_loss.pde << ", L_BI " << r.final_loss.bi << ")\n";
}

int cmd_simulate(const Options& o)
{
    RunConfig c = load_or_default(o);
    if (o.seed)
        c.noise.seed = *o.seed;
    const SimulationResult sim = simulate_config(c);
    fs::create_directories(o.out);
    const fs::path out(o.out);
    write_trajectory_csv((out / "trajectory.csv").string(), sim.trajectory);
    write_param_series_csv((out / "theta_series.csv").string(), sim.series);
    write_json_file((out / "manifest.json").string(), manifest_json(c, sim.trajectory.grid, std::nullopt));
    write_json_file((out / "config.json").string(), config_to_json(c));
    const Grid& g = sim.trajectory.grid;
    std::cout << "simulated " << g.nt << " levels x " << g.nodes() << " nodes (" << g.substeps
              << " substeps per level) -> " << out.string() << '\n';
    return 0;
}

int cmd_make_dataset(const Options& o)
{
    RunConfig c = load_or_default(o);
    if (o.seed)
        c.noise.seed = *o.seed;
    const SimulationResult sim = simulate_config(c);
    const Dataset ds = extract_dataset(sim.trajectory, c.sampling);
    fs::create_directories(o.out);
    const fs::path out(o.out);
    write_dataset_csv((out / "dataset.csv").string(), ds);
    write_param_series_csv((out / "theta_series.csv").string(), sim.series);
    write_json_file((out / "manifest.json").string(), manifest_json(c, sim.trajectory.grid, ds.spacing, ds.size()));
    write_json_file((out / "config.json").string(), config_to_json(c));
    std::cout << "dataset: " << ds.size() << " records (" << ds.count(Tag::interior) << " interior, "
              << ds.count(Tag::boundary) << " boundary, " << ds.count(Tag::initial) << " initial) -> "
              << (out / "dataset.csv").string() << '\n';
    return 0;
}

int cmd_train(const Options& o)
{
    if (o.dataset.empty())
        throw ConfigError("train: --dataset is required");
    int dim = 1;
    const auto records = read_dataset_csv(o.dataset, dim);
    RunConfig c = load_or_default(o, dim);
    if (c.grid.dim != dim)
        throw ConfigError("train: dataset is " + std::to_string(dim) + "D but the config has grid.dim = " +
                          std::to_string(c.grid.dim));
    if (o.seed)
        c.seeds.init = *o.seed;
    if (o.fast)
        apply_fast(c);

    // theta* is reported only when the dataset's manifest carries it.
    bool have_truth = false;
    const fs::path manifest = fs::path(o.dataset).parent_path() / "manifest.json";
    Dataset ds;
    ds.domain = {dim, c.grid.lx, dim == 2 ? c.grid.ly : 0.0, c.grid.t_end};
    ds.spacing = c.sampling;
    if (fs::exists(manifest)) {
        const Json m = read_json_file(manifest.string());
        if (m.contains("theta_true")) {
            c.theta_true = PhysParams::from_vector(m.at("theta_true").get<std::vector<double>>(), dim);
            have_truth = true;
        }
        if (m.contains("grid")) {
            const auto& g = m.at("grid");
            ds.domain.lx = g.at("lx").get<double>();
            ds.domain.ly = g.at("ly").get<double>();
            ds.domain.t_end = g.at("t_end").get<double>();
        }
        if (m.contains("spacing")) {
            const auto& s = m.at("spacing");
            ds.spacing = {s.at("dx").get<double>(), s.at("dy").get<double>(), s.at("dt").get<double>()};
        }
    }
    ds.records = records;

    const fs::path out(o.out);
    CheckpointFn checkpoint;
    if (c.schedule.checkpoint_every > 0) {
        checkpoint = [&](const TrainProgress& p) {
            write_checkpoint(out / ("checkpoint_" + std::to_string(p.iteration)), *p.params, c.seeds, p.iteration,
                             *p.theta, Normalization::from_dataset(ds));
        };
    }
    fs::create_directories(out);
    write_json_file((out / "config.json").string(), config_to_json(c));
    progress("training on " + std::to_string(ds.size()) + " points");
    CaseReport r;
    try {
        r = train_report(ds, c, checkpoint);
    } catch (const DivergenceError& e) {
        write_trace_csv((out / "trace.csv").string(), e.trace(), dim);
        throw;
    }
    r.id = "train";
    r.description = "training on " + o.dataset;
    if (!have_truth) {
        r.theta_true.clear();
        r.rel_error.clear();
        r.max_rel_error = 0.0;
    }
    write_case_outputs(out, r);
    print_result(r, have_truth);
    return 0;
}

int cmd_case(const Options& o)
{
    CaseSpec spec = case_preset(o.case_id, o.fast);
    if (o.seed)
        spec.config.seeds.init = *o.seed;
    const fs::path out = fs::path(o.out);
    progress("case " + spec.id + ": " + spec.description);
    CaseReport r;
    try {
        r = run_case(spec, progress);
    } catch (const DivergenceError& e) {
        fs::create_directories(out);
        write_trace_csv((out / "trace.csv").string(), e.trace(), spec.config.grid.dim);
        throw;
    }
    write_case_outputs(out, r);
    print_result(r, true);
    std::cout << "expected points " << r.expected_points << ", report -> " << (out / "report.json").string()
              << '\n';
    return 0;
}

int cmd_ablation(const Options& o)
{
    for (const auto& id : o.cases)
        (void)case_preset(id, o.fast);
    std::vector<CaseReport> reports;
    const auto rows = ablation(o.cases, o.fast, &reports, progress);
    const fs::path out(o.out);
    fs::create_directories(out);
    for (const auto& r : reports)
        write_case_outputs(out / ("case_" + r.id), r);
    write_ablation_csv((out / "ablation.csv").string(), rows, reports.front().dim);
    std::cout << "case  points  dx   max_rel_error\n";
    for (const auto& r : rows)
        std::printf("%-5s %-7zu %-4g %.4f\n", r.id.c_str(), r.points, r.dx, r.max_rel_error);
    std::cout << "trend " << (error_trend_holds(rows) ? "holds" : "violated") << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wildfire PDE simulation and physics-informed parameter recovery"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool with_config) {
        if (with_config)
            sub->add_option("--config", o.config, "JSON configuration file")->envname("WILDFIRE_CONFIG");
        sub->add_option("--out", o.out, "output directory")->envname("WILDFIRE_OUT");
        sub->add_option("--seed", o.seed, "seed override (noise for simulate/make-dataset, init otherwise)");
        sub->add_flag("--fast", o.fast, "desk-scale profile");
    };

    auto* sim = app.add_subcommand("simulate", "forward-simulate and write the trajectory");
    add_common(sim, true);
    auto* mk = app.add_subcommand("make-dataset", "simulate and sample a training dataset");
    add_common(mk, true);
    auto* tr = app.add_subcommand("train", "recover theta from a dataset");
    add_common(tr, true);
    tr->add_option("--dataset", o.dataset, "dataset CSV")->required()->envname("WILDFIRE_DATASET");
    auto* cs = app.add_subcommand("case", "run a case-study preset");
    add_common(cs, false);
    cs->add_option("id", o.case_id, "case id " + case_list())->required();
    auto* ab = app.add_subcommand("ablation", "dataset-size sweep over case presets");
    add_common(ab, false);
    ab->add_option("--cases", o.cases, "case ids (default 1 1B 1C)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*sim)
            return cmd_simulate(o);
        if (*mk)
            return cmd_make_dataset(o);
        if (*tr)
            return cmd_train(o);
        if (*cs)
            return cmd_case(o);
        if (*ab)
            return cmd_ablation(o);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed manifest: " << e.what() << '\n';
        return 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
