// Acceptance checks, one PASS/FAIL line per criterion.
//
//   acceptance --group quick      criteria 1, 2, 3, 6 (about a minute)
//   acceptance --group recovery   criteria 4, 5, 7 (desk-scale training runs)
//   acceptance --group all
//
// Exit status is 0 only when every executed criterion passes.

#include "oracle.hpp"

#include "wildfire.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace wildfire;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

int failures = 0;

void emit(const std::string& id, const std::string& name, const Outcome& o, double seconds)
{
    std::printf("%s criterion %s (%s) [%.1f s]%s%s\n", o.pass ? "PASS" : "FAIL", id.c_str(), name.c_str(), seconds,
                o.detail.empty() ? "" : ": ", o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
}

template <class F>
void run(const std::string& id, const std::string& name, F&& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail += std::string(o.detail.empty() ? "" : "; ") + "exception: " + e.what();
    }
    emit(id, name, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string vec(const std::vector<double>& v)
{
    std::string s = "[";
    for (std::size_t k = 0; k < v.size(); ++k)
        s += (k ? ", " : "") + fmt("%.4f", v[k]);
    return s + "]";
}

void note(const std::string& s)
{
    std::printf("  %s\n", s.c_str());
    std::fflush(stdout);
}

// ---------------------------------------------------------------------------

void structural(Outcome& o)
{
    const std::size_t p1 = count_params({{2, 20, 20, 20, 20, 3}});
    const std::size_t p2 = count_params({{3, 20, 20, 20, 20, 3}});
    o.require(p1 == 1383, "1D parameter count " + std::to_string(p1));
    o.require(p2 == 1403, "2D parameter count " + std::to_string(p2));

    // Extraction from a real trajectory, checked against the table values.
    const auto c = canonical_constants();
    const auto th1 = PhysParams::from_vector(std::vector<double>{0.41, 0.25, 0.61}, 1);
    Grid g = Grid::uniform(1, 100, 0, 200, 0.5, 0, 0.5);
    g.substeps = required_substeps(g, ParamSeries::constant(th1, g), c);
    const auto traj = simulate(g, InitialCondition{}, th1, c);
    const std::vector<std::pair<double, std::size_t>> table{{0.5, 80601}, {1, 20301}, {2, 5151}, {5, 861}};
    for (const auto& [s, n] : table) {
        const auto got = extract_dataset(traj, {s, 0, s}).size();
        o.require(got == n, "spacing " + fmt("%g", s) + " gave " + std::to_string(got));
    }

    // 2D: the count depends on sampling only, so cheap physics suffice.
    PhysConstants off;
    off.ambient_temperature = 1.0;
    const auto th2 = PhysParams::from_vector(std::vector<double>{0.74, 0.41, 0.35, 0.2, 0.4}, 2);
    Grid g2 = Grid::uniform(2, 100, 100, 200, 4, 4, 4);
    g2.substeps = required_substeps(g2, ParamSeries::constant(th2, g2), off);
    InitialCondition ic;
    ic.center_x = ic.center_y = 50;
    const auto got2 = extract_dataset(simulate(g2, ic, th2, off), {4, 4, 4}).size();
    o.require(got2 == 34476, "2D count " + std::to_string(got2));
    note("params 1383/1403: " + std::to_string(p1) + "/" + std::to_string(p2) + ", 2D points " +
         std::to_string(got2));
}

Dataset synthetic(int dim, double spacing)
{
    Dataset ds;
    ds.domain = {dim, 100.0, dim == 2 ? 100.0 : 0.0, 200.0};
    ds.spacing = {spacing, dim == 2 ? spacing : 0.0, spacing};
    const int nx = static_cast<int>(100.0 / spacing);
    const int nt = static_cast<int>(200.0 / spacing);
    const int ny = dim == 2 ? nx : 0;
    for (int n = 0; n <= nt; ++n)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                Record r;
                r.x = i * spacing;
                r.y = j * spacing;
                r.t = n * spacing;
                const double s = std::sin(0.03 * r.x + 0.01 * r.t) + (dim == 2 ? std::cos(0.02 * r.y) : 0.0);
                r.value = {1.2 + 0.3 * s, 0.3 - 0.05 * s, 0.7 - 0.1 * s};
                const bool edge = i == 0 || i == nx || (dim == 2 && (j == 0 || j == ny));
                r.tag = n == 0 ? Tag::initial : edge ? Tag::boundary : Tag::interior;
                ds.records.push_back(r);
            }
    return ds;
}

void derivatives(Outcome& o)
{
    // Jets of the full-size networks at random points. Stencils run on the
    // extended precision forward pass: first derivatives h = 1e-5, second
    // derivatives (three-point) h = 1e-3.
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst1 = 0.0, worst2 = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const bool two = trial % 2 == 1;
        const MlpArch a{{two ? 3 : 2, 20, 20, 20, 20, 3}};
        const auto p = init_params(a, 1000 + static_cast<std::uint64_t>(trial));
        const std::vector<oracle::LD> flat(p.flat.begin(), p.flat.end());
        std::vector<double> in{unit(rng), unit(rng), unit(rng)};
        in.resize(static_cast<std::size_t>(a.inputs()));
        for (int c = 0; c < 3; ++c)
            for (std::size_t k = 0; k < in.size(); ++k) {
                double d = 0.0, dd = 0.0;
                if (two) {
                    const auto j = net_jets<3>(p, in)[static_cast<std::size_t>(c)];
                    d = j.d[k];
                    dd = j.dd[k];
                } else {
                    const auto j = net_jets<2>(p, in)[static_cast<std::size_t>(c)];
                    d = j.d[k];
                    dd = j.dd[k];
                }
                auto f = [&](oracle::LD s) {
                    std::array<oracle::LD, 3> q{in[0], in[1], in.size() > 2 ? in[2] : 0.0};
                    q[k] += s;
                    return oracle::net(a, flat, q)[static_cast<std::size_t>(c)].v;
                };
                const oracle::LD h1 = 1e-5L, h2 = 1e-3L;
                const double fd1 = static_cast<double>((f(h1) - f(-h1)) / (2 * h1));
                const double fd2 = static_cast<double>((f(h2) - 2 * f(0) + f(-h2)) / (h2 * h2));
                worst1 = std::max(worst1, oracle::rel_error(d, fd1));
                worst2 = std::max(worst2, oracle::rel_error(dd, fd2));
            }
    }
    o.require(worst1 < 1e-6, "first-derivative rel error " + fmt("%.2e", worst1));
    o.require(worst2 < 1e-4, "second-derivative rel error " + fmt("%.2e", worst2));

    // Loss gradient over [params, theta] against a five-point stencil of the
    // extended precision per-point loss.
    double worst_g = 0.0;
    std::size_t checked = 0;
    std::normal_distribution<double> nrm(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int dim = trial % 2 == 0 ? 1 : 2;
        const auto ds = synthetic(dim, dim == 1 ? 20.0 : 50.0);
        const MlpArch a{{dim + 1, 6, 5, 3}};
        auto p = init_params(a, 500 + static_cast<std::uint64_t>(trial));
        for (auto& v : p.bias(a.layers() - 1))
            v = 0.1 * nrm(rng);
        std::vector<double> tv = dim == 1 ? std::vector<double>{0.41, 0.25, 0.61}
                                          : std::vector<double>{0.74, 0.41, 0.35, 0.2, 0.4};
        for (double& v : tv)
            v *= 0.5 + unit(rng);
        const auto theta = PhysParams::from_vector(tv, dim);
        PinnLoss loss(Batches::from_dataset(ds), Normalization::from_dataset(ds), canonical_constants(),
                      {0.5 + unit(rng), 0.5 + unit(rng)});
        std::vector<double> g(p.flat.size() + tv.size());
        loss.evaluate(p, theta, g);
        std::vector<oracle::LD> x(p.flat.begin(), p.flat.end());
        x.insert(x.end(), tv.begin(), tv.end());
        auto f = [&](const std::vector<oracle::LD>& v) { return oracle::loss(loss, a, v); };
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (std::abs(g[k]) <= 1e-8)
                continue;
            worst_g = std::max(worst_g, oracle::rel_error(g[k], static_cast<double>(oracle::derivative5(f, x, k, 1e-4L))));
            ++checked;
        }
    }
    o.require(worst_g < 1e-6, "loss-gradient rel error " + fmt("%.2e", worst_g));
    note("jets: worst rel error " + fmt("%.2e", worst1) + " (first), " + fmt("%.2e", worst2) +
         " (second) over 100 trials; loss gradient " + fmt("%.2e", worst_g) + " over " + std::to_string(checked) +
         " coordinates");
}

void solver_physics(Outcome& o)
{
    for (int dim : {1, 2}) {
        RunConfig c = default_config(dim);
        const auto traj = simulate_config(c).trajectory;
        const Grid& g = traj.grid;
        bool mono = true, pinned = true;
        for (std::size_t n = 0; n < traj.frames.size(); ++n) {
            const auto& f = traj.frames[n];
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const bool edge = i == 0 || i == g.nx - 1 || (dim == 2 && (j == 0 || j == g.ny - 1));
                    const std::size_t k = g.index(i, j);
                    if (edge && (f.T[k] != c.constants.ambient_temperature || f.E[k] != c.initial.endothermic ||
                                 f.X[k] != c.initial.exothermic))
                        pinned = false;
                    if (n > 0 && (f.E[k] > traj.frames[n - 1].E[k] || f.X[k] > traj.frames[n - 1].X[k]))
                        mono = false;
                }
        }
        o.require(mono, std::to_string(dim) + "D fuel increased somewhere");
        o.require(pinned, std::to_string(dim) + "D boundary not pinned");
        note(std::to_string(dim) + "D canonical run: " + std::to_string(g.nt) + " levels x " +
             std::to_string(g.nodes()) + " nodes, fuel monotone " + (mono ? "yes" : "no") + ", boundary pinned " +
             (pinned ? "yes" : "no"));
    }

    PhysConstants off;
    off.ambient_temperature = 1.0;
    InitialCondition ic;

    // Pure decay: T - T_a = (1 - k dt)^n, within first order of exp(-k t).
    {
        Grid g = Grid::uniform(1, 20, 0, 10, 1.0, 0, 0.1);
        PhysConstants c = off;
        c.alpha4 = 0.5;
        const auto th = PhysParams::from_vector(std::vector<double>{0, 0, 0.8}, 1);
        const double k = 0.4, dt = g.step_dt();
        FieldState s(g.nodes());
        std::fill(s.T.begin(), s.T.end(), 2.0);
        std::fill(s.E.begin(), s.E.end(), 0.0);
        std::fill(s.X.begin(), s.X.end(), 0.0);
        impose_boundary(s, g, 1.0, ic);
        double worst_euler = 0.0;
        bool first_order = true;
        for (int n = 1; n <= 100; ++n) {
            s = step(s, th, c, g, ic);
            const double t = n * dt;
            worst_euler = std::max(worst_euler, std::abs(s.T[10] - 1.0 - std::pow(1.0 - k * dt, n)));
            first_order = first_order &&
                          std::abs(s.T[10] - 1.0 - std::exp(-k * t)) <= 0.55 * k * k * dt * t * std::exp(-k * t);
        }
        o.require(worst_euler < 1e-13, "decay deviates from the Euler closed form by " + fmt("%.2e", worst_euler));
        o.require(first_order, "decay error exceeds the first-order bound");
    }

    // Pure advection: the peak sits within one cell of x0 + u t.
    {
        const double u = 0.25;
        const Grid g = Grid::uniform(1, 100, 0, 80, 0.5, 0, 1.0, 8);
        InitialCondition adv;
        adv.radius = 4.0;
        const auto traj = simulate(g, adv, PhysParams::from_vector(std::vector<double>{0, u, 0}, 1), off);
        double worst = 0.0;
        for (int n = 1; n < g.nt; ++n) {
            const auto& T = traj.frames[static_cast<std::size_t>(n)].T;
            const int i = static_cast<int>(std::max_element(T.begin(), T.end()) - T.begin());
            worst = std::max(worst, std::abs(g.x(i) - (adv.center_x + u * g.t(n))));
        }
        o.require(worst <= g.dx(), "advected peak off by " + fmt("%.3f", worst) + " m");
        note("advection: worst peak offset " + fmt("%.3f", worst) + " m (cell " + fmt("%.2f", g.dx()) + " m)");
    }
}

void gp_statistics(Outcome& o)
{
    const std::size_t n = 201;
    GpSpec s;
    s.delta = 0.05;
    s.zeta = 0.005;
    s.seed = 1;
    for (std::size_t i = 0; i < n; ++i)
        s.times.push_back(static_cast<double>(i) / static_cast<double>(n - 1));
    const double step = s.times[1];
    const GpSampler gp(s, 1.0);
    std::mt19937_64 rng(77);
    std::vector<double> acc(4, 0.0), cnt(4, 0.0);
    for (int d = 0; d < 10000; ++d) {
        const auto x = gp.draw(rng);
        for (std::size_t lag = 0; lag < 4; ++lag)
            for (std::size_t i = 0; i + lag < n; ++i) {
                acc[lag] += x[i] * x[i + lag];
                cnt[lag] += 1.0;
            }
    }
    std::string line;
    for (std::size_t lag = 1; lag < 4; ++lag) {
        const double rho = (acc[lag] / cnt[lag]) / (acc[0] / cnt[0]);
        const double expect = std::exp(-static_cast<double>(lag) * step / s.zeta);
        const double rel = std::abs(rho - expect) / expect;
        o.require(rel < 0.05, "lag " + std::to_string(lag) + " off by " + fmt("%.3f", rel));
        line += "lag " + std::to_string(lag) + ": " + fmt("%.4f", rho) + " vs " + fmt("%.4f", expect) + "  ";
    }
    note(line);
}

// ---------------------------------------------------------------------------

CaseReport desk_case(const std::string& id, const fs::path& out)
{
    const auto spec = case_preset(id, true);
    note("case " + id + ": " + spec.description + ", " + std::to_string(spec.expected_points) + " points");
    auto rep = run_case(spec);
    note("  theta_hat " + vec(rep.theta_hat) + " vs " + vec(rep.theta_true) + ", rel error " + vec(rep.rel_error) +
         ", L-BFGS " + rep.lbfgs_status + ", " + fmt("%.0f", rep.train_seconds) + " s");
    if (!out.empty())
        write_case_outputs(out / ("case_" + id), rep);
    return rep;
}

std::string trace_text(const CaseReport& r, const fs::path& scratch)
{
    fs::create_directories(scratch);
    const auto path = scratch / "trace.csv";
    write_trace_csv(path.string(), r.trace, r.dim);
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void recovery_group(const fs::path& out)
{
    std::vector<CaseReport> reports;

    run("4a", "1D clean recovery, desk scale", [&](Outcome& o) {
        const auto r = desk_case("1B", out);
        for (std::size_t k = 0; k < r.rel_error.size(); ++k)
            o.require(r.rel_error[k] <= 0.20, "component " + std::to_string(k) + " error " + fmt("%.3f", r.rel_error[k]));
        o.require(r.rel_error[1] <= 0.10, "u error " + fmt("%.3f", r.rel_error[1]));
        o.require(r.rel_error[2] <= 0.10, "U error " + fmt("%.3f", r.rel_error[2]));
        reports.push_back(r);
    });

    run("4b", "1D noisy recovery, desk scale", [&](Outcome& o) {
        const auto r = desk_case("2", out);
        for (std::size_t k = 0; k < r.rel_error.size(); ++k)
            o.require(r.rel_error[k] <= 0.20, "component " + std::to_string(k) + " error " + fmt("%.3f", r.rel_error[k]));
    });

    run("4c", "2D clean recovery, desk scale", [&](Outcome& o) {
        const auto r = desk_case("3", out);
        for (std::size_t k = 0; k < r.rel_error.size(); ++k)
            o.require(r.rel_error[k] <= 0.25, "component " + std::to_string(k) + " error " + fmt("%.3f", r.rel_error[k]));
    });

    CaseReport coarse;
    run("5", "ablation trend over spacings 1, 2, 5", [&](Outcome& o) {
        const auto fine = desk_case("1", out);
        const CaseReport* mid = nullptr;
        for (const auto& r : reports)
            if (r.id == "1B")
                mid = &r;
        CaseReport mid_local;
        if (!mid) {
            mid_local = desk_case("1B", out);
            mid = &mid_local;
        }
        coarse = desk_case("1C", out);
        const auto rows = ablation_table({fine, *mid, coarse});
        std::string line;
        for (const auto& r : rows)
            line += "dx=" + fmt("%g", r.dx) + ": " + fmt("%.4f", r.max_rel_error) + "  ";
        note("max rel error by spacing: " + line);
        if (!out.empty())
            write_ablation_csv((out / "ablation.csv").string(), rows, 1);
        o.require(error_trend_holds(rows, 0.02), "trend violated: " + line);
    });

    run("7", "determinism of a desk-scale rerun", [&](Outcome& o) {
        if (coarse.trace.empty())
            coarse = desk_case("1C", {});
        const auto again = run_case(case_preset("1C", true));
        const auto scratch = fs::temp_directory_path() / "wildfire_acceptance";
        const std::string a = trace_text(coarse, scratch / "a");
        const std::string b = trace_text(again, scratch / "b");
        fs::remove_all(scratch);
        o.require(!a.empty() && a == b, "theta traces differ");
        note("trace of case 1C: " + std::to_string(coarse.trace.size()) + " rows, " + std::to_string(a.size()) +
             " bytes, identical " + (a == b ? "yes" : "no"));
    });
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance checks"};
    std::string group = "quick";
    std::string out;
    app.add_option("--group", group, "quick, recovery or all")->check(CLI::IsMember({"quick", "recovery", "all"}));
    app.add_option("--out", out, "write case reports under this directory");
    CLI11_PARSE(app, argc, argv);

    if (group == "quick" || group == "all") {
        run("1", "structural identities", structural);
        run("2", "derivative correctness", derivatives);
        run("3", "forward-solver physics", solver_physics);
        run("6", "noise-model statistics", gp_statistics);
    }
    if (group == "recovery" || group == "all")
        recovery_group(out);
    std::printf("%s: %d criterion line(s) failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
