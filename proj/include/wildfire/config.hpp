#pragma once

// Run configuration: one JSON document with sections for the simulation grid,
// ignition, constants, true/initial theta, noise, sampling, network, schedule,
// loss weights and seeds. Parsing is strict: unknown keys and wrong types are
// rejected with the dotted field path in the message.

#include "wildfire/dataset.hpp"
#include "wildfire/error.hpp"
#include "wildfire/fdsolver.hpp"
#include "wildfire/model.hpp"
#include "wildfire/net.hpp"
#include "wildfire/pinn.hpp"
#include "wildfire/stochastic.hpp"
#include "wildfire/train.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace wildfire {

using Json = nlohmann::ordered_json;

struct GridConfig {
    int dim = 1;
    double lx = 100.0;
    double ly = 100.0;
    double t_end = 200.0;
    double dx = 0.1; ///< simulation spacing
    double dy = 0.1;
    double dt = 0.5; ///< stored time-level spacing
    int substeps = 0; ///< explicit steps per stored level; 0 picks the smallest stable count
};

struct NoiseConfig {
    bool enabled = false;
    double delta = 0.05;
    double zeta = 0.005; ///< correlation time in units of t / t_end
    std::uint64_t seed = 7;
};

struct RunConfig {
    GridConfig grid{};
    InitialCondition initial{};
    PhysConstants constants{};
    PhysParams theta_true{};
    NoiseConfig noise{};
    Spacing sampling{};
    MlpArch network{};
    Schedule schedule{};
    LossWeights weights{};
    TrainSeeds seeds{};

    /// Simulation grid with the substep count resolved.
    Grid simulation_grid(const ParamSeries* series = nullptr) const
    {
        Grid g = Grid::uniform(grid.dim, grid.lx, grid.ly, grid.t_end, grid.dx, grid.dy, grid.dt,
                               std::max(1, grid.substeps));
        if (grid.substeps == 0) {
            const ParamSeries s = series ? *series : ParamSeries::constant(theta_true, g);
            g.substeps = required_substeps(g, s, constants);
        }
        return g;
    }

    void validate() const
    {
        const Grid g = simulation_grid();
        initial.validate(g);
        constants.validate();
        if (theta_true.dim != grid.dim)
            throw ConfigError("theta_true: dimensionality must equal grid.dim");
        if (grid.substeps < 0)
            throw ConfigError("grid.substeps must be >= 0");
        if (noise.enabled) {
            if (!(noise.delta >= 0.0))
                throw ConfigError("noise.delta must be >= 0");
            if (!(noise.zeta > 0.0))
                throw ConfigError("noise.zeta must be > 0");
        }
        if (!(sampling.dx > 0.0) || !(sampling.dt > 0.0) || (grid.dim == 2 && !(sampling.dy > 0.0)))
            throw ConfigError("sampling: dx, dt (and dy in 2D) must be > 0");
        network.validate_surrogate(grid.dim);
        schedule.validate();
        if (!(weights.lambda_s >= 0.0) || !(weights.lambda_u >= 0.0))
            throw ConfigError("loss.lambda_s and loss.lambda_u must be >= 0");
        if (grid.substeps > 0)
            check_stability(g, ParamSeries::constant(theta_true, g), constants);
    }
};

/// The artifact's canonical constant set (dimensionless T, E, X; SI x and t).
inline PhysConstants canonical_constants()
{
    PhysConstants c;
    c.alpha1 = 1.0;
    c.alpha2 = 1.0;
    c.alpha3 = 4.0;
    c.alpha4 = 0.05;
    c.ambient_temperature = 1.0;
    c.kinetics = {5.0, 12.0, 20.0, 15.0, 0.5};
    return c;
}

// ---------------------------------------------------------------------------

namespace detail {

class Reader {
  public:
    Reader(const Json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ConfigError("config field '" + name() + "': expected an object");
    }

    template <class T>
    void get(const char* key, T& out)
    {
        seen_.insert(key);
        if (!j_.contains(key))
            return;
        const Json& v = j_.at(key);
        const std::string field = join(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean())
                throw ConfigError("config field '" + field + "': expected true or false");
            out = v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string())
                throw ConfigError("config field '" + field + "': expected a string");
            out = v.get<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer())
                throw ConfigError("config field '" + field + "': expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned())
                    out = static_cast<T>(v.get<std::uint64_t>());
                else if (v.get<std::int64_t>() < 0)
                    throw ConfigError("config field '" + field + "': must be >= 0");
                else
                    out = static_cast<T>(v.get<std::int64_t>());
            } else {
                out = static_cast<T>(v.get<std::int64_t>());
            }
        } else {
            if (!v.is_number())
                throw ConfigError("config field '" + field + "': expected a number");
            out = v.get<double>();
        }
    }

    void get_doubles(const char* key, std::vector<double>& out)
    {
        seen_.insert(key);
        if (!j_.contains(key))
            return;
        const Json& v = j_.at(key);
        if (!v.is_array())
            throw ConfigError("config field '" + join(key) + "': expected an array of numbers");
        out.clear();
        for (const auto& e : v) {
            if (!e.is_number())
                throw ConfigError("config field '" + join(key) + "': expected an array of numbers");
            out.push_back(e.get<double>());
        }
    }

    std::optional<Reader> section(const char* key)
    {
        seen_.insert(key);
        if (!j_.contains(key))
            return std::nullopt;
        return Reader(j_.at(key), join(key));
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError("config field '" + join(it.key()) + "': unknown key");
    }

    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::string name() const { return path_.empty() ? "<root>" : path_; }

  private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline PhysParams read_theta(Reader& r, const char* key, int dim, const PhysParams& fallback)
{
    std::vector<double> v = fallback.to_vector();
    r.get_doubles(key, v);
    if (v.size() != PhysParams::size_for(dim))
        throw ConfigError("config field '" + r.join(key) + "': expected " + std::to_string(PhysParams::size_for(dim)) +
                          " components [" + (dim == 1 ? "D, u, U" : "Dx, Dy, ux, uy, U") + "]");
    return PhysParams::from_vector(v, dim);
}

} // namespace detail

/// Default 1D or 2D configuration (the desk-scale clean preset).
inline RunConfig default_config(int dim)
{
    RunConfig c;
    c.constants = canonical_constants();
    c.grid.dim = dim;
    c.schedule.adam_iters = 10000;
    c.schedule.adam.lr = 1e-3;
    c.schedule.lbfgs.max_iterations = 3000;
    c.schedule.log_every = 10;
    if (dim == 1) {
        c.grid.ly = 0.0;
        c.grid.dx = 0.1;
        c.grid.dt = 0.5;
        c.initial.center_x = 30.0;
        c.theta_true = PhysParams::from_vector(std::vector<double>{0.41, 0.25, 0.61}, 1);
        c.sampling = {2.0, 0.0, 2.0};
        c.network.widths = {2, 20, 20, 20, 20, 3};
    } else {
        c.grid.dx = 0.5;
        c.grid.dy = 0.5;
        c.grid.dt = 2.0;
        c.initial.center_x = 50.0;
        c.initial.center_y = 50.0;
        c.theta_true = PhysParams::from_vector(std::vector<double>{0.74, 0.41, 0.35, 0.2, 0.4}, 2);
        c.sampling = {10.0, 10.0, 10.0};
        c.network.widths = {3, 20, 20, 20, 20, 3};
    }
    return c;
}

inline RunConfig config_from_json(const Json& root)
{
    detail::Reader r(root, "");
    int dim = 1;
    if (auto g = r.section("grid")) {
        g->get("dim", dim);
        if (dim != 1 && dim != 2)
            throw ConfigError("config field 'grid.dim': must be 1 or 2");
    }
    RunConfig c = default_config(dim);
    if (auto g = r.section("grid")) {
        g->get("dim", c.grid.dim);
        g->get("lx", c.grid.lx);
        g->get("ly", c.grid.ly);
        g->get("t_end", c.grid.t_end);
        g->get("dx", c.grid.dx);
        g->get("dy", c.grid.dy);
        g->get("dt", c.grid.dt);
        g->get("substeps", c.grid.substeps);
        g->finish();
    }
    if (auto s = r.section("initial")) {
        s->get("T_p", c.initial.amplitude);
        s->get("x0", c.initial.center_x);
        s->get("y0", c.initial.center_y);
        s->get("gamma", c.initial.radius);
        s->get("E0", c.initial.endothermic);
        s->get("X0", c.initial.exothermic);
        s->finish();
    }
    if (auto s = r.section("constants")) {
        s->get("alpha1", c.constants.alpha1);
        s->get("alpha2", c.constants.alpha2);
        s->get("alpha3", c.constants.alpha3);
        s->get("alpha4", c.constants.alpha4);
        s->get("T_a", c.constants.ambient_temperature);
        if (auto k = s->section("kinetics")) {
            k->get("c1", c.constants.kinetics.c1);
            k->get("b1", c.constants.kinetics.b1);
            k->get("c2", c.constants.kinetics.c2);
            k->get("b2", c.constants.kinetics.b2);
            k->get("r_o", c.constants.kinetics.r_o);
            k->finish();
        }
        s->finish();
    }
    c.theta_true = detail::read_theta(r, "theta_true", dim, c.theta_true);
    if (auto s = r.section("noise")) {
        s->get("enabled", c.noise.enabled);
        s->get("delta", c.noise.delta);
        s->get("zeta", c.noise.zeta);
        s->get("seed", c.noise.seed);
        s->finish();
    }
    if (auto s = r.section("sampling")) {
        s->get("dx", c.sampling.dx);
        s->get("dy", c.sampling.dy);
        s->get("dt", c.sampling.dt);
        s->finish();
    }
    if (auto s = r.section("network")) {
        std::vector<double> w;
        s->get_doubles("widths", w);
        if (!w.empty()) {
            c.network.widths.clear();
            for (double v : w) {
                if (v != std::floor(v))
                    throw ConfigError("config field 'network.widths': expected integers");
                c.network.widths.push_back(static_cast<int>(v));
            }
        }
        std::string act = to_string(c.network.output);
        s->get("output_activation", act);
        c.network.output = parse_activation(act);
        s->finish();
    }
    if (auto s = r.section("schedule")) {
        auto& sc = c.schedule;
        s->get("adam_iters", sc.adam_iters);
        s->get("lr", sc.adam.lr);
        s->get("beta1", sc.adam.beta1);
        s->get("beta2", sc.adam.beta2);
        s->get("eps", sc.adam.eps);
        s->get("lbfgs_max_iters", sc.lbfgs.max_iterations);
        s->get("lbfgs_memory", sc.lbfgs.memory);
        s->get("wolfe_c1", sc.lbfgs.c1);
        s->get("wolfe_c2", sc.lbfgs.c2);
        s->get("max_line_search", sc.lbfgs.max_line_search);
        s->get("grad_tol", sc.lbfgs.grad_tol);
        s->get("step_tol", sc.lbfgs.step_tol);
        s->get("theta_init", sc.theta_init);
        s->get("batch_size", sc.batch_size);
        s->get("log_every", sc.log_every);
        s->get("checkpoint_every", sc.checkpoint_every);
        s->finish();
    }
    if (auto s = r.section("loss")) {
        s->get("lambda_s", c.weights.lambda_s);
        s->get("lambda_u", c.weights.lambda_u);
        s->finish();
    }
    if (auto s = r.section("seeds")) {
        s->get("init", c.seeds.init);
        s->get("batch", c.seeds.batch);
        s->finish();
    }
    r.finish();
    if (c.grid.dim == 1)
        c.sampling.dy = 0.0;
    c.validate();
    return c;
}

inline Json theta_json(const PhysParams& p)
{
    Json a = Json::array();
    for (double v : p.to_vector())
        a.push_back(v);
    return a;
}

/// Fully resolved configuration (every field explicit).
inline Json config_to_json(const RunConfig& c)
{
    Json j;
    j["grid"] = {{"dim", c.grid.dim}, {"lx", c.grid.lx},       {"ly", c.grid.ly},
                 {"t_end", c.grid.t_end}, {"dx", c.grid.dx},   {"dy", c.grid.dy},
                 {"dt", c.grid.dt},   {"substeps", c.grid.substeps}};
    j["initial"] = {{"T_p", c.initial.amplitude}, {"x0", c.initial.center_x},      {"y0", c.initial.center_y},
                    {"gamma", c.initial.radius},  {"E0", c.initial.endothermic}, {"X0", c.initial.exothermic}};
    const auto& k = c.constants.kinetics;
    j["constants"] = {{"alpha1", c.constants.alpha1},
                      {"alpha2", c.constants.alpha2},
                      {"alpha3", c.constants.alpha3},
                      {"alpha4", c.constants.alpha4},
                      {"T_a", c.constants.ambient_temperature},
                      {"kinetics", {{"c1", k.c1}, {"b1", k.b1}, {"c2", k.c2}, {"b2", k.b2}, {"r_o", k.r_o}}}};
    j["theta_true"] = theta_json(c.theta_true);
    j["noise"] = {{"enabled", c.noise.enabled}, {"delta", c.noise.delta}, {"zeta", c.noise.zeta},
                  {"seed", c.noise.seed}};
    j["sampling"] = {{"dx", c.sampling.dx}, {"dy", c.sampling.dy}, {"dt", c.sampling.dt}};
    j["network"] = {{"widths", c.network.widths}, {"output_activation", to_string(c.network.output)}};
    const auto& s = c.schedule;
    j["schedule"] = {{"adam_iters", s.adam_iters},
                     {"lr", s.adam.lr},
                     {"beta1", s.adam.beta1},
                     {"beta2", s.adam.beta2},
                     {"eps", s.adam.eps},
                     {"lbfgs_max_iters", s.lbfgs.max_iterations},
                     {"lbfgs_memory", s.lbfgs.memory},
                     {"wolfe_c1", s.lbfgs.c1},
                     {"wolfe_c2", s.lbfgs.c2},
                     {"max_line_search", s.lbfgs.max_line_search},
                     {"grad_tol", s.lbfgs.grad_tol},
                     {"step_tol", s.lbfgs.step_tol},
                     {"theta_init", s.theta_init},
                     {"batch_size", s.batch_size},
                     {"log_every", s.log_every},
                     {"checkpoint_every", s.checkpoint_every}};
    j["loss"] = {{"lambda_s", c.weights.lambda_s}, {"lambda_u", c.weights.lambda_u}};
    j["seeds"] = {{"init", c.seeds.init}, {"batch", c.seeds.batch}};
    return j;
}

inline Json read_json_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open '" + path + "'");
    try {
        return Json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline RunConfig load_config(const std::string& path)
{
    try {
        return config_from_json(read_json_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const Json& j)
{
    std::ofstream os(path);
    if (!os)
        throw ConfigError("cannot write '" + path + "'");
    os << j.dump(2) << '\n';
}

} // namespace wildfire
