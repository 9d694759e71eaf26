#pragma once

// Hybrid training loop: Adam over the joint vector [network params, theta],
// then L-BFGS on the full-batch objective.

#include "wildfire/dataset.hpp"
#include "wildfire/error.hpp"
#include "wildfire/model.hpp"
#include "wildfire/net.hpp"
#include "wildfire/optim.hpp"
#include "wildfire/pinn.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace wildfire {

struct Schedule {
    int adam_iters = 40000;
    AdamSettings adam{};
    LbfgsSettings lbfgs{};
    double theta_init = 1.0;
    std::size_t batch_size = 0; ///< Adam minibatch size; 0 means full batch
    int log_every = 1;          ///< trace row every N iterations (the last one is always kept)
    int checkpoint_every = 0;   ///< 0 disables the checkpoint callback

    void validate() const
    {
        if (adam_iters < 0)
            throw ConfigError("schedule.adam_iters must be >= 0");
        if (!(adam.lr > 0.0))
            throw ConfigError("schedule.adam.lr must be > 0");
        if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
            throw ConfigError("schedule.adam: betas must lie in [0, 1)");
        if (!(adam.eps > 0.0))
            throw ConfigError("schedule.adam.eps must be > 0");
        if (lbfgs.max_iterations < 0)
            throw ConfigError("schedule.lbfgs.max_iterations must be >= 0");
        if (lbfgs.memory < 1)
            throw ConfigError("schedule.lbfgs.memory must be >= 1");
        if (!(lbfgs.c1 > 0.0 && lbfgs.c1 < lbfgs.c2 && lbfgs.c2 < 1.0))
            throw ConfigError("schedule.lbfgs: need 0 < c1 < c2 < 1");
        if (lbfgs.max_line_search < 1)
            throw ConfigError("schedule.lbfgs.max_line_search must be >= 1");
        if (log_every < 1)
            throw ConfigError("schedule.log_every must be >= 1");
        if (checkpoint_every < 0)
            throw ConfigError("schedule.checkpoint_every must be >= 0");
    }
};

struct TrainSeeds {
    std::uint64_t init = 1;  ///< network initialization
    std::uint64_t batch = 2; ///< minibatch shuffling
};

struct TraceRow {
    long iteration = 0;
    std::string phase; ///< "adam" or "lbfgs"
    LossBreakdown loss{};
    std::vector<double> theta;
};

struct TrainResult {
    PhysParams theta{};
    MlpParams params{};
    Normalization norm{};
    std::vector<TraceRow> trace;
    LbfgsStatus lbfgs_status = LbfgsStatus::max_iterations;
    int lbfgs_iterations = 0;
    LossBreakdown final_loss{};
};

/// Thrown when the loss or its gradient stops being finite; keeps the trace
/// recorded up to that point.
class DivergenceError : public NumericError {
  public:
    DivergenceError(const std::string& what, std::vector<TraceRow> trace)
        : NumericError(what), trace_(std::move(trace))
    {
    }
    const std::vector<TraceRow>& trace() const { return trace_; }

  private:
    std::vector<TraceRow> trace_;
};

struct TrainProgress {
    long iteration = 0;
    const MlpParams* params = nullptr;
    const PhysParams* theta = nullptr;
};

using CheckpointFn = std::function<void(const TrainProgress&)>;

/// Gradient of the full-batch loss over [params, theta].
inline std::vector<double> loss_gradient(PinnLoss& loss, const MlpParams& p, const PhysParams& theta)
{
    std::vector<double> g(p.flat.size() + theta.to_vector().size());
    loss.evaluate(p, theta, g);
    return g;
}

inline TrainResult train(const Dataset& ds, const MlpArch& arch, const Schedule& sched, const PhysConstants& c,
                         const TrainSeeds& seeds = {}, const LossWeights& weights = {},
                         const CheckpointFn& checkpoint = {})
{
    sched.validate();
    c.validate();
    const int dim = ds.domain.dim;
    arch.validate_surrogate(dim);

    TrainResult res;
    res.norm = Normalization::from_dataset(ds);
    PinnLoss loss(Batches::from_dataset(ds), res.norm, c, weights);

    const std::size_t np = count_params(arch);
    const std::size_t nth = PhysParams::size_for(dim);
    std::vector<double> x = init_params(arch, seeds.init).flat;
    x.resize(np + nth, sched.theta_init);

    MlpParams p(arch);
    PhysParams theta;
    auto unpack = [&](std::span<const double> v) {
        std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(np), p.flat.begin());
        theta = PhysParams::from_vector(v.subspan(np), dim);
    };
    auto record = [&](long it, const char* phase, const LossBreakdown& b) {
        res.trace.push_back({it, phase, b, theta.to_vector()});
    };
    auto maybe_checkpoint = [&](long it) {
        if (checkpoint && sched.checkpoint_every > 0 && it % sched.checkpoint_every == 0)
            checkpoint({it, &p, &theta});
    };
    unpack(x);

    // Adam
    const std::size_t n_points = loss.batches().points.size();
    const bool minibatch = sched.batch_size > 0 && sched.batch_size < n_points;
    std::vector<std::size_t> order(n_points);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 batch_rng(seeds.batch);
    std::size_t cursor = n_points;
    std::vector<std::size_t> subset;

    AdamState adam(x.size(), sched.adam);
    std::vector<double> g(x.size());
    for (long it = 0; it < sched.adam_iters; ++it) {
        LossBreakdown b;
        try {
            if (minibatch) {
                if (cursor + sched.batch_size > n_points) {
                    std::shuffle(order.begin(), order.end(), batch_rng);
                    cursor = 0;
                }
                subset.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                              order.begin() + static_cast<std::ptrdiff_t>(cursor + sched.batch_size));
                std::sort(subset.begin(), subset.end());
                cursor += sched.batch_size;
                b = loss.evaluate_subset(p, theta, subset, g);
            } else {
                b = loss.evaluate(p, theta, g);
            }
            if (it % sched.log_every == 0)
                record(it, "adam", b);
            adam_step(adam, x, g);
        } catch (const NumericError& e) {
            throw DivergenceError("training diverged at Adam iteration " + std::to_string(it) + ": " + e.what(),
                                  std::move(res.trace));
        }
        unpack(x);
        maybe_checkpoint(it + 1);
    }

    // L-BFGS
    long base = sched.adam_iters;
    if (sched.lbfgs.max_iterations > 0) {
        std::vector<double> cached_x;
        LossBreakdown cached_b;
        MlpParams trial(arch);
        Objective fn = [&](std::span<const double> v, std::span<double> grad) {
            std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(np), trial.flat.begin());
            const PhysParams th = PhysParams::from_vector(v.subspan(np), dim);
            const LossBreakdown b = loss.evaluate(trial, th, grad);
            cached_x.assign(v.begin(), v.end());
            cached_b = b;
            return b.total;
        };
        LbfgsMonitor monitor = [&](int k, std::span<const double> v, double) {
            unpack(v);
            LossBreakdown b = cached_b;
            if (!std::equal(v.begin(), v.end(), cached_x.begin(), cached_x.end()))
                b = loss.evaluate(p, theta);
            const long it = base + k;
            if (k % sched.log_every == 0)
                record(it, "lbfgs", b);
            maybe_checkpoint(it);
            return true;
        };
        LbfgsResult lr;
        try {
            lr = lbfgs_run(fn, x, sched.lbfgs, monitor);
        } catch (const NumericError& e) {
            throw DivergenceError(std::string("training diverged at the start of L-BFGS: ") + e.what(),
                                  std::move(res.trace));
        }
        x = lr.x;
        res.lbfgs_status = lr.status;
        res.lbfgs_iterations = lr.iterations;
    }
    unpack(x);

    res.final_loss = loss.evaluate(p, theta);
    const long last = base + res.lbfgs_iterations;
    if (res.trace.empty() || res.trace.back().iteration != last)
        record(last, res.lbfgs_iterations > 0 ? "lbfgs" : "adam", res.final_loss);
    res.params = p;
    res.theta = theta;
    return res;
}

} // namespace wildfire
