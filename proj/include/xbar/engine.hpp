#ifndef XBAR_ENGINE_HPP
#define XBAR_ENGINE_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "analysis.hpp"
#include "policies.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "switch_core.hpp"

namespace xbar {

inline constexpr std::int64_t kConservationCheckPeriod = 10'000;

struct RunConfig {
    PolicyKind policy = MaximalMatching{3};
    TrafficConfig traffic;
    std::int64_t horizon = 1'000'000;
    std::int64_t warmup = 100'000;
    int batches = 20;
    int replicas = 1;
    bool verify_lemma2 = false;
    bool record_trace = false;

    // Warmup 10% of the horizon, 20 batches.
    static RunConfig with_defaults(PolicyKind policy, TrafficConfig traffic, std::int64_t horizon) {
        RunConfig cfg;
        cfg.policy = policy;
        cfg.traffic = traffic;
        cfg.horizon = horizon;
        cfg.warmup = horizon / 10;
        return cfg;
    }

    void validate() const {
        traffic.validate();
        validate_policy(policy);
        if (horizon <= 0 || warmup < 0 || warmup >= horizon)
            throw PreconditionError("RunConfig: need 0 <= warmup < horizon");
        if (batches < 2)
            throw PreconditionError("RunConfig: need at least 2 batches");
        if (replicas < 1)
            throw PreconditionError("RunConfig: need at least 1 replica");
        if ((horizon - warmup) < batches)
            throw PreconditionError("RunConfig: fewer post-warmup slots than batches");
        if (verify_lemma2) {
            if (!std::holds_alternative<MaximalMatching>(policy))
                throw PreconditionError("RunConfig: verify_lemma2 applies to maximal matching only");
            require_speedup(policy_speedup(policy));
        }
    }

    std::int64_t batch_size() const { return (horizon - warmup) / batches; }
};

struct RunResult {
    double mean_backlog = 0;
    double ci95_halfwidth = 0;
    std::vector<double> batch_means;
    std::int64_t violations = 0;
    std::int64_t slots_simulated = 0;
    std::uint64_t seed = 0;
    double wall_time = 0;             // seconds; excluded from determinism and result files
    std::vector<std::int64_t> trace;  // measured backlog per slot of replica 0, if requested
};

// Horizon long enough for the relaxation time ~ 1/(1 - load)^2: `reference`
// slots at `reference_load`, scaled by ((1 - reference_load) / (1 - load))^2.
inline std::int64_t scaled_horizon(double load, std::int64_t reference = 2'000'000, double reference_load = 0.8) {
    const double factor = (1.0 - reference_load) / (1.0 - load);
    return std::max<std::int64_t>(reference / 10, static_cast<std::int64_t>(std::llround(reference * factor * factor)));
}

namespace detail {

struct SlotView {
    std::int64_t slot;
    const SwitchState &state;  // start of slot, before arrivals
    const ArrivalMatrix &arrivals;
    const ScheduleDecision &decision;
    std::int64_t measured_backlog;  // after arrivals land, before transfers
};

// Drives one replica. Per slot: sample arrivals, schedule (arrivals are
// eligible), observe, then apply the queue recursions. The backlog is
// observed after arrivals land and before any transfer or departure.
template <class OnSlot>
void simulate(const RunConfig &cfg, std::uint64_t seed, OnSlot &&on_slot) {
    const int n = cfg.traffic.n_ports;
    Rng rng(seed);
    SwitchState state = SwitchState::empty(n);
    PolicyRunner runner(cfg.policy, n);
    ArrivalMatrix a(n);
    std::int64_t backlog = 0, arrived = 0, departed = 0;

    for (std::int64_t t = 0; t < cfg.horizon; ++t) {
        sample_arrivals(cfg.traffic, rng, a);
        const int count = a.count();
        arrived += count;
        const std::int64_t measured = backlog + count;

        const ScheduleDecision &dec = runner.schedule(state, a, rng);
        on_slot(SlotView{t, state, a, dec, measured});
        advance(state, a, dec);

        std::int64_t served = 0;
        for (int e : dec.e)
            served += e;
        departed += served;
        backlog = measured - served;

        if ((t + 1) % kConservationCheckPeriod == 0) {
            state.validate();
            if (total_backlog(state) != arrived - departed || backlog != arrived - departed)
                throw InvariantViolation("cell conservation failed at slot " + std::to_string(t));
        }
    }
}

inline SwitchState with_arrivals(const SwitchState &state, const ArrivalMatrix &a) {
    SwitchState s = state;
    land_arrivals(s, a);
    return s;
}

} // namespace detail

inline RunResult run(const RunConfig &cfg) {
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    const int s = policy_speedup(cfg.policy);
    const double load = cfg.traffic.load;

    RunResult result;
    result.seed = cfg.traffic.seed;
    std::vector<double> pooled;
    SwitchState scratch;

    for (int r = 0; r < cfg.replicas; ++r) {
        BatchMeans batches(cfg.batches, cfg.batch_size());
        const bool trace = cfg.record_trace && r == 0;
        if (trace)
            result.trace.reserve(static_cast<std::size_t>(cfg.horizon));

        detail::simulate(cfg, substream_seed(cfg.traffic.seed, static_cast<std::uint64_t>(r)),
                         [&](const detail::SlotView &v) {
                             if (v.slot >= cfg.warmup)
                                 batches.add(static_cast<double>(v.measured_backlog));
                             if (trace)
                                 result.trace.push_back(v.measured_backlog);
                             if (cfg.verify_lemma2) {
                                 scratch = v.state;
                                 land_arrivals(scratch, v.arrivals);
                                 result.violations +=
                                     static_cast<std::int64_t>(verify_lemma2(scratch, v.decision, load, s).size());
                             }
                         });
        pooled.insert(pooled.end(), batches.means().begin(), batches.means().end());
        result.slots_simulated += cfg.horizon;
    }

    Estimate est = estimate_from_batches(std::move(pooled));
    result.mean_backlog = est.mean;
    result.ci95_halfwidth = est.ci95_halfwidth;
    result.batch_means = std::move(est.batch_means);
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

// Time average of backlog(t) + h_U(S(t+1)) - h_U(S(t)) along a maximal
// matching trajectory, S(t) being the observed state of slot t. Its
// long-run value is bounded by bound_mm_upper whenever the drift
// inequality behind that bound holds.
inline Estimate lyapunov_drift(const RunConfig &cfg) {
    cfg.validate();
    if (!std::holds_alternative<MaximalMatching>(cfg.policy))
        throw PreconditionError("lyapunov_drift: maximal matching policy required");
    const int s = policy_speedup(cfg.policy);
    const double load = cfg.traffic.load;
    require_speedup(s);

    BatchMeans batches(cfg.batches, cfg.batch_size());
    SwitchState observed;
    std::optional<double> prev_h;
    std::int64_t prev_backlog = 0;
    detail::simulate(cfg, cfg.traffic.seed, [&](const detail::SlotView &v) {
        observed = v.state;
        land_arrivals(observed, v.arrivals);
        const double h = lyapunov_h(observed, load, s);
        if (prev_h && v.slot - 1 >= cfg.warmup)
            batches.add(static_cast<double>(prev_backlog) + h - *prev_h);
        prev_h = h;
        prev_backlog = v.measured_backlog;
    });
    return estimate_from_batches(batches.means());
}

struct SweepGrid {
    std::vector<double> loads;
    std::vector<int> speedups;
    std::vector<int> ports;
    bool scale_horizon = false;  // horizon per cell = scaled_horizon(load, base.horizon)
    int workers = 1;
};

struct SweepRow {
    RunConfig config;  // replicas == 1, seed = this row's substream seed
    std::size_t cell = 0;
    int replica = 0;
    std::optional<RunResult> result;
    std::string error;
};

// Cells enumerate ports, then speedups, then loads. Row (cell c, replica r)
// runs with seed substream_seed(master, c * replicas + r). Rows are
// independent, so any worker count gives identical output.
inline std::vector<SweepRow> sweep(const RunConfig &base, const SweepGrid &grid) {
    if (grid.loads.empty() || grid.speedups.empty() || grid.ports.empty())
        throw PreconditionError("sweep: every grid axis needs at least one value");
    if (base.replicas < 1)
        throw PreconditionError("sweep: need at least 1 replica");

    // The speedup axis only exists for maximal matching.
    const std::vector<int> speedups =
        std::holds_alternative<MaximalMatching>(base.policy) ? grid.speedups : std::vector<int>{1};

    std::vector<SweepRow> rows;
    std::size_t cell = 0;
    const double warmup_fraction = static_cast<double>(base.warmup) / static_cast<double>(base.horizon);
    for (int n : grid.ports) {
        for (int s : speedups) {
            for (double load : grid.loads) {
                for (int r = 0; r < base.replicas; ++r) {
                    SweepRow row;
                    row.cell = cell;
                    row.replica = r;
                    row.config = base;
                    row.config.replicas = 1;
                    row.config.traffic.n_ports = n;
                    row.config.traffic.load = load;
                    row.config.traffic.seed = substream_seed(
                        base.traffic.seed, static_cast<std::uint64_t>(cell) * static_cast<std::uint64_t>(base.replicas) +
                                               static_cast<std::uint64_t>(r));
                    if (auto *mm = std::get_if<MaximalMatching>(&row.config.policy))
                        mm->speedup = s;
                    if (grid.scale_horizon && load < 1.0) {
                        row.config.horizon = scaled_horizon(load, base.horizon);
                        row.config.warmup = static_cast<std::int64_t>(warmup_fraction * static_cast<double>(row.config.horizon));
                    }
                    rows.push_back(std::move(row));
                }
                ++cell;
            }
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < rows.size(); k = next++) {
            try {
                rows[k].result = run(rows[k].config);
            } catch (const std::exception &ex) {
                rows[k].error = ex.what();
            }
        }
    };
    const int workers = std::max(1, std::min<int>(grid.workers, static_cast<int>(rows.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
    }
    return rows;
}

} // namespace xbar

#endif // XBAR_ENGINE_HPP
