#ifndef XBAR_POLICIES_HPP
#define XBAR_POLICIES_HPP

#include <deque>
#include <string>
#include <variant>
#include <vector>

#include "matching.hpp"
#include "rng.hpp"
#include "switch_core.hpp"

namespace xbar {

// CIOQ switch scheduled by `speedup` greedy maximal-matching rounds per slot.
struct MaximalMatching {
    int speedup = 1;
    EdgeOrder order = EdgeOrder::kRandom;
};

// Ideal output queueing: every arrival reaches its output queue immediately.
struct OutputQueued {};

// Input queueing with one FCFS queue per input and a single round per slot.
struct InputQueuedFcfs {};

using PolicyKind = std::variant<MaximalMatching, OutputQueued, InputQueuedFcfs>;

inline std::string policy_name(const PolicyKind &p) {
    struct {
        std::string operator()(const MaximalMatching &) const { return "mm"; }
        std::string operator()(const OutputQueued &) const { return "oq"; }
        std::string operator()(const InputQueuedFcfs &) const { return "iqfcfs"; }
    } visitor;
    return std::visit(visitor, p);
}

inline int policy_speedup(const PolicyKind &p) {
    if (const auto *mm = std::get_if<MaximalMatching>(&p))
        return mm->speedup;
    return 1;
}

inline void validate_policy(const PolicyKind &p) {
    if (const auto *mm = std::get_if<MaximalMatching>(&p); mm && mm->speedup < 1)
        throw PreconditionError("MaximalMatching: speedup must be a positive integer");
}

// Residual request graph and the matching chosen from it in one round.
struct RoundRecord {
    RequestGraph graph;
    Matching matching;
};

// All schedulers receive the state at the start of the slot plus the slot's
// arrivals; arrivals are eligible for transfer in the same slot.
class MaximalMatchingScheduler {
public:
    MaximalMatchingScheduler(int n_ports, int speedup, EdgeOrder order = EdgeOrder::kRandom)
        : n_(n_ports), speedup_(speedup), order_(order), matcher_(n_ports),
          residual_(static_cast<std::size_t>(n_ports), static_cast<std::size_t>(n_ports)),
          inflow_(static_cast<std::size_t>(n_ports), 0), decision_(ScheduleDecision::zero(n_ports, speedup)) {
        if (speedup < 1)
            throw PreconditionError("MaximalMatchingScheduler: speedup must be positive");
    }

    const ScheduleDecision &schedule(const SwitchState &state, const ArrivalMatrix &a, Rng &rng,
                                     std::vector<RoundRecord> *trace = nullptr) {
        const auto n = static_cast<std::size_t>(n_);
        residual_ = state.x;
        for (std::size_t i = 0; i < n; ++i)
            if (const int j = a.destination(i); j != ArrivalMatrix::kNone)
                ++residual_(i, static_cast<std::size_t>(j));

        decision_.d.fill(0);
        std::fill(inflow_.begin(), inflow_.end(), 0);
        edges_.clear();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (residual_(i, j) > 0)
                    edges_.push_back({static_cast<int>(i), static_cast<int>(j)});

        for (int round = 0; round < speedup_ && !edges_.empty(); ++round) {
            if (order_ == EdgeOrder::kRandom)
                rng.shuffle(edges_.begin(), edges_.end());
            Matching *record = nullptr;
            if (trace) {
                trace->push_back({RequestGraph{n_, edges_}, {}});
                record = &trace->back().matching;
            }
            bool drained = false;
            matcher_.run(edges_, [&](const Edge &e) {
                const auto i = static_cast<std::size_t>(e.input);
                const auto j = static_cast<std::size_t>(e.output);
                ++decision_.d(i, j);
                ++inflow_[j];
                drained |= --residual_(i, j) == 0;
                if (record)
                    record->edges.push_back(e);
            });
            if (drained)
                std::erase_if(edges_, [&](const Edge &e) {
                    return residual_(static_cast<std::size_t>(e.input), static_cast<std::size_t>(e.output)) == 0;
                });
        }

        for (std::size_t j = 0; j < n; ++j)
            decision_.e[j] = state.y[j] + inflow_[j] > 0 ? 1 : 0;
        return decision_;
    }

private:
    int n_;
    int speedup_;
    EdgeOrder order_;
    GreedyMatcher matcher_;
    CountMatrix residual_;
    std::vector<Edge> edges_;
    std::vector<int> inflow_;
    ScheduleDecision decision_;
};

inline ScheduleDecision schedule_mm(const SwitchState &state, const ArrivalMatrix &a, int speedup, Rng &rng,
                                    EdgeOrder order = EdgeOrder::kRandom) {
    MaximalMatchingScheduler scheduler(state.n_ports, speedup, order);
    return scheduler.schedule(state, a, rng);
}

// No arrivals: schedules the cells already queued in `state`.
inline ScheduleDecision schedule_mm(const SwitchState &state, int speedup, Rng &rng,
                                    EdgeOrder order = EdgeOrder::kRandom) {
    return schedule_mm(state, ArrivalMatrix::none(state.n_ports), speedup, rng, order);
}

inline ScheduleDecision schedule_oq(const SwitchState &state, const ArrivalMatrix &a) {
    if (!state.x.all_zero())
        throw PreconditionError("schedule_oq: output-queued switch holds no input backlog");
    const auto n = static_cast<std::size_t>(state.n_ports);
    ScheduleDecision dec = ScheduleDecision::zero(state.n_ports, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (const int j = a.destination(i); j != ArrivalMatrix::kNone) {
            const auto out = static_cast<std::size_t>(j);
            ++dec.d(i, out);
            dec.e[out] = 1;
        }
    }
    for (std::size_t j = 0; j < n; ++j)
        dec.e[j] |= state.y[j] > 0 ? 1 : 0;
    return dec;
}

// Destinations of the cells at each input, oldest first.
class FcfsQueues {
public:
    explicit FcfsQueues(int n_ports) : queues_(static_cast<std::size_t>(n_ports)) {}

    void admit(const ArrivalMatrix &a) {
        for (std::size_t i = 0; i < queues_.size(); ++i)
            if (const int j = a.destination(i); j != ArrivalMatrix::kNone)
                queues_[i].push_back(j);
    }

    bool empty(std::size_t input) const { return queues_[input].empty(); }
    int head(std::size_t input) const { return queues_[input].front(); }
    void pop(std::size_t input) { queues_[input].pop_front(); }
    std::size_t length(std::size_t input) const { return queues_[input].size(); }

    // True when the per-destination counts agree with x.
    bool consistent_with(const CountMatrix &x) const {
        for (std::size_t i = 0; i < queues_.size(); ++i) {
            std::vector<int> counts(queues_.size(), 0);
            for (int j : queues_[i])
                ++counts[static_cast<std::size_t>(j)];
            for (std::size_t j = 0; j < queues_.size(); ++j)
                if (counts[j] != x(i, j))
                    return false;
        }
        return true;
    }

private:
    std::vector<std::deque<int>> queues_;
};

// Admits `a` into the FCFS queues, then runs one round: each input requests
// the output of its head cell and each requested output grants one requester
// uniformly at random. Granted head cells leave their queues.
inline ScheduleDecision schedule_iq_fcfs(const SwitchState &state, const ArrivalMatrix &a, FcfsQueues &fifo,
                                         Rng &rng) {
    const auto n = static_cast<std::size_t>(state.n_ports);
    fifo.admit(a);
    std::vector<int> requests(n, 0);
    std::vector<int> winner(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (fifo.empty(i))
            continue;
        const auto j = static_cast<std::size_t>(fifo.head(i));
        // Reservoir choice keeps the grant uniform over requesters.
        if (rng.below(static_cast<std::uint64_t>(++requests[j])) == 0)
            winner[j] = static_cast<int>(i);
    }
    ScheduleDecision dec = ScheduleDecision::zero(state.n_ports, 1);
    for (std::size_t j = 0; j < n; ++j) {
        if (winner[j] >= 0) {
            const auto i = static_cast<std::size_t>(winner[j]);
            dec.d(i, j) = 1;
            fifo.pop(i);
        }
        dec.e[j] = state.y[j] > 0 || winner[j] >= 0 ? 1 : 0;
    }
    return dec;
}

// Per-run scheduler state for any PolicyKind.
class PolicyRunner {
public:
    PolicyRunner(const PolicyKind &kind, int n_ports)
        : kind_(kind), fifo_(n_ports), mm_(n_ports, policy_speedup(kind),
                                           std::holds_alternative<MaximalMatching>(kind)
                                               ? std::get<MaximalMatching>(kind).order
                                               : EdgeOrder::kRandom) {}

    const ScheduleDecision &schedule(const SwitchState &state, const ArrivalMatrix &a, Rng &rng) {
        if (std::holds_alternative<MaximalMatching>(kind_))
            return mm_.schedule(state, a, rng);
        if (std::holds_alternative<OutputQueued>(kind_))
            last_ = schedule_oq(state, a);
        else
            last_ = schedule_iq_fcfs(state, a, fifo_, rng);
        return last_;
    }

    const PolicyKind &kind() const { return kind_; }
    const FcfsQueues &fifo() const { return fifo_; }

private:
    PolicyKind kind_;
    FcfsQueues fifo_;
    MaximalMatchingScheduler mm_;
    ScheduleDecision last_;
};

} // namespace xbar

#endif // XBAR_POLICIES_HPP
