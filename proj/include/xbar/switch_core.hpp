#ifndef XBAR_SWITCH_CORE_HPP
#define XBAR_SWITCH_CORE_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace xbar {

struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A schedule asked for more cells than a queue holds. Always a policy bug.
struct InfeasibleDecision : std::logic_error {
    using std::logic_error::logic_error;
};

struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// Dense row-major matrix.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<T>> init) : rows_(init.size()) {
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto &row : init) {
            if (row.size() != cols_)
                throw PreconditionError("Matrix: ragged initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T &operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    T row_sum(std::size_t i) const {
        auto first = data_.begin() + static_cast<std::ptrdiff_t>(i * cols_);
        return std::accumulate(first, first + static_cast<std::ptrdiff_t>(cols_), T{});
    }

    T col_sum(std::size_t j) const {
        T total{};
        for (std::size_t i = 0; i < rows_; ++i)
            total += (*this)(i, j);
        return total;
    }

    T sum() const { return std::accumulate(data_.begin(), data_.end(), T{}); }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool all_zero() const {
        return std::all_of(data_.begin(), data_.end(), [](const T &v) { return v == T{}; });
    }

    const std::vector<T> &values() const { return data_; }
    std::vector<T> &values() { return data_; }

    friend bool operator==(const Matrix &, const Matrix &) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using CountMatrix = Matrix<int>;

// (X, Y): x(i, j) cells at input i waiting for output j, y[j] cells in output queue j.
struct SwitchState {
    int n_ports = 0;
    CountMatrix x;
    std::vector<int> y;

    static SwitchState empty(int n) {
        if (n <= 0)
            throw PreconditionError("SwitchState: n_ports must be positive");
        return SwitchState{n, CountMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n)),
                           std::vector<int>(static_cast<std::size_t>(n), 0)};
    }

    // Throws unless dimensions agree and every count is non-negative.
    void validate() const {
        const auto n = static_cast<std::size_t>(n_ports);
        if (n_ports <= 0 || x.rows() != n || x.cols() != n || y.size() != n)
            throw PreconditionError("SwitchState: dimensions disagree with n_ports");
        if (std::any_of(x.values().begin(), x.values().end(), [](int v) { return v < 0; }) ||
            std::any_of(y.begin(), y.end(), [](int v) { return v < 0; }))
            throw InvariantViolation("SwitchState: negative queue count");
    }

    friend bool operator==(const SwitchState &, const SwitchState &) = default;
};

// 0/1 arrival matrix with at most one cell per input. Stored as one
// destination per input, which makes the row constraint structural.
class ArrivalMatrix {
public:
    static constexpr int kNone = -1;

    explicit ArrivalMatrix(int n = 0) : dest_(static_cast<std::size_t>(n), kNone) {}

    static ArrivalMatrix none(int n) { return ArrivalMatrix(n); }

    static ArrivalMatrix from_dense(const CountMatrix &a) {
        if (a.rows() != a.cols())
            throw PreconditionError("ArrivalMatrix: matrix must be square");
        ArrivalMatrix out(static_cast<int>(a.rows()));
        for (std::size_t i = 0; i < a.rows(); ++i) {
            for (std::size_t j = 0; j < a.cols(); ++j) {
                const int v = a(i, j);
                if (v != 0 && v != 1)
                    throw PreconditionError("ArrivalMatrix: entries must be 0 or 1");
                if (v == 1) {
                    if (out.dest_[i] != kNone)
                        throw PreconditionError("ArrivalMatrix: row " + std::to_string(i) +
                                                " has more than one arrival");
                    out.dest_[i] = static_cast<int>(j);
                }
            }
        }
        return out;
    }

    int n_ports() const { return static_cast<int>(dest_.size()); }

    // Destination of the cell arriving at input i, or kNone.
    int destination(std::size_t i) const { return dest_[i]; }
    void set_destination(std::size_t i, int j) { dest_[i] = j; }

    int operator()(std::size_t i, std::size_t j) const { return dest_[i] == static_cast<int>(j) ? 1 : 0; }

    int row_sum(std::size_t i) const { return dest_[i] == kNone ? 0 : 1; }

    int col_sum(std::size_t j) const {
        return static_cast<int>(std::count(dest_.begin(), dest_.end(), static_cast<int>(j)));
    }

    int count() const {
        return static_cast<int>(dest_.size()) - static_cast<int>(std::count(dest_.begin(), dest_.end(), kNone));
    }

    CountMatrix to_dense() const {
        CountMatrix a(dest_.size(), dest_.size());
        for (std::size_t i = 0; i < dest_.size(); ++i)
            if (dest_[i] != kNone)
                a(i, static_cast<std::size_t>(dest_[i])) = 1;
        return a;
    }

    friend bool operator==(const ArrivalMatrix &, const ArrivalMatrix &) = default;

private:
    std::vector<int> dest_;
};

// One slot's schedule: d(i, j) cells moved input i -> output j over the
// speedup rounds, e[j] = 1 when output j transmits a cell.
struct ScheduleDecision {
    CountMatrix d;
    std::vector<int> e;
    int speedup = 1;

    static ScheduleDecision zero(int n, int speedup = 1) {
        return ScheduleDecision{CountMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n)),
                                std::vector<int>(static_cast<std::size_t>(n), 0), speedup};
    }

    friend bool operator==(const ScheduleDecision &, const ScheduleDecision &) = default;
};

struct TrafficConfig {
    double load = 0.0;
    int n_ports = 1;
    std::uint64_t seed = 0;

    // load == 1 is admitted only for finite-horizon checks.
    void validate(bool allow_unit_load = false) const {
        if (n_ports <= 0)
            throw PreconditionError("TrafficConfig: n_ports must be positive");
        const bool in_range = allow_unit_load ? (load >= 0.0 && load <= 1.0) : (load >= 0.0 && load < 1.0);
        if (!in_range)
            throw PreconditionError("TrafficConfig: load must lie in [0, 1)");
    }
};

// IID uniform traffic: each input independently receives a cell with
// probability load, destined to an output drawn uniformly.
inline void sample_arrivals(const TrafficConfig &cfg, Rng &rng, ArrivalMatrix &out) {
    const auto n = static_cast<std::size_t>(cfg.n_ports);
    if (out.n_ports() != cfg.n_ports)
        out = ArrivalMatrix(cfg.n_ports);
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.bernoulli(cfg.load))
            out.set_destination(i, static_cast<int>(rng.below(n)));
        else
            out.set_destination(i, ArrivalMatrix::kNone);
    }
}

inline ArrivalMatrix sample_arrivals(const TrafficConfig &cfg, Rng &rng) {
    ArrivalMatrix a(cfg.n_ports);
    sample_arrivals(cfg, rng, a);
    return a;
}

inline void land_arrivals(SwitchState &state, const ArrivalMatrix &a) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(state.n_ports); ++i) {
        const int j = a.destination(i);
        if (j != ArrivalMatrix::kNone)
            ++state.x(i, static_cast<std::size_t>(j));
    }
}

// X <- X + A - D, Y <- Y + colsum(D) - E, in place. The state is untouched
// when the decision is infeasible.
inline void advance(SwitchState &state, const ArrivalMatrix &a, const ScheduleDecision &dec) {
    const auto n = static_cast<std::size_t>(state.n_ports);
    if (a.n_ports() != state.n_ports || dec.d.rows() != n || dec.d.cols() != n || dec.e.size() != n)
        throw PreconditionError("apply_slot: dimension mismatch");

    std::vector<int> inflow(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const int *x = &state.x(i, 0);
        const int *d = &dec.d(i, 0);
        const int dest = a.destination(i);
        int sign = 0;  // negative iff some transfer is negative or overdraws its queue
        for (std::size_t j = 0; j < n; ++j) {
            sign |= d[j] | (x[j] + (static_cast<int>(j) == dest) - d[j]);
            inflow[j] += d[j];
        }
        if (sign < 0)
            throw InfeasibleDecision("apply_slot: transfers from input " + std::to_string(i) +
                                     " exceed available cells");
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (dec.e[j] != 0 && dec.e[j] != 1)
            throw InfeasibleDecision("apply_slot: output service must be 0 or 1");
        if (state.y[j] + inflow[j] - dec.e[j] < 0)
            throw InfeasibleDecision("apply_slot: output " + std::to_string(j) + " served while empty");
    }

    for (std::size_t i = 0; i < n; ++i) {
        int *x = &state.x(i, 0);
        const int *d = &dec.d(i, 0);
        for (std::size_t j = 0; j < n; ++j)
            x[j] -= d[j];
        if (const int j = a.destination(i); j != ArrivalMatrix::kNone)
            ++x[j];
    }
    for (std::size_t j = 0; j < n; ++j)
        state.y[j] += inflow[j] - dec.e[j];
}

inline SwitchState apply_slot(SwitchState state, const ArrivalMatrix &a, const ScheduleDecision &dec) {
    advance(state, a, dec);
    return state;
}

inline std::int64_t total_backlog(const SwitchState &state) {
    std::int64_t total = 0;
    for (int v : state.x.values())
        total += v;
    for (int v : state.y)
        total += v;
    return total;
}

} // namespace xbar

#endif // XBAR_SWITCH_CORE_HPP
