#ifndef XBAR_ANALYSIS_HPP
#define XBAR_ANALYSIS_HPP

#include <cfenv>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "switch_core.hpp"

namespace xbar {

// Closed-form backlog analysis of maximal-matching CIOQ switching under IID
// uniform traffic at load lambda:
//
//   alpha1(s) = 1 / ((s-1)^2 - 1)        alpha2(s) = (s-1) / ((s-1)^2 - 1)
//   k1 = 1 + alpha1    k2 = 2 + (alpha1 + alpha2)(s+1)    k3 = 2 + 2 alpha1 + 2 alpha2
//
//   J_mm <= (k1 (1 - 1/N) lambda^2 + k2 lambda - k3 lambda^2) N / (2 (1 - lambda))
//   J_oq  = ((1 - 1/N) lambda^2 + 2 lambda - 2 lambda^2) N / (2 (1 - lambda))
//   J_mm / J_oq <= N/(N-1) * (2 (s-1)^2 + (s-1)) / ((s-1)^2 - 1)
//
// Every bound needs s >= 3 so the alpha denominators are positive.

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

inline void require_speedup(int s) {
    if (s < 3)
        throw DomainError("analytic bounds require speedup s >= 3 (got " + std::to_string(s) + ")");
}

struct BoundInputs {
    int n_ports = 2;
    double load = 0.0;
    int speedup = 3;

    void validate() const {
        if (n_ports < 2)
            throw DomainError("analytic bounds require N >= 2");
        if (!(load >= 0.0 && load < 1.0))
            throw DomainError("analytic bounds require 0 <= load < 1");
        require_speedup(speedup);
    }
};

struct Coefficients {
    double alpha1 = 0;
    double alpha2 = 0;
    double k1 = 0;
    double k2 = 0;
    double k3 = 0;
};

inline Coefficients coefficients(int s) {
    require_speedup(s);
    const double m = s - 1.0;
    const double denom = m * m - 1.0;
    Coefficients c;
    c.alpha1 = 1.0 / denom;
    c.alpha2 = m / denom;
    c.k1 = 1.0 + c.alpha1;
    c.k2 = 2.0 + (c.alpha1 + c.alpha2) * (s + 1.0);
    c.k3 = 2.0 + 2.0 * c.alpha1 + 2.0 * c.alpha2;
    return c;
}

// Q_ij = (1 + a1 + a2) lambda - (a1 colsum_j(d) + e_j + a2 rowsum_i(d)).
inline double q_ij(double load, const CountMatrix &d, const std::vector<int> &e, int s, std::size_t i,
                   std::size_t j) {
    const Coefficients c = coefficients(s);
    return (1.0 + c.alpha1 + c.alpha2) * load -
           (c.alpha1 * d.col_sum(j) + e[j] + c.alpha2 * d.row_sum(i));
}

struct Lemma2Violation {
    std::size_t input = 0;
    std::size_t output = 0;
    double q = 0;
};

// Checks Q_ij <= lambda - 1 at every occupied VOQ. `x` is the occupancy at
// the start of the scheduling phase, this slot's arrivals included. The
// inequality is tight in several cases, so a 1e-12 slack absorbs rounding.
inline std::vector<Lemma2Violation> verify_lemma2(const CountMatrix &x, const ScheduleDecision &dec, double load,
                                                  int s) {
    const Coefficients c = coefficients(s);
    if (!(load >= 0.0 && load <= 1.0))
        throw DomainError("verify_lemma2: load must lie in [0, 1]");
    const std::size_t n = x.rows();
    std::vector<double> inflow(n), outflow(n);
    for (std::size_t k = 0; k < n; ++k) {
        inflow[k] = dec.d.col_sum(k);
        outflow[k] = dec.d.row_sum(k);
    }
    const double offered = (1.0 + c.alpha1 + c.alpha2) * load;
    std::vector<Lemma2Violation> out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (x(i, j) <= 0)
                continue;
            const double q = offered - (c.alpha1 * inflow[j] + dec.e[j] + c.alpha2 * outflow[i]);
            if (q > load - 1.0 + 1e-12)
                out.push_back({i, j, q});
        }
    }
    return out;
}

inline std::vector<Lemma2Violation> verify_lemma2(const SwitchState &before_transfers, const ScheduleDecision &dec,
                                                  double load, int s) {
    return verify_lemma2(before_transfers.x, dec, load, s);
}

inline double bound_mm_upper(const BoundInputs &b) {
    b.validate();
    const Coefficients c = coefficients(b.speedup);
    const double n = b.n_ports;
    const double l = b.load;
    return (c.k1 * (1.0 - 1.0 / n) * l * l + c.k2 * l - c.k3 * l * l) * n / (2.0 * (1.0 - l));
}

// Exact mean total backlog of the output-queued switch (Pollaczek-Khinchine
// for the discrete-time output queue), with the state observed after the
// slot's arrivals land.
inline double j_oq_exact(int n_ports, double load) {
    if (n_ports < 1)
        throw DomainError("j_oq_exact: N must be positive");
    if (!(load >= 0.0 && load < 1.0))
        throw DomainError("j_oq_exact: load must lie in [0, 1)");
    const double n = n_ports;
    const double l = load;
    return ((1.0 - 1.0 / n) * l * l + 2.0 * l - 2.0 * l * l) * n / (2.0 * (1.0 - l));
}

// Load-free ceiling on J_mm / J_oq.
inline double ratio_bound(int n_ports, int s) {
    if (n_ports < 2)
        throw DomainError("ratio_bound: N must be at least 2");
    require_speedup(s);
    const double n = n_ports;
    const double m = s - 1.0;
    return n / (n - 1.0) * (2.0 * m * m + m) / (m * m - 1.0);
}

// bound_mm_upper / j_oq_exact at the given load, in a form that stays
// finite at load 0.
inline double ratio_at_load(const BoundInputs &b) {
    b.validate();
    const Coefficients c = coefficients(b.speedup);
    const double inv_n = 1.0 / b.n_ports;
    const double l = b.load;
    return (c.k1 * (1.0 - inv_n) * l + c.k2 - c.k3 * l) / (2.0 - (1.0 + inv_n) * l);
}

// h_U(x, y) = h1(x) + h2(x) + h3(x, y), the quadratic potential behind the
// maximal-matching upper bound:
//   h1 = a1/(2(1-l)) sum_j (C_j^2 + (s - 2l) C_j),      C_j = sum_i x_ij
//   h2 = a2/(2(1-l)) sum_i (R_i^2 + (s - 2l) R_i),      R_i = sum_j x_ij
//   h3 = 1/(2(1-l)) sum_j (C_j + y_j)^2 + (1-2l)/(2(1-l)) sum_j (C_j + y_j)
inline double lyapunov_h(const SwitchState &state, double load, int s) {
    const Coefficients c = coefficients(s);
    if (!(load >= 0.0 && load < 1.0))
        throw DomainError("lyapunov_h: load must lie in [0, 1)");
    const std::size_t n = static_cast<std::size_t>(state.n_ports);
    const double scale = 1.0 / (2.0 * (1.0 - load));
    const double lin = s - 2.0 * load;

    double h1 = 0, h2 = 0, h3_sq = 0, h3_lin = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double col = state.x.col_sum(k);
        const double row = state.x.row_sum(k);
        const double out = col + state.y[k];
        h1 += col * col + lin * col;
        h2 += row * row + lin * row;
        h3_sq += out * out;
        h3_lin += out;
    }
    return c.alpha1 * scale * h1 + c.alpha2 * scale * h2 + scale * h3_sq + (1.0 - 2.0 * load) * scale * h3_lin;
}

// Round half to even at `digits` decimal places.
inline double round_half_even(double value, int digits) {
    const double scale = std::pow(10.0, digits);
    const int saved = std::fegetround();
    std::fesetround(FE_TONEAREST);
    const double r = std::nearbyint(value * scale) / scale;
    std::fesetround(saved);
    return r;
}

} // namespace xbar

#endif // XBAR_ANALYSIS_HPP
