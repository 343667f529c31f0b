#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "xbar/analysis.hpp"
#include "xbar/policies.hpp"

using namespace xbar;

namespace {

// Exact rational arithmetic for the hand-derived values.
struct Frac {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Frac(std::int64_t n = 0, std::int64_t d = 1) : num(n), den(d) { normalize(); }
    void normalize() {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend Frac operator+(Frac a, Frac b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
    friend Frac operator-(Frac a, Frac b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
    friend Frac operator*(Frac a, Frac b) { return {a.num * b.num, a.den * b.den}; }
    friend Frac operator/(Frac a, Frac b) { return {a.num * b.den, a.den * b.num}; }
    friend bool operator==(Frac a, Frac b) { return a.num == b.num && a.den == b.den; }
};

Frac exact_bound(std::int64_t n, Frac load, std::int64_t s) {
    const Frac a1 = Frac(1, (s - 1) * (s - 1) - 1);
    const Frac a2 = Frac(s - 1, (s - 1) * (s - 1) - 1);
    const Frac k1 = Frac(1) + a1;
    const Frac k2 = Frac(2) + (a1 + a2) * Frac(s + 1);
    const Frac k3 = Frac(2) + Frac(2) * a1 + Frac(2) * a2;
    const Frac l2 = load * load;
    return (k1 * (Frac(1) - Frac(1, n)) * l2 + k2 * load - k3 * l2) * Frac(n) / (Frac(2) * (Frac(1) - load));
}

// Mean total backlog of N output queues, each fed by Binomial(N, load/N)
// arrivals per slot and observed after arrivals land: stationary law of
// Z' = max(Z - 1, 0) + K by power iteration on a truncated chain.
double oq_backlog_by_power_iteration(int n, double load, std::size_t cap) {
    const double p = load / n;
    std::vector<double> pk(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        pk[static_cast<std::size_t>(k)] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) *
                                          std::pow(p, k) * std::pow(1 - p, n - k);
    std::vector<double> pi(cap, 0.0), next(cap);
    pi[0] = 1.0;
    for (int iter = 0; iter < 200000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t z = 0; z < cap; ++z) {
            if (pi[z] == 0)
                continue;
            const std::size_t base = z > 0 ? z - 1 : 0;
            for (std::size_t k = 0; k < pk.size(); ++k)
                next[std::min(cap - 1, base + k)] += pi[z] * pk[k];
        }
        double diff = 0;
        for (std::size_t z = 0; z < cap; ++z)
            diff += std::abs(next[z] - pi[z]);
        pi.swap(next);
        if (diff < 1e-14)
            break;
    }
    double mean = 0;
    for (std::size_t z = 0; z < cap; ++z)
        mean += static_cast<double>(z) * pi[z];
    return mean * n;
}

} // namespace

TEST(Coefficients, SpeedupThree) {
    const Coefficients c = coefficients(3);
    EXPECT_DOUBLE_EQ(c.alpha1, 1.0 / 3);
    EXPECT_DOUBLE_EQ(c.alpha2, 2.0 / 3);
    EXPECT_DOUBLE_EQ(c.k1, 4.0 / 3);
    EXPECT_DOUBLE_EQ(c.k2, 6.0);
    EXPECT_DOUBLE_EQ(c.k3, 4.0);
}

TEST(Coefficients, SpeedupFourAgainstRationals) {
    const Coefficients c = coefficients(4);
    const Frac a1(1, 8), a2(3, 8);
    EXPECT_DOUBLE_EQ(c.alpha1, a1.value());
    EXPECT_DOUBLE_EQ(c.alpha2, a2.value());
    EXPECT_DOUBLE_EQ(c.k1, (Frac(1) + a1).value());
    EXPECT_DOUBLE_EQ(c.k2, (Frac(2) + (a1 + a2) * Frac(5)).value());
    EXPECT_DOUBLE_EQ(c.k3, (Frac(2) + Frac(2) * a1 + Frac(2) * a2).value());
    EXPECT_DOUBLE_EQ(c.k1, 9.0 / 8);
    EXPECT_DOUBLE_EQ(c.k2, 4.5);
    EXPECT_DOUBLE_EQ(c.k3, 3.0);
}

TEST(Coefficients, LargeSpeedupLimits) {
    const Coefficients c = coefficients(100000);
    EXPECT_NEAR(c.alpha1, 0, 1e-9);
    EXPECT_NEAR(c.alpha2, 0, 1e-4);
    EXPECT_NEAR(c.k1, 1, 1e-9);
    EXPECT_NEAR(c.k2, 3, 1e-4);  // alpha2 (s + 1) tends to 1
    EXPECT_NEAR(c.k3, 2, 1e-4);
}

TEST(Coefficients, RejectSpeedupBelowThree) {
    EXPECT_THROW(coefficients(2), DomainError);
    EXPECT_THROW(coefficients(1), DomainError);
    EXPECT_THROW(coefficients(0), DomainError);
}

TEST(QIj, TightCaseOutputSaturated) {
    // s = 3, lambda = 1: output 0 receives 3 cells from other inputs, input 0 sends nothing.
    CountMatrix d(4, 4);
    d(1, 0) = d(2, 0) = d(3, 0) = 1;
    const double q = q_ij(1.0, d, {1, 0, 0, 0}, 3, 0, 0);
    EXPECT_NEAR(q, 0.0, 1e-12);
}

TEST(QIj, InputSaturatedCase) {
    CountMatrix d(4, 4);
    d(0, 1) = d(0, 2) = d(0, 3) = 1;  // row 0 sends 3, column 0 receives nothing
    const double q = q_ij(0.6, d, {0, 1, 1, 1}, 3, 0, 0);
    const double expected = (1.0 + 1.0 / 3 + 2.0 / 3) * 0.6 - (2.0 / 3) * 3;
    EXPECT_NEAR(q, expected, 1e-12);
    EXPECT_NEAR(q, -0.8, 1e-12);
    EXPECT_LE(q, 0.6 - 1.0);
}

TEST(QIj, ZeroEverything) {
    EXPECT_DOUBLE_EQ(q_ij(0.0, CountMatrix(3, 3), {0, 0, 0}, 3, 1, 2), 0.0);
    EXPECT_THROW(q_ij(0.5, CountMatrix(3, 3), {0, 0, 0}, 2, 1, 2), DomainError);
}

TEST(VerifyLemma2, EmptyStateHasNoViolations) {
    EXPECT_TRUE(verify_lemma2(SwitchState::empty(4), ScheduleDecision::zero(4, 3), 0.9, 3).empty());
}

TEST(VerifyLemma2, NonMaximalScheduleIsCaught) {
    SwitchState s = SwitchState::empty(2);
    s.x(0, 0) = 1;
    const auto v = verify_lemma2(s, ScheduleDecision::zero(2, 3), 0.5, 3);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].input, 0u);
    EXPECT_EQ(v[0].output, 0u);
    EXPECT_NEAR(v[0].q, (1.0 + 1.0 / 3 + 2.0 / 3) * 0.5, 1e-12);
}

TEST(VerifyLemma2, MaximalMatchingSchedulesNeverViolate) {
    Rng rng(17);
    for (int trial = 0; trial < 3000; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(6));
        const int s = 3 + static_cast<int>(rng.below(4));
        SwitchState state = SwitchState::empty(n);
        for (auto &v : state.x.values())
            v = rng.bernoulli(0.5) ? static_cast<int>(rng.below(5)) : 0;
        for (auto &v : state.y)
            v = static_cast<int>(rng.below(3));
        const double load = rng.uniform();
        const ScheduleDecision dec = schedule_mm(state, s, rng);
        ASSERT_TRUE(verify_lemma2(state, dec, load, s).empty());
        ASSERT_TRUE(verify_lemma2(state, dec, 1.0, s).empty());
    }
}

TEST(VerifyLemma2, SingleRoundScheduleFailsAtSpeedupThree) {
    // A single-round schedule of a state that needs three rounds violates
    // the inequality at s = 3: input 0 has cells for outputs 0..2 and every
    // output has competing cells, but only one round ran.
    SwitchState s = SwitchState::empty(3);
    s.x = CountMatrix{{1, 1, 1}, {1, 0, 0}, {0, 0, 0}};
    Rng rng(2);
    const ScheduleDecision one_round = schedule_mm(s, 1, rng, EdgeOrder::kLexicographic);
    EXPECT_FALSE(verify_lemma2(s, one_round, 0.9, 3).empty());
}

TEST(BoundMmUpper, ZeroLoad) {
    for (int n : {2, 16, 128})
        for (int s : {3, 4, 9})
            EXPECT_DOUBLE_EQ(bound_mm_upper({n, 0.0, s}), 0.0);
}

TEST(BoundMmUpper, HandValueAgainstRationals) {
    EXPECT_TRUE(exact_bound(16, Frac(1, 2), 3) == Frac(37));
    EXPECT_NEAR(bound_mm_upper({16, 0.5, 3}), 37.0, 1e-12);
    for (std::int64_t n : {2, 8, 32})
        for (std::int64_t s : {3, 4, 5, 8})
            for (Frac l : {Frac(1, 10), Frac(1, 2), Frac(4, 5), Frac(19, 20)})
                EXPECT_NEAR(bound_mm_upper({static_cast<int>(n), l.value(), static_cast<int>(s)}),
                            exact_bound(n, l, s).value(), 1e-9 * exact_bound(n, l, s).value());
}

TEST(BoundMmUpper, DivergesAsLoadApproachesOne) {
    double prev = 0;
    for (double gap : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
        const double b = bound_mm_upper({16, 1.0 - gap, 3});
        EXPECT_GT(b, prev);
        prev = b;
    }
    EXPECT_GT(prev, 1e6);
    EXPECT_THROW(bound_mm_upper({16, 1.0, 3}), DomainError);
    EXPECT_THROW(bound_mm_upper({1, 0.5, 3}), DomainError);
    EXPECT_THROW(bound_mm_upper({16, 0.5, 2}), DomainError);
}

TEST(JOqExact, Values) {
    EXPECT_DOUBLE_EQ(j_oq_exact(7, 0.0), 0.0);
    EXPECT_NEAR(j_oq_exact(2, 0.5), 1.25, 1e-12);
    EXPECT_THROW(j_oq_exact(4, 1.0), DomainError);
    // J/N tends to (2 lambda - lambda^2) / (2 (1 - lambda)).
    const double l = 0.7;
    EXPECT_NEAR(j_oq_exact(10'000'000, l) / 1e7, (2 * l - l * l) / (2 * (1 - l)), 1e-6);
}

TEST(JOqExact, AgreesWithStationaryDistribution) {
    for (int n : {1, 2, 4, 16})
        for (double l : {0.2, 0.5, 0.8})
            EXPECT_NEAR(j_oq_exact(n, l), oq_backlog_by_power_iteration(n, l, 400), 1e-8 * (1 + j_oq_exact(n, l)))
                << "N=" << n << " load=" << l;
}

TEST(Monotonicity, BoundsIncreaseInLoad) {
    for (int n : {2, 8, 64})
        for (int s : {3, 5, 10}) {
            double prev_b = -1, prev_j = -1;
            for (double l = 0.0; l < 0.999; l += 0.01) {
                const double b = bound_mm_upper({n, l, s});
                const double j = j_oq_exact(n, l);
                if (l > 0) {
                    EXPECT_GT(b, prev_b);
                    EXPECT_GT(j, prev_j);
                }
                prev_b = b;
                prev_j = j;
            }
        }
}

TEST(RatioBound, TableValuesAtN128) {
    const std::vector<std::pair<int, double>> table{{3, 3.36}, {4, 2.65}, {5, 2.42}, {8, 2.20}, {15, 2.10}};
    for (const auto &[s, value] : table)
        EXPECT_DOUBLE_EQ(round_half_even(ratio_bound(128, s), 2), value) << "s=" << s;
}

TEST(RatioBound, SmallAndLargeSwitches) {
    EXPECT_NEAR(ratio_bound(2, 3), 20.0 / 3, 1e-12);
    EXPECT_NEAR(ratio_bound(1'000'000, 3), 10.0 / 3, 1e-5);
    EXPECT_NEAR(ratio_bound(1'000'000'000, 1'000'000), 2.0, 1e-5);
    EXPECT_THROW(ratio_bound(1, 3), DomainError);
    EXPECT_THROW(ratio_bound(8, 2), DomainError);
}

TEST(RatioBound, DecreasingInPortsAndSpeedupWithInfimumTwo) {
    for (int n = 2; n < 200; ++n)
        for (int s = 3; s < 40; ++s) {
            const double r = ratio_bound(n, s);
            EXPECT_GT(r, 2.0);
            EXPECT_LT(ratio_bound(n + 1, s), r);
            EXPECT_LT(ratio_bound(n, s + 1), r);
        }
}

TEST(RatioAtLoad, EqualsBoundOverOq) {
    for (int n : {2, 16, 128})
        for (int s : {3, 4, 8})
            for (double l : {0.1, 0.5, 0.9}) {
                const BoundInputs b{n, l, s};
                EXPECT_NEAR(ratio_at_load(b), bound_mm_upper(b) / j_oq_exact(n, l), 1e-9);
                EXPECT_LE(ratio_at_load(b), ratio_bound(n, s) + 1e-12);
            }
}

TEST(LyapunovH, ZeroState) { EXPECT_DOUBLE_EQ(lyapunov_h(SwitchState::empty(5), 0.5, 3), 0.0); }

TEST(LyapunovH, SingleCellWorkedByHand) {
    SwitchState s = SwitchState::empty(1);
    s.x(0, 0) = 1;
    // s = 3, lambda = 0.5: 2(1 - lambda) = 1 and s - 2 lambda = 2.
    const double h1 = (1.0 / 3) / 1.0 * (1 + 2);
    const double h2 = (2.0 / 3) / 1.0 * (1 + 2);
    const double h3 = 1.0 / 1.0 * 1 + 0.0 / 1.0 * 1;
    EXPECT_NEAR(h1 + h2 + h3, 4.0, 1e-12);
    EXPECT_NEAR(lyapunov_h(s, 0.5, 3), h1 + h2 + h3, 1e-12);
}

TEST(LyapunovH, DirectEvaluationOnRandomStates) {
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(6));
        const int s = 3 + static_cast<int>(rng.below(5));
        const double l = 0.95 * rng.uniform();
        SwitchState st = SwitchState::empty(n);
        for (auto &v : st.x.values())
            v = static_cast<int>(rng.below(6));
        for (auto &v : st.y)
            v = static_cast<int>(rng.below(6));

        const double m = s - 1.0;
        const double a1 = 1 / (m * m - 1), a2 = m / (m * m - 1);
        double h = 0;
        for (int j = 0; j < n; ++j) {
            double col = 0;
            for (int i = 0; i < n; ++i)
                col += st.x(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            h += a1 / (2 * (1 - l)) * (col * col + (s - 2 * l) * col);
            const double w = col + st.y[static_cast<std::size_t>(j)];
            h += w * w / (2 * (1 - l)) + (1 - 2 * l) / (2 * (1 - l)) * w;
        }
        for (int i = 0; i < n; ++i) {
            double row = 0;
            for (int j = 0; j < n; ++j)
                row += st.x(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            h += a2 / (2 * (1 - l)) * (row * row + (s - 2 * l) * row);
        }
        EXPECT_NEAR(lyapunov_h(st, l, s), h, 1e-9 * (1 + h));
        // Quadratic with positive leading terms: bounded below (by 0 on integer states).
        EXPECT_GE(lyapunov_h(st, l, s), 0.0);
    }
}

TEST(RoundHalfEven, Ties) {
    EXPECT_DOUBLE_EQ(round_half_even(2.5, 0), 2.0);
    EXPECT_DOUBLE_EQ(round_half_even(3.5, 0), 4.0);
    EXPECT_DOUBLE_EQ(round_half_even(3.3596, 2), 3.36);
}
