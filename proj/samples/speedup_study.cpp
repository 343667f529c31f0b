// Compares simulated maximal-matching backlog against output queueing and
// the closed-form bounds for a few speedups at one load.
//
//   speedup_study [N] [load] [slots]

#include <cstdio>
#include <cstdlib>

#include "xbar/xbar.hpp"

int main(int argc, char **argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 16;
    const double load = argc > 2 ? std::atof(argv[2]) : 0.8;
    const long slots = argc > 3 ? std::atol(argv[3]) : 200'000;

    auto oq_cfg = xbar::RunConfig::with_defaults(xbar::OutputQueued{}, {load, n, 7}, slots);
    const auto oq = xbar::run(oq_cfg);
    std::printf("N=%d load=%.2f  OQ simulated %.2f (exact %.2f)\n", n, load, oq.mean_backlog, xbar::j_oq_exact(n, load));

    std::printf("%4s %12s %12s %10s %10s\n", "s", "J_mm", "bound", "ratio", "ceiling");
    for (int s : {1, 2, 3, 4, 5, 8}) {
        auto cfg = xbar::RunConfig::with_defaults(xbar::MaximalMatching{s}, {load, n, 7}, slots);
        const auto mm = xbar::run(cfg);
        if (s >= 3)
            std::printf("%4d %12.2f %12.2f %10.3f %10.3f\n", s, mm.mean_backlog, xbar::bound_mm_upper({n, load, s}),
                        mm.mean_backlog / oq.mean_backlog, xbar::ratio_bound(n, s));
        else
            std::printf("%4d %12.2f %12s %10.3f %10s\n", s, mm.mean_backlog, "-", mm.mean_backlog / oq.mean_backlog, "-");
    }
}
