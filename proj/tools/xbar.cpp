// xbar: command-line front end for the crossbar switch simulator.
//
//   xbar simulate   one run (mm | oq | iqfcfs), optional result file
//   xbar bounds     closed-form backlog bounds for given or gridded parameters
//   xbar table1     load-free J_mm / J_oq ceiling for s in {3, 4, 5, 8, 15}
//   xbar sweep      grid of runs written as CSV or JSON
//
// Exit status: 0 success, 1 configuration or domain error, 2 invariant
// violation detected during a run.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xbar/xbar.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitViolation = 2;

const std::map<std::string, std::string> kPolicies{{"mm", "mm"}, {"oq", "oq"}, {"iqfcfs", "iqfcfs"}};

struct RunOptions {
    int ports = 16;
    double load = 0.5;
    int speedup = 3;
    std::string policy = "mm";
    std::int64_t slots = 1'000'000;
    std::int64_t warmup = -1;  // default: 10% of slots
    int batches = 20;
    int replicas = 1;
    std::uint64_t seed = 1;
    std::string order = "random";
    std::string out;
    std::string format = "csv";
    bool verify = false;
    bool bounds = false;
};

std::uint64_t default_seed() {
    if (const char *env = std::getenv("XBAR_SEED"))
        return std::stoull(env);
    return 1;
}

xbar::PolicyKind make_policy(const RunOptions &o) {
    if (o.policy == "oq")
        return xbar::OutputQueued{};
    if (o.policy == "iqfcfs")
        return xbar::InputQueuedFcfs{};
    return xbar::MaximalMatching{o.speedup, o.order == "lex" ? xbar::EdgeOrder::kLexicographic : xbar::EdgeOrder::kRandom};
}

xbar::RunConfig make_config(const RunOptions &o) {
    xbar::RunConfig cfg = xbar::RunConfig::with_defaults(make_policy(o), {o.load, o.ports, o.seed}, o.slots);
    if (o.warmup >= 0)
        cfg.warmup = o.warmup;
    cfg.batches = o.batches;
    cfg.replicas = o.replicas;
    cfg.verify_lemma2 = o.verify;
    return cfg;
}

void add_run_options(CLI::App *cmd, RunOptions &o) {
    cmd->add_option("--ports", o.ports, "switch size N")->capture_default_str();
    cmd->add_option("--policy", o.policy, "mm | oq | iqfcfs")->transform(CLI::IsMember(kPolicies))->capture_default_str();
    cmd->add_option("--speedup", o.speedup, "scheduling rounds per slot (mm)")->capture_default_str();
    cmd->add_option("--slots", o.slots, "horizon T in slots")->capture_default_str();
    cmd->add_option("--warmup", o.warmup, "discarded leading slots (default 10% of --slots)");
    cmd->add_option("--batches", o.batches, "batch count for the confidence interval")->capture_default_str();
    cmd->add_option("--replicas", o.replicas, "independent replicas")->capture_default_str();
    cmd->add_option("--seed", o.seed, "master seed (default $XBAR_SEED or 1)");
    cmd->add_option("--order", o.order, "greedy edge order: random | lex")
        ->check(CLI::IsMember({"random", "lex"}))
        ->capture_default_str();
    cmd->add_option("--out", o.out, "result file");
    cmd->add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    cmd->add_option("--config", "flat key = value file using the long flag names");
}

// Precedence: defaults < XBAR_SEED < config file < flags. Config keys are
// the long flag names without the leading dashes.
void apply_config_file(CLI::App *cmd, const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw xbar::ConfigError("cannot open config file " + path);
    for (const auto &[key, value] : xbar::parse_key_values(in)) {
        CLI::Option *opt = cmd->get_option_no_throw("--" + key);
        if (!opt || key == "config")
            throw xbar::ConfigError("unknown config key '" + key + "'");
        if (opt->count() > 0)
            continue;
        if (opt->get_expected_max() > 1) {
            std::stringstream items(value);
            for (std::string item; std::getline(items, item, ',');)
                opt->add_result(item);
        } else {
            opt->add_result(value);
        }
        opt->run_callback();
    }
}

void write_records(const std::string &path, const std::string &format, const std::vector<xbar::ResultRecord> &recs) {
    std::ofstream file;
    std::ostream *os = &std::cout;
    if (!path.empty() && path != "-") {
        file.open(path);
        if (!file)
            throw std::runtime_error("cannot open " + path);
        os = &file;
    }
    if (format == "json")
        xbar::write_json(*os, recs);
    else
        xbar::write_csv(*os, recs);
}

std::string fixed(double v, int digits) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(digits);
    ss << xbar::round_half_even(v, digits);
    return ss.str();
}

int cmd_simulate(const RunOptions &o) {
    const xbar::RunConfig cfg = make_config(o);
    const bool analytic = o.policy == "mm" && o.speedup >= 3;
    if ((o.bounds || o.verify) && !analytic)
        throw xbar::DomainError("--bounds and --verify-lemma2 require --policy mm with speedup s >= 3");
    cfg.validate();

    const xbar::RunResult result = xbar::run(cfg);
    const xbar::ResultRecord rec = xbar::make_record(cfg, &result);

    std::printf("policy=%s N=%d lambda=%g s=%d seed=%llu slots=%lld warmup=%lld\n", rec.policy.c_str(), rec.n_ports,
                rec.load, rec.speedup, static_cast<unsigned long long>(rec.seed), static_cast<long long>(rec.slots),
                static_cast<long long>(rec.warmup));
    std::printf("mean_backlog = %.6g +/- %.3g (95%% CI, %zu batches)\n", result.mean_backlog, result.ci95_halfwidth,
                result.batch_means.size());
    if (rec.j_oq)
        std::printf("j_oq_exact   = %.6g\n", *rec.j_oq);
    if (rec.bound_mm) {
        std::printf("bound_mm     = %.6g\n", *rec.bound_mm);
        std::printf("margin       = %.6g (bound - mean - ci95)\n",
                    *rec.bound_mm - result.mean_backlog - result.ci95_halfwidth);
    }
    if (cfg.verify_lemma2)
        std::printf("lemma2_violations = %lld\n", static_cast<long long>(result.violations));
    std::fprintf(stderr, "wall_time = %.3f s\n", result.wall_time);

    if (!o.out.empty())
        write_records(o.out, o.format, {rec});
    return result.violations > 0 ? kExitViolation : kExitOk;
}

struct BoundsOptions {
    std::vector<int> ports{16};
    std::vector<double> loads{0.5};
    std::vector<int> speedups{3};
    int precision = 2;
};

int cmd_bounds(const BoundsOptions &o) {
    for (int n : o.ports) {
        for (int s : o.speedups) {
            for (double load : o.loads) {
                const xbar::BoundInputs b{n, load, s};
                b.validate();
                std::printf("N = %d, lambda = %g, s = %d\n", n, load, s);
                std::printf("  bound_mm_upper = %s\n", fixed(xbar::bound_mm_upper(b), o.precision).c_str());
                std::printf("  j_oq_exact     = %s\n", fixed(xbar::j_oq_exact(n, load), o.precision).c_str());
                std::printf("  ratio_at_load  = %s\n", fixed(xbar::ratio_at_load(b), o.precision).c_str());
                std::printf("  ratio_bound    = %s\n", fixed(xbar::ratio_bound(n, s), o.precision).c_str());
            }
        }
    }
    return kExitOk;
}

const std::vector<int> kTable1Speedups{3, 4, 5, 8, 15};

int cmd_table1(int ports, const std::string &format) {
    if (format == "csv") {
        std::printf("N,s,ratio_bound\n");
        for (int s : kTable1Speedups)
            std::printf("%d,%d,%s\n", ports, s, fixed(xbar::ratio_bound(ports, s), 2).c_str());
        return kExitOk;
    }
    std::printf("J_mm / J_oq ceiling, N = %d\n", ports);
    std::printf("  s     ratio\n");
    for (int s : kTable1Speedups)
        std::printf("  %-4d  %s\n", s, fixed(xbar::ratio_bound(ports, s), 2).c_str());
    return kExitOk;
}

struct SweepOptions {
    RunOptions run;
    std::vector<double> loads;
    std::vector<int> speedups;
    std::vector<int> ports;
    bool scale_horizon = false;
    int workers = 1;
};

int cmd_sweep(const SweepOptions &o) {
    if (o.loads.empty())
        throw CLI::ValidationError("sweep", "--loads must be non-empty");
    // Unset axes fall back to the single-run defaults.
    const std::vector<int> speedups = o.speedups.empty() ? std::vector<int>{o.run.speedup} : o.speedups;
    const std::vector<int> ports = o.ports.empty() ? std::vector<int>{o.run.ports} : o.ports;
    RunOptions base_opts = o.run;
    base_opts.ports = ports.front();
    base_opts.load = o.loads.front();
    base_opts.speedup = speedups.front();
    xbar::RunConfig base = make_config(base_opts);

    xbar::SweepGrid grid{o.loads, speedups, ports, o.scale_horizon, o.workers};
    const auto rows = xbar::sweep(base, grid);

    std::vector<xbar::ResultRecord> recs;
    bool any_ok = false, any_violation = false;
    for (const auto &row : rows) {
        recs.push_back(xbar::make_record(row));
        any_ok |= row.result.has_value();
        any_violation |= row.result && row.result->violations > 0;
        if (!row.error.empty())
            std::fprintf(stderr, "cell %zu replica %d: %s\n", row.cell, row.replica, row.error.c_str());
    }
    write_records(o.run.out, o.run.format, recs);
    if (any_violation)
        return kExitViolation;
    return any_ok ? kExitOk : kExitConfig;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Crossbar switch simulator: maximal-matching CIOQ, output queueing and input-queued FCFS"};
    app.require_subcommand(1);

    RunOptions sim;
    sim.seed = default_seed();
    auto *simulate = app.add_subcommand("simulate", "run one simulation");
    add_run_options(simulate, sim);
    simulate->add_option("--load", sim.load, "offered load lambda in [0, 1)")->capture_default_str();
    simulate->add_flag("--verify-lemma2", sim.verify, "check Q_ij <= lambda - 1 at every occupied VOQ each slot");
    simulate->add_flag("--bounds", sim.bounds, "require the closed-form bound comparison");

    BoundsOptions bnd;
    auto *bounds = app.add_subcommand("bounds", "evaluate the closed-form bounds");
    bounds->add_option("--ports,--ports-list", bnd.ports, "N values")->delimiter(',')->capture_default_str();
    bounds->add_option("--load,--loads", bnd.loads, "lambda values")->delimiter(',')->capture_default_str();
    bounds->add_option("--speedup,--speedups", bnd.speedups, "s values")->delimiter(',')->capture_default_str();
    bounds->add_option("--precision", bnd.precision, "decimal places")->capture_default_str();

    int table_ports = 128;
    std::string table_format = "text";
    auto *table1 = app.add_subcommand("table1", "load-free ratio ceiling for s = 3, 4, 5, 8, 15");
    table1->add_option("--ports", table_ports, "switch size N")->capture_default_str();
    table1->add_option("--format", table_format, "text | csv")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();

    SweepOptions sw;
    sw.run.seed = default_seed();
    auto *sweep = app.add_subcommand("sweep", "grid of simulations, one row per cell and replica");
    add_run_options(sweep, sw.run);
    sweep->add_option("--loads", sw.loads, "lambda grid")->delimiter(',');
    sweep->add_option("--speedups", sw.speedups, "speedup grid (mm)")->delimiter(',');
    sweep->add_option("--ports-list", sw.ports, "N grid")->delimiter(',');
    sweep->add_flag("--scale-horizon", sw.scale_horizon, "scale --slots by ((1 - 0.8) / (1 - lambda))^2 per cell");
    sweep->add_option("--workers", sw.workers, "concurrent cells")->capture_default_str();

    try {
        app.parse(argc, argv);
        for (CLI::App *cmd : {simulate, sweep})
            if (cmd->parsed() && cmd->count("--config"))
                apply_config_file(cmd, cmd->get_option("--config")->as<std::string>());
        if (simulate->parsed())
            return cmd_simulate(sim);
        if (bounds->parsed())
            return cmd_bounds(bnd);
        if (table1->parsed())
            return cmd_table1(table_ports, table_format);
        if (sweep->parsed()) {
            if (sweep->count("--ports"))
                throw CLI::ValidationError("--ports", "use --ports-list for sweeps");
            return cmd_sweep(sw);
        }
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const xbar::ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const xbar::InvariantViolation &e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return kExitViolation;
    } catch (const xbar::InfeasibleDecision &e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return kExitViolation;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitOk;
}
