#ifndef XBAR_REPORT_HPP
#define XBAR_REPORT_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "analysis.hpp"
#include "engine.hpp"

namespace xbar {

inline const std::string kCsvHeader =
    "policy,N,lambda,s,seed,slots,warmup,mean_backlog,ci95,bound_mm,j_oq_exact,ratio_emp,ratio_bound,"
    "lemma2_violations,error";

// One result row: a run's provenance, its estimate and the matching closed
// forms. Closed forms outside their domain are left empty.
struct ResultRecord {
    std::string policy;
    int n_ports = 0;
    double load = 0;
    int speedup = 1;
    std::uint64_t seed = 0;
    std::int64_t slots = 0;
    std::int64_t warmup = 0;
    std::optional<double> mean_backlog;
    std::optional<double> ci95;
    std::optional<double> bound_mm;
    std::optional<double> j_oq;
    std::optional<double> ratio_emp;
    std::optional<double> ratio_bound;
    std::int64_t violations = 0;
    std::string error;
    std::vector<double> batch_means;
};

inline ResultRecord make_record(const RunConfig &cfg, const RunResult *result, const std::string &error = {}) {
    ResultRecord rec;
    rec.policy = policy_name(cfg.policy);
    rec.n_ports = cfg.traffic.n_ports;
    rec.load = cfg.traffic.load;
    rec.speedup = policy_speedup(cfg.policy);
    rec.seed = cfg.traffic.seed;
    rec.slots = cfg.horizon;
    rec.warmup = cfg.warmup;
    rec.error = error;

    const bool loaded = rec.load >= 0.0 && rec.load < 1.0;
    if (loaded && rec.n_ports >= 1)
        rec.j_oq = j_oq_exact(rec.n_ports, rec.load);
    if (loaded && rec.n_ports >= 2 && rec.speedup >= 3) {
        rec.bound_mm = bound_mm_upper({rec.n_ports, rec.load, rec.speedup});
        rec.ratio_bound = ratio_bound(rec.n_ports, rec.speedup);
    }
    if (result) {
        rec.mean_backlog = result->mean_backlog;
        rec.ci95 = result->ci95_halfwidth;
        rec.violations = result->violations;
        rec.batch_means = result->batch_means;
        if (rec.j_oq && *rec.j_oq > 0)
            rec.ratio_emp = result->mean_backlog / *rec.j_oq;
    }
    return rec;
}

inline ResultRecord make_record(const SweepRow &row) {
    return make_record(row.config, row.result ? &*row.result : nullptr, row.error);
}

// Six significant digits; empty for absent or non-finite values.
inline std::string format_real(std::optional<double> v) {
    if (!v || !std::isfinite(*v))
        return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", *v);
    return buf;
}

inline std::string csv_escape(const std::string &field) {
    if (field.find_first_of(",\"\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

inline std::string to_csv_line(const ResultRecord &r) {
    std::string line;
    bool first = true;
    auto put = [&](const std::string &field) {
        if (!first)
            line += ',';
        first = false;
        line += field;
    };
    put(r.policy);
    put(std::to_string(r.n_ports));
    put(format_real(r.load));
    put(std::to_string(r.speedup));
    put(std::to_string(r.seed));
    put(std::to_string(r.slots));
    put(std::to_string(r.warmup));
    put(format_real(r.mean_backlog));
    put(format_real(r.ci95));
    put(format_real(r.bound_mm));
    put(format_real(r.j_oq));
    put(format_real(r.ratio_emp));
    put(format_real(r.ratio_bound));
    put(std::to_string(r.violations));
    put(csv_escape(r.error));
    return line;
}

inline void write_csv(std::ostream &os, const std::vector<ResultRecord> &records) {
    os << kCsvHeader << '\n';
    for (const auto &r : records)
        os << to_csv_line(r) << '\n';
}

inline nlohmann::json to_json(const ResultRecord &r) {
    auto opt = [](std::optional<double> v) -> nlohmann::json {
        if (!v || !std::isfinite(*v))
            return nullptr;
        return *v;
    };
    nlohmann::json j;
    j["policy"] = r.policy;
    j["N"] = r.n_ports;
    j["lambda"] = r.load;
    j["s"] = r.speedup;
    j["seed"] = r.seed;
    j["slots"] = r.slots;
    j["warmup"] = r.warmup;
    j["mean_backlog"] = opt(r.mean_backlog);
    j["ci95"] = opt(r.ci95);
    j["bound_mm"] = opt(r.bound_mm);
    j["j_oq_exact"] = opt(r.j_oq);
    j["ratio_emp"] = opt(r.ratio_emp);
    j["ratio_bound"] = opt(r.ratio_bound);
    j["lemma2_violations"] = r.violations;
    j["batch_means"] = r.batch_means;
    if (!r.error.empty())
        j["error"] = r.error;
    return j;
}

inline void write_json(std::ostream &os, const std::vector<ResultRecord> &records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &r : records)
        arr.push_back(to_json(r));
    os << arr.dump(2) << '\n';
}

} // namespace xbar

#endif // XBAR_REPORT_HPP
