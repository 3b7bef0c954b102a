#pragma once

// Batch front end: strict key=value run configuration, static curvature
// reports, flow and sweep artifact emission, and log-scale line plots.
// Every artifact is a deterministic function of the config and the build;
// no timestamps, fixed key order, 17 significant digits.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "ricci4/flow.hpp"

namespace ricci4::cli {

inline constexpr const char* tool_version = "0.1.0";

enum ExitCode : int {
    exit_ok = 0,
    exit_hypothesis = 2,
    exit_degenerate = 3,
    exit_input = 4,
};

struct RunOptions {
    std::string out_dir;
    uint64_t seed = 0;
    bool quiet = false;
};

// ===========================================================================
// run configuration
// ===========================================================================

/// Keys: ansatz, N, amplitude, shape, cfl, T, p-list, a, mode, stride,
/// amplitudes.  Unknown or repeated keys are rejected with the line number.
struct RunConfig {
    std::string ansatz = "squashed";
    int n = 129;
    Real amplitude = 0.0;
    std::string shape = "sym";
    Real cfl = 0.1;
    Real t_final = 1.0;
    std::vector<Real> p_list = {2.0, 13.0 / 6.0, 7.0 / 3.0};
    Real a = 1e-6;
    std::string mode = "normalized";
    int stride = 10;
    std::vector<Real> amplitudes = {0.01, 0.02, 0.05};
};

namespace detail {

using ricci4::detail::fmt17;

inline std::runtime_error config_error(int line, const std::string& what) {
    return std::runtime_error("config error at line " + std::to_string(line) + ": " + what);
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline Real parse_real(const std::string& s, int line) {
    char* end = nullptr;
    const Real v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty())
        throw config_error(line, "bad number '" + s + "'");
    return v;
}

inline int parse_int(const std::string& s, int line) {
    try {
        size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error(line, "bad integer '" + s + "'");
    }
}

inline std::vector<Real> parse_real_list(const std::string& s, int line) {
    std::vector<Real> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), line));
    if (out.empty()) throw config_error(line, "empty list");
    return out;
}

inline std::string join17(const std::vector<Real>& xs) {
    std::string s;
    for (size_t k = 0; k < xs.size(); ++k) {
        if (k) s += ",";
        s += fmt17(xs[k]);
    }
    return s;
}

}  // namespace detail

inline RunConfig parse_config(std::istream& is) {
    static const std::set<std::string> shapes = {"sin2", "sin4", "sym", "b-sin2", "neck",
                                                 "random"};
    RunConfig cfg;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw detail::config_error(lineno, "expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw detail::config_error(lineno, "expected key = value");
        if (!seen.insert(key).second)
            throw detail::config_error(lineno, "repeated key '" + key + "'");

        if (key == "ansatz") {
            if (value != "squashed" && value != "conformal")
                throw detail::config_error(lineno, "unknown ansatz '" + value + "'");
            cfg.ansatz = value;
        } else if (key == "N") {
            cfg.n = detail::parse_int(value, lineno);
        } else if (key == "amplitude") {
            cfg.amplitude = detail::parse_real(value, lineno);
        } else if (key == "shape") {
            if (!shapes.count(value))
                throw detail::config_error(lineno, "unknown shape '" + value + "'");
            cfg.shape = value;
        } else if (key == "cfl") {
            cfg.cfl = detail::parse_real(value, lineno);
        } else if (key == "T") {
            cfg.t_final = detail::parse_real(value, lineno);
        } else if (key == "p-list") {
            cfg.p_list = detail::parse_real_list(value, lineno);
        } else if (key == "a") {
            cfg.a = detail::parse_real(value, lineno);
        } else if (key == "mode") {
            if (value != "normalized" && value != "unnormalized" && value != "rescale-after")
                throw detail::config_error(lineno, "unknown mode '" + value + "'");
            cfg.mode = value;
        } else if (key == "stride") {
            cfg.stride = detail::parse_int(value, lineno);
        } else if (key == "amplitudes") {
            cfg.amplitudes = detail::parse_real_list(value, lineno);
        } else {
            throw detail::config_error(lineno, "unknown key '" + key + "'");
        }
    }
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    return parse_config(is);
}

/// Fixed-order rendering of every setting that influences a run; the hash of
/// this string identifies the run in its manifest.
inline std::string canonical_config(const RunConfig& c, uint64_t seed) {
    std::string s;
    s += "T=" + detail::fmt17(c.t_final) + "\n";
    s += "a=" + detail::fmt17(c.a) + "\n";
    s += "amplitude=" + detail::fmt17(c.amplitude) + "\n";
    s += "amplitudes=" + detail::join17(c.amplitudes) + "\n";
    s += "ansatz=" + c.ansatz + "\n";
    s += "cfl=" + detail::fmt17(c.cfl) + "\n";
    s += "mode=" + c.mode + "\n";
    s += "n=" + std::to_string(c.n) + "\n";
    s += "p-list=" + detail::join17(c.p_list) + "\n";
    s += "seed=" + std::to_string(seed) + "\n";
    s += "shape=" + c.shape + "\n";
    s += "stride=" + std::to_string(c.stride) + "\n";
    s += "version=" + std::string(tool_version) + "\n";
    return s;
}

inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ===========================================================================
// shared translation
// ===========================================================================

inline FlowConfig flow_config(const RunConfig& c) {
    FlowConfig f;
    f.cfl = c.cfl;
    f.t_final = c.t_final;
    f.stride = c.stride;
    f.mode = c.mode == "unnormalized"     ? FlowMode::unnormalized
             : c.mode == "rescale-after" ? FlowMode::rescale_after
                                          : FlowMode::normalized;
    f.series.a = c.a;
    f.series.deltas.clear();
    for (const Real p : c.p_list) f.series.deltas.push_back(p - 2.0);
    validate(f);
    return f;
}

inline SquashedProfile initial_profile(const RunConfig& c, uint64_t seed) {
    if (c.ansatz == "conformal")
        return to_squashed(conformal_from_coeffs(c.n, {c.amplitude}));
    if (c.shape == "random") return random_squash(c.n, c.amplitude, seed);
    return perturb_squash(round_profile(c.n), c.amplitude, c.shape);
}

inline const char* termination_name(Termination t) {
    switch (t) {
        case Termination::reached_time: return "reached_time";
        case Termination::converged: return "converged";
        case Termination::degenerate: return "degenerate";
        case Termination::step_limit: return "step_limit";
    }
    return "unknown";
}

namespace detail {

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << content;
}

}  // namespace detail

// ===========================================================================
// check: static report for one profile
// ===========================================================================

/// Gap verdicts compare the full-norm Weyl energy (|W|^2 = 4 ||W||^2) with
/// the classical integral thresholds; the operator-norm value is reported
/// alongside so the CSV and report columns stay in one convention.
struct GapVerdict {
    std::string name;
    Real threshold = 0;
    bool inside = true;
};

struct CheckReport {
    std::string ansatz;
    int n = 0;
    FunctionalSnapshot snap;
    Real weyl_full = 0;
    std::vector<GapVerdict> gaps;
    Real wp_threshold = 1.0 / 6.0;
    bool wp_inside = true;
    HypothesisFlags flags;
    int exit_code = exit_ok;
};

template <class Profile>
CheckReport make_check_report(const Profile& p, const std::string& ansatz) {
    CheckReport r;
    r.ansatz = ansatz;
    r.n = p.n();
    r.snap = evaluate_functionals(p, SeriesConfig{});
    r.weyl_full = 4.0 * r.snap.int_w2;
    r.gaps = {
        {"rigidity_bound", 2.0 * gauss_bonnet_total, r.weyl_full < 2.0 * gauss_bonnet_total},
        {"euler_total", 2.0 * gauss_bonnet_total, r.weyl_full < 2.0 * gauss_bonnet_total},
        {"conformal_gap", 128.0 * pi * pi / 3.0, r.weyl_full < 128.0 * pi * pi / 3.0},
    };
    r.wp_inside = r.snap.wp_sup < r.wp_threshold;
    r.flags = hypothesis_flags(r.snap, SeriesConfig{}.a);

    bool hold = r.wp_inside && r.snap.y_in_range && r.flags.small_weyl;
    for (const auto& g : r.gaps) hold = hold && g.inside;
    r.exit_code = hold ? exit_ok : exit_hypothesis;
    return r;
}

inline CheckReport run_check(const AnyProfile& p) {
    if (std::holds_alternative<SquashedProfile>(p))
        return make_check_report(std::get<SquashedProfile>(p), "squashed");
    return make_check_report(std::get<ConformalProfile>(p), "conformal");
}

inline std::string check_report_json(const CheckReport& r) {
    using detail::fmt17;
    std::string s = "{\n";
    s += "  \"tool_version\": \"" + std::string(tool_version) + "\",\n";
    s += "  \"ansatz\": \"" + r.ansatz + "\",\n";
    s += "  \"nodes\": " + std::to_string(r.n) + ",\n";
    s += "  \"volume\": " + fmt17(r.snap.vol) + ",\n";
    s += "  \"average_scalar\": " + fmt17(r.snap.rbar) + ",\n";
    s += "  \"residuals\": {\n";
    s += "    \"gauss_bonnet\": " + fmt17(r.snap.gb_residual) + ",\n";
    s += "    \"gauss_bonnet_relative\": " + fmt17(std::abs(r.snap.gb_residual) / gauss_bonnet_total)
       + ",\n";
    s += "    \"signature\": " + fmt17(r.snap.sig_residual) + "\n  },\n";
    s += "  \"weyl_energy\": {\n";
    s += "    \"operator_norm\": " + fmt17(r.snap.int_w2) + ",\n";
    s += "    \"full_norm\": " + fmt17(r.weyl_full) + ",\n";
    s += "    \"gaps\": [\n";
    for (size_t k = 0; k < r.gaps.size(); ++k) {
        const auto& g = r.gaps[k];
        s += "      {\"name\": \"" + g.name + "\", \"threshold\": " + fmt17(g.threshold)
           + ", \"verdict\": \"" + (g.inside ? "inside gap" : "outside gap") + "\"}";
        s += k + 1 < r.gaps.size() ? ",\n" : "\n";
    }
    s += "    ]\n  },\n";
    s += "  \"weak_pinching\": {\"sup\": " + fmt17(r.snap.wp_sup)
       + ", \"threshold\": " + fmt17(r.wp_threshold) + ", \"verdict\": \""
       + (r.wp_inside ? "inside gap" : "outside gap") + "\"},\n";
    s += "  \"yamabe_lower\": {\"value\": " + fmt17(r.snap.y_lower) + ", \"in_range\": "
       + (r.snap.y_in_range ? "true" : "false") + "},\n";
    s += "  \"hypotheses\": {\"small_weyl\": " + std::string(r.flags.small_weyl ? "true" : "false")
       + ", \"f2_small\": " + (r.flags.f2_small ? "true" : "false")
       + ", \"delta0_alt\": " + (r.flags.delta0_alt ? "true" : "false") + "},\n";
    s += "  \"functionals\": {\"f2\": " + fmt17(r.snap.f2) + ", \"int_e2\": "
       + fmt17(r.snap.int_e2) + ", \"int_dr2\": " + fmt17(r.snap.int_dr2) + "},\n";
    s += "  \"exit_code\": " + std::to_string(r.exit_code) + "\n}\n";
    return s;
}

inline int cmd_check(const std::string& profile_path, const RunOptions& opts, std::ostream& out,
                     std::ostream& err) {
    CheckReport report;
    try {
        report = run_check(read_profile(profile_path));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input;
    }
    const std::string json = check_report_json(report);
    if (!opts.quiet) out << json;
    if (!opts.out_dir.empty()) {
        std::filesystem::create_directories(opts.out_dir);
        detail::write_text_file(opts.out_dir + "/check_report.json", json);
    }
    return report.exit_code;
}

// ===========================================================================
// flow: one trajectory with artifacts
// ===========================================================================

namespace detail {

inline std::string manifest_json(const RunConfig& c, uint64_t seed, const FlowConfig& f,
                                 const Trajectory& traj, const std::string& kind,
                                 const std::vector<std::string>& outputs) {
    std::string s = "{\n";
    s += "  \"tool_version\": \"" + std::string(tool_version) + "\",\n";
    s += "  \"kind\": \"" + kind + "\",\n";
    s += "  \"config_hash\": \"" + hex64(fnv1a64(canonical_config(c, seed))) + "\",\n";
    s += "  \"config\": {\n";
    s += "    \"ansatz\": \"" + c.ansatz + "\",\n";
    s += "    \"N\": " + std::to_string(c.n) + ",\n";
    s += "    \"amplitude\": " + fmt17(c.amplitude) + ",\n";
    s += "    \"amplitudes\": [" + join17(c.amplitudes) + "],\n";
    s += "    \"shape\": \"" + c.shape + "\",\n";
    s += "    \"seed\": " + std::to_string(seed) + ",\n";
    s += "    \"cfl\": " + fmt17(f.cfl) + ",\n";
    s += "    \"T\": " + fmt17(f.t_final) + ",\n";
    s += "    \"stride\": " + std::to_string(f.stride) + ",\n";
    s += "    \"mode\": \"" + c.mode + "\",\n";
    s += "    \"p_list\": [" + join17(c.p_list) + "],\n";
    s += "    \"a\": " + fmt17(f.series.a) + ",\n";
    s += "    \"eta\": " + fmt17(f.series.eta) + ",\n";
    s += "    \"convergence_k_sup\": " + fmt17(f.convergence_k_sup) + ",\n";
    s += "    \"curvature_cap\": " + fmt17(f.curvature_cap) + ",\n";
    s += "    \"max_steps\": " + std::to_string(f.max_steps) + "\n  },\n";
    s += "  \"termination\": {\n";
    s += "    \"reason\": \"" + std::string(termination_name(traj.termination)) + "\",\n";
    s += "    \"steps\": " + std::to_string(traj.steps) + ",\n";
    s += "    \"t_end\": " + fmt17(traj.samples.empty() ? 0.0 : traj.samples.back().t) + ",\n";
    s += "    \"samples\": " + std::to_string(traj.samples.size()) + "\n  },\n";
    s += "  \"outputs\": [";
    for (size_t k = 0; k < outputs.size(); ++k) {
        if (k) s += ", ";
        s += "\"" + json_escape(outputs[k]) + "\"";
    }
    s += "]\n}\n";
    return s;
}

inline std::string snapshot_name(size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshots/sample_%05zu.txt", index);
    return buf;
}

}  // namespace detail

inline int flow_exit_code(const Trajectory& traj, Real a) {
    if (traj.termination == Termination::degenerate) return exit_degenerate;
    const HypothesisFlags flags = hypothesis_flags(traj.samples.front().series, a);
    if (!flags.small_weyl && !flags.f2_small && !flags.delta0_alt) return exit_hypothesis;
    return exit_ok;
}

inline int cmd_flow(const std::string& config_path, const RunOptions& opts, std::ostream& out,
                    std::ostream& err) {
    RunConfig cfg;
    FlowConfig fcfg;
    Trajectory traj;
    try {
        cfg = parse_config_file(config_path);
        fcfg = flow_config(cfg);
        traj = run(initial_profile(cfg, opts.seed), fcfg);
        if (cfg.mode == "rescale-after") traj = rescale_to_normalized(traj, fcfg.series);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input;
    }

    const std::string dir = opts.out_dir.empty() ? "." : opts.out_dir;
    std::filesystem::create_directories(dir + "/snapshots");

    std::vector<std::string> outputs = {"manifest.json", "series.csv"};
    {
        std::ostringstream csv;
        std::vector<FunctionalSnapshot> series;
        series.reserve(traj.samples.size());
        for (const auto& s : traj.samples) series.push_back(s.series);
        write_series_csv(csv, series, fcfg.series);
        detail::write_text_file(dir + "/series.csv", csv.str());
    }
    for (size_t k = 0; k < traj.samples.size(); ++k) {
        const std::string name = detail::snapshot_name(k);
        std::ostringstream ps;
        write_profile(ps, traj.samples[k].profile);
        detail::write_text_file(dir + "/" + name, ps.str());
        outputs.push_back(name);
    }
    detail::write_text_file(dir + "/manifest.json",
                            detail::manifest_json(cfg, opts.seed, fcfg, traj, "flow", outputs));

    const int rc = flow_exit_code(traj, fcfg.series.a);
    if (!opts.quiet)
        out << "flow: termination=" << termination_name(traj.termination)
            << " steps=" << traj.steps << " samples=" << traj.samples.size() << " out=" << dir
            << "\n";
    return rc;
}

// ===========================================================================
// sweep: one row per amplitude
// ===========================================================================

struct SweepRow {
    Real amplitude = 0;
    Real int_w2_0 = 0;
    Real f2_0 = 0;
    HypothesisFlags flags;
    bool f2_monotone = false;
    Real f2_worst_rel = std::numeric_limits<Real>::quiet_NaN();
    std::vector<bool> gp_monotone;
    Real decay_rate = std::numeric_limits<Real>::quiet_NaN();
    Real decay_r2 = std::numeric_limits<Real>::quiet_NaN();
    bool decay_floor = false;
    Termination termination = Termination::reached_time;
    long steps = 0;
};

inline int env_thread_cap() {
    if (const char* e = std::getenv("RICCI4_THREADS")) {
        const int v = std::atoi(e);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

inline SweepRow sweep_one(const RunConfig& base, Real amplitude, uint64_t seed) {
    RunConfig cfg = base;
    cfg.amplitude = amplitude;
    const FlowConfig fcfg = flow_config(cfg);
    Trajectory traj = run(initial_profile(cfg, seed), fcfg);
    if (cfg.mode == "rescale-after") traj = rescale_to_normalized(traj, fcfg.series);

    SweepRow row;
    row.amplitude = amplitude;
    row.termination = traj.termination;
    row.steps = traj.steps;
    const auto& first = traj.samples.front().series;
    row.int_w2_0 = first.int_w2;
    row.f2_0 = first.f2;
    row.flags = hypothesis_flags(first, fcfg.series.a);
    row.gp_monotone.assign(fcfg.series.deltas.size(), false);
    try {
        const MonitorReport rep = monotonicity_monitor(traj, fcfg.series);
        row.f2_monotone = rep.f2.monotone;
        row.f2_worst_rel = rep.f2.worst_rel;
        for (size_t j = 0; j < rep.gp.size(); ++j) row.gp_monotone[j] = rep.gp[j].monotone;
    } catch (const std::invalid_argument&) {
    }
    try {
        std::vector<Real> ts, f2s;
        for (const auto& s : traj.samples) {
            ts.push_back(s.t);
            f2s.push_back(s.series.f2);
        }
        const DecayFit fit = decay_fit(ts, f2s);
        row.decay_rate = fit.rate;
        row.decay_r2 = fit.quality;
        row.decay_floor = fit.converged;
    } catch (const std::invalid_argument&) {
    }
    return row;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, size_t n_deltas) {
    using detail::fmt17;
    std::string s = "amplitude,int_W2_0,F2_0,small_weyl,f2_small,f2_monotone,f2_worst_rel";
    for (size_t k = 0; k < n_deltas; ++k) s += ",gp_monotone_" + std::to_string(k);
    s += ",decay_rate,decay_r2,decay_floor,termination,steps\n";
    for (const auto& r : rows) {
        s += fmt17(r.amplitude) + "," + fmt17(r.int_w2_0) + "," + fmt17(r.f2_0) + ","
           + (r.flags.small_weyl ? "1" : "0") + "," + (r.flags.f2_small ? "1" : "0") + ","
           + (r.f2_monotone ? "1" : "0") + "," + fmt17(r.f2_worst_rel);
        for (const bool m : r.gp_monotone) s += std::string(",") + (m ? "1" : "0");
        s += "," + fmt17(r.decay_rate) + "," + fmt17(r.decay_r2) + ","
           + (r.decay_floor ? "1" : "0") + "," + termination_name(r.termination) + ","
           + std::to_string(r.steps) + "\n";
    }
    return s;
}

inline int cmd_sweep(const std::string& config_path, const RunOptions& opts, std::ostream& out,
                     std::ostream& err) {
    RunConfig cfg;
    FlowConfig fcfg;
    std::vector<SweepRow> rows;
    try {
        cfg = parse_config_file(config_path);
        fcfg = flow_config(cfg);

        rows.resize(cfg.amplitudes.size());
        std::atomic<size_t> cursor{0};
        std::atomic<bool> failed{false};
        std::string failure;
        std::mutex failure_mutex;
        auto worker = [&]() {
            for (;;) {
                const size_t k = cursor.fetch_add(1);
                if (k >= rows.size() || failed.load()) return;
                try {
                    rows[k] = sweep_one(cfg, cfg.amplitudes[k], opts.seed);
                } catch (const std::exception& e) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    failure = e.what();
                    failed.store(true);
                    return;
                }
            }
        };
        const int n_workers =
            std::max(1, std::min<int>(env_thread_cap(), static_cast<int>(rows.size())));
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (failed.load()) throw std::runtime_error(failure);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input;
    }

    const std::string dir = opts.out_dir.empty() ? "." : opts.out_dir;
    std::filesystem::create_directories(dir);
    detail::write_text_file(dir + "/sweep.csv", sweep_csv(rows, fcfg.series.deltas.size()));
    Trajectory summary;
    summary.termination = Termination::reached_time;
    for (const auto& r : rows) {
        summary.steps += r.steps;
        if (r.termination == Termination::degenerate)
            summary.termination = Termination::degenerate;
    }
    detail::write_text_file(
        dir + "/manifest.json",
        detail::manifest_json(cfg, opts.seed, fcfg, summary, "sweep", {"manifest.json", "sweep.csv"}));

    int rc = exit_ok;
    for (const auto& r : rows) {
        if (r.termination == Termination::degenerate) rc = exit_degenerate;
        if (rc == exit_ok && !r.flags.small_weyl && !r.flags.f2_small && !r.flags.delta0_alt)
            rc = exit_hypothesis;
    }
    if (!opts.quiet)
        out << "sweep: rows=" << rows.size() << " total_steps=" << summary.steps
            << " out=" << dir << "\n";
    return rc;
}

// ===========================================================================
// plot: log-scale curves from series CSV files
// ===========================================================================

struct SeriesColumn {
    std::string label;
    std::vector<Real> t;
    std::vector<Real> v;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

/// F2 and the Gp family are the curves of interest when present; a file
/// without them (synthetic data) contributes every non-time column.
inline std::vector<SeriesColumn> read_series_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open series: " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(path + ": empty file");
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "t")
        throw std::runtime_error(path + ": first column must be t");

    std::vector<size_t> keep;
    for (size_t k = 1; k < header.size(); ++k)
        if (header[k] == "F2" || header[k].rfind("Gp_", 0) == 0) keep.push_back(k);
    if (keep.empty())
        for (size_t k = 1; k < header.size(); ++k) keep.push_back(k);

    const std::string base = std::filesystem::path(path).stem().string();
    std::vector<SeriesColumn> cols(keep.size());
    for (size_t j = 0; j < keep.size(); ++j)
        cols[j].label = base + ":" + header[keep[j]];

    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error(path + ": line " + std::to_string(lineno)
                                     + ": wrong column count");
        const Real t = parse_real(trim(cells[0]), lineno);
        for (size_t j = 0; j < keep.size(); ++j) {
            cols[j].t.push_back(t);
            cols[j].v.push_back(parse_real(trim(cells[keep[j]]), lineno));
        }
    }
    return cols;
}

inline std::string fmt2(Real x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

inline std::string fmt3g(Real x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

}  // namespace detail

inline std::string render_svg(const std::vector<SeriesColumn>& cols) {
    static const char* palette[6] = {"#1b6ca8", "#c43d3d", "#2e8b57",
                                     "#8857c4", "#c78f1e", "#3aa6a6"};
    const Real x0 = 70, y0 = 20, x1 = 620, y1 = 435, height = 480, width = 640;

    Real tmin = 0, tmax = 0, lmin = 0, lmax = 0;
    bool any = false;
    for (const auto& c : cols)
        for (size_t k = 0; k < c.t.size(); ++k) {
            if (!(c.v[k] > 0.0)) continue;
            const Real l = std::log10(c.v[k]);
            if (!any) {
                tmin = tmax = c.t[k];
                lmin = lmax = l;
                any = true;
            } else {
                tmin = std::min(tmin, c.t[k]);
                tmax = std::max(tmax, c.t[k]);
                lmin = std::min(lmin, l);
                lmax = std::max(lmax, l);
            }
        }
    if (!any) throw std::runtime_error("no positive samples to plot");
    if (!(tmax > tmin)) throw std::runtime_error("time range is empty");
    Real ylo = std::floor(lmin), yhi = std::ceil(lmax);
    if (yhi - ylo < 1.0) {
        ylo -= 1.0;
        yhi += 1.0;
    }
    const auto sx = [&](Real t) { return x0 + (t - tmin) / (tmax - tmin) * (x1 - x0); };
    const auto sy = [&](Real l) { return y1 - (l - ylo) / (yhi - ylo) * (y1 - y0); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt2(width)
       + "\" height=\"" + detail::fmt2(height) + "\" viewBox=\"0 0 640 480\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"#ffffff\"/>\n";
    s += "<rect x=\"" + detail::fmt2(x0) + "\" y=\"" + detail::fmt2(y0) + "\" width=\""
       + detail::fmt2(x1 - x0) + "\" height=\"" + detail::fmt2(y1 - y0)
       + "\" fill=\"none\" stroke=\"#000000\"/>\n";

    const int decades = static_cast<int>(yhi - ylo);
    const int ystep = std::max(1, (decades + 5) / 6);
    for (int d = 0; d <= decades; d += ystep) {
        const Real y = sy(ylo + d);
        s += "<line x1=\"" + detail::fmt2(x0 - 4) + "\" y1=\"" + detail::fmt2(y) + "\" x2=\""
           + detail::fmt2(x0) + "\" y2=\"" + detail::fmt2(y) + "\" stroke=\"#000000\"/>\n";
        s += "<text x=\"" + detail::fmt2(x0 - 8) + "\" y=\"" + detail::fmt2(y + 4)
           + "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">1e"
           + std::to_string(static_cast<int>(ylo) + d) + "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
        const Real t = tmin + (tmax - tmin) * k / 4.0;
        const Real x = sx(t);
        s += "<line x1=\"" + detail::fmt2(x) + "\" y1=\"" + detail::fmt2(y1) + "\" x2=\""
           + detail::fmt2(x) + "\" y2=\"" + detail::fmt2(y1 + 4) + "\" stroke=\"#000000\"/>\n";
        s += "<text x=\"" + detail::fmt2(x) + "\" y=\"" + detail::fmt2(y1 + 18)
           + "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">"
           + detail::fmt3g(t) + "</text>\n";
    }
    s += "<text x=\"" + detail::fmt2(0.5 * (x0 + x1)) + "\" y=\"" + detail::fmt2(y1 + 36)
       + "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">t</text>\n";

    size_t color = 0, drawn = 0;
    for (const auto& c : cols) {
        std::string pts;
        size_t n_pos = 0;
        for (size_t k = 0; k < c.t.size(); ++k) {
            if (!(c.v[k] > 0.0)) continue;
            if (!pts.empty()) pts += " ";
            pts += detail::fmt2(sx(c.t[k])) + "," + detail::fmt2(sy(std::log10(c.v[k])));
            ++n_pos;
        }
        const char* col = palette[color % 6];
        if (n_pos >= 2) {
            s += "<polyline fill=\"none\" stroke=\"" + std::string(col)
               + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
            ++drawn;
        }
        s += "<rect x=\"" + detail::fmt2(x1 - 180) + "\" y=\""
           + detail::fmt2(y0 + 8 + 16 * static_cast<Real>(color)) + "\" width=\"10\" height=\"10\" fill=\""
           + col + "\"/>\n";
        s += "<text x=\"" + detail::fmt2(x1 - 165) + "\" y=\""
           + detail::fmt2(y0 + 17 + 16 * static_cast<Real>(color))
           + "\" font-family=\"monospace\" font-size=\"12\">" + detail::json_escape(c.label)
           + "</text>\n";
        ++color;
    }
    if (drawn == 0) throw std::runtime_error("no curve has two positive samples");
    s += "</svg>\n";
    return s;
}

inline int cmd_plot(const std::vector<std::string>& series_paths, const RunOptions& opts,
                    std::ostream& out, std::ostream& err) {
    std::string svg;
    try {
        if (series_paths.empty()) throw std::runtime_error("plot needs at least one series file");
        std::vector<SeriesColumn> cols;
        for (const auto& path : series_paths) {
            auto file_cols = detail::read_series_csv(path);
            for (auto& c : file_cols) cols.push_back(std::move(c));
        }
        svg = render_svg(cols);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input;
    }
    const std::string dir = opts.out_dir.empty() ? "." : opts.out_dir;
    std::filesystem::create_directories(dir);
    detail::write_text_file(dir + "/plot.svg", svg);
    if (!opts.quiet) out << "plot: wrote " << dir << "/plot.svg\n";
    return exit_ok;
}

}  // namespace ricci4::cli
