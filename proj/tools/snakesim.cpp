// Command-line front end: sampling, excursion analysis, exit profiles, the
// branching-process tools, and the statistical verification suites.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snakesim/accept.hpp"
#include "snakesim/csbp.hpp"
#include "snakesim/excursions.hpp"
#include "snakesim/exit_measure.hpp"
#include "snakesim/io.hpp"
#include "snakesim/parallel.hpp"
#include "snakesim/sampler.hpp"
#include "snakesim/stats.hpp"
#include "snakesim/transforms.hpp"
#include "snakesim/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace snakesim;

namespace {

struct StageClock {
    std::map<std::string, double> timings;
    std::chrono::steady_clock::time_point mark = std::chrono::steady_clock::now();

    void lap(const std::string& stage) {
        const auto now = std::chrono::steady_clock::now();
        timings[stage] = std::chrono::duration<double>(now - mark).count();
        mark = now;
    }
    json to_json() const {
        json out;
        for (const auto& [k, v] : timings) out[k] = v;
        return out;
    }
};

void write_manifest(const std::string& dir, const SimConfig& cfg, const std::string& command,
                    const StageClock& clock, json extra) {
    json manifest;
    manifest["command"] = command;
    manifest["config_hash"] = cfg.config_hash_hex();
    manifest["git_revision"] = kGitRevision;
    manifest["seed"] = cfg.seed;
    manifest["stage_timings_s"] = clock.to_json();
    manifest["details"] = std::move(extra);
    std::ofstream out(dir + "/manifest.json");
    out << manifest.dump(2) << "\n";
}

std::map<std::string, double> parse_params(const std::string& text) {
    std::map<std::string, double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--params", "expected key=value, got '" + item + "'");
        out[item.substr(0, eq)] = std::strtod(item.c_str() + eq + 1, nullptr);
        pos = comma + 1;
    }
    return out;
}

SamplingTarget build_target(const std::string& name, const std::map<std::string, double>& params,
                            const SimConfig& cfg) {
    SamplingTarget t;
    t.kind = target_kind_from_name(name);
    t.ds = cfg.ds;
    t.beta = cfg.beta;
    t.delta = cfg.delta;
    t.s_min = cfg.s_min;
    t.s_cap = cfg.s_cap;
    t.eps_exit = cfg.eps_exit;
    for (const auto& [k, v] : params) {
        if (k == "s0") t.s0 = v;
        else if (k == "beta") t.beta = v;
        else if (k == "eps") t.eps = v;
        else if (k == "delta") t.delta = v;
        else if (k == "mu") t.mu = v;
        else if (k == "s_min") t.s_min = v;
        else if (k == "s_cap") t.s_cap = v;
        else throw CLI::ValidationError("--params", "unknown parameter '" + k + "'");
    }
    t.validate();
    return t;
}

int cmd_sample(const SimConfig& cfg, const std::string& target_name,
               const std::string& params_text) {
    const SamplingTarget target = build_target(target_name, parse_params(params_text), cfg);
    const std::string dir = cfg.resolved_output_dir();
    fs::create_directories(dir);
    StageClock clock;

    const auto n = static_cast<std::size_t>(cfg.replicas);
    std::vector<SamplerDiag> diags(n);
    auto samples = parallel_replicas<Sample>(
        n, cfg.seed, [&](std::size_t i, Rng& rng) { return sample(target, rng, &diags[i]); },
        cfg.threads);
    SamplerDiag diag;
    for (const auto& d : diags) diag.merge(d);
    clock.lap("sample");

    for (std::size_t i = 0; i < n; ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "/traj_%06zu.traj", i);
        write_trajectory(dir + name, samples[i].path);
    }
    clock.lap("write");

    json extra;
    extra["target"] = target_kind_name(target.kind);
    extra["params"] = {{"s0", target.s0},       {"beta", target.beta}, {"eps", target.resolved_eps()},
                       {"delta", target.delta}, {"mu", target.mu},     {"ds", target.ds}};
    extra["replicas"] = n;
    extra["acceptance_rate"] = diag.acceptance_rate();
    extra["proposals"] = diag.proposals;
    extra["window"] = {{"s_min", diag.s_min},
                       {"s_cap", diag.s_cap},
                       {"bottom_share", diag.bottom_stratum_share()},
                       {"top_share", diag.top_stratum_share()},
                       {"warning", diag.window_warning()}};
    if (target.kind == TargetKind::NstarSigmaBiased) {
        json ws = json::array();
        for (const auto& s : samples) ws.push_back(s.weight);
        extra["importance_weights"] = ws;
    }
    if (diag.window_warning())
        std::cerr << "warning: duration window clips conditioned mass (edge strata above 0.5%)\n";
    write_manifest(dir, cfg, "sample", clock, std::move(extra));
    std::cout << "wrote " << n << " trajectories to " << dir << " (acceptance "
              << diag.acceptance_rate() << ")\n";
    return 0;
}

int cmd_excursions(const SimConfig& cfg, const std::string& in_dir, const std::string& out_file) {
    const auto files = list_trajectory_files(in_dir);
    if (files.empty()) throw std::runtime_error("no .traj files in " + in_dir);
    StageClock clock;

    struct Row {
        std::size_t replica;
        double level, height, sigma, boundary;
    };
    std::vector<Row> rows;
    for (std::size_t r = 0; r < files.size(); ++r) {
        const TreeLikePath tlp = read_trajectory(files[r]);
        const DiscreteTree tree = build_discrete_tree(tlp);
        auto records = find_debuts(tree, cfg.delta);
        for (auto& rec : records) {
            if (rec.level >= -cfg.beta) continue;
            extract_excursion(tree, rec);
            rec.boundary_size = estimate_boundary_size(rec.trajectory, cfg.eps_boundary);
            rows.push_back({r, rec.level, rec.height, rec.duration, rec.boundary_size});
        }
    }
    clock.lap("analyze");

    CsvWriter csv(out_file, cfg.config_hash_hex(),
                  {"replica", "level", "height", "sigma", "boundary_size"});
    for (const auto& row : rows) {
        csv.row({std::to_string(row.replica), to_decimal(row.level), to_decimal(row.height),
                 to_decimal(row.sigma), to_decimal(row.boundary)});
    }
    clock.lap("write");
    json extra;
    extra["input"] = in_dir;
    extra["records"] = rows.size();
    write_manifest(fs::path(out_file).parent_path().string().empty()
                       ? "."
                       : fs::path(out_file).parent_path().string(),
                   cfg, "excursions", clock, std::move(extra));
    std::cout << "wrote " << rows.size() << " excursion records to " << out_file << "\n";
    return 0;
}

std::vector<double> parse_level_grid(const std::string& text) {
    // "a1:a2:step"
    double a1 = 0.0, a2 = 0.0, step = 0.0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a1, &a2, &step) != 3 || !(step > 0.0) ||
        !(a2 > a1) || !(a1 > 0.0))
        throw CLI::ValidationError("--levels", "expected a1:a2:step with 0 < a1 < a2");
    std::vector<double> levels;
    for (double a = a1; a <= a2 + 1e-12; a += step) levels.push_back(a);
    return levels;
}

int cmd_exitprofile(const SimConfig& cfg, const std::string& in_dir, const std::string& levels_text,
                    double eps, const std::string& out_file) {
    const auto files = list_trajectory_files(in_dir);
    if (files.empty()) throw std::runtime_error("no .traj files in " + in_dir);
    const auto levels = parse_level_grid(levels_text);
    StageClock clock;

    CsvWriter csv(out_file, cfg.config_hash_hex(),
                  {"replica", "level", "z_hat", "jump_flag", "jump_size"});
    // Threshold calibrated on the pooled null increments of this run.
    std::vector<ExitProfile> profiles;
    profiles.reserve(files.size());
    std::vector<double> increments;
    for (const auto& file : files) {
        const TreeLikePath tlp = read_trajectory(file);
        profiles.push_back(exit_profile(tlp, levels, eps, 0.0));
        const auto& p = profiles.back();
        for (std::size_t k = 1; k < p.z_hat.size(); ++k) {
            if (p.z_hat[k] > 0.0 && p.z_hat[k - 1] > 0.0)
                increments.push_back(p.z_hat[k] - p.z_hat[k - 1]);
        }
    }
    const double threshold =
        increments.size() >= 8 ? jump_threshold_from_null(increments) : 0.0;
    clock.lap("estimate");

    for (std::size_t r = 0; r < profiles.size(); ++r) {
        const auto& p = profiles[r];
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const double inc = k == 0 ? 0.0 : p.z_hat[k] - p.z_hat[k - 1];
            const bool flagged = threshold > 0.0 && inc > threshold;
            csv.row({std::to_string(r), to_decimal(levels[k]), to_decimal(p.z_hat[k]),
                     flagged ? "1" : "0", flagged ? to_decimal(inc) : "0"});
        }
    }
    clock.lap("write");
    json extra;
    extra["input"] = in_dir;
    extra["eps"] = eps;
    extra["jump_threshold"] = threshold;
    write_manifest(fs::path(out_file).parent_path().string().empty()
                       ? "."
                       : fs::path(out_file).parent_path().string(),
                   cfg, "exitprofile", clock, std::move(extra));
    std::cout << "wrote profiles for " << profiles.size() << " trajectories to " << out_file
              << "\n";
    return 0;
}

int cmd_csbp(const SimConfig& cfg, const std::string& mode, double horizon, double dtau,
             const std::string& in_dir, const std::string& out_dir) {
    fs::create_directories(out_dir);
    StageClock clock;
    json extra;
    extra["mode"] = mode;

    if (mode == "levy" || mode == "csbp" || mode == "roundtrip") {
        const auto n = static_cast<std::size_t>(cfg.replicas);
        CsvWriter csv(out_dir + "/paths.csv", cfg.config_hash_hex(),
                      {"replica", "time", "value"});
        double worst_roundtrip = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            Rng rng(cfg.seed, r);
            const LevyPath x = sample_levy(horizon, dtau, rng, mode == "levy" ? 0.0 : 1.0);
            if (mode == "levy") {
                for (std::size_t i = 0; i < x.times.size(); ++i)
                    csv.row({std::to_string(r), to_decimal(x.times[i]), to_decimal(x.values[i])});
                continue;
            }
            const CSBPPath z = lamperti_csbp_from_levy(x, dtau);
            if (mode == "csbp") {
                for (std::size_t i = 0; i < z.times.size(); ++i)
                    csv.row({std::to_string(r), to_decimal(z.times[i]), to_decimal(z.values[i])});
                continue;
            }
            const LevyPath back = lamperti_levy_from_csbp(z, dtau);
            double err = 0.0;
            for (std::size_t i = 0; i < std::min(back.values.size(), x.values.size()); ++i)
                err = std::max(err, std::abs(back.values[i] - x.values[i]));
            worst_roundtrip = std::max(worst_roundtrip, err);
            csv.row({std::to_string(r), "0", to_decimal(err)});
        }
        if (mode == "roundtrip") extra["worst_roundtrip_sup_err"] = worst_roundtrip;
    } else if (mode == "check") {
        if (in_dir.empty()) throw std::runtime_error("csbp --mode check needs --in trajectories");
        const auto files = list_trajectory_files(in_dir);
        std::vector<double> levels;
        for (double a = cfg.beta; a <= cfg.beta + 2.0; a += 0.05) levels.push_back(a);
        std::vector<ExitProfile> profiles;
        for (const auto& file : files)
            profiles.push_back(exit_profile(read_trajectory(file), levels, cfg.eps_exit, 0.0));
        const SnakeCsbpReport report = snake_vs_csbp_check(profiles, cfg.beta, {cfg.beta, 0.25},
                                                           {0.5, 1.0}, 4, 100);
        json rows = json::array();
        for (const auto& row : report.rows) {
            rows.push_back({{"t", row.t},
                            {"lambda", row.lambda},
                            {"n", row.n},
                            {"z_mean", row.z_mean},
                            {"empirical", row.empirical},
                            {"predicted", row.predicted},
                            {"rel_err", row.rel_err},
                            {"sufficient", row.sufficient}});
        }
        extra["rows"] = rows;
    } else {
        throw std::runtime_error("csbp: unknown mode " + mode);
    }
    clock.lap(mode);
    write_manifest(out_dir, cfg, "csbp", clock, std::move(extra));
    std::cout << "csbp " << mode << " done -> " << out_dir << "\n";
    return 0;
}

int cmd_verify(const SimConfig& cfg, const std::string& suite, const std::string& report_path,
               std::uint64_t replica_override) {
    accept::VerifyOptions opts;
    opts.seed = cfg.seed;
    opts.threads = cfg.threads;
    opts.replica_override = replica_override;
    const auto results = accept::run_suite(suite, opts);
    for (const auto& r : results) std::cout << r.line() << "\n";
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << accept::results_to_json(results, opts).dump(2) << "\n";
    }
    return accept::all_pass(results) ? 0 : 1;
}

int cmd_reroot_check(const SimConfig& cfg, const std::string& report_path,
                     std::uint64_t replicas) {
    accept::VerifyOptions opts;
    opts.seed = cfg.seed;
    opts.threads = cfg.threads;
    opts.replica_override = replicas;
    const auto results = accept::run_suite("rerooting", opts);
    for (const auto& r : results) std::cout << r.line() << "\n";
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << accept::results_to_json(results, opts).dump(2) << "\n";
    }
    return accept::all_pass(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"snakesim: tree-indexed random-walk snakes, their excursions, and the "
                 "statistical checks against closed-form laws"};
    app.require_subcommand(1);

    std::string config_file;
    SimConfig cfg;
    app.add_option("--config", config_file, "key=value config file");
    // flag overrides are applied after the file is read
    std::map<std::string, std::string> overrides;
    auto track = [&](const char* key) {
        return [&overrides, key](const std::string& v) { overrides[key] = v; };
    };
    app.add_option_function<std::string>("--seed", track("seed"), "rng seed");
    app.add_option_function<std::string>("--replicas", track("replicas"), "replica count");
    app.add_option_function<std::string>("--grid-ds", track("ds"), "contour grid step ds");
    app.add_option_function<std::string>("--out-dir", track("output_dir"), "output directory");
    app.add_option_function<std::string>("--threads", track("threads"), "worker threads");
    app.add_option_function<std::string>("--beta", track("beta"), "depth parameter");
    app.add_option_function<std::string>("--delta", track("delta"), "height threshold");
    app.add_option_function<std::string>("--eps-exit", track("eps_exit"), "exit estimator width");
    app.add_option_function<std::string>("--eps-boundary", track("eps_boundary"),
                                         "boundary estimator width");

    auto* c_sample = app.add_subcommand("sample", "draw trajectories from a conditioned law");
    std::string target_name = "N0_MIN_BELOW", params_text;
    c_sample->add_option("--target", target_name,
                         "ITO_SIGMA_GT | N0_MIN_BELOW | NEPS_TRUNC_MAX_GT | NSTAR_MAX_GT | "
                         "NSTAR_SIGMA_BIASED");
    c_sample->add_option("--params", params_text, "target parameters, e.g. beta=0.5,delta=0.4");

    auto* c_exc = app.add_subcommand("excursions", "extract excursion records from trajectories");
    std::string in_dir, out_file = "records.csv";
    c_exc->add_option("--in", in_dir, "input trajectory directory")->required();
    c_exc->add_option("--out", out_file, "output csv");
    c_exc->add_option_function<std::string>("--delta", track("delta"), "height threshold");
    c_exc->add_option_function<std::string>("--beta", track("beta"), "level threshold");

    auto* c_prof = app.add_subcommand("exitprofile", "exit-mass profiles over a level grid");
    std::string levels_text = "0.55:2.0:0.01", prof_out = "profile.csv";
    double prof_eps = 0.1;
    c_prof->add_option("--in", in_dir, "input trajectory directory")->required();
    c_prof->add_option("--levels", levels_text, "a1:a2:step");
    c_prof->add_option("--eps", prof_eps, "estimator width");
    c_prof->add_option("--out", prof_out, "output csv");

    auto* c_csbp = app.add_subcommand("csbp", "stable paths and the Lamperti time changes");
    std::string csbp_mode = "levy", csbp_out = "csbp_out";
    double horizon = 1.0, dtau = 1e-3;
    c_csbp->add_option("--mode", csbp_mode, "levy | csbp | roundtrip | check");
    c_csbp->add_option("--horizon", horizon, "time horizon T");
    c_csbp->add_option("--dtau", dtau, "time step");
    c_csbp->add_option("--in", in_dir, "trajectory directory (mode=check)");
    c_csbp->add_option("--out", csbp_out, "output directory");

    auto* c_verify = app.add_subcommand("verify", "statistical verification suites");
    std::string suite = "all", report_path = "report.json";
    std::uint64_t replica_override = 0;
    c_verify->add_option("--suite", suite, "laws | excursions | csbp | rerooting | properties | all");
    c_verify->add_option("--report", report_path, "json report path");
    c_verify->add_option("--smoke-replicas", replica_override,
                         "scale sample sizes down for a smoke run (0 = pinned sizes)");

    auto* c_reroot = app.add_subcommand("reroot-check", "both sides of the re-rooting identity");
    std::string reroot_report = "";
    std::uint64_t reroot_replicas = 4000;
    c_reroot->add_option("--report", reroot_report, "json report path");
    c_reroot->add_option("--replicas", reroot_replicas, "samples per side");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_file.empty()) cfg = parse_config_file(config_file);
        for (const auto& [k, v] : overrides) apply_config_kv(cfg, k, v);
        cfg.validate();

        if (c_sample->parsed()) return cmd_sample(cfg, target_name, params_text);
        if (c_exc->parsed()) return cmd_excursions(cfg, in_dir, out_file);
        if (c_prof->parsed()) return cmd_exitprofile(cfg, in_dir, levels_text, prof_eps, prof_out);
        if (c_csbp->parsed()) return cmd_csbp(cfg, csbp_mode, horizon, dtau, in_dir, csbp_out);
        if (c_verify->parsed()) return cmd_verify(cfg, suite, report_path, replica_override);
        if (c_reroot->parsed()) return cmd_reroot_check(cfg, reroot_report, reroot_replicas);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
