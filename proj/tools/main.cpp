#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "etadrc/analysis.hpp"
#include "etadrc/config.hpp"
#include "etadrc/errors.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

fs::path default_out_dir() {
    if (const char* env = std::getenv("ETADRC_OUT_DIR"); env && *env) return env;
    return "out";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw etadrc::Error("cannot write " + path.string());
    out << text;
}

// Manifest lifecycle: written with status "running" before any simulation,
// rewritten with the final status afterwards.
class Manifest {
public:
    Manifest(fs::path dir, std::string command, const etadrc::ExperimentConfig& cfg) : dir_(std::move(dir)) {
        fs::create_directories(dir_);
        doc_ = {{"tool", "etadrc"},
                {"version", ETADRC_VERSION},
                {"command", std::move(command)},
                {"config", etadrc::to_json(cfg)},
                {"seeds", {cfg.sim.seed}},
                {"started_utc", utc_now()},
                {"status", "running"},
                {"outputs", json::object()}};
    }

    void validation(const etadrc::ValidationReport& report) {
        const json j = etadrc::to_json(report);
        doc_["validation"] = {{"all_passed", report.all_passed()}, {"digest", fnv1a(j.dump())}};
    }

    void output(const std::string& key, const std::string& file) { doc_["outputs"][key] = file; }

    void set(const std::string& key, json value) { doc_[key] = std::move(value); }

    void save() const { write_text(dir_ / "manifest.json", doc_.dump(2) + "\n"); }

    void finish(const std::string& status) {
        doc_["status"] = status;
        doc_["finished_utc"] = utc_now();
        save();
    }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    json doc_;
};

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool force = false;
    unsigned threads = 0;
};

etadrc::ExperimentConfig resolve(const Common& opts) {
    auto cfg = etadrc::load_config(opts.config);
    if (opts.seed) cfg.sim.seed = *opts.seed;
    if (opts.force) cfg.sim.force = true;
    return cfg;
}

fs::path out_dir(const Common& opts) { return opts.out_dir.empty() ? default_out_dir() : fs::path(opts.out_dir); }

// Returns false when the run should stop (validation failed without force).
bool check_design(const etadrc::ExperimentConfig& cfg, Manifest& manifest) {
    const auto report = etadrc::validate_design(cfg.sim.design, cfg.sim.spec);
    manifest.validation(report);
    if (report.all_passed()) return true;
    etadrc::cli::print_validation(std::cerr, etadrc::to_json(report));
    if (cfg.sim.force) {
        std::cerr << "warning: design validation failed; continuing because of --force\n";
        return true;
    }
    std::cerr << "error: design validation failed (use --force to simulate anyway)\n";
    return false;
}

int diverged(Manifest& manifest, const etadrc::DivergenceError& e) {
    manifest.set("divergence", {{"time", e.time()}, {"stream_id", e.stream_id()}, {"message", e.what()}});
    manifest.finish("diverged");
    std::cerr << "error: " << e.what() << '\n';
    return kExitDiverged;
}

int cmd_validate(const Common& opts, bool as_json) {
    const auto cfg = resolve(opts);
    const auto report = etadrc::validate_design(cfg.sim.design, cfg.sim.spec);
    const json j = etadrc::to_json(report);
    if (as_json)
        std::cout << j.dump(2) << '\n';
    else
        etadrc::cli::print_validation(std::cout, j);
    return report.all_passed() ? 0 : kExitFailure;
}

int cmd_simulate(const Common& opts) {
    const auto cfg = resolve(opts);
    Manifest manifest(out_dir(opts), "simulate", cfg);
    manifest.output("trajectory", "trajectory.csv");
    manifest.output("events", "events.jsonl");
    const bool go = check_design(cfg, manifest);
    manifest.save();
    if (!go) {
        manifest.finish("invalid-design");
        return kExitFailure;
    }

    etadrc::Trajectory tr;
    try {
        tr = etadrc::run_trajectory(cfg.sim);
    } catch (const etadrc::DivergenceError& e) {
        return diverged(manifest, e);
    }
    {
        std::ofstream csv(manifest.dir() / "trajectory.csv", std::ios::binary);
        etadrc::write_trajectory_csv(csv, tr.record);
        std::ofstream jsonl(manifest.dir() / "events.jsonl", std::ios::binary);
        etadrc::write_events_jsonl(jsonl, tr.events);
    }
    manifest.set("event_counts", {{"eso", tr.events.eso.size()}, {"ctrl", tr.events.ctrl.size()}});
    manifest.finish("ok");
    std::cout << "wrote " << tr.record.size() << " samples, " << tr.events.eso.size() << " sensor events, "
              << tr.events.ctrl.size() << " controller events to " << manifest.dir().string() << '\n';
    return 0;
}

int cmd_mc(const Common& opts, std::optional<std::size_t> paths) {
    auto cfg = resolve(opts);
    if (paths) cfg.mc_paths = *paths;
    if (cfg.mc_paths < 1) throw etadrc::DomainError("--mc must be >= 1");
    Manifest manifest(out_dir(opts), "mc", cfg);
    manifest.output("summary", "mc_summary.json");
    manifest.output("curves", "mc_curves.csv");
    const bool go = check_design(cfg, manifest);
    manifest.save();
    if (!go) {
        manifest.finish("invalid-design");
        return kExitFailure;
    }

    etadrc::McSummary summary;
    try {
        summary = etadrc::run_mc_summary(cfg.sim, cfg.mc_paths, cfg.window_fraction * cfg.sim.horizon, opts.threads);
    } catch (const etadrc::DivergenceError& e) {
        return diverged(manifest, e);
    }
    const json j = etadrc::to_json(summary);
    write_text(manifest.dir() / "mc_summary.json", j.dump(2) + "\n");
    {
        std::ofstream csv(manifest.dir() / "mc_curves.csv", std::ios::binary);
        etadrc::write_mc_curves_csv(csv, summary);
    }
    manifest.finish("ok");
    etadrc::cli::print_mc_summary(std::cout, j);
    return 0;
}

int cmd_sweep(const Common& opts, const std::vector<double>& r_values, std::optional<std::size_t> paths) {
    auto cfg = resolve(opts);
    if (!r_values.empty()) cfg.r_values = r_values;
    if (paths) cfg.mc_paths = *paths;
    if (cfg.r_values.size() < 2) {
        std::cerr << "error: sweep needs at least two r values (--r 10,20,40)\n";
        return kExitUsage;
    }
    if (cfg.mc_paths == 1) std::cerr << "warning: --mc 1 gives single-path averages with high variance\n";
    Manifest manifest(out_dir(opts), "sweep", cfg);
    manifest.output("report", "scaling_report.json");
    manifest.output("curves", "scaling_curves.csv");
    manifest.save();

    const auto report =
        etadrc::scaling_study(cfg.sim, cfg.r_values, cfg.mc_paths, cfg.window_fraction, opts.threads);
    const json j = etadrc::to_json(report);
    write_text(manifest.dir() / "scaling_report.json", j.dump(2) + "\n");
    {
        std::ofstream csv(manifest.dir() / "scaling_curves.csv", std::ios::binary);
        etadrc::write_scaling_curves_csv(csv, report);
    }
    const bool any = report.succeeded() > 0;
    manifest.finish(any ? "ok" : "all-failed");
    etadrc::cli::print_scaling_report(std::cout, j);
    return any ? 0 : kExitFailure;
}

int cmd_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open " << path << '\n';
        return kExitUsage;
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        std::cerr << "error: " << path << ": " << e.what() << '\n';
        return kExitUsage;
    }
    if (!etadrc::cli::print_any(std::cout, doc)) {
        std::cerr << "error: " << path << " is not a report produced by etadrc\n";
        return kExitUsage;
    }
    return 0;
}

void add_common(CLI::App* cmd, Common& opts, bool outputs) {
    cmd->add_option("-c,--config", opts.config, "preset name (paper-sec5, linear-n2, silent), config JSON or manifest")
        ->required();
    cmd->add_option("--seed", opts.seed, "override simulation.seed");
    cmd->add_flag("--force", opts.force, "simulate even if design validation fails");
    if (outputs) {
        cmd->add_option("-o,--out-dir", opts.out_dir, "output directory (default $ETADRC_OUT_DIR or ./out)");
        cmd->add_option("--threads", opts.threads, "worker threads for ensembles (0 = all cores)");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-triggered ADRC simulator"};
    app.set_version_flag("--version", ETADRC_VERSION);
    app.require_subcommand(1);

    Common opts;
    bool as_json = false;
    auto* validate = app.add_subcommand("validate", "check the gain design; exit 0 iff every check passes");
    add_common(validate, opts, false);
    validate->add_flag("--json", as_json, "print the report as JSON");

    auto* simulate = app.add_subcommand("simulate", "run one trajectory; writes CSV, event JSONL and manifest");
    add_common(simulate, opts, true);

    std::optional<std::size_t> paths;
    auto* mc = app.add_subcommand("mc", "Monte Carlo ensemble summary");
    add_common(mc, opts, true);
    mc->add_option("--mc", paths, "number of trajectories (default analysis.mc_paths)");

    std::vector<double> r_values;
    auto* sweep = app.add_subcommand("sweep", "scaling study over r");
    add_common(sweep, opts, true);
    sweep->add_option("--r", r_values, "comma-separated r values, at least two")->delimiter(',');
    sweep->add_option("--mc", paths, "trajectories per r (default analysis.mc_paths)");

    std::string report_path;
    auto* report = app.add_subcommand("report", "render a JSON report or manifest as tables");
    report->add_option("file", report_path, "mc_summary.json, scaling_report.json, manifest.json, ...")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*validate) return cmd_validate(opts, as_json);
        if (*simulate) return cmd_simulate(opts);
        if (*mc) return cmd_mc(opts, paths);
        if (*sweep) return cmd_sweep(opts, r_values, paths);
        if (*report) return cmd_report(report_path);
    } catch (const etadrc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const etadrc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
