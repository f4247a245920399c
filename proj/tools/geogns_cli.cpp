#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geogns/analysis.hpp"
#include "geogns/checks.hpp"
#include "geogns/errors.hpp"
#include "geogns/harness.hpp"

namespace fs = std::filesystem;
using namespace geogns;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

harness::RunTrace load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open trace '" + path + "'");
    return harness::read_trace(in);
}

int cmd_run(const std::string& config_path, const std::optional<std::uint64_t>& seed,
            const std::string& out_dir, bool quiet) {
    harness::RunConfig config = harness::load_config(config_path);
    if (seed) {
        config.seed = *seed;
        config.validate();
    }
    ensure_dir(out_dir);
    auto csv = open_output(fs::path(out_dir) / "trace.csv");
    const auto trace = harness::run_experiment(config, &csv);
    const std::string summary = harness::summarize_run(config, trace);
    open_output(fs::path(out_dir) / "summary.txt") << summary;
    if (!quiet) std::cout << summary;
    return 0;
}

int cmd_compare(const std::vector<std::string>& baseline, const std::vector<std::string>& candidate,
                const std::string& out_dir, bool quiet) {
    std::vector<harness::RunTrace> b;
    std::vector<harness::RunTrace> c;
    for (const auto& p : baseline) b.push_back(load_trace(p));
    for (const auto& p : candidate) c.push_back(load_trace(p));
    const auto summary = harness::compare_runs(b, c);
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        auto out = open_output(fs::path(out_dir) / "comparison.csv");
        harness::write_summary_csv(out, summary);
    }
    if (!quiet || out_dir.empty()) harness::write_summary_csv(std::cout, summary);
    return 0;
}

int cmd_analyze(const std::string& geometry_name, double grad_norm, double noise, double dimension,
                double theta, int points, double max_multiple, const std::string& out_dir,
                bool quiet) {
    analysis::ImprovementParams p;
    try {
        p.geometry = geometry::parse_geometry(geometry_name);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    p.grad_dual_norm = grad_norm;
    p.noise_dual = noise;
    p.dimension = dimension;
    p.validate();
    const double gns = p.gns();
    if (points < 2 || !(max_multiple > 0.0)) throw ConfigError("need points >= 2 and max > 0");

    std::ostringstream table;
    table << "B,delta_star,delta_per_sample,geometry\n";
    const double lo = std::log(gns / 16.0);
    const double hi = std::log(gns * max_multiple);
    for (int i = 0; i < points; ++i) {
        const double b = std::exp(lo + (hi - lo) * i / (points - 1));
        const double d = analysis::expected_improvement(p, b);
        table << harness::format_double(b) << ',' << harness::format_double(d) << ','
              << harness::format_double(d / b) << ',' << geometry::to_string(p.geometry) << '\n';
    }

    std::ostringstream cbs;
    cbs << "gns: " << harness::format_double(gns) << '\n';
    const double kappa = analysis::theta_to_kappa(theta);
    cbs << "cbs_fraction(kappa=" << harness::format_double(kappa) << "): "
        << harness::format_double(analysis::cbs_fraction(kappa, gns, p.geometry).value) << '\n';
    if (p.geometry != geometry::GeometryKind::Euclidean) {
        cbs << "cbs_inflection: "
            << harness::format_double(analysis::cbs_inflection(gns, p.geometry).value) << '\n';
        cbs << "cbs_max_efficiency: "
            << harness::format_double(analysis::cbs_max_efficiency(gns, p.geometry).value) << '\n';
    }

    if (out_dir.empty()) {
        std::cout << table.str();
    } else {
        ensure_dir(out_dir);
        open_output(fs::path(out_dir) / "analysis.csv") << table.str();
        open_output(fs::path(out_dir) / "cbs.txt") << cbs.str();
    }
    if (!quiet) std::cerr << cbs.str();
    return 0;
}

int cmd_check(unsigned seed, bool quiet) {
    bool ok = true;
    for (const auto& r : checks::run_invariant_suite(seed)) {
        ok = ok && r.passed;
        if (!quiet || !r.passed) {
            std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
        }
    }
    return ok ? 0 : 1;
}

int cmd_plot(const std::string& trace_path, const std::string& out_dir, bool quiet) {
    const auto trace = load_trace(trace_path);
    const std::string svg = harness::render_svg(trace);
    if (out_dir.empty()) {
        std::cout << svg;
        return 0;
    }
    ensure_dir(out_dir);
    const auto path = fs::path(out_dir) / "trace.svg";
    open_output(path) << svg;
    if (!quiet) std::cout << "wrote " << path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometry-aware gradient noise scale experiments"};
    app.require_subcommand(1);

    bool quiet = false;
    std::string out_dir;
    app.add_flag("--quiet,-q", quiet, "Suppress progress output");

    auto* run = app.add_subcommand("run", "Run one experiment from a config file");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    run->add_option("--config", config_path, "Flat key = value config file")->required();
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out_dir, "Output directory for trace.csv and summary.txt")
        ->default_val(".");
    run->add_flag("--quiet,-q", quiet);

    auto* compare = app.add_subcommand("compare", "Compare baseline and candidate traces");
    std::vector<std::string> baseline;
    std::vector<std::string> candidate;
    compare->add_option("--baseline", baseline, "Baseline trace CSVs, one per seed")->required();
    compare->add_option("--candidate", candidate, "Candidate trace CSVs, same seed order")->required();
    compare->add_option("--out", out_dir, "Write comparison.csv here");
    compare->add_flag("--quiet,-q", quiet);

    auto* analyze = app.add_subcommand("analyze", "Improvement curve and critical batch sizes");
    std::string geometry_name = "sign";
    double grad_norm = 1.0;
    double noise = 1.0;
    double dimension = 1.0;
    double theta = 0.6;
    int points = 33;
    double max_multiple = 256.0;
    analyze->add_option("--geometry", geometry_name, "euclidean | sign | spectral");
    analyze->add_option("--grad-norm", grad_norm, "Dual norm of the gradient");
    analyze->add_option("--noise", noise, "||sigma||_1, ||C^1/2||_S1 or tr(C)");
    analyze->add_option("--dimension", dimension, "d (sign) or r (spectral)");
    analyze->add_option("--theta", theta, "Tolerance mapped to kappa = (1 - theta)^2");
    analyze->add_option("--points", points, "Grid points");
    analyze->add_option("--max", max_multiple, "Largest batch as a multiple of the GNS");
    analyze->add_option("--out", out_dir, "Write analysis.csv and cbs.txt here");
    analyze->add_flag("--quiet,-q", quiet);

    auto* check = app.add_subcommand("check", "Run the invariant suites");
    unsigned check_seed = 1;
    check->add_option("--seed", check_seed, "Seed for randomized inputs");
    check->add_flag("--quiet,-q", quiet);

    auto* plot = app.add_subcommand("plot", "Render a trace as an SVG chart");
    std::string trace_path;
    plot->add_option("trace", trace_path, "Trace CSV")->required();
    plot->add_option("--out", out_dir, "Write trace.svg here");
    plot->add_flag("--quiet,-q", quiet);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run) return cmd_run(config_path, seed, out_dir, quiet);
        if (*compare) return cmd_compare(baseline, candidate, out_dir, quiet);
        if (*analyze) {
            return cmd_analyze(geometry_name, grad_norm, noise, dimension, theta, points,
                               max_multiple, out_dir, quiet);
        }
        if (*check) return cmd_check(check_seed, quiet);
        if (*plot) return cmd_plot(trace_path, out_dir, quiet);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
