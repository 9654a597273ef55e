#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spnl/analytic.hpp"
#include "spnl/experiment.hpp"
#include "spnl/io.hpp"
#include "spnl/verify.hpp"
#include "spnl/version.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

struct SimulateArgs {
    int scheme = 3;
    std::string xi_minus_eta = "3pi/4";
    double alpha = 0.0;  // 0 = per-scheme default
    int cutoff = 8;
    long long shots = 100000;
    int bins = 16;
    std::uint64_t seed = 1;
    std::string bin_variable = "c";
    std::string readout = "deterministic";
    std::string erratum_mode = "derived";
    std::string ref_family = "phase-averaged";
    int ref_n = 4;
    int threads = 1;
    std::string format = "csv";
    std::string estimates_out;
    std::string records_out;
    std::string manifest_out;
    std::string replay;
};

spnl::experiment::ExperimentConfig build_config(const SimulateArgs& a) {
    using namespace spnl;
    auto cfg = experiment::ExperimentConfig::defaults_for_scheme(a.scheme);
    cfg.xi = io::parse_angle(a.xi_minus_eta);
    cfg.eta = 0.0;
    cfg.shots = a.shots;
    cfg.bins = a.bins;
    cfg.seed = a.seed;
    cfg.cutoff = a.cutoff;
    cfg.threads = a.threads;
    if (a.alpha > 0.0) cfg.alpha_mag = a.alpha;

    if (a.bin_variable == "c")
        cfg.bin_variable = experiment::BinVariable::kCos;
    else if (a.bin_variable == "delta-phi")
        cfg.bin_variable = experiment::BinVariable::kDeltaPhi;
    else
        throw std::invalid_argument("--bin-variable must be 'c' or 'delta-phi'");

    if (a.readout == "deterministic")
        cfg.readout = experiment::ReadoutMode::kDeterministic;
    else if (a.readout == "sampled")
        cfg.readout = experiment::ReadoutMode::kSampled;
    else
        throw std::invalid_argument("--readout must be 'deterministic' or 'sampled'");

    if (a.erratum_mode == "derived")
        cfg.ratio_convention = experiment::RatioConvention::kDerived;
    else if (a.erratum_mode == "paper")
        cfg.ratio_convention = experiment::RatioConvention::kPaperFactor2;
    else
        throw std::invalid_argument("--erratum-mode must be 'derived' or 'paper'");

    if (a.scheme == 3) {
        const double mag = a.alpha > 0.0 ? a.alpha : std::sqrt(2.0);
        if (a.ref_family == "phase-averaged") {
            cfg.ref_a = spnl::schemes::ReferenceSpec::phase_averaged(mag, a.cutoff);
            cfg.ref_b = cfg.ref_a;
        } else if (a.ref_family == "number") {
            cfg.ref_a = spnl::schemes::ReferenceSpec::number(a.ref_n);
            cfg.ref_b = cfg.ref_a;
            // A pure number reference has no deterministic readout signal.
            if (a.readout == "deterministic") cfg.readout = experiment::ReadoutMode::kSampled;
        } else {
            throw std::invalid_argument("--ref-family must be 'phase-averaged' or 'number'");
        }
    }
    return cfg;
}

spnl::io::RunManifest simulate_manifest(const SimulateArgs& a,
                                        const spnl::experiment::ExperimentConfig& cfg) {
    auto m = spnl::io::make_manifest("simulate");
    m.set("scheme", static_cast<long long>(cfg.scheme));
    m.set("xi", cfg.xi);
    m.set("eta", cfg.eta);
    m.set("alpha", cfg.scheme == 3 ? std::sqrt(cfg.ref_a.mean_photon_number()) : cfg.alpha_mag);
    m.set("cutoff", static_cast<long long>(cfg.cutoff));
    m.set("shots", cfg.shots);
    m.set("bins", static_cast<long long>(cfg.bins));
    m.set("seed", static_cast<long long>(cfg.seed));
    m.set("threads", static_cast<long long>(cfg.threads));
    m.set("bin_variable", a.bin_variable);
    m.set("readout",
          cfg.readout == spnl::experiment::ReadoutMode::kDeterministic ? "deterministic"
                                                                       : "sampled");
    m.set("erratum_mode", a.erratum_mode);
    m.set("ref_family", cfg.scheme == 3 ? a.ref_family : "coherent");
    if (cfg.scheme == 3 && a.ref_family == "number")
        m.set("ref_n", static_cast<long long>(a.ref_n));
    m.set("format", a.format);
    m.set("delta_phi_branch", "asin(-c) in [-pi/2, pi/2]");
    return m;
}

SimulateArgs args_from_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read manifest '" + path + "'");
    const auto j = nlohmann::json::parse(in);
    const auto& cfg = j.at("config");
    SimulateArgs a;
    a.scheme = std::stoi(cfg.at("scheme").get<std::string>());
    a.xi_minus_eta = cfg.at("xi").get<std::string>();
    a.alpha = std::stod(cfg.at("alpha").get<std::string>());
    a.cutoff = std::stoi(cfg.at("cutoff").get<std::string>());
    a.shots = std::stoll(cfg.at("shots").get<std::string>());
    a.bins = std::stoi(cfg.at("bins").get<std::string>());
    a.seed = std::stoull(cfg.at("seed").get<std::string>());
    a.threads = std::stoi(cfg.at("threads").get<std::string>());
    a.bin_variable = cfg.at("bin_variable").get<std::string>();
    a.readout = cfg.at("readout").get<std::string>();
    a.erratum_mode = cfg.at("erratum_mode").get<std::string>();
    a.ref_family = cfg.at("ref_family").get<std::string>();
    if (cfg.contains("ref_n")) a.ref_n = std::stoi(cfg.at("ref_n").get<std::string>());
    a.format = cfg.at("format").get<std::string>();
    return a;
}

int run_curve(int scheme, const std::string& xi_minus_eta, const std::string& grid_text,
              const std::string& out) {
    using namespace spnl;
    if (scheme < 1 || scheme > 3) throw std::invalid_argument("--scheme must be 1, 2 or 3");
    const double x = io::parse_angle(xi_minus_eta);
    const auto grid = io::parse_grid(grid_text);

    std::vector<io::CurveRow> rows;
    for (double dphi : grid.values()) {
        io::CurveRow row;
        row.delta_phi = dphi;
        row.c = std::cos(dphi + kPi / 2.0);
        row.s_analytic = scheme == 2 ? analytic::s_scheme2(x) : analytic::s_scheme1(x, dphi);
        rows.push_back(row);
    }

    auto manifest = io::make_manifest("curve");
    manifest.set("scheme", static_cast<long long>(scheme));
    manifest.set("xi_minus_eta", x);
    manifest.set("grid", grid_text);

    const auto path = out.empty() ? io::default_output_dir() / "curve.csv"
                                  : std::filesystem::path(out);
    io::write_curve_csv(path, rows, manifest);
    io::write_manifest(path.string() + ".manifest.json", manifest);
    std::cout << "wrote " << rows.size() << " rows to " << path.string() << "\n";
    return 0;
}

int run_simulate(const SimulateArgs& args_in) {
    using namespace spnl;
    SimulateArgs args = args_in.replay.empty() ? args_in : args_from_manifest(args_in.replay);
    if (!args_in.replay.empty()) {
        // output destinations still come from the command line
        args.estimates_out = args_in.estimates_out;
        args.records_out = args_in.records_out;
        args.manifest_out = args_in.manifest_out;
    }

    const auto cfg = build_config(args);
    auto manifest = simulate_manifest(args, cfg);

    const auto records = experiment::run_chsh_experiment(cfg);
    const auto estimates = experiment::bin_and_estimate(records, cfg.bins, cfg.bin_variable);

    const auto out_dir = io::default_output_dir();
    const auto estimates_path = args.estimates_out.empty()
                                    ? out_dir / ("estimates." + args.format)
                                    : std::filesystem::path(args.estimates_out);
    if (args.format == "csv")
        io::write_estimates_csv(estimates_path, estimates, manifest);
    else if (args.format == "json")
        io::write_estimates_json(estimates_path, estimates, manifest);
    else
        throw std::invalid_argument("--format must be 'csv' or 'json'");

    if (!args.records_out.empty())
        io::write_records_csv(args.records_out, records, manifest);

    const auto manifest_path = args.manifest_out.empty()
                                   ? std::filesystem::path(estimates_path.string() +
                                                           ".manifest.json")
                                   : std::filesystem::path(args.manifest_out);
    io::write_manifest(manifest_path, manifest);

    std::cout << "shots=" << cfg.shots << " accepted=" << estimates.accepted
              << " unbinnable=" << estimates.unbinnable << "\n";
    for (const auto& b : estimates.bins) {
        std::printf("bin c=%+.4f  S=%.4f +- %.4f  n=%lld%s\n", b.c_center, b.s, b.s_err,
                    static_cast<long long>(b.accepted), b.valid ? "" : "  [invalid]");
    }
    std::cout << "wrote " << estimates_path.string() << " and " << manifest_path.string() << "\n";
    return 0;
}

int run_verify(const spnl::verify::VerifyOptions& options, const std::string& report_out) {
    using namespace spnl;
    const auto checks = verify::run_verification(options);
    bool all_pass = true;
    for (const auto& c : checks) {
        all_pass = all_pass && c.pass;
        std::printf("[%s] %-38s measured=%.3e tolerance=%.3e%s%s\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.measured, c.tolerance, c.note.empty() ? "" : "  ",
                    c.note.c_str());
    }
    if (!report_out.empty()) {
        nlohmann::ordered_json j;
        j["tool"] = "spnl";
        j["version"] = SPNL_VERSION;
        auto rows = nlohmann::ordered_json::array();
        for (const auto& c : checks) {
            rows.push_back({{"name", c.name},
                            {"measured", c.measured},
                            {"tolerance", c.tolerance},
                            {"pass", c.pass},
                            {"note", c.note}});
        }
        j["checks"] = rows;
        j["pass"] = all_pass;
        std::ofstream out(report_out);
        if (!out) throw std::invalid_argument("cannot write report to '" + report_out + "'");
        out << j.dump(2) << "\n";
    }
    std::cout << (all_pass ? "all checks passed" : "CHECKS FAILED") << "\n";
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fock-basis simulator and Monte Carlo CHSH harness for single-particle "
                 "interferometry with reference beams"};
    app.set_version_flag("--version", SPNL_VERSION);
    app.set_config("--config", "", "Read options from a key=value config file");
    app.require_subcommand(1);

    // curve
    auto* curve = app.add_subcommand("curve", "Tabulate the closed-form S(delta_phi) curve");
    int curve_scheme = 1;
    std::string curve_x = "3pi/4", curve_grid = "0:2pi:256", curve_out;
    curve->add_option("--scheme", curve_scheme, "Scheme (1, 2 or 3)");
    curve->add_option("--xi-minus-eta", curve_x, "Relative detection axis, e.g. 0.75pi");
    curve->add_option("--delta-phi", curve_grid, "Phase grid start:stop:points, e.g. 0:2pi:256");
    curve->add_option("--out", curve_out, "Output CSV path");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run the Monte Carlo CHSH experiment");
    SimulateArgs sa;
    sim->add_option("--scheme", sa.scheme, "Scheme (1, 2 or 3)");
    sim->add_option("--xi-minus-eta", sa.xi_minus_eta, "Relative detection axis, e.g. 0.75pi");
    sim->add_option("--alpha", sa.alpha, "Reference amplitude magnitude (0 = scheme default)");
    sim->add_option("--cutoff", sa.cutoff, "Fock truncation per reference");
    sim->add_option("--shots", sa.shots, "Number of experimental shots");
    sim->add_option("--bins", sa.bins, "Number of phase bins");
    sim->add_option("--seed", sa.seed, "Master seed");
    sim->add_option("--bin-variable", sa.bin_variable, "Binning variable: c or delta-phi");
    sim->add_option("--readout", sa.readout, "Remainder readout: deterministic or sampled");
    sim->add_option("--erratum-mode", sa.erratum_mode,
                    "Ratio-to-phase convention: derived or paper (printed factor 2)");
    sim->add_option("--ref-family", sa.ref_family,
                    "Scheme 3 reference family: phase-averaged or number");
    sim->add_option("--ref-n", sa.ref_n, "Photon number for number references");
    sim->add_option("--threads", sa.threads, "Worker threads (results identical for any count)");
    sim->add_option("--format", sa.format, "Estimates format: csv or json");
    sim->add_option("--estimates-out", sa.estimates_out, "Estimates output path");
    sim->add_option("--records-out", sa.records_out, "Optional per-shot records CSV path");
    sim->add_option("--manifest-out", sa.manifest_out, "Manifest output path");
    sim->add_option("--replay", sa.replay, "Re-run the configuration of an earlier manifest");

    // verify
    auto* ver = app.add_subcommand("verify", "Cross-check closed forms against the simulator");
    spnl::verify::VerifyOptions vo;
    std::string report_out;
    ver->add_option("--tol-exact", vo.tol_exact, "Exact-simulation tolerance");
    ver->add_option("--tol-quadrature", vo.tol_quadrature, "Representation-equivalence tolerance");
    ver->add_option("--shots", vo.mc_shots, "Shots for Monte Carlo checks");
    ver->add_option("--seed", vo.seed, "Seed for Monte Carlo checks");
    ver->add_option("--report-out", report_out, "Machine-readable JSON report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (curve->parsed()) return run_curve(curve_scheme, curve_x, curve_grid, curve_out);
        if (sim->parsed()) return run_simulate(sa);
        if (ver->parsed()) return run_verify(vo, report_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
