#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

// Process-level tests of the spnl binary.

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
    auto dir = fs::temp_directory_path() / "spnl_cli_test";
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(SPNL_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// strips the manifest reference so reruns with fresh hashes still compare
std::string data_lines(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') out << line << "\n";
    return out.str();
}

}  // namespace

TEST_CASE("curve emits the closed-form landmark value") {
    const auto dir = work_dir();
    const auto log = dir / "curve.log";
    const auto out = dir / "curve.csv";
    const int code = run("curve --scheme 1 --xi-minus-eta 0.75pi --delta-phi 0.5pi:0.5pi:1 --out " +
                             out.string(),
                         log);
    CHECK(code == 0);
    const auto text = slurp(out);
    CHECK(text.find("2.8284271247461") != std::string::npos);
    CHECK(fs::exists(out.string() + ".manifest.json"));

    // dphi = 3pi/2 sits at the zero of the curve
    const auto out2 = dir / "curve2.csv";
    run("curve --scheme 1 --xi-minus-eta 0.75pi --delta-phi 1.5pi:1.5pi:1 --out " + out2.string(),
        log);
    const auto text2 = slurp(out2);
    const auto last_comma = text2.rfind(',');
    REQUIRE(last_comma != std::string::npos);
    CHECK(std::stod(text2.substr(last_comma + 1)) < 1e-12);
}

TEST_CASE("curve peaks at dphi = pi/2 on a dense grid") {
    const auto dir = work_dir();
    const auto log = dir / "peak.log";
    const auto out = dir / "peak.csv";
    REQUIRE(run("curve --scheme 1 --xi-minus-eta 0.75pi --delta-phi 0:2pi:1000 --out " +
                    out.string(),
                log) == 0);
    std::istringstream in(slurp(out));
    std::string line;
    double best_s = -1.0, best_phi = 0.0;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("delta_phi", 0) == 0) continue;
        ++rows;
        const auto c1 = line.find(','), c2 = line.rfind(',');
        const double phi = std::stod(line.substr(0, c1));
        const double s = std::stod(line.substr(c2 + 1));
        if (s > best_s) {
            best_s = s;
            best_phi = phi;
        }
    }
    CHECK(rows == 1000);
    const double spacing = 2.0 * 3.14159265358979323846 / 999.0;
    CHECK(std::abs(best_phi - 3.14159265358979323846 / 2.0) <= spacing + 1e-12);
    CHECK(best_s > 2.82);
}

TEST_CASE("simulate writes estimates, records and a replayable manifest") {
    const auto dir = work_dir();
    const auto log = dir / "sim.log";
    const auto est = dir / "est.csv";
    const auto rec = dir / "rec.csv";
    const std::string common = "simulate --scheme 2 --shots 3000 --seed 7 --bins 1 ";
    const int code = run(common + "--estimates-out " + est.string() + " --records-out " +
                             rec.string(),
                         log);
    CHECK(code == 0);
    CHECK(fs::exists(est));
    CHECK(fs::exists(rec));
    CHECK(fs::exists(est.string() + ".manifest.json"));

    // byte-identical rerun
    const auto est2 = dir / "est2.csv";
    run(common + "--estimates-out " + est2.string(), log);
    CHECK(data_lines(est) == data_lines(est2));

    // replay from the manifest
    const auto est3 = dir / "est3.csv";
    const int rcode = run("simulate --replay " + est.string() + ".manifest.json --estimates-out " +
                              est3.string(),
                          log);
    CHECK(rcode == 0);
    CHECK(data_lines(est) == data_lines(est3));
}

TEST_CASE("json estimates format") {
    const auto dir = work_dir();
    const auto log = dir / "json.log";
    const auto est = dir / "est.json";
    const int code = run("simulate --scheme 2 --shots 500 --bins 1 --format json --estimates-out " +
                             est.string(),
                         log);
    CHECK(code == 0);
    const auto text = slurp(est);
    CHECK(text.find("\"bins\"") != std::string::npos);
    CHECK(text.find("\"config_hash\"") != std::string::npos);
}

TEST_CASE("usage and config errors exit with code 2") {
    const auto dir = work_dir();
    const auto log = dir / "err.log";
    CHECK(run("simulate --scheme 9 --shots 10", log) == 2);
    CHECK(run("simulate --no-such-flag", log) == 2);
    CHECK(run("curve --delta-phi 0:1", log) == 2);
    CHECK(run("", log) == 2);  // a subcommand is required
}

TEST_CASE("verify passes with light Monte Carlo settings") {
    const auto dir = work_dir();
    const auto log = dir / "verify.log";
    const auto report = dir / "report.json";
    const int code = run("verify --shots 20000 --report-out " + report.string(), log);
    CHECK(code == 0);
    const auto text = slurp(report);
    CHECK(text.find("\"pass\": true") != std::string::npos);
    CHECK(slurp(log).find("remainder_ratio_derived_form") != std::string::npos);
}

namespace {
struct EstimateRow {
    double c = 0.0, s = 0.0, s_err = 0.0;
    long long n = 0;
    bool valid = false;
};

std::vector<EstimateRow> parse_estimates(const fs::path& p) {
    std::vector<EstimateRow> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("bin_center_c", 0) == 0) continue;
        EstimateRow row;
        std::istringstream cells(line);
        std::string cell;
        std::vector<std::string> fields;
        while (std::getline(cells, cell, ',')) fields.push_back(cell);
        row.c = std::stod(fields[0]);
        row.s = std::stod(fields[1]);
        row.s_err = std::stod(fields[2]);
        row.n = std::stoll(fields[11]);
        row.valid = fields[12] == "1";
        rows.push_back(row);
    }
    return rows;
}
}  // namespace

TEST_CASE("simulated S values land on their targets") {
    const auto dir = work_dir();
    const auto log = dir / "stats.log";

    // scheme 2: a single estimate at 2*sqrt(2)
    const auto est2 = dir / "stats2.csv";
    REQUIRE(run("simulate --scheme 2 --shots 20000 --seed 31 --bins 1 --estimates-out " +
                    est2.string(),
                log) == 0);
    const auto rows2 = parse_estimates(est2);
    REQUIRE(rows2.size() == 1);
    CHECK(std::abs(rows2[0].s - 2.8284271247461903) < 3.0 * rows2[0].s_err);

    // scheme 3: at least one valid bin violating beyond three sigma
    const auto est3 = dir / "stats3.csv";
    REQUIRE(run("simulate --scheme 3 --shots 150000 --seed 32 --bins 16 --estimates-out " +
                    est3.string(),
                log) == 0);
    bool violation = false;
    for (const auto& row : parse_estimates(est3))
        if (row.valid && row.s - 3.0 * row.s_err > 2.0) violation = true;
    CHECK(violation);

    // the printed-erratum comparison mode runs and squeezes c into [-1/2, 1/2]
    const auto est4 = dir / "stats4.csv";
    REQUIRE(run("simulate --scheme 3 --shots 5000 --seed 33 --bins 8 --erratum-mode paper "
                "--estimates-out " + est4.string(),
                log) == 0);
    long long outer = 0;
    for (const auto& row : parse_estimates(est4))
        if (std::abs(row.c) > 0.55) outer += row.n;
    CHECK(outer == 0);
}

TEST_CASE("phase-variable binning and the output-directory variable") {
    const auto dir = work_dir();
    const auto log = dir / "phi.log";
    const auto est = dir / "phi_est.csv";
    CHECK(run("simulate --scheme 3 --shots 2000 --bins 8 --bin-variable delta-phi "
              "--estimates-out " + est.string(),
              log) == 0);
    CHECK(fs::exists(est));

    const auto outdir = dir / "outdir";
    fs::create_directories(outdir);
    const std::string cmd = std::string("SPNL_OUTPUT_DIR=") + outdir.string() + " " +
                            SPNL_CLI_PATH + " simulate --scheme 2 --shots 300 --bins 1 >" +
                            (dir / "env.log").string() + " 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(outdir / "estimates.csv"));
    CHECK(fs::exists(outdir / "estimates.csv.manifest.json"));
}

TEST_CASE("config file mirrors the flags") {
    const auto dir = work_dir();
    const auto log = dir / "cfg.log";
    const auto cfgfile = dir / "run.ini";
    {
        std::ofstream out(cfgfile);
        out << "[simulate]\nscheme=2\nshots=800\nbins=1\nseed=21\n";
    }
    const auto est = dir / "cfg_est.csv";
    const int code = run("--config " + cfgfile.string() + " simulate --estimates-out " +
                             est.string(),
                         log);
    CHECK(code == 0);
    const auto direct = dir / "direct_est.csv";
    run("simulate --scheme 2 --shots 800 --bins 1 --seed 21 --estimates-out " + direct.string(),
        log);
    CHECK(data_lines(est) == data_lines(direct));
}
