#include "spnl/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "spnl/version.hpp"

namespace spnl::io {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse number '" + text + "'");
    }
    if (used != text.size()) throw std::invalid_argument("cannot parse number '" + text + "'");
    return v;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write to '" + path.string() + "'");
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void fnv1a(std::uint64_t& h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
}

}  // namespace

double parse_angle(const std::string& raw) {
    std::string text = trim(raw);
    if (text.empty()) throw std::invalid_argument("empty angle");
    std::string lowered = text;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return std::tolower(c); });

    const auto pos = lowered.find("pi");
    if (pos == std::string::npos) return parse_double(text);

    std::string before = trim(lowered.substr(0, pos));
    std::string after = trim(lowered.substr(pos + 2));

    double factor = 1.0;
    if (!before.empty()) {
        if (before == "-")
            factor = -1.0;
        else if (before == "+")
            factor = 1.0;
        else
            factor = parse_double(before);
    }
    double divisor = 1.0;
    if (!after.empty()) {
        if (after[0] != '/') throw std::invalid_argument("cannot parse angle '" + raw + "'");
        divisor = parse_double(trim(after.substr(1)));
        if (divisor == 0.0) throw std::invalid_argument("angle divides by zero");
    }
    return factor * kPi / divisor;
}

std::vector<double> GridSpec::values() const {
    std::vector<double> v;
    v.reserve(points);
    if (points == 1) {
        v.push_back(start);
        return v;
    }
    for (int i = 0; i < points; ++i)
        v.push_back(start + (stop - start) * double(i) / double(points - 1));
    return v;
}

GridSpec parse_grid(const std::string& text) {
    const auto first = text.find(':');
    if (first == std::string::npos) {
        GridSpec g;
        g.start = g.stop = parse_angle(text);
        g.points = 1;
        return g;
    }
    const auto second = text.find(':', first + 1);
    if (second == std::string::npos)
        throw std::invalid_argument("grid must be 'start:stop:points' or a single angle, got '" +
                                    text + "'");
    GridSpec g;
    g.start = parse_angle(text.substr(0, first));
    g.stop = parse_angle(text.substr(first + 1, second - first - 1));
    const std::string n = trim(text.substr(second + 1));
    try {
        g.points = std::stoi(n);
    } catch (const std::exception&) {
        throw std::invalid_argument("grid point count '" + n + "' is not an integer");
    }
    if (g.points < 1) throw std::invalid_argument("grid needs at least one point");
    return g;
}

void RunManifest::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : config) {
        if (k == key) {
            v = value;
            return;
        }
    }
    config.emplace_back(key, value);
}

void RunManifest::set(const std::string& key, double value) { set(key, format_double(value)); }

void RunManifest::set(const std::string& key, long long value) {
    set(key, std::to_string(value));
}

std::uint64_t RunManifest::config_hash() const {
    auto sorted = config;
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t h = 0xcbf29ce484222325ull;
    fnv1a(h, command);
    for (const auto& [k, v] : sorted) {
        fnv1a(h, k);
        fnv1a(h, "=");
        fnv1a(h, v);
        fnv1a(h, "\n");
    }
    return h;
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["tool"] = "spnl";
    j["version"] = SPNL_VERSION;
    j["command"] = command;
    j["timestamp_utc"] = timestamp_utc;
    char hex[32];
    std::snprintf(hex, sizeof hex, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(config_hash()));
    j["config_hash"] = hex;
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : config) cfg[k] = v;
    j["config"] = cfg;
    return j.dump(2);
}

RunManifest make_manifest(const std::string& command) {
    RunManifest m;
    m.command = command;
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m.timestamp_utc = buf;
    return m;
}

std::string csv_header_comment(const std::string& kind, const RunManifest& manifest) {
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(manifest.config_hash()));
    return "# spnl-csv v" + std::to_string(kCsvSchemaVersion) + " " + kind +
           " config=fnv1a64:" + hex;
}

void write_curve_csv(const std::filesystem::path& path, std::span<const CurveRow> rows,
                     const RunManifest& manifest) {
    auto out = open_output(path);
    out << csv_header_comment("curve", manifest) << "\n";
    out << "delta_phi,c,S_analytic\n";
    for (const auto& r : rows)
        out << format_double(r.delta_phi) << ',' << format_double(r.c) << ','
            << format_double(r.s_analytic) << "\n";
}

void write_estimates_csv(const std::filesystem::path& path,
                         const experiment::BinnedEstimates& estimates,
                         const RunManifest& manifest) {
    auto out = open_output(path);
    out << csv_header_comment("estimates", manifest) << "\n";
    out << "bin_center_c,S,S_err,E_ab,E_ab_err,E_apb,E_apb_err,E_abp,E_abp_err,"
           "E_apbp,E_apbp_err,n_accepted,valid\n";
    for (const auto& b : estimates.bins) {
        out << format_double(b.c_center) << ',' << format_double(b.s) << ','
            << format_double(b.s_err) << ',' << format_double(b.ab.e) << ','
            << format_double(b.ab.se) << ',' << format_double(b.apb.e) << ','
            << format_double(b.apb.se) << ',' << format_double(b.abp.e) << ','
            << format_double(b.abp.se) << ',' << format_double(b.apbp.e) << ','
            << format_double(b.apbp.se) << ',' << b.accepted << ',' << (b.valid ? 1 : 0) << "\n";
    }
}

void write_estimates_json(const std::filesystem::path& path,
                          const experiment::BinnedEstimates& estimates,
                          const RunManifest& manifest) {
    nlohmann::ordered_json j;
    j["manifest"] = nlohmann::ordered_json::parse(manifest.to_json());
    j["accepted"] = estimates.accepted;
    j["unbinnable"] = estimates.unbinnable;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& b : estimates.bins) {
        nlohmann::ordered_json r;
        r["bin_center_c"] = b.c_center;
        r["delta_phi"] = b.delta_phi;
        if (std::isnan(b.mean_c))
            r["mean_c"] = nullptr;
        else
            r["mean_c"] = b.mean_c;
        r["S"] = b.s;
        r["S_err"] = b.s_err;
        r["E_ab"] = b.ab.e;
        r["E_ab_err"] = b.ab.se;
        r["E_apb"] = b.apb.e;
        r["E_apb_err"] = b.apb.se;
        r["E_abp"] = b.abp.e;
        r["E_abp_err"] = b.abp.se;
        r["E_apbp"] = b.apbp.e;
        r["E_apbp_err"] = b.apbp.se;
        r["n_accepted"] = b.accepted;
        r["valid"] = b.valid;
        rows.push_back(r);
    }
    j["bins"] = rows;
    auto out = open_output(path);
    out << j.dump(2) << "\n";
}

void write_records_csv(const std::filesystem::path& path,
                       std::span<const experiment::ShotRecord> records,
                       const RunManifest& manifest) {
    auto out = open_output(path);
    out << csv_header_comment("records", manifest) << "\n";
    out << "shot,alice_primed,bob_primed,accepted,alice_sign,bob_sign,n15,n16,c_est,c_valid\n";
    for (const auto& r : records) {
        out << r.index << ',' << (r.alice_primed ? 1 : 0) << ',' << (r.bob_primed ? 1 : 0) << ','
            << (r.accepted ? 1 : 0) << ',' << r.alice_sign << ',' << r.bob_sign << ','
            << format_double(r.n15) << ',' << format_double(r.n16) << ','
            << format_double(r.c_est) << ',' << (r.c_valid ? 1 : 0) << "\n";
    }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    auto out = open_output(path);
    out << manifest.to_json() << "\n";
}

std::filesystem::path default_output_dir() {
    if (const char* env = std::getenv("SPNL_OUTPUT_DIR"); env && *env)
        return std::filesystem::path(env);
    return std::filesystem::current_path();
}

}  // namespace spnl::io
