#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spnl/experiment.hpp"

// Command-line value parsing and the CSV/JSON output layer. CSV schemas are
// versioned through the leading comment line; every data file embeds the
// run's config hash so it can be traced back to its manifest.

namespace spnl::io {

inline constexpr int kCsvSchemaVersion = 1;

// Accepts plain radians ("2.356") and multiples of pi ("0.75pi", "pi", "-pi/4").
double parse_angle(const std::string& text);

struct GridSpec {
    double start = 0.0;
    double stop = 0.0;
    int points = 1;
    std::vector<double> values() const;  // `points` samples, endpoint included
};

// "start:stop:points" with angle syntax, e.g. "0:2pi:256".
GridSpec parse_grid(const std::string& text);

struct CurveRow {
    double delta_phi = 0.0;
    double c = 0.0;
    double s_analytic = 0.0;
};

// Resolved run description; hashable except for the timestamp.
struct RunManifest {
    std::string command;                                       // curve | simulate | verify
    std::vector<std::pair<std::string, std::string>> config;  // resolved key/value pairs
    std::string timestamp_utc;

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);
    std::uint64_t config_hash() const;  // FNV-1a over sorted key=value lines
    std::string to_json() const;        // includes tool name/version and the hash
};

RunManifest make_manifest(const std::string& command);

std::string csv_header_comment(const std::string& kind, const RunManifest& manifest);

void write_curve_csv(const std::filesystem::path& path, std::span<const CurveRow> rows,
                     const RunManifest& manifest);

void write_estimates_csv(const std::filesystem::path& path,
                         const experiment::BinnedEstimates& estimates,
                         const RunManifest& manifest);

void write_estimates_json(const std::filesystem::path& path,
                          const experiment::BinnedEstimates& estimates,
                          const RunManifest& manifest);

void write_records_csv(const std::filesystem::path& path,
                       std::span<const experiment::ShotRecord> records,
                       const RunManifest& manifest);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

// Default output directory: $SPNL_OUTPUT_DIR if set, else the working directory.
std::filesystem::path default_output_dir();

}  // namespace spnl::io
