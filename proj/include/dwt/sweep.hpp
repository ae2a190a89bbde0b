#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dwt/fitting.hpp"
#include "dwt/stationary_resolvent.hpp"

namespace dwt {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Malformed configuration text (CLI exit code 2).
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reference to an unregistered profile or check (CLI exit code 3).
class UnknownNameError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parsed run configuration. Text format, one `key = value` per line:
///
///   [profile]  name, then numeric profile parameters
///   [sweep]    grid_n, q_values or q_range (lo hi count), beta_strategy,
///              beta_list, align_to_peak, tau, gamma, seed, output_dir, jobs
///   [checks]   names (comma separated)
///   [decay]    n, k_max, t_max, samples
///
/// '#' and ';' start comments.
struct SweepConfig {
    std::string profile;
    std::vector<std::pair<std::string, double>> profile_params;
    int grid_n = 0;  ///< 0: scale the grid with q
    std::vector<double> q_values;
    BetaStrategy beta_strategy = BetaStrategy::Modes;
    std::vector<double> beta_list;
    bool align_to_peak = true;
    std::optional<double> tau;
    std::optional<int> gamma;
    std::vector<std::string> checks;
    std::string output_dir = "dwt_out";
    std::uint64_t seed = 0;
    int decay_n = 256;
    int decay_k_max = 64;
    double decay_t_max = 20000.0;
    int decay_samples = 240;

    /// Normalized text of everything that affects results (not output_dir).
    std::string canonical() const;
};

SweepConfig parse_config(const std::string& text);
SweepConfig load_config(const std::filesystem::path& path);

std::vector<std::string> check_names();

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);
/// Digest of the canonical config and the toolkit version.
std::string config_hash(const SweepConfig& cfg);

struct CheckResult {
    bool pass = false;
    std::map<std::string, double> values;
};

/// Points behind a fit, in the fit's own coordinates (untransformed).
struct FitSeries {
    std::string x_label, y_label;
    std::vector<double> x, y;
};

struct RunReport {
    std::string config_hash;
    std::map<std::string, ExponentFit> fits;
    std::map<std::string, FitSeries> series;
    std::map<std::string, CheckResult> checks;
    std::map<std::string, std::string> provenance;
    /// Time series t, E, E^{1/2}/data_norm of the slowest ensemble trace.
    std::vector<std::array<double, 3>> decay_trace;
};

std::string report_to_json(const RunReport& r);
RunReport report_from_json(const std::string& text);

struct RunOptions {
    bool force = false;
    int jobs = 1;
    /// Overrides the cache directory (else $DWT_CACHE_DIR, else ~/.cache/dwt).
    std::optional<std::filesystem::path> cache_dir;
};

std::filesystem::path cache_directory(const RunOptions& opt);

/// Executes the configured sweeps and checks; writes CSV files and
/// report.json to the output directory, reusing cached artifacts by hash.
RunReport run(const SweepConfig& cfg, const RunOptions& opt = {});
RunReport run(const std::filesystem::path& config_path, const RunOptions& opt = {});

/// Per-fit series CSV and SVG plot next to the report; returns files written.
std::vector<std::filesystem::path> report_render(const std::filesystem::path& report_json);

/// Locale-independent shortest round-trip formatting.
std::string format_double(double v);

}  // namespace dwt
