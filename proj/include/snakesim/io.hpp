#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "snakesim/tree.hpp"

namespace snakesim {

/// Shortest decimal text that reparses to the identical double.
std::string to_decimal(double v);

// ---------------------------------------------------------------------------
// Trajectory files: first line "ds,dt,n", then n lines "h,f" as decimal text.
// ---------------------------------------------------------------------------

void write_trajectory(const std::string& path, const TreeLikePath& tlp);
TreeLikePath read_trajectory(const std::string& path);
std::vector<std::string> list_trajectory_files(const std::string& dir);  // sorted

// ---------------------------------------------------------------------------
// Run configuration: flat key=value text with [section] prefixes.
// ---------------------------------------------------------------------------

struct SimConfig {
    std::uint64_t seed = 12345;
    double ds = 1e-4;
    double s_min = 0.0;  // duration window override; 0 = per-target default
    double s_cap = 0.0;
    int replicas = 1000;
    double eps_exit = 0.1;
    double eps_boundary = 0.05;
    double delta = 0.5;
    double beta = 0.5;
    std::string output_dir;  // empty = $SNAKESIM_OUT or ./out
    std::string format = "csv";
    int threads = 0;  // 0 = hardware

    void validate() const;  // throws std::invalid_argument naming the key
    std::string resolved_output_dir() const;
    std::string canonical() const;   // sorted key=value block
    std::uint64_t config_hash() const;
    std::string config_hash_hex() const;
};

/// Applies one key (optionally "section.key") onto the config; unknown keys
/// throw std::invalid_argument naming the key.
void apply_config_kv(SimConfig& cfg, const std::string& key, const std::string& value);

/// Parses a config file over the defaults.  Empty file = all defaults.
SimConfig parse_config_file(const std::string& path);

// ---------------------------------------------------------------------------
// CSV with a leading "# config=<hash>" comment line.
// ---------------------------------------------------------------------------

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& config_hash_hex,
              const std::vector<std::string>& header);
    ~CsvWriter();
    void row(const std::vector<std::string>& cells);

private:
    void* file_;
};

std::uint64_t fnv1a(const std::string& text);

}  // namespace snakesim
