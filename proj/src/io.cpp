#include "snakesim/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace snakesim {

std::string to_decimal(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // trim to the shortest round-trip representation
    for (int prec = 1; prec < 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        if (std::strtod(probe, nullptr) == v) return probe;
    }
    return buf;
}

void write_trajectory(const std::string& path, const TreeLikePath& tlp) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("write_trajectory: cannot open " + path);
    std::string head = to_decimal(tlp.ds) + "," + to_decimal(tlp.dt) + "," +
                       std::to_string(tlp.size()) + "\n";
    std::fwrite(head.data(), 1, head.size(), f);
    std::string line;
    for (std::size_t i = 0; i < tlp.size(); ++i) {
        line = to_decimal(tlp.h(i));
        line += ',';
        line += to_decimal(tlp.f[i]);
        line += '\n';
        std::fwrite(line.data(), 1, line.size(), f);
    }
    std::fclose(f);
}

TreeLikePath read_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_trajectory: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_trajectory: empty file " + path);
    TreeLikePath tlp;
    std::size_t n = 0;
    {
        std::istringstream hs(line);
        std::string a, b, c;
        if (!std::getline(hs, a, ',') || !std::getline(hs, b, ',') || !std::getline(hs, c, ','))
            throw std::runtime_error("read_trajectory: bad header in " + path);
        tlp.ds = std::strtod(a.c_str(), nullptr);
        tlp.dt = std::strtod(b.c_str(), nullptr);
        n = static_cast<std::size_t>(std::strtoull(c.c_str(), nullptr, 10));
    }
    tlp.lvl.reserve(n);
    tlp.f.reserve(n);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const char* s = line.c_str();
        char* end = nullptr;
        const double h = std::strtod(s, &end);
        if (!end || *end != ',')
            throw std::runtime_error("read_trajectory: bad row in " + path);
        const double f = std::strtod(end + 1, nullptr);
        tlp.lvl.push_back(static_cast<std::int32_t>(std::llround(h / tlp.dt)));
        tlp.f.push_back(f);
    }
    if (tlp.size() != n) throw std::runtime_error("read_trajectory: row count mismatch in " + path);
    tlp.validate();
    return tlp;
}

std::vector<std::string> list_trajectory_files(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".traj")
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

void SimConfig::validate() const {
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string("config: ") + key + " must be positive");
    };
    positive(ds, "ds");
    positive(eps_exit, "eps_exit");
    positive(eps_boundary, "eps_boundary");
    positive(delta, "delta");
    positive(beta, "beta");
    if (replicas <= 0) throw std::invalid_argument("config: replicas must be positive");
    if (!(eps_boundary < delta))
        throw std::invalid_argument("config: eps_boundary must be smaller than delta");
    if (s_min < 0.0 || s_cap < 0.0)
        throw std::invalid_argument("config: s_min/s_cap must be nonnegative");
    if (s_cap > 0.0 && s_min >= s_cap)
        throw std::invalid_argument("config: s_min must be below s_cap");
    if (format != "csv" && format != "json")
        throw std::invalid_argument("config: format must be csv or json");
}

std::string SimConfig::resolved_output_dir() const {
    if (!output_dir.empty()) return output_dir;
    if (const char* env = std::getenv("SNAKESIM_OUT")) return env;
    return "./out";
}

std::string SimConfig::canonical() const {
    std::map<std::string, std::string> kv = {
        {"beta", to_decimal(beta)},
        {"delta", to_decimal(delta)},
        {"ds", to_decimal(ds)},
        {"eps_boundary", to_decimal(eps_boundary)},
        {"eps_exit", to_decimal(eps_exit)},
        {"format", format},
        {"output_dir", resolved_output_dir()},
        {"replicas", std::to_string(replicas)},
        {"s_cap", to_decimal(s_cap)},
        {"s_min", to_decimal(s_min)},
        {"seed", std::to_string(seed)},
    };
    std::string out;
    for (const auto& [k, v] : kv) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t SimConfig::config_hash() const { return fnv1a(canonical()); }

std::string SimConfig::config_hash_hex() const {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash()));
    return buf;
}

void apply_config_kv(SimConfig& cfg, const std::string& key, const std::string& value) {
    // section prefixes only group keys; the flat name decides
    std::string k = key;
    if (const auto dot = k.rfind('.'); dot != std::string::npos) k = k.substr(dot + 1);

    auto as_double = [&](const char* name) {
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (!end || *end != '\0')
            throw std::invalid_argument(std::string("config: bad value for ") + name);
        return v;
    };
    if (k == "seed") cfg.seed = std::strtoull(value.c_str(), nullptr, 10);
    else if (k == "ds") cfg.ds = as_double("ds");
    else if (k == "s_min") cfg.s_min = as_double("s_min");
    else if (k == "s_cap") cfg.s_cap = as_double("s_cap");
    else if (k == "replicas") cfg.replicas = static_cast<int>(std::strtol(value.c_str(), nullptr, 10));
    else if (k == "eps_exit") cfg.eps_exit = as_double("eps_exit");
    else if (k == "eps_boundary") cfg.eps_boundary = as_double("eps_boundary");
    else if (k == "delta") cfg.delta = as_double("delta");
    else if (k == "beta") cfg.beta = as_double("beta");
    else if (k == "output_dir") cfg.output_dir = value;
    else if (k == "format") cfg.format = value;
    else if (k == "threads") cfg.threads = static_cast<int>(std::strtol(value.c_str(), nullptr, 10));
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

SimConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    SimConfig cfg;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#' || line[first] == ';') continue;
        if (line[first] == '[') {
            const auto close = line.find(']', first);
            if (close == std::string::npos)
                throw std::invalid_argument("config: unterminated section at line " +
                                            std::to_string(lineno));
            section = line.substr(first + 1, close - first - 1);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key=value at line " +
                                        std::to_string(lineno));
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        apply_config_kv(cfg, section.empty() ? key : section + "." + key, value);
    }
    return cfg;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& config_hash_hex,
                     const std::vector<std::string>& header) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("CsvWriter: cannot open " + path);
    file_ = f;
    std::string line = "# config=" + config_hash_hex + "\n";
    std::fwrite(line.data(), 1, line.size(), f);
    line.clear();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) line += ',';
        line += header[i];
    }
    line += '\n';
    std::fwrite(line.data(), 1, line.size(), f);
}

CsvWriter::~CsvWriter() {
    if (file_) std::fclose(static_cast<std::FILE*>(file_));
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    line += '\n';
    std::fwrite(line.data(), 1, line.size(), static_cast<std::FILE*>(file_));
}

}  // namespace snakesim
