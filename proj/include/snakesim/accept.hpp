#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace snakesim::accept {

struct CriterionResult {
    std::string id;
    std::string name;
    bool pass = false;
    bool reran = false;      // rerun-once-with-next-seed policy triggered
    double seconds = 0.0;
    nlohmann::json details;

    std::string line() const;  // one printable pass/fail line
};

struct VerifyOptions {
    std::uint64_t seed = 12345;
    int threads = 0;
    // Replica override for smoke runs; 0 keeps the pinned sample sizes.
    // Statistical verdicts at reduced size are still reported honestly.
    std::uint64_t replica_override = 0;
};

/// Suites: laws = {A1,A2,A4,A5}, excursions = {A6,A8,A9}, csbp = {A7},
/// rerooting = {A3}, properties = deterministic P-suite, all = everything.
std::vector<CriterionResult> run_suite(const std::string& suite, const VerifyOptions& opts);

bool all_pass(const std::vector<CriterionResult>& results);
nlohmann::json results_to_json(const std::vector<CriterionResult>& results,
                               const VerifyOptions& opts);

}  // namespace snakesim::accept
