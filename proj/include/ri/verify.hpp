#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ri {

// Reproducible acceptance checks.  Each criterion runs a pinned configuration
// (budgets, tolerances and derived seeds live in the criterion code, not in
// caller flags) and reduces to a single verdict plus the measured numbers.

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string details;   // measured values, tolerances, and sub-verdicts
};

struct SuiteResult {
    std::string suite;
    uint64_t seed = 0;
    int threads = 1;
    std::vector<CriterionResult> criteria;

    bool passed() const;
};

// Suite -> criterion ids:
//   potential     {1, 2, 8}   Green function, capacity, radial potential oracle
//   sampler       {3, 4, 5, 13}  occupancy law, Poisson tail, coupling, determinism
//   quotients     {6, 7}      difference-quotient lower bound, comparison bound
//   solver        {9, 10, 12} closed-form solve, fitted sweep, cost curve
//   rearrangement {11}
const std::vector<std::string>& suite_names();

// Runs every criterion of the suite; unknown names throw std::invalid_argument.
// A criterion that throws internally is reported as failed with the message in
// details, so one broken stage cannot abort the rest of the suite.
SuiteResult run_suite(const std::string& suite, uint64_t seed, int threads = 1);

void write_suite_json(const SuiteResult& result, std::ostream& out);
void write_suite_json_file(const SuiteResult& result, const std::string& path);

}  // namespace ri
