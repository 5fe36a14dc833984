// Runs every verification suite against one pinned seed and prints one
// verdict line per criterion, ordered by criterion id.  Exit code 0 only if
// all 13 pass.

#include <algorithm>
#include <cstdio>
#include <vector>

#include "ri/verify.hpp"

int main() {
    constexpr uint64_t kSeed = 7;
    std::vector<ri::CriterionResult> all;
    for (const std::string& suite : ri::suite_names()) {
        std::printf("-- suite %s\n", suite.c_str());
        std::fflush(stdout);
        ri::SuiteResult res = ri::run_suite(suite, kSeed, 1);
        for (ri::CriterionResult& c : res.criteria) all.push_back(std::move(c));
    }
    std::sort(all.begin(), all.end(),
              [](const ri::CriterionResult& a, const ri::CriterionResult& b) {
                  return a.id < b.id;
              });
    int failures = 0;
    for (const ri::CriterionResult& c : all) {
        std::printf("[%s] criterion %2d: %s -- %s\n", c.pass ? "PASS" : "FAIL", c.id,
                    c.name.c_str(), c.details.c_str());
        failures += !c.pass;
    }
    std::printf("%d/%d criteria passed (seed %llu)\n", static_cast<int>(all.size()) - failures,
                static_cast<int>(all.size()), static_cast<unsigned long long>(kSeed));
    return failures == 0 ? 0 : 1;
}
