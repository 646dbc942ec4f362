#ifndef LMX_SIMULATE_HPP
#define LMX_SIMULATE_HPP

#include <cstdint>

#include "lmx/report.hpp"

namespace lmx {

struct SimParams {
    long n = 0;      // 0 = suite default
    long p = 0;
    long reps = 0;
    std::uint64_t seed = 0;
};

// Suites: freedman, ehw-compare, hc2-unbiased, conformal-coverage,
// ridge-tradeoff. Deterministic given the seed.
Report simulate(const std::string& suite, const SimParams& params);

Report simulate_freedman(long n, long p, long reps, std::uint64_t seed);
Report simulate_ehw_compare(long n, long reps, std::uint64_t seed);
Report simulate_hc2_unbiased(long n, long p, long reps, std::uint64_t seed);
Report simulate_conformal_coverage(long n, long reps, std::uint64_t seed);
Report simulate_ridge_tradeoff(long n, long p, long reps, std::uint64_t seed);

}  // namespace lmx

#endif
