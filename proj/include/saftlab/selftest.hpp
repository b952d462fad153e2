#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "saftlab/conv.hpp"
#include "saftlab/params.hpp"

namespace saftlab::selftest {

/// One seeded trial of a transform identity; `p` overrides the random draw.
/// Theorems: cc, sd, dd, commute, power, poisson, downsampling, periodicity,
/// parseval, roundtrip.
struct Trial {
    std::string theorem;
    int n = 1;
    Residual residual;
    double value = 0.0;  // the figure compared with the tolerance
};

Trial run_trial(const std::string& theorem, int n, std::mt19937_64& rng, const std::optional<SaftParams>& p = std::nullopt);

const std::vector<std::string>& theorems();

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double value = 0.0;      // worst observed figure
    double threshold = 0.0;
    double seconds = 0.0;
    std::string detail;
};

struct Options {
    std::uint64_t seed = 20260601;
    std::string workdir;  // scratch directory for the CLI exit-code check; empty = temp dir
};

inline constexpr int kCriteria = 11;

CheckResult run_check(int id, const Options& opt = {});
std::vector<CheckResult> run_all(const Options& opt = {});

/// "[PASS] 01 name  value=... (< threshold)  1.2 s  detail"
std::string format(const CheckResult& r);

} // namespace saftlab::selftest
