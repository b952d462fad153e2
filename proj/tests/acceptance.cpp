// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <iostream>

#include <CLI11.hpp>

#include "saftlab/selftest.hpp"

int main(int argc, char** argv) {
    CLI::App app{"saftlab acceptance suite"};
    saftlab::selftest::Options opt;
    app.add_option("--workdir", opt.workdir, "scratch directory for the command-line checks");
    app.add_option("--seed", opt.seed, "seed for random trials");
    CLI11_PARSE(app, argc, argv);

    int failed = 0;
    for (int id = 1; id <= saftlab::selftest::kCriteria; ++id) {
        saftlab::selftest::CheckResult r;
        try {
            r = saftlab::selftest::run_check(id, opt);
        } catch (const std::exception& e) {
            r.id = id;
            r.name = "criterion";
            r.detail = std::string("threw: ") + e.what();
        }
        failed += r.pass ? 0 : 1;
        std::cout << saftlab::selftest::format(r) << std::endl;
    }
    std::cout << (failed == 0 ? "acceptance: all " : "acceptance: ")
              << (failed == 0 ? std::to_string(saftlab::selftest::kCriteria) + " criteria passed"
                              : std::to_string(failed) + " of " + std::to_string(saftlab::selftest::kCriteria) + " criteria failed")
              << std::endl;
    return failed == 0 ? 0 : 1;
}
