// One PASS/FAIL line per acceptance criterion, then the usual Catch2 report.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "clmm/app.hpp"
#include "clmm/cli_io.hpp"
#include "clmm/verify.hpp"

using namespace clmm;
namespace fs = std::filesystem;

namespace {

const std::map<int, std::string> kTitles{
    {1, "closed-form reserves for step profiles"},
    {2, "uniform liquidity reproduces the constant-product pool"},
    {3, "integration by parts matches quadrature"},
    {4, "finite-horizon coefficients match the RK4 oracle"},
    {5, "discounted solution satisfies its HJB equation"},
    {6, "degenerate regimes and long horizons"},
    {7, "ergodic constant confirmed by Monte Carlo in under 60 s"},
    {8, "discounted value converges to the ergodic constant"},
    {9, "reflected mispricing stays in the fee band"},
    {10, "arbitrage profit shrinks under refinement"},
    {11, "LVR and P&L ledger identities"},
    {12, "position value under the covered-call bound"},
    {13, "verify output is byte-identical across runs"},
};

const std::vector<verify::CheckResult>& results() {
    static const auto all = verify::run_verification();
    return all;
}

void report(int criterion, bool passed, const std::string& detail) {
    std::cout << "AC" << std::setw(2) << std::left << criterion << " " << (passed ? "PASS" : "FAIL") << "  "
              << kTitles.at(criterion) << "  [" << detail << "]" << std::endl;
}

void criterion_from_suite(int criterion) {
    int total = 0, passed = 0;
    double secs = 0.0;
    std::ostringstream failed;
    for (const auto& r : results()) {
        if (r.criterion != criterion) continue;
        ++total;
        secs = r.seconds;
        if (r.passed) {
            ++passed;
        } else {
            failed << "; failed: " << r.name << " measured " << io::format_number(r.measured);
        }
        INFO(r.name << " measured " << r.measured << " tolerance " << r.tolerance);
        CHECK(r.passed);
    }
    REQUIRE(total > 0);
    bool ok = passed == total;
    std::ostringstream detail;
    detail << passed << "/" << total << " checks, " << std::fixed << std::setprecision(2) << secs << " s" << failed.str();
    if (criterion == 7) {
        CHECK(secs <= 60.0);
        ok = ok && secs <= 60.0;
    }
    report(criterion, ok, detail.str());
}

int run_verify(const fs::path& out) {
    const std::string dir = out.string();
    const char* argv[] = {"clmm_lab", "--out", dir.c_str(), "verify"};
    std::ostringstream sink_out, sink_err;
    return app::run(4, argv, sink_out, sink_err);
}

}  // namespace

TEST_CASE("AC1") { criterion_from_suite(1); }
TEST_CASE("AC2") { criterion_from_suite(2); }
TEST_CASE("AC3") { criterion_from_suite(3); }
TEST_CASE("AC4") { criterion_from_suite(4); }
TEST_CASE("AC5") { criterion_from_suite(5); }
TEST_CASE("AC6") { criterion_from_suite(6); }
TEST_CASE("AC7") { criterion_from_suite(7); }
TEST_CASE("AC8") { criterion_from_suite(8); }
TEST_CASE("AC9") { criterion_from_suite(9); }
TEST_CASE("AC10") { criterion_from_suite(10); }
TEST_CASE("AC11") { criterion_from_suite(11); }
TEST_CASE("AC12") { criterion_from_suite(12); }

TEST_CASE("AC13") {
    const fs::path base = fs::temp_directory_path() / "clmm_acceptance_determinism";
    fs::remove_all(base);
    const int rc_a = run_verify(base / "a");
    const int rc_b = run_verify(base / "b");
    CHECK(rc_a == 0);
    CHECK(rc_b == 0);
    std::string a, b;
    try {
        a = io::read_file(base / "a" / "verify.csv");
        b = io::read_file(base / "b" / "verify.csv");
    } catch (const std::exception& e) {
        FAIL_CHECK(e.what());
    }
    const bool same = !a.empty() && a == b;
    CHECK(same);
    report(13, same && rc_a == 0 && rc_b == 0,
           std::to_string(a.size()) + " bytes, exit codes " + std::to_string(rc_a) + "/" + std::to_string(rc_b));
}
