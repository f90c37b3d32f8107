// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "starnoma/starnoma.hpp"

using namespace starnoma;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
    std::size_t nb = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++nb;
    if (names.empty() || names.size() != nb) {
        why = "file sets differ under " + a.filename().string();
        return false;
    }
    for (const auto& n : names)
        if (slurp(a / n) != slurp(b / n)) {
            why = n + " differs";
            return false;
        }
    return true;
}

checks::CheckResult reproducibility() {
    checks::CheckResult r{10, "byte-identical CLI outputs across repeated runs and thread counts", true, ""};
    const fs::path root = fs::temp_directory_path() / "starnoma_acceptance";
    fs::remove_all(root);
    struct Case {
        std::string name, args;
    };
    const std::vector<Case> cases = {
        {"mc", "--seed 5 mc --trials 6"},
        {"sweep", "--seed 5 sweep --param M --values 4,16 --trials 3"},
        {"run", "--seed 5 run --scheme hnoma_star --trial 2"},
    };
    int compared = 0;
    for (const auto& c : cases) {
        const std::vector<std::string> variants = {"a", "b", "c"};
        for (const auto& v : variants) {
            const fs::path dir = root / (c.name + "_" + v);
            const std::string jobs = v == "c" ? " --jobs 2" : " --jobs 1";
            const std::string cmd =
                std::string(STARNOMA_CLI) + " --out " + dir.string() + jobs + " " + c.args + " > /dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) {
                r.passed = false;
                r.detail = "command failed: " + c.args;
                return r;
            }
        }
        std::string why;
        for (const char* v : {"b", "c"}) {
            ++compared;
            if (!same_tree(root / (c.name + "_a"), root / (c.name + "_" + v), why)) {
                r.passed = false;
                r.detail = c.name + ": " + why;
                return r;
            }
        }
    }
    fs::remove_all(root);
    r.detail = std::to_string(compared) + " output trees compared (mc, sweep, run; jobs 1 and 2)";
    return r;
}

} // namespace

int main() {
    std::vector<checks::CheckResult> all;
    auto report = [&](checks::CheckResult r) {
        std::printf("%s\n", checks::format(r).c_str());
        std::fflush(stdout);
        all.push_back(std::move(r));
    };
    for (auto& r : checks::oracle_suite()) report(std::move(r));
    report(checks::convergence());
    report(checks::scheme_ordering(200, 1));
    report(checks::ablation_ratio(100, 1));
    report(checks::pairing_gain(100, 1));
    report(reproducibility());

    int failed = 0;
    for (const auto& r : all) failed += r.passed ? 0 : 1;
    std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
