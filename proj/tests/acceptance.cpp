// Acceptance suite: runs reproduce-all on the bundled configs and prints one
// PASS/FAIL line per criterion. The determinism criterion repeats the run in
// a separate process of the command-line tool.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "mixsob/runner.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    const fs::path configs = argc > 1 ? argv[1] : MIXSOB_CONFIG_DIR;
    const fs::path out = fs::temp_directory_path() / "mixsob-acceptance";
    fs::remove_all(out);

    mixsob::RunOptions opt;
    opt.out_root = out;
    opt.log = &std::cerr;
    opt.rerun_executable = fs::path(MIXSOB_CLI_PATH);
    const auto r = mixsob::run(mixsob::Subcommand::reproduce_all, configs, opt);
    if (!r.acceptance) {
        std::cout << "[FAIL] acceptance suite did not run: " << r.message << '\n';
        return r.exit_code ? r.exit_code : 1;
    }

    std::cout << "\n==== details ====\n";
    for (const auto& c : r.acceptance->criteria) std::cout << mixsob::format_criterion(c) << '\n';
    std::cout << "\n==== acceptance ====\n";
    int failed = 0;
    for (const auto& c : r.acceptance->criteria) {
        std::cout << (c.passed() ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << '\n';
        failed += !c.passed();
    }
    const bool det = r.determinism && r.determinism->passed;
    std::cout << (det ? "PASS" : "FAIL") << "  criterion 10: reproduce-all twice gives bit-identical outputs ("
              << (r.determinism ? r.determinism->detail : "not run") << ")\n";
    failed += !det;
    std::cout << (10 - failed) << "/10 criteria passed; outputs in " << r.directory.string() << '\n';
    return failed ? 1 : 0;
}
