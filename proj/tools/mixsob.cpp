// Command-line runner: one subcommand per experiment, each driven by a TOML
// (or JSON) config. Outputs land in <out>/<subcommand>-<config hash>/.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mixsob/runner.hpp"

namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool no_rerun = false;
};

CLI::App* add_subcommand(CLI::App& app, mixsob::Subcommand cmd, const std::string& help, Flags& f) {
    auto* sub = app.add_subcommand(mixsob::to_string(cmd), help);
    auto* cfg = sub->add_option("--config", f.config, "config file (TOML, or JSON by extension) or a directory of them");
    if (cmd != mixsob::Subcommand::reproduce_all) cfg->required();
    sub->add_option("--out", f.out, "output root")->capture_default_str();
    sub->add_option("--seed", f.seed, "override the config seed");
    sub->add_option("--threads", f.threads, "worker threads for parallel stages")->check(CLI::Range(1u, 1024u));
    return sub;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed local/nonlocal Sobolev and Brezis-Nirenberg experiments"};
    app.set_version_flag("--version", mixsob::tool_version());
    app.require_subcommand(1);
    Flags f;
    std::optional<mixsob::Subcommand> chosen;
    const std::pair<mixsob::Subcommand, const char*> subs[] = {
        {mixsob::Subcommand::eigen, "first eigenvalues of the local, fractional and mixed forms"},
        {mixsob::Subcommand::sobolev_scan, "Aubin-Talenti concentration scan (spread or shrink)"},
        {mixsob::Subcommand::bn_linear, "trace the shifted Sobolev quotient curve S(lambda)"},
        {mixsob::Subcommand::bn_superlinear, "mountain-pass dichotomy scan, optionally a grid solve"},
        {mixsob::Subcommand::competitor_scan, "path coefficients of the cut-off bubbles over an eps grid"},
        {mixsob::Subcommand::reproduce_all, "run the acceptance suite and print a pass/fail table"},
    };
    for (const auto& [cmd, help] : subs) {
        auto* sub = add_subcommand(app, cmd, help, f);
        if (cmd == mixsob::Subcommand::reproduce_all)
            sub->add_flag("--no-determinism-check", f.no_rerun, "skip the second run")->group("");
        sub->callback([&chosen, cmd = cmd] { chosen = cmd; });
    }
    CLI11_PARSE(app, argc, argv);

    mixsob::RunOptions opt;
    opt.out_root = f.out;
    opt.seed = f.seed;
    opt.threads = f.threads;
    opt.log = &std::cerr;
    opt.check_determinism = !f.no_rerun;
    std::error_code ec;
    const auto self = fs::read_symlink("/proc/self/exe", ec);
    opt.rerun_executable = ec ? fs::absolute(argv[0]) : self;

    std::string config = f.config;
    if (config.empty()) config = "configs";
    const auto outcome = mixsob::run(*chosen, config, opt);
    if (outcome.acceptance) {
        std::cout << "mixsob " << mixsob::tool_version() << " acceptance\n";
        for (const auto& c : outcome.acceptance->criteria) std::cout << mixsob::format_criterion(c) << '\n';
        if (outcome.determinism)
            std::cout << (outcome.determinism->passed ? "[PASS] " : "[FAIL] ") << "10. " << outcome.determinism->name
                      << ": " << outcome.determinism->detail << '\n';
    }
    if (!outcome.directory.empty()) std::cout << "outputs: " << outcome.directory.string() << '\n';
    if (!outcome.message.empty()) std::cerr << outcome.message << '\n';
    return outcome.exit_code;
}
