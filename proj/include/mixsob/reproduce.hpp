#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsob/config.hpp"
#include "mixsob/report.hpp"

namespace mixsob {

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<Check> checks;
    std::vector<std::string> info;     // context lines that do not affect the verdict
    double seconds = 0.0;
    double budget_seconds = 0.0;       // 0 means no runtime limit
    nlohmann::json data;

    bool numeric_pass() const;
    bool within_budget() const;
    bool passed() const { return numeric_pass() && within_budget(); }
};

struct AcceptanceReport {
    std::vector<CriterionResult> criteria;
    bool all_passed() const;
};

/// Runs the numerical acceptance criteria (1-9) with the sizes from a
/// reproduce-all config. Writes per-criterion JSON and CSV artifacts plus
/// acceptance.csv into `dir`; those files depend only on the config. Wall
/// clock times go to runtime.json, which is excluded from comparisons.
AcceptanceReport run_acceptance(const ExperimentConfig& config, const std::filesystem::path& dir,
                                std::ostream* log = nullptr);

/// Files excluded from byte comparisons because they record wall-clock time
/// or the comparison itself.
bool volatile_output(const std::filesystem::path& name);

/// Relative paths that differ between two output trees, including files
/// present in only one of them.
std::vector<std::string> compare_output_trees(const std::filesystem::path& a, const std::filesystem::path& b);

/// "[PASS] 3 title (1.2 s / 60 s)" followed by indented check lines.
std::string format_criterion(const CriterionResult& c);

}  // namespace mixsob
