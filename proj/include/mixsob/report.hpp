#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsob/linear_bn.hpp"
#include "mixsob/mountain_pass.hpp"
#include "mixsob/sobolev.hpp"

namespace mixsob {

/// Written as the first line of every CSV and under "provenance" in JSON.
struct Provenance {
    std::string tool = "mixsob";
    std::string version;
    std::string subcommand;
    std::string config_hash;
};

std::string tool_version();

/// 17 significant digits, "nan"/"inf"/"-inf" for non-finite values.
std::string format_number(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
};

/// Comma separated, LF line ends, provenance comment then header.
void write_csv(const std::filesystem::path& path, const Provenance& prov, const CsvTable& table);
/// Pretty-printed with a trailing newline; adds the provenance block.
void write_json(const std::filesystem::path& path, const Provenance& prov, nlohmann::json body);

/// parameter, quotient, excess, fitted_exponent.
CsvTable scan_table(const ConcentrationReport& rep);
/// lambda, s_value, residual, iters, regime_label. `residuals` parallel to the samples.
CsvTable curve_table(const QuotientCurve& curve, const std::vector<double>& residuals);
/// s, n, p, eps, lambda, A, C, t_star, sup, threshold, verdict.
CsvTable dichotomy_table(const DichotomyReport& rep);
/// One row per competitor with the L^(p+1) moment for each p.
CsvTable competitor_table(const std::vector<Competitor>& cs, const std::vector<double>& p_values);

nlohmann::json to_json(const ConcentrationReport& rep);

}  // namespace mixsob
