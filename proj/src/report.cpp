#include "mixsob/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mixsob/error.hpp"

#ifndef MIXSOB_VERSION
#define MIXSOB_VERSION "0.0.0"
#endif

namespace mixsob {

std::string tool_version() { return MIXSOB_VERSION; }

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void CsvTable::add(std::vector<std::string> row) {
    require(row.size() == header.size(), "CSV row width does not match the header");
    rows.push_back(std::move(row));
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

void join(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
}

std::string verdict(bool below) { return below ? "below" : "not_below"; }

}  // namespace

void write_csv(const std::filesystem::path& path, const Provenance& prov, const CsvTable& table) {
    auto os = open_out(path);
    os << "# " << prov.tool << ' ' << prov.version << " subcommand=" << prov.subcommand
       << " config_hash=" << prov.config_hash << '\n';
    join(os, table.header);
    for (const auto& r : table.rows) join(os, r);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const Provenance& prov, nlohmann::json body) {
    body["provenance"] = {{"tool", prov.tool},
                          {"version", prov.version},
                          {"subcommand", prov.subcommand},
                          {"config_hash", prov.config_hash}};
    auto os = open_out(path);
    os << body.dump(2) << '\n';
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

CsvTable scan_table(const ConcentrationReport& rep) {
    CsvTable t{{"parameter", "quotient", "excess", "fitted_exponent"}, {}};
    const double slope = rep.fit ? rep.fit->slope : std::nan("");
    for (const auto& smp : rep.samples)
        t.add({format_number(smp.parameter), format_number(smp.quotient), format_number(smp.excess),
               format_number(slope)});
    return t;
}

CsvTable curve_table(const QuotientCurve& curve, const std::vector<double>& residuals) {
    require(residuals.size() == curve.samples.size(), "one residual per curve sample");
    CsvTable t{{"lambda", "s_value", "residual", "iters", "regime_label"}, {}};
    for (std::size_t i = 0; i < curve.samples.size(); ++i) {
        const auto& smp = curve.samples[i];
        t.add({format_number(smp.lambda), format_number(smp.value), format_number(residuals[i]),
               std::to_string(smp.iterations), to_string(smp.regime)});
    }
    return t;
}

CsvTable dichotomy_table(const DichotomyReport& rep) {
    CsvTable t{{"s", "n", "p", "eps", "lambda", "A", "C", "t_star", "sup", "threshold", "verdict"}, {}};
    for (const auto& r : rep.reports)
        t.add({format_number(rep.exps.s), std::to_string(rep.exps.n), format_number(rep.exps.p), format_number(r.eps),
               format_number(r.lambda), format_number(r.A), format_number(r.C), format_number(r.t_star),
               format_number(r.sup), format_number(r.threshold), verdict(r.below)});
    return t;
}

CsvTable competitor_table(const std::vector<Competitor>& cs, const std::vector<double>& p_values) {
    CsvTable t{{"eps", "r", "s", "gradient_sq", "gagliardo_sq", "A", "B", "excess"}, {}};
    for (double p : p_values) t.header.push_back("C_p" + format_number(p));
    t.header.push_back("expansion_warning");
    for (const auto& c : cs) {
        std::vector<std::string> row{format_number(c.eps),      format_number(c.r), format_number(c.s),
                                     format_number(c.gradient), format_number(c.gagliardo),
                                     format_number(c.A),        format_number(c.B),
                                     format_number(c.A - talenti_constant(c.profile.n))};
        for (double p : p_values) row.push_back(format_number(competitor_lp(c, p)));
        row.push_back(c.expansion_warning ? "1" : "0");
        t.add(std::move(row));
    }
    return t;
}

nlohmann::json to_json(const ConcentrationReport& rep) {
    nlohmann::json j;
    j["mode"] = rep.mode == ScanMode::spread_t ? "spread" : "shrink";
    j["n"] = rep.n;
    j["s"] = rep.s;
    j["limit_estimate"] = std::isfinite(rep.limit_estimate) ? nlohmann::json(rep.limit_estimate) : nlohmann::json();
    j["fit"] = rep.fit ? to_json(*rep.fit) : nlohmann::json();
    j["monotone"] = rep.monotone;
    j["above_talenti"] = rep.above_talenti;
    j["divergent"] = rep.divergent;
    j["note"] = rep.note;
    auto& arr = j["samples"] = nlohmann::json::array();
    for (const auto& smp : rep.samples) {
        auto fin = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
        arr.push_back({{"parameter", smp.parameter},
                       {"quotient", fin(smp.quotient)},
                       {"excess", fin(smp.excess)},
                       {"gagliardo", fin(smp.gagliardo)},
                       {"finite", smp.finite}});
    }
    return j;
}

}  // namespace mixsob
