#include "mixsob/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

namespace mixsob {

namespace {

using nlohmann::json;

enum class Kind { integer, number, text, flag, numbers, integers };

struct Field {
    std::string name;
    Kind kind;
    json fallback;
    std::vector<std::string> choices;   // text fields only; empty means free
};

struct Schema {
    std::vector<Field> fields;
    // Cross-field validation on the completed block; throws ConfigError.
    std::function<void(const ExperimentConfig&)> check;
};

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void expect(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
}

void check_grid(const ExperimentConfig& c, bool allow_box) {
    const int n = c.integer("n");
    const int m = c.integer("m");
    const double L = c.number("L");
    expect(n >= 3 && n <= 5, "n must be 3, 4 or 5");
    expect(m >= 5 && m <= 65, "m must lie in [5, 65]");
    expect(m % 2 == 1, "m must be odd so the origin is a grid node (got " + std::to_string(m) + ")");
    expect(L > 0.0 && std::isfinite(L), "L must be positive");
    const double h = 2.0 * L / (m - 1);
    const std::string domain = c.text("domain");
    if (domain == "ball") {
        const double r = c.number("radius");
        expect(r >= h, "radius must be at least one grid spacing");
        expect(r + h <= L + 1e-12, "ball plus one node of margin must fit inside [-L, L]^n");
    } else {
        expect(allow_box, "this subcommand supports only the ball domain");
        const auto hw = c.numbers("half_widths");
        expect(static_cast<int>(hw.size()) == n, "half_widths needs one entry per axis");
        for (double w : hw) expect(w >= h && w <= L - h + 1e-12, "half widths must lie in [h, L - h]");
    }
}

void check_order(double s) { expect(s > 0.0 && s < 1.0, "s must lie in (0, 1)"); }

void check_power(double p, int n) {
    const double top = (n + 2.0) / (n - 2.0);
    expect(p > 1.0 && p < top, "p must lie in (1, 2* - 1)");
}

void check_eps_grid(const ExperimentConfig& c) {
    const int a = c.integer("eps_k_first"), b = c.integer("eps_k_last"), st = c.integer("eps_k_step");
    expect(a >= 1 && b <= 60 && a < b, "eps exponents need 1 <= eps_k_first < eps_k_last <= 60");
    expect(st >= 1, "eps_k_step must be positive");
    expect((b - a) / st + 1 >= 5, "the eps grid needs at least five points");
}

void check_ascending_positive(const std::vector<double>& v, const std::string& key, std::size_t min_size) {
    expect(v.size() >= min_size, key + " needs at least " + std::to_string(min_size) + " entries");
    for (std::size_t i = 0; i < v.size(); ++i) {
        expect(v[i] > 0.0 && std::isfinite(v[i]), key + " entries must be positive");
        if (i) expect(v[i] > v[i - 1], key + " must be strictly ascending");
    }
}

Field integer(std::string name, long long v) { return {std::move(name), Kind::integer, v, {}}; }
Field number(std::string name, double v) { return {std::move(name), Kind::number, v, {}}; }
Field text(std::string name, std::string v, std::vector<std::string> choices) {
    return {std::move(name), Kind::text, std::move(v), std::move(choices)};
}
Field flag(std::string name, bool v) { return {std::move(name), Kind::flag, v, {}}; }
Field numbers(std::string name, std::vector<double> v) { return {std::move(name), Kind::numbers, v, {}}; }
Field integers(std::string name, std::vector<long long> v) { return {std::move(name), Kind::integers, v, {}}; }

std::vector<Field> grid_fields(int m) {
    return {integer("n", 3),
            number("L", 1.5),
            integer("m", m),
            text("domain", "ball", {"ball", "box"}),
            number("radius", 1.0),
            numbers("half_widths", {})};
}

Schema make_schema(Subcommand cmd) {
    Schema sc;
    auto add = [&](std::vector<Field> fs) { sc.fields.insert(sc.fields.end(), fs.begin(), fs.end()); };
    switch (cmd) {
    case Subcommand::eigen:
        add(grid_fields(33));
        add({number("s", 0.5), number("change_tol", 1e-10), number("residual_tol", 1e-8),
             integer("max_iterations", 500)});
        sc.check = [](const ExperimentConfig& c) {
            check_grid(c, true);
            check_order(c.number("s"));
            expect(c.number("change_tol") > 0 && c.number("residual_tol") > 0, "tolerances must be positive");
            expect(c.integer("max_iterations") >= 1, "max_iterations must be positive");
        };
        break;
    case Subcommand::sobolev_scan:
        add({text("mode", "spread", {"spread", "shrink"}), integer("n", 3), number("s", 0.75),
             numbers("parameters", {1, 2, 4, 8, 16}), number("L", 1.5), integer("m", 13),
             text("domain", "ball", {"ball"}), number("radius", 1.0), numbers("half_widths", {})});
        sc.check = [](const ExperimentConfig& c) {
            check_order(c.number("s"));
            check_ascending_positive(c.numbers("parameters"), "parameters", 4);
            if (c.text("mode") == "shrink") check_grid(c, false);
            else expect(c.integer("n") >= 3 && c.integer("n") <= 5, "n must be 3, 4 or 5");
        };
        break;
    case Subcommand::bn_linear:
        add(grid_fields(25));
        add({number("s", 0.5), integer("samples", 24), number("factor", 1.2), numbers("lambdas", {}),
             number("plateau_tol", 0.0), text("plateau_reference", "sharp", {"sharp", "first"}),
             flag("extract", true), integer("max_iterations", 3000)});
        sc.check = [](const ExperimentConfig& c) {
            check_grid(c, true);
            check_order(c.number("s"));
            const auto ls = c.numbers("lambdas");
            if (ls.empty()) {
                expect(c.integer("samples") >= 5, "samples must be at least 5");
                expect(c.number("factor") > 1.0, "factor must exceed 1 so the grid reaches past lambda_1");
            } else {
                check_ascending_positive(ls, "lambdas", 5);
            }
            expect(c.number("plateau_tol") >= 0.0, "plateau_tol must be nonnegative (0 selects the default)");
            expect(c.integer("max_iterations") >= 10, "max_iterations must be at least 10");
        };
        break;
    case Subcommand::bn_superlinear:
        add({number("s", 0.25), integer("n", 3), number("p", 2.0), integer("eps_k_first", 8),
             integer("eps_k_last", 32), integer("eps_k_step", 2), number("r", 0.5),
             numbers("lambdas", {0.01, 0.1, 1, 10}), number("lambda_max", 1e12), number("bisection_tol", 1e-3),
             integer("discard_largest", 2), flag("solve", false), number("L", 1.5), integer("m", 17),
             text("domain", "ball", {"ball"}), number("radius", 1.0), numbers("half_widths", {}),
             number("solve_lambda", 300.0)});
        sc.check = [](const ExperimentConfig& c) {
            check_order(c.number("s"));
            expect(c.integer("n") >= 3 && c.integer("n") <= 5, "n must be 3, 4 or 5");
            check_power(c.number("p"), c.integer("n"));
            check_eps_grid(c);
            expect(c.number("r") > 0.0, "r must be positive");
            check_ascending_positive(c.numbers("lambdas"), "lambdas", 1);
            expect(c.number("lambda_max") > c.numbers("lambdas").back(), "lambda_max must exceed every sampled lambda");
            expect(c.number("bisection_tol") > 0 && c.number("bisection_tol") < 1, "bisection_tol must lie in (0, 1)");
            expect(c.integer("discard_largest") >= 0, "discard_largest must be nonnegative");
            if (c.flag("solve")) {
                check_grid(c, false);
                expect(c.number("solve_lambda") > 0.0, "solve_lambda must be positive");
            }
        };
        break;
    case Subcommand::competitor_scan:
        add({number("s", 0.25), integer("n", 3), integer("eps_k_first", 8), integer("eps_k_last", 32),
             integer("eps_k_step", 2), number("r", 0.5), numbers("p_values", {2, 4})});
        sc.check = [](const ExperimentConfig& c) {
            check_order(c.number("s"));
            expect(c.integer("n") >= 3 && c.integer("n") <= 5, "n must be 3, 4 or 5");
            check_eps_grid(c);
            expect(c.number("r") > 0.0, "r must be positive");
            for (double p : c.numbers("p_values")) check_power(p, c.integer("n"));
        };
        break;
    case Subcommand::reproduce_all:
        add({integers("sharp_m", {17, 25, 33}), integer("eigen_m", 33), integer("curve_m", 25),
             integer("curve_samples", 24), integer("scaling_m", 13), numbers("spread_t", {1, 2, 4, 8, 16}),
             integer("eps_k_first", 8), integer("eps_k_last", 32), integer("eps_k_step", 2),
             integer("random_trials", 100), integer("energy_m", 17)});
        sc.check = [](const ExperimentConfig& c) {
            const auto ms = c.integers("sharp_m");
            expect(ms.size() >= 2, "sharp_m needs at least two resolutions");
            std::vector<int> all = ms;
            for (const char* k : {"eigen_m", "curve_m", "scaling_m", "energy_m"}) all.push_back(c.integer(k));
            for (int m : all) {
                expect(m >= 5 && m <= 65, "grid sizes must lie in [5, 65]");
                expect(m % 2 == 1, "grid sizes must be odd so the origin is a grid node (got " + std::to_string(m) + ")");
            }
            for (std::size_t i = 1; i < ms.size(); ++i) expect(ms[i] > ms[i - 1], "sharp_m must be ascending");
            expect(c.integer("curve_samples") >= 5, "curve_samples must be at least 5");
            check_ascending_positive(c.numbers("spread_t"), "spread_t", 4);
            check_eps_grid(c);
            expect(c.integer("random_trials") >= 1, "random_trials must be positive");
        };
        break;
    }
    sc.fields.push_back(integer("seed", 1));
    return sc;
}

json convert(const toml::node& node, const std::string& where) {
    if (auto t = node.as_table()) {
        json j = json::object();
        for (const auto& [k, v] : *t) j[std::string(k.str())] = convert(v, where + "." + std::string(k.str()));
        return j;
    }
    if (auto a = node.as_array()) {
        json j = json::array();
        for (const auto& v : *a) j.push_back(convert(v, where));
        return j;
    }
    if (auto v = node.as_integer()) return v->get();
    if (auto v = node.as_floating_point()) return v->get();
    if (auto v = node.as_boolean()) return v->get();
    if (auto v = node.as_string()) return v->get();
    fail("unsupported TOML value type at " + where);
}

json coerce(const Field& f, const json& v) {
    const std::string& k = f.name;
    auto as_number = [&](const json& x) -> double {
        expect(x.is_number(), k + " must be a number");
        const double d = x.get<double>();
        expect(std::isfinite(d), k + " must be finite");
        return d;
    };
    auto as_integer = [&](const json& x) -> long long {
        expect(x.is_number_integer(), k + " must be an integer");
        return x.get<long long>();
    };
    switch (f.kind) {
    case Kind::integer: return as_integer(v);
    case Kind::number: return as_number(v);
    case Kind::flag:
        expect(v.is_boolean(), k + " must be true or false");
        return v;
    case Kind::text: {
        expect(v.is_string(), k + " must be a string");
        const auto s = v.get<std::string>();
        if (!f.choices.empty()) {
            bool ok = false;
            for (const auto& c : f.choices) ok = ok || c == s;
            std::string list;
            for (const auto& c : f.choices) list += (list.empty() ? "" : ", ") + c;
            expect(ok, k + " must be one of: " + list);
        }
        return s;
    }
    case Kind::numbers: {
        expect(v.is_array(), k + " must be an array of numbers");
        json out = json::array();
        for (const auto& x : v) out.push_back(as_number(x));
        return out;
    }
    case Kind::integers: {
        expect(v.is_array(), k + " must be an array of integers");
        json out = json::array();
        for (const auto& x : v) out.push_back(as_integer(x));
        return out;
    }
    }
    fail("unreachable");
}

const json& param(const json& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) throw InvalidArgument("config has no parameter " + key);
    return *it;
}

}  // namespace

std::string to_string(Subcommand c) {
    switch (c) {
    case Subcommand::eigen: return "eigen";
    case Subcommand::sobolev_scan: return "sobolev-scan";
    case Subcommand::bn_linear: return "bn-linear";
    case Subcommand::bn_superlinear: return "bn-superlinear";
    case Subcommand::competitor_scan: return "competitor-scan";
    case Subcommand::reproduce_all: return "reproduce-all";
    }
    return "?";
}

const std::vector<Subcommand>& all_subcommands() {
    static const std::vector<Subcommand> v{Subcommand::eigen,          Subcommand::sobolev_scan,
                                           Subcommand::bn_linear,      Subcommand::bn_superlinear,
                                           Subcommand::competitor_scan, Subcommand::reproduce_all};
    return v;
}

std::optional<Subcommand> parse_subcommand(std::string_view name) {
    for (auto c : all_subcommands())
        if (to_string(c) == name) return c;
    return std::nullopt;
}

std::uint64_t ExperimentConfig::seed() const { return param(params, "seed").get<std::uint64_t>(); }

std::string ExperimentConfig::hash() const {
    const std::string text = to_string(subcommand) + "\n" + params.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double ExperimentConfig::number(const std::string& key) const { return param(params, key).get<double>(); }
int ExperimentConfig::integer(const std::string& key) const { return param(params, key).get<int>(); }
std::string ExperimentConfig::text(const std::string& key) const { return param(params, key).get<std::string>(); }
bool ExperimentConfig::flag(const std::string& key) const { return param(params, key).get<bool>(); }
std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
    return param(params, key).get<std::vector<double>>();
}
std::vector<int> ExperimentConfig::integers(const std::string& key) const {
    return param(params, key).get<std::vector<int>>();
}

json read_config_document(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail("cannot read config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    const std::string body = ss.str();
    if (path.extension() == ".json") {
        try {
            return json::parse(body);
        } catch (const json::parse_error& e) {
            fail(path.string() + ": " + e.what());
        }
    }
    try {
        const auto tbl = toml::parse(body, path.string());
        return convert(tbl, "");
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << path.string() << ':' << e.source().begin.line << ": " << e.description();
        fail(msg.str());
    }
}

ExperimentConfig parse_config(Subcommand cmd, const json& document, std::optional<std::uint64_t> seed_override) {
    const std::string name = to_string(cmd);
    expect(document.is_object(), "config must be a table");
    for (auto it = document.begin(); it != document.end(); ++it)
        expect(it.key() == name, "unexpected top-level key '" + it.key() + "' (expected a single [" + name + "] table)");
    expect(document.contains(name), "config has no [" + name + "] table");
    const json& block = document.at(name);
    expect(block.is_object(), "[" + name + "] must be a table");

    const Schema sc = make_schema(cmd);
    for (auto it = block.begin(); it != block.end(); ++it) {
        bool known = false;
        for (const auto& f : sc.fields) known = known || f.name == it.key();
        expect(known, "unknown key '" + it.key() + "' in [" + name + "]");
    }
    ExperimentConfig c;
    c.subcommand = cmd;
    c.params = json::object();
    for (const auto& f : sc.fields) c.params[f.name] = coerce(f, block.contains(f.name) ? block.at(f.name) : f.fallback);
    expect(c.params["seed"].get<long long>() >= 0, "seed must be nonnegative");
    if (seed_override) c.params["seed"] = *seed_override;
    sc.check(c);
    return c;
}

ExperimentConfig load_config(Subcommand cmd, const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    return parse_config(cmd, read_config_document(path), seed_override);
}

ExperimentConfig default_config(Subcommand cmd) {
    return parse_config(cmd, json{{to_string(cmd), json::object()}});
}

}  // namespace mixsob
