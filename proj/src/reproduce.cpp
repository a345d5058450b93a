#include "mixsob/reproduce.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "mixsob/linear_bn.hpp"
#include "mixsob/mountain_pass.hpp"
#include "mixsob/sobolev.hpp"
#include "mixsob/spectral.hpp"

namespace mixsob {

namespace fs = std::filesystem;
using nlohmann::json;

bool CriterionResult::numeric_pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

bool CriterionResult::within_budget() const { return budget_seconds <= 0.0 || seconds < budget_seconds; }

bool AcceptanceReport::all_passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed(); });
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double x, int digits = 6) {
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

struct Context {
    const ExperimentConfig& cfg;
    fs::path dir;
    Provenance prov;
    std::ostream* log;
    std::map<int, double> sharp;   // m -> sharp-constant estimate on the unit ball, s = 1/2

    void say(const std::string& line) const {
        if (log) *log << line << std::endl;
    }
    void csv(const std::string& name, const CsvTable& t) const { write_csv(dir / name, prov, t); }
};

MixedForms unit_ball(int m, double s) { return MixedForms(mask_ball(build_grid(3, 1.5, m), {0, 0, 0}, 1.0), s); }

Check check(std::string name, bool ok, std::string detail) { return {std::move(name), ok, std::move(detail)}; }

PointFunction bump() {
    return [](std::span<const double> x) {
        double r2 = 0;
        for (double v : x) r2 += v * v;
        return r2 < 1 ? (1 - r2) * (1 - r2) : 0.0;
    };
}

CriterionResult talenti_cross_validation(Context& ctx) {
    CriterionResult c{1, "Talenti constant: closed form, quadrature and reciprocal formula", {}, {}, 0, 5, {}};
    const auto t0 = Clock::now();
    const double S = talenti_constant(3);
    const double Q = aubin_talenti_quotient(3);
    const double prod = S * reciprocal_talenti_formula(3);
    const double rel = std::abs(Q - S) / S;
    c.seconds = since(t0);
    c.checks.push_back(check("quadrature quotient vs S_3", rel <= 1e-3, "rel " + num(rel, 3) + " <= 1e-3"));
    c.checks.push_back(
        check("S_3 times reciprocal formula", std::abs(prod - 1) <= 1e-10, "|prod - 1| = " + num(std::abs(prod - 1), 3)));
    c.info.push_back("S_3 = " + num(S, 13) + ", quadrature " + num(Q, 13) + ", reciprocal formula " +
                     num(reciprocal_talenti_formula(3), 10));
    c.data = {{"talenti", S}, {"quadrature", Q}, {"reciprocal_formula", reciprocal_talenti_formula(3)}, {"product", prod}};
    for (int n : {4, 5}) {
        const double Sn = talenti_constant(n), Qn = aubin_talenti_quotient(n);
        c.info.push_back("n=" + std::to_string(n) + ": rel " + num(std::abs(Qn - Sn) / Sn, 3));
        c.data["higher"].push_back({{"n", n}, {"talenti", Sn}, {"quadrature", Qn}});
    }
    return c;
}

CriterionResult scaling_law(Context& ctx) {
    CriterionResult c{2, "Gagliardo energy under u_k rescaling equals k^(2s-2)", {}, {}, 0, 10, {}};
    const auto t0 = Clock::now();
    const int m = ctx.cfg.integer("scaling_m");
    double worst = 0.0;
    for (double s : {0.25, 0.5, 0.75}) {
        const auto rep = shrink_scan(3, 1.5, m, 1.0, s, bump(), {1, 2, 4, 8});
        ctx.csv("scaling-s" + format_number(s) + ".csv", scan_table(rep));
        c.data["scans"].push_back(to_json(rep));
        for (std::size_t i = 1; i <= 2; ++i) {
            const double k = rep.samples[i].parameter;
            const double ratio = rep.samples[i].gagliardo / rep.samples[0].gagliardo;
            const double err = std::abs(ratio - std::pow(k, 2 * s - 2));
            worst = std::max(worst, err);
            c.checks.push_back(check("s=" + num(s) + " k=" + num(k), err <= 1e-10, "|ratio - k^(2s-2)| = " + num(err, 3)));
        }
    }
    c.seconds = since(t0);
    c.data["worst_error"] = worst;
    return c;
}

CriterionResult sharp_limit(Context& ctx) {
    CriterionResult c{3, "Spread Aubin-Talenti scan at n=3, s=0.5 approaches S_3 with excess exponent -1", {}, {}, 0, 60, {}};
    const auto ts = ctx.cfg.numbers("spread_t");
    const auto t0 = Clock::now();
    const auto rep = spread_scan(3, 0.5, ts);
    c.seconds = since(t0);
    ctx.csv("spread-n3-s0.5.csv", scan_table(rep));
    c.data["target"] = to_json(rep);
    const bool finite = std::all_of(rep.samples.begin(), rep.samples.end(), [](const auto& smp) { return smp.finite; });
    c.checks.push_back(check("quotients finite and strictly above S_3", finite && rep.above_talenti,
                             finite ? "" : "[U]_s is infinite in R^3 for s <= 1/2; every sample diverges"));
    c.checks.push_back(check("fitted excess exponent -1 +- 0.1", rep.fit && std::abs(rep.fit->slope + 1) <= 0.1,
                             rep.fit ? "slope " + num(rep.fit->slope) : "no fit: " + rep.note));

    // Where the seminorm is finite the same scan recovers 2s - 2.
    auto extra = [&](int n, double s) {
        const auto t1 = Clock::now();
        const auto r = spread_scan(n, s, ts);
        ctx.csv("spread-n" + std::to_string(n) + "-s" + format_number(s) + ".csv", scan_table(r));
        c.data["finite_cases"].push_back(to_json(r));
        std::string line = "n=" + std::to_string(n) + " s=" + num(s) + ": ";
        if (r.fit)
            line += "slope " + num(r.fit->slope, 8) + " (target " + num(2 * s - 2) + "), limit " + num(r.limit_estimate, 10) +
                    " vs S_n " + num(talenti_constant(n), 10) + (r.above_talenti ? ", all above S_n" : ", NOT all above S_n");
        else
            line += "no fit: " + r.note;
        c.info.push_back(line);
        ctx.say("  spread n=" + std::to_string(n) + " s=" + num(s) + " took " + num(since(t1), 3) + " s");
    };
    extra(3, 0.75);
    for (double s : {0.25, 0.5, 0.75}) extra(4, s);
    return c;
}

CriterionResult non_attainment(Context& ctx) {
    CriterionResult c{4, "Discrete sharp constant decreases in m, stays above S_3 and concentrates", {}, {}, 0, 180, {}};
    const double S = talenti_constant(3);
    const auto ms = ctx.cfg.integers("sharp_m");
    CsvTable t{{"m", "h", "value", "ratio_to_talenti", "participation_initial", "participation_final",
                "participation_drop", "iterations"},
               {}};
    const auto t0 = Clock::now();
    std::vector<double> values;
    for (int m : ms) {
        const auto f = unit_ball(m, 0.5);
        const auto est = estimate_sharp_constant(f);
        values.push_back(est.value);
        ctx.sharp[m] = est.value;
        t.add({std::to_string(m), format_number(f.grid().h), format_number(est.value), format_number(est.value / S),
               format_number(est.participation_history.front()), format_number(est.participation_history.back()),
               format_number(est.participation_drop), std::to_string(est.iterations)});
        c.checks.push_back(check("m=" + std::to_string(m) + " above S_3", est.value > S, num(est.value) + " > " + num(S)));
        c.checks.push_back(check("m=" + std::to_string(m) + " participation drop >= 30%", est.participation_drop >= 0.3,
                                 num(100 * est.participation_drop, 4) + "%"));
        c.info.push_back("m=" + std::to_string(m) + ": " + num(est.value) + " = " + num(est.value / S, 4) +
                         " S_3 (reference band [0.85, 1.3] S_3 " +
                         (est.value >= 0.85 * S && est.value <= 1.3 * S ? "met" : "not met") + ")");
        ctx.say("  sharp constant m=" + std::to_string(m) + ": " + num(est.value));
    }
    c.seconds = since(t0);
    bool dec = true;
    for (std::size_t i = 1; i < values.size(); ++i) dec = dec && values[i] < values[i - 1];
    c.checks.insert(c.checks.begin(), check("strictly decreasing in m", dec, ""));
    ctx.csv("sharp-constant.csv", t);
    c.data["values"] = values;
    c.data["m"] = ms;
    return c;
}

CriterionResult eigen_structure(Context& ctx) {
    CriterionResult c{5, "First eigenvalues on the unit ball (n=3, s=0.5)", {}, {}, 0, 120, {}};
    const int m = ctx.cfg.integer("eigen_m");
    const auto t0 = Clock::now();
    const auto f = unit_ball(m, 0.5);
    const auto loc = first_eigen_local(f);
    const auto frac = first_eigen_fractional(f);
    const auto mix = first_eigen_mixed(f);
    c.seconds = since(t0);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double rel = std::abs(loc.lambda - pi2) / pi2;
    c.checks.push_back(check("local eigenvalue within 2% of pi^2", rel <= 0.02, num(loc.lambda, 8) + ", rel " + num(rel, 3)));
    c.checks.push_back(check("lambda_1s < lambda_1", frac.lambda < mix.lambda, num(frac.lambda, 8) + " < " + num(mix.lambda, 8)));
    c.checks.push_back(check("lambda_1 >= local + lambda_1s - 1e-6", mix.lambda >= loc.lambda + frac.lambda - 1e-6,
                             num(mix.lambda, 10) + " >= " + num(loc.lambda + frac.lambda, 10)));
    c.data = {{"m", m}, {"local", to_json(loc)}, {"fractional", to_json(frac)}, {"mixed", to_json(mix)}};
    return c;
}

CriterionResult linear_curve(Context& ctx) {
    CriterionResult c{6, "Linear critical problem: quotient curve, lambda* and extraction (m=" +
                             std::to_string(ctx.cfg.integer("curve_m")) + ")",
                      {}, {}, 0, 600, {}};
    const int m = ctx.cfg.integer("curve_m");
    const int samples = ctx.cfg.integer("curve_samples");
    const auto t0 = Clock::now();
    const auto f = unit_ball(m, 0.5);
    if (!ctx.sharp.count(m)) ctx.sharp[m] = estimate_sharp_constant(f).value;
    const double reference = ctx.sharp.at(m);
    const auto mix = first_eigen_mixed(f);
    const auto grid = lambda_grid(mix.lambda, samples);
    const double delta = grid[1] - grid[0];
    CurveOptions o;
    o.keep_minimizers = true;
    o.plateau_reference = reference;
    const auto curve = trace_curve(f, grid, o);
    ctx.say("  curve traced");

    std::vector<double> residuals;
    for (std::size_t i = 0; i < curve.samples.size(); ++i)
        residuals.push_back(stationarity_residual(f, curve.minimizers[i], curve.samples[i].lambda, curve.samples[i].value, ctx.cfg.seed()));

    c.checks.push_back(check("nonincreasing (tol 1e-6)", curve.max_increase <= 1e-6, "max increase " + num(curve.max_increase, 3)));
    double worst = 0.0;
    int on_plateau = 0;
    for (const auto& smp : curve.samples)
        if (smp.lambda <= curve.lambda_1s) {
            worst = std::max(worst, std::abs(smp.value - reference));
            ++on_plateau;
        }
    c.checks.push_back(check("plateau within 2% S_3 of the m-matched estimate for lambda <= lambda_1s",
                             on_plateau > 0 && worst <= curve.plateau_tol,
                             "reference " + num(reference) + ", worst deviation " + num(worst) + " vs tol " +
                                 num(curve.plateau_tol) + " over " + std::to_string(on_plateau) + " samples"));
    const bool crossing = curve.zero_crossing && std::abs(*curve.zero_crossing - curve.lambda_1) <= 0.02 * curve.lambda_1;
    c.checks.push_back(check("zero crossing within 2% of lambda_1", crossing,
                             (curve.zero_crossing ? num(*curve.zero_crossing, 8) : std::string("none")) + " vs " +
                                 num(curve.lambda_1, 8)));
    const bool star = curve.lambda_star && *curve.lambda_star >= curve.lambda_1s - delta && *curve.lambda_star < curve.lambda_1;
    c.checks.push_back(check("lambda* in [lambda_1s - delta, lambda_1)", star,
                             (curve.lambda_star ? num(*curve.lambda_star) : std::string("none")) + " vs [" +
                                 num(curve.lambda_1s - delta) + ", " + num(curve.lambda_1) + ")"));

    json extracted;
    bool extracted_ok = false;
    std::string extract_detail = "no sample with lambda_1s < lambda < lambda_1";
    for (std::size_t i = 0; i < curve.samples.size(); ++i) {
        const auto& smp = curve.samples[i];
        if (smp.lambda <= curve.lambda_1s || smp.lambda >= curve.lambda_1 || smp.value <= 0) continue;
        const auto sol = extract_solution(smp.value, curve.minimizers[i], f, smp.lambda, ctx.cfg.seed());
        extracted_ok = sol.residual < 1e-5 && sol.min_value >= 0.0 && std::isfinite(sol.max_value);
        extract_detail = "lambda " + num(smp.lambda) + ", weak residual " + num(sol.residual, 3) + ", min " +
                         num(sol.min_value, 3) + ", max " + num(sol.max_value);
        extracted = to_json(sol);
        extracted.erase("u");
        break;
    }
    c.checks.push_back(check("extraction in the window, weak residual < 1e-5", extracted_ok, extract_detail));
    int beyond = 0, rejected = 0;
    for (std::size_t i = 0; i < curve.samples.size(); ++i) {
        if (curve.samples[i].lambda < curve.lambda_1) continue;
        ++beyond;
        try {
            extract_solution(curve.samples[i].value, curve.minimizers[i], f, curve.samples[i].lambda);
        } catch (const InvalidArgument&) {
            ++rejected;
        }
    }
    c.checks.push_back(check("extraction errors for lambda >= lambda_1", beyond > 0 && rejected == beyond,
                             std::to_string(rejected) + "/" + std::to_string(beyond) + " rejected"));
    c.seconds = since(t0);
    c.info.push_back("lambda_1s " + num(curve.lambda_1s, 8) + ", lambda_1 " + num(curve.lambda_1, 8) + ", grid step " + num(delta));
    c.info.push_back("S(lambda) from " + num(curve.samples.front().value) + " at lambda " + num(curve.samples.front().lambda) +
                     " to " + num(curve.samples.back().value) + " at lambda " + num(curve.samples.back().lambda));
    ctx.csv("bn-linear.csv", curve_table(curve, residuals));
    c.data = to_json(curve);
    c.data["sharp_reference"] = reference;
    c.data["grid_step"] = delta;
    c.data["extraction"] = extracted;
    return c;
}

CriterionResult path_closed_form(Context& ctx) {
    CriterionResult c{7, "Path maximum at lambda=0 equals A^(n/2)/n; threshold at A=S_3", {}, {}, 0, 1, {}};
    const int trials = ctx.cfg.integer("random_trials");
    std::mt19937_64 rng(ctx.cfg.seed());
    std::uniform_real_distribution<double> U(1.0, 10.0);
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int k = 0; k < trials; ++k) {
        const double A = U(rng), C = U(rng);
        for (int n : {3, 4, 5}) {
            const auto pm = sup_over_path(A, C, 0.0, 1.5, n);
            worst = std::max(worst, std::abs(pm.value / (std::pow(A, 0.5 * n) / n) - 1));
        }
    }
    const double at_S = sup_over_path(talenti_constant(3), 1.0, 0.0, 2.0, 3).value;
    const double trel = std::abs(at_S / threshold(3) - 1);
    c.seconds = since(t0);
    c.checks.push_back(check(std::to_string(trials) + " random A, n in {3,4,5}, rel err <= 1e-12", worst <= 1e-12, "worst " + num(worst, 3)));
    c.checks.push_back(check("threshold(3) equals the path maximum at A = S_3", trel <= 1e-12, "rel " + num(trel, 3)));
    c.info.push_back("threshold(3) = " + num(threshold(3), 12));
    c.data = {{"trials", trials}, {"worst_rel_error", worst}, {"threshold3", threshold(3)}, {"sup_at_S3", at_S}};
    return c;
}

CriterionResult dichotomy(Context& ctx) {
    CriterionResult c{8, "Mountain-pass dichotomy at s=0.25, n=3 (p=4 and p=2)", {}, {}, 0, 120, {}};
    const auto eps = dyadic_grid(ctx.cfg.integer("eps_k_first"), ctx.cfg.integer("eps_k_last"), ctx.cfg.integer("eps_k_step"));
    const std::vector<double> lambdas{0.01, 0.1, 1.0, 10.0};
    const auto t0 = Clock::now();
    const auto comps = competitor_sweep(0.25, 3, eps, 0.5);
    ctx.say("  competitors done");
    const auto case1 = dichotomy_scan(comps, 4.0, lambdas);
    const auto case2 = dichotomy_scan(comps, 2.0, lambdas);
    c.seconds = since(t0);
    ctx.csv("competitors.csv", competitor_table(comps, {2.0, 4.0}));
    ctx.csv("dichotomy-p4.csv", dichotomy_table(case1));
    ctx.csv("dichotomy-p2.csv", dichotomy_table(case2));

    std::string wit;
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        wit += (i ? ", " : "") + num(lambdas[i]) + ":" + (case1.witness_eps[i] ? num(*case1.witness_eps[i], 3) : "none");
    c.checks.push_back(check("p=4: sub-threshold witness for every lambda", case1.exps.case1 && case1.all_witnessed, "eps " + wit));
    c.checks.push_back(check("p=2: bisection lambda_0 with verdict flip", case2.lambda0.has_value() && case2.verdict_flips,
                             case2.lambda0 ? "lambda_0 " + num(*case2.lambda0) + " at eps " + num(case2.lambda0_eps, 3) +
                                                 ", sup " + num(case2.sup_below_lambda0, 8) + " / " + num(case2.sup_above_lambda0, 8)
                                           : case2.note));
    const auto& kf = case2.kappa_fit;
    const auto& bf = case2.beta_fit;
    c.checks.push_back(check("kappa fit 1 +- 0.15", kf && std::abs(kf->slope - 1.0) <= 0.15, kf ? num(kf->slope, 6) : "no fit"));
    c.checks.push_back(check("beta fit (p=2) 1.5 +- 0.15", bf && std::abs(bf->slope - 1.5) <= 0.15, bf ? num(bf->slope, 6) : "no fit"));
    if (case1.beta_fit) c.info.push_back("p=4 beta fit " + num(case1.beta_fit->slope, 6) + " (exponent 0.5)");
    c.data = {{"case1", to_json(case1)}, {"case2", to_json(case2)}, {"eps", eps}};
    return c;
}

CriterionResult energy_identities(Context& ctx) {
    CriterionResult c{9, "Energies J and F agree on nonnegative functions; J(t u) -> 0 monotonically", {}, {}, 0, 5, {}};
    const auto t0 = Clock::now();
    const auto f = unit_ball(ctx.cfg.integer("energy_m"), 0.25);
    const double lambda = 2.0, p = 2.0;
    std::mt19937_64 rng(ctx.cfg.seed());
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> noise(f.size());
    for (auto& v : noise) v = U(rng);
    const std::vector<std::pair<std::string, GridFunction>> probes{
        {"gaussian", sample(f.mask(), [](std::span<const double> x) { return std::exp(-4 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); })},
        {"bump", sample(f.mask(), bump())},
        {"constant", sample(f.mask(), [](std::span<const double>) { return 1.0; })},
        {"random", GridFunction(f.mask(), noise)},
    };
    double worst = 0.0;
    for (const auto& [name, u] : probes) {
        const double j = j_energy(f, u, lambda, p), fe = f_energy(f, u, lambda, p);
        worst = std::max(worst, std::abs(j - fe) / std::max(1.0, std::abs(j)));
        c.data["identity"].push_back({{"probe", name}, {"J", j}, {"F", fe}});
    }
    c.checks.push_back(check("J = F on nonnegative probes (rel <= 1e-15)", worst <= 1e-15, "worst " + num(worst, 3)));

    const auto& u = probes.front().second;
    bool positive = true, decreasing = true;
    double prev = std::numeric_limits<double>::infinity(), first = 0.0, last = 0.0;
    for (int k = 0; k <= 40; ++k) {
        const double t = std::ldexp(1.0, -k);
        const double j = j_energy(f, u.scaled(t), lambda, p);
        if (k == 0) first = j;
        positive = positive && j > 0.0;
        decreasing = decreasing && j < prev;
        prev = last = j;
        c.data["sweep"].push_back({{"t", t}, {"J", j}});
    }
    c.seconds = since(t0);
    c.checks.push_back(check("J(t u) > 0 and strictly decreasing for t = 2^-k, k = 0..40", positive && decreasing, ""));
    c.checks.push_back(check("J(2^-40 u) / J(u) < 1e-20", last / first < 1e-20, num(last / first, 3)));
    return c;
}

void write_acceptance_table(const Context& ctx, const AcceptanceReport& rep) {
    CsvTable t{{"criterion", "title", "numeric_verdict", "checks_passed", "checks_total"}, {}};
    for (const auto& c : rep.criteria) {
        const auto ok = std::count_if(c.checks.begin(), c.checks.end(), [](const Check& k) { return k.passed; });
        t.add({std::to_string(c.id), "\"" + c.title + "\"", c.numeric_pass() ? "pass" : "fail", std::to_string(ok),
               std::to_string(c.checks.size())});
    }
    ctx.csv("acceptance.csv", t);
}

}  // namespace

AcceptanceReport run_acceptance(const ExperimentConfig& config, const fs::path& dir, std::ostream* log) {
    require(config.subcommand == Subcommand::reproduce_all, "acceptance runs from a reproduce-all config");
    fs::create_directories(dir);
    Context ctx{config, dir, {"mixsob", tool_version(), to_string(config.subcommand), config.hash()}, log, {}};
    AcceptanceReport rep;
    using Step = CriterionResult (*)(Context&);
    for (Step step : {talenti_cross_validation, scaling_law, sharp_limit, non_attainment, eigen_structure, linear_curve,
                      path_closed_form, dichotomy, energy_identities}) {
        auto c = step(ctx);
        ctx.say(format_criterion(c));
        json body = {{"criterion", c.id}, {"title", c.title}, {"numeric_pass", c.numeric_pass()}, {"data", c.data}};
        for (const auto& k : c.checks) body["checks"].push_back({{"name", k.name}, {"passed", k.passed}, {"detail", k.detail}});
        body["info"] = c.info;
        char name[32];
        std::snprintf(name, sizeof name, "criterion-%02d.json", c.id);
        write_json(dir / name, ctx.prov, body);
        rep.criteria.push_back(std::move(c));
    }
    write_acceptance_table(ctx, rep);
    json rt = json::array();
    for (const auto& c : rep.criteria)
        rt.push_back({{"criterion", c.id}, {"seconds", c.seconds}, {"budget_seconds", c.budget_seconds},
                      {"within_budget", c.within_budget()}});
    write_json(dir / "runtime.json", ctx.prov, {{"criteria", rt}});
    return rep;
}

bool volatile_output(const fs::path& name) {
    const auto f = name.filename().string();
    return f == "runtime.json" || f == "determinism.json" || f == "report.txt";
}

std::vector<std::string> compare_output_trees(const fs::path& a, const fs::path& b) {
    auto listing = [](const fs::path& root) {
        std::map<std::string, fs::path> files;
        if (!fs::exists(root)) return files;
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file() && !volatile_output(e.path()))
                files[fs::relative(e.path(), root).generic_string()] = e.path();
        return files;
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream is(p, std::ios::binary);
        std::ostringstream ss;
        ss << is.rdbuf();
        return ss.str();
    };
    const auto fa = listing(a), fb = listing(b);
    std::vector<std::string> diff;
    for (const auto& [rel, path] : fa) {
        auto it = fb.find(rel);
        if (it == fb.end() || slurp(path) != slurp(it->second)) diff.push_back(rel);
    }
    for (const auto& [rel, path] : fb)
        if (!fa.count(rel)) diff.push_back(rel);
    return diff;
}

std::string format_criterion(const CriterionResult& c) {
    std::ostringstream os;
    os << (c.passed() ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.title << " (" << num(c.seconds, 3) << " s";
    if (c.budget_seconds > 0) os << " / budget " << num(c.budget_seconds) << " s" << (c.within_budget() ? "" : ", OVER BUDGET");
    os << ")";
    for (const auto& k : c.checks) {
        os << "\n    " << (k.passed ? "ok   " : "FAIL ") << k.name;
        if (!k.detail.empty()) os << ": " << k.detail;
    }
    for (const auto& line : c.info) os << "\n    info " << line;
    return os.str();
}

}  // namespace mixsob
