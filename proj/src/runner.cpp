#include "mixsob/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mixsob/linear_bn.hpp"
#include "mixsob/mountain_pass.hpp"
#include "mixsob/parallel.hpp"
#include "mixsob/sobolev.hpp"
#include "mixsob/spectral.hpp"

namespace mixsob {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Raised when an iterative stage reports it stopped at its budget.
struct NotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Job {
    const ExperimentConfig& cfg;
    const RunOptions& opt;
    fs::path dir;          // staging directory
    Provenance prov;

    void say(const std::string& line) const {
        if (opt.log) *opt.log << line << std::endl;
    }
    void csv(const std::string& name, const CsvTable& t) const { write_csv(dir / name, prov, t); }
    void json_file(const std::string& name, json body) const { write_json(dir / name, prov, std::move(body)); }
};

MaskPtr build_mask(const ExperimentConfig& c) {
    const auto g = build_grid(c.integer("n"), c.number("L"), c.integer("m"));
    if (c.text("domain") == "box") return mask_box(g, c.numbers("half_widths"));
    return mask_ball(g, std::vector<double>(g.n, 0.0), c.number("radius"));
}

json grid_meta(const MixedForms& f, const ExperimentConfig& c) {
    json d = {{"kind", c.text("domain")}};
    if (c.text("domain") == "box") d["half_widths"] = c.numbers("half_widths");
    else d["radius"] = c.number("radius");
    return {{"n", f.grid().n}, {"L", f.grid().L},  {"m", f.grid().m},
            {"h", f.grid().h}, {"domain", d},       {"interior_nodes", f.size()},
            {"s", f.s()},      {"tail_radius", f.tail_radius()}};
}

void run_eigen(const Job& job) {
    const auto& c = job.cfg;
    const MixedForms f(build_mask(c), c.number("s"));
    EigenOptions eo;
    eo.change_tol = c.number("change_tol");
    eo.residual_tol = c.number("residual_tol");
    eo.max_iterations = c.integer("max_iterations");
    const auto loc = first_eigen_local(f, eo);
    const auto frac = first_eigen_fractional(f, eo);
    const auto mix = first_eigen_mixed(f, eo);
    job.say("lambda local " + format_number(loc.lambda) + ", fractional " + format_number(frac.lambda) + ", mixed " +
            format_number(mix.lambda));
    job.json_file("eigen.json", {{"grid", grid_meta(f, c)},
                                 {"local", to_json(loc)},
                                 {"fractional", to_json(frac)},
                                 {"mixed", to_json(mix)},
                                 {"fractional_below_mixed", frac.lambda < mix.lambda}});
    CsvTable t{{"part", "lambda", "residual", "iters"}, {}};
    for (const auto& [name, r] : {std::pair{"local", &loc}, std::pair{"fractional", &frac}, std::pair{"mixed", &mix}})
        t.add({name, format_number(r->lambda), format_number(r->residual), std::to_string(r->iterations)});
    job.csv("eigen.csv", t);
}

void run_sobolev_scan(const Job& job) {
    const auto& c = job.cfg;
    ConcentrationReport rep;
    if (c.text("mode") == "spread") {
        rep = spread_scan(c.integer("n"), c.number("s"), c.numbers("parameters"));
    } else {
        rep = shrink_scan(c.integer("n"), c.number("L"), c.integer("m"), c.number("radius"), c.number("s"),
                          [](std::span<const double> x) {
                              double r2 = 0;
                              for (double v : x) r2 += v * v;
                              return r2 < 1 ? (1 - r2) * (1 - r2) : 0.0;
                          },
                          c.numbers("parameters"));
    }
    if (rep.fit) job.say("fitted exponent " + format_number(rep.fit->slope) + " (2s-2 = " + format_number(2 * c.number("s") - 2) + ")");
    else job.say("no fit: " + rep.note);
    job.csv("scan.csv", scan_table(rep));
    job.json_file("summary.json", {{"scan", to_json(rep)}, {"expected_exponent", 2 * c.number("s") - 2}});
}

void run_bn_linear(const Job& job) {
    const auto& c = job.cfg;
    const MixedForms f(build_mask(c), c.number("s"));
    const auto mix = first_eigen_mixed(f);
    auto lambdas = c.numbers("lambdas");
    if (lambdas.empty()) lambdas = lambda_grid(mix.lambda, c.integer("samples"), c.number("factor"));
    CurveOptions o;
    o.keep_minimizers = true;
    o.flow.max_iterations = c.integer("max_iterations");
    o.plateau_tol = c.number("plateau_tol");
    std::optional<double> sharp;
    if (c.text("plateau_reference") == "sharp") {
        sharp = estimate_sharp_constant(f).value;
        o.plateau_reference = sharp;
    }
    const auto curve = trace_curve(f, lambdas, o);
    std::vector<double> residuals;
    std::string stalled;
    for (std::size_t i = 0; i < curve.samples.size(); ++i) {
        const auto& smp = curve.samples[i];
        residuals.push_back(stationarity_residual(f, curve.minimizers[i], smp.lambda, smp.value, c.seed()));
        if (!smp.converged) stalled += (stalled.empty() ? "" : ", ") + format_number(smp.lambda);
    }
    if (!stalled.empty()) throw NotConverged("quotient flow hit its iteration budget at lambda = " + stalled);

    json summary = to_json(curve);
    summary["grid"] = grid_meta(f, c);
    summary["sharp_estimate"] = sharp ? json(*sharp) : json();
    if (c.flag("extract")) {
        summary["extraction"] = nullptr;
        for (std::size_t i = 0; i < curve.samples.size(); ++i) {
            const auto& smp = curve.samples[i];
            if (smp.lambda <= curve.lambda_1s || smp.lambda >= curve.lambda_1 || smp.value <= 0) continue;
            summary["extraction"] = to_json(extract_solution(smp.value, curve.minimizers[i], f, smp.lambda, c.seed()));
            break;
        }
    }
    job.say("lambda_1s " + format_number(curve.lambda_1s) + ", lambda_1 " + format_number(curve.lambda_1));
    job.csv("bn-linear.csv", curve_table(curve, residuals));
    job.json_file("summary.json", std::move(summary));
}

std::vector<double> eps_grid(const ExperimentConfig& c) {
    return dyadic_grid(c.integer("eps_k_first"), c.integer("eps_k_last"), c.integer("eps_k_step"));
}

void run_bn_superlinear(const Job& job) {
    const auto& c = job.cfg;
    DichotomyOptions o;
    o.r = c.number("r");
    o.lambda_max = c.number("lambda_max");
    o.bisection_tol = c.number("bisection_tol");
    o.discard_largest = c.integer("discard_largest");
    const auto rep = dichotomy_scan(c.number("s"), c.integer("n"), c.number("p"), eps_grid(c), c.numbers("lambdas"), o);
    json summary = to_json(rep);
    job.say(rep.exps.case1 ? std::string("case 1, all witnessed: ") + (rep.all_witnessed ? "yes" : "no")
                           : "case 2, lambda_0 " + (rep.lambda0 ? format_number(*rep.lambda0) : std::string("none")));
    if (c.flag("solve")) {
        const MixedForms f(build_mask(c), c.number("s"));
        SuperlinearOptions so;
        so.seed = c.seed();
        const auto sol = solve_superlinear(f, c.number("solve_lambda"), c.number("p"), so);
        if (!sol.converged) throw NotConverged("superlinear solver hit its iteration budget");
        summary["grid_solution"] = {{"grid", grid_meta(f, c)},
                                    {"solution", to_json(sol.solution)},
                                    {"energy", sol.energy},
                                    {"level", sol.level},
                                    {"iterations", sol.iterations},
                                    {"below_threshold", sol.energy < threshold(c.integer("n"))}};
    }
    job.csv("dichotomy.csv", dichotomy_table(rep));
    job.json_file("summary.json", std::move(summary));
}

void run_competitor_scan(const Job& job) {
    const auto& c = job.cfg;
    const auto comps = competitor_sweep(c.number("s"), c.integer("n"), eps_grid(c), c.number("r"));
    const auto ps = c.numbers("p_values");
    std::vector<double> eps, excess;
    for (const auto& k : comps) {
        eps.push_back(k.eps);
        excess.push_back(k.A - talenti_constant(k.profile.n));
    }
    json summary = {{"kappa_fit", to_json(fit_log_log(eps, excess, 2))}};
    for (double p : ps) {
        std::vector<double> moments;
        for (const auto& k : comps) moments.push_back(competitor_lp(k, p));
        summary["moments"].push_back({{"p", p},
                                      {"exponents", to_json(exponents(c.number("s"), c.integer("n"), p))},
                                      {"fit", to_json(fit_log_log(eps, moments, 2))}});
    }
    job.csv("competitors.csv", competitor_table(comps, ps));
    job.json_file("summary.json", std::move(summary));
}

std::string quote(const fs::path& p) {
    std::string s = p.string(), out = "'";
    for (char ch : s) out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
    return out + "'";
}

Check determinism_check(const Job& job, const RunOptions& opt) {
    // The rerun reads the canonical config this run wrote, so it hashes to
    // the same directory name under its own scratch root.
    const fs::path scratch = opt.out_root / (".rerun-" + job.cfg.hash());
    fs::remove_all(scratch);
    Check chk{"reproduce-all twice from a fresh state gives bit-identical outputs", false, ""};
    if (opt.rerun_executable) {
        const std::string cmd = quote(*opt.rerun_executable) + " reproduce-all --config " + quote(job.dir / "config.json") +
                                " --out " + quote(scratch) + " --no-determinism-check > " + quote(opt.out_root / (".rerun-" + job.cfg.hash() + ".log")) + " 2>&1";
        const int rc = std::system(cmd.c_str());
        fs::remove(opt.out_root / (".rerun-" + job.cfg.hash() + ".log"));
        if (rc == -1 || !fs::exists(scratch / ("reproduce-all-" + job.cfg.hash()))) {
            chk.detail = "rerun produced no output (status " + std::to_string(rc) + ")";
            fs::remove_all(scratch);
            return chk;
        }
    } else {
        RunOptions again = opt;
        again.out_root = scratch;
        again.check_determinism = false;
        again.log = nullptr;
        run(job.cfg, again);
    }
    const auto diff = compare_output_trees(job.dir, scratch / ("reproduce-all-" + job.cfg.hash()));
    fs::remove_all(scratch);
    chk.passed = diff.empty();
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(job.dir))
        if (e.is_regular_file() && !volatile_output(e.path())) ++files;
    if (diff.empty()) {
        chk.detail = std::to_string(files) + " files identical";
    } else {
        chk.detail = std::to_string(diff.size()) + " files differ:";
        for (const auto& d : diff) chk.detail += " " + d;
    }
    return chk;
}

void run_reproduce(const Job& job, RunOutcome& out) {
    auto rep = run_acceptance(job.cfg, job.dir, job.opt.log);
    std::ostringstream table;
    for (const auto& c : rep.criteria) table << format_criterion(c) << '\n';
    if (job.opt.check_determinism) {
        job.say("criterion 10: repeating the run");
        const auto t0 = std::chrono::steady_clock::now();
        auto chk = determinism_check(job, job.opt);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        job.json_file("determinism.json", {{"passed", chk.passed}, {"detail", chk.detail}, {"seconds", secs}});
        table << (chk.passed ? "[PASS] " : "[FAIL] ") << "10. Determinism (" << format_number(secs) << " s)\n    "
              << (chk.passed ? "ok   " : "FAIL ") << chk.name << ": " << chk.detail << '\n';
        out.determinism = chk;
    }
    std::ofstream(job.dir / "report.txt", std::ios::binary) << table.str();
    const bool ok = rep.all_passed() && (!out.determinism || out.determinism->passed);
    out.acceptance = std::move(rep);
    if (!ok) {
        out.exit_code = exit_criteria_failed;
        out.message = "one or more acceptance criteria failed";
    }
}

}  // namespace

fs::path resolve_config_path(Subcommand cmd, const fs::path& path) {
    if (fs::is_directory(path)) return path / (to_string(cmd) + ".toml");
    return path;
}

RunOutcome run(Subcommand cmd, const fs::path& config_path, const RunOptions& options) {
    try {
        return run(load_config(cmd, resolve_config_path(cmd, config_path), options.seed), options);
    } catch (const ConfigError& e) {
        return {exit_config, {}, std::string("config error: ") + e.what(), {}, {}};
    }
}

RunOutcome run(const ExperimentConfig& config, const RunOptions& options) {
    RunOutcome out;
    const bool root_existed = fs::exists(options.out_root);
    if (options.threads) set_thread_count(*options.threads);
    const std::string name = to_string(config.subcommand) + "-" + config.hash();
    const fs::path final_dir = options.out_root / name;
    const fs::path staging = options.out_root / ("." + name + ".partial");
    Job job{config, options, staging, {"mixsob", tool_version(), to_string(config.subcommand), config.hash()}};
    try {
        fs::remove_all(staging);
        fs::create_directories(staging);
        std::ofstream(staging / "config.json", std::ios::binary)
            << json{{to_string(config.subcommand), config.params}}.dump(2) << '\n';
        switch (config.subcommand) {
        case Subcommand::eigen: run_eigen(job); break;
        case Subcommand::sobolev_scan: run_sobolev_scan(job); break;
        case Subcommand::bn_linear: run_bn_linear(job); break;
        case Subcommand::bn_superlinear: run_bn_superlinear(job); break;
        case Subcommand::competitor_scan: run_competitor_scan(job); break;
        case Subcommand::reproduce_all: run_reproduce(job, out); break;
        }
        fs::remove_all(final_dir);
        fs::rename(staging, final_dir);
        out.directory = final_dir;
        return out;
    } catch (const ConfigError& e) {
        out = {exit_config, {}, std::string("config error: ") + e.what(), {}, {}};
    } catch (const InvalidArgument& e) {
        out = {exit_config, {}, std::string("invalid parameters: ") + e.what(), {}, {}};
    } catch (const ConvergenceError& e) {
        out = {exit_not_converged, {}, std::string("not converged: ") + e.what(), {}, {}};
    } catch (const NotConverged& e) {
        out = {exit_not_converged, {}, std::string("not converged: ") + e.what(), {}, {}};
    } catch (const std::exception& e) {
        out = {exit_io, {}, std::string("error: ") + e.what(), {}, {}};
    }
    std::error_code ec;
    fs::remove_all(staging, ec);
    if (!root_existed && fs::is_empty(options.out_root, ec)) fs::remove(options.out_root, ec);
    return out;
}

}  // namespace mixsob
