// Command-line front end: seeded reproducible runs of the sampling, estimation,
// and symmetry suites, with a JSON report plus one CSV table per suite.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "spherefield/config.hpp"

using namespace spherefield;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "spherefield 1.0.0";

struct Suite {
    const RunConfig& cfg;
    json report;
    std::vector<std::string> failures;  // asserted invariants that did not hold

    explicit Suite(const RunConfig& c, const std::string& command) : cfg(c) {
        report["version"] = kVersion;
        report["command"] = command;
        report["seed"] = c.seed;
        report["rp_valid_schedule"] = c.rp_valid;
        report["config"] = json::parse(config_json());
    }

    std::string config_json() const {
        json j;
        std::istringstream echo(echo_config(cfg));
        std::string line;
        while (std::getline(echo, line)) {
            const auto eq = line.find('=');
            j[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
        }
        return j.dump();
    }

    void require(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }

    int finish(const std::string& csv_name, const std::string& csv_text) {
        report["pass"] = failures.empty();
        report["failures"] = failures;
        std::filesystem::create_directories(cfg.out);
        {
            std::ofstream csv(std::filesystem::path(cfg.out) / csv_name);
            csv << csv_text;
        }
        {
            std::ofstream out(std::filesystem::path(cfg.out) / "report.json");
            out << report.dump(2) << "\n";
        }
        std::cout << report.dump(2) << "\n";
        return failures.empty() ? 0 : 1;
    }
};

struct Context {
    CutoffSchedule schedule;
    QuadratureGrid grid;
    Transform tr;
    ZonalKernel kernel;

    Context(const RunConfig& cfg, int n)
        : schedule(cfg.schedule()),
          grid(build_quadrature(cfg.D, cfg.schedule().R(n), cfg.l_max)),
          tr(grid, cfg.l_max),
          kernel(build_kernel_clamped(MollifierSpec::standard_bump(cfg.mollifier_support), cfg.schedule().Lambda(n),
                                      grid.R, grid, cfg.l_max)) {}

    FreeFieldSampler sampler(const RunConfig& cfg) const {
        return FreeFieldSampler(cfg.D, grid.R, cfg.l_max, cfg.k, cfg.seed);
    }
};

SuiteSetup make_setup(const RunConfig& cfg, const Context& ctx) {
    SuiteSetup s;
    s.tr = &ctx.tr;
    s.schedule = ctx.schedule;
    s.n = cfg.n;
    s.mollifier = MollifierSpec::standard_bump(cfg.mollifier_support);
    s.L = cfg.lagrangian(cfg.n);
    s.seed = cfg.seed;
    s.samples = cfg.samples;
    s.workers = cfg.workers;
    s.k = cfg.k;
    return s;
}

/// V+ family of three x_D translates of the configured bump.
std::vector<PulledBackFunctional> bump_family(const RunConfig& cfg, const Transform& tr) {
    std::vector<PulledBackFunctional> family;
    CylindricalFunctional base = cfg.functional();
    if (base.test_functions.empty()) throw Error("rp family: the constant functional has no bump to translate");
    const double radius = base.test_functions[0].radius;
    const double c0 = base.test_functions[0].center(cfg.D - 1);
    // Keep all supports inside the sphere: cap the translate step so the last
    // bump still satisfies the V+ radius condition.
    const double max_center = 0.95 * tr.R() - radius;
    const double step = std::min(1.2 * radius, 0.5 * (max_center - c0));
    if (step <= 0.0) throw Error("rp family: the configured bump does not fit inside the sphere radius");
    for (int j = 0; j < 3; ++j) {
        CylindricalFunctional F = base;
        F.test_functions[0].center(cfg.D - 1) = c0 + j * step;
        family.push_back(pull_back(F, tr, cfg.k));
    }
    return family;
}

int cmd_sample(const RunConfig& cfg) {
    Suite suite(cfg, "sample");
    Context ctx(cfg, cfg.n);
    FreeFieldSampler sampler = ctx.sampler(cfg);
    Eigen::VectorXd neg(cfg.samples), pos(cfg.samples);
    std::ostringstream csv;
    csv.precision(17);
    csv << "index,sobolev_norm_minus_k,sobolev_norm_zero\n";
    parallel_for(static_cast<std::size_t>(cfg.samples), cfg.workers, [&](std::size_t i) {
        SpectralField phi = sampler.fork(i).sample();
        neg(static_cast<int>(i)) = sobolev_norm(phi, -cfg.k);
        pos(static_cast<int>(i)) = sobolev_norm(phi, 0);
    });
    for (long i = 0; i < cfg.samples; ++i) csv << i << "," << neg(i) << "," << pos(i) << "\n";
    const double mean = neg.mean();
    const double se = std::sqrt((neg.array() - mean).square().sum() /
                                (static_cast<double>(cfg.samples) * (cfg.samples - 1.0)));
    suite.report["moment_H_minus_k"] = {{"value", mean}, {"std_error", se}};
    suite.require(std::isfinite(mean), "H^-k moment is finite");
    return suite.finish("sample.csv", csv.str());
}

int cmd_estimate(const RunConfig& cfg) {
    Suite suite(cfg, "estimate");
    Context ctx(cfg, cfg.n);
    PulledBackFunctional F = pull_back(cfg.functional(), ctx.tr, cfg.k);
    ActionEvaluator action(ctx.tr, ctx.kernel, cfg.lagrangian(cfg.n), RegionSpec::full());
    const EstimateReport rep = estimate(F, cfg.n, &action, ctx.sampler(cfg), cfg.samples, cfg.workers);
    suite.report["estimate"] = {{"value", rep.value},   {"std_error", rep.std_error}, {"ess", rep.ess},
                                {"samples", rep.samples}, {"sup_bound", F.sup_bound},   {"n", rep.n}};
    suite.require(std::abs(rep.value) <= F.sup_bound, "|estimate| <= sup bound");
    std::ostringstream csv;
    csv.precision(17);
    csv << "n,value,std_error,ess,samples,sup_bound\n"
        << rep.n << "," << rep.value << "," << rep.std_error << "," << rep.ess << "," << rep.samples << ","
        << F.sup_bound << "\n";
    return suite.finish("estimate.csv", csv.str());
}

int cmd_rp_test(const RunConfig& cfg) {
    Suite suite(cfg, "rp-test");
    if (!cfg.rp_valid)
        std::cerr << "warning: schedule is not RP-valid (M_n R_n^D / Lambda_n does not vanish); running anyway\n";
    Context ctx(cfg, cfg.n);
    SuiteSetup setup = make_setup(cfg, ctx);
    const auto family = bump_family(cfg, ctx.tr);
    const RPGramReport gram = rp_gram(family, setup);
    const RpDeviationReport dev = rp_deviation(family[0], setup);

    suite.report["gram"] = {{"p", gram.p},
                            {"min_eigenvalue", gram.min_eigenvalue},
                            {"max_std_error", gram.max_std_error},
                            {"deviation_bound", gram.deviation_bound},
                            {"collar_excluded", gram.collar_excluded},
                            {"ess", gram.ess}};
    suite.report["deviation"] = {{"value", dev.deviation},
                                 {"bound", dev.bound},
                                 {"std_error", dev.std_error},
                                 {"value_full", dev.value_full},
                                 {"value_restricted", dev.value_restricted}};
    suite.require(gram.min_eigenvalue >= -(gram.deviation_bound + 3.0 * gram.max_std_error),
                  "gram min eigenvalue within the scheduled defect");
    suite.require(dev.deviation <= dev.bound + 3.0 * dev.std_error, "collar deviation within the scheduled bound");

    std::ostringstream csv;
    csv.precision(17);
    csv << "i,j,gram,std_error\n";
    for (int i = 0; i < gram.p; ++i)
        for (int j = 0; j < gram.p; ++j)
            csv << i << "," << j << "," << gram.gram(i, j) << "," << gram.std_errors(i, j) << "\n";
    return suite.finish("rp_gram.csv", csv.str());
}

int cmd_markov_test(const RunConfig& cfg) {
    Suite suite(cfg, "markov-test");
    Context ctx(cfg, cfg.n);
    SuiteSetup setup = make_setup(cfg, ctx);
    // L^2-orthogonal half-space spans stay localized at practical band limits.
    const auto decomp = build_decomposition(ctx.schedule.delta(cfg.n), ctx.schedule.alpha, ctx.grid, cfg.l_max, 0);
    PulledBackFunctional F = pull_back(cfg.functional(), ctx.tr, cfg.k);
    const MarkovReport rep = markov_factorization_check(F, setup, decomp);
    suite.report["markov"] = {{"lhs", rep.lhs},
                              {"rhs", rep.rhs},
                              {"combined_std_error", rep.combined_std_error},
                              {"theta_leg_plus", rep.theta_leg_plus},
                              {"theta_leg_minus", rep.theta_leg_minus},
                              {"theta_leg_std_error", rep.theta_leg_std_error}};
    suite.require(std::abs(rep.lhs - rep.rhs) <= 3.0 * rep.combined_std_error,
                  "factorization LHS = RHS within 3 combined std errors");
    suite.require(std::abs(rep.theta_leg_plus - rep.theta_leg_minus) <= 3.0 * rep.theta_leg_std_error,
                  "theta legs agree within 3 std errors");
    std::ostringstream csv;
    csv.precision(17);
    csv << "lhs,rhs,combined_std_error,theta_leg_plus,theta_leg_minus,theta_leg_std_error\n"
        << rep.lhs << "," << rep.rhs << "," << rep.combined_std_error << "," << rep.theta_leg_plus << ","
        << rep.theta_leg_minus << "," << rep.theta_leg_std_error << "\n";
    return suite.finish("markov.csv", csv.str());
}

int cmd_invariance_test(const RunConfig& cfg) {
    Suite suite(cfg, "invariance-test");
    Context ctx(cfg, cfg.n);
    SuiteSetup setup = make_setup(cfg, ctx);
    PulledBackFunctional F = pull_back(cfg.functional(), ctx.tr, cfg.k);

    std::vector<std::pair<std::string, Eigen::MatrixXd>> rotations;
    auto planar = [&](double g) {
        Eigen::MatrixXd O = Eigen::MatrixXd::Identity(cfg.D + 1, cfg.D + 1);
        // D=1: the full rotation group of the circle. D=2: azimuthal rotations
        // of the grid's (u1, u2) plane.
        const int a = 0, b = 1;
        O(a, a) = std::cos(g);
        O(a, b) = -std::sin(g);
        O(b, a) = std::sin(g);
        O(b, b) = std::cos(g);
        return O;
    };
    rotations.emplace_back("quarter-turn", planar(std::numbers::pi / 2));
    rotations.emplace_back("half-turn", planar(std::numbers::pi));
    rotations.emplace_back("generic", planar(0.7));

    const InvarianceReport rep = rotation_invariance_suite(F, rotations, setup);
    std::ostringstream csv;
    csv.precision(17);
    csv << "label,value,std_error,diff_from_base,combined_std_error,crn_diff\n";
    json rows = json::array();
    for (const auto& row : rep.rows) {
        csv << row.label << "," << row.value << "," << row.std_error << "," << row.diff_from_base << ","
            << row.combined_std_error << "," << row.crn_diff << "\n";
        rows.push_back({{"label", row.label},
                        {"value", row.value},
                        {"std_error", row.std_error},
                        {"diff_from_base", row.diff_from_base},
                        {"combined_std_error", row.combined_std_error},
                        {"crn_diff", row.crn_diff}});
        suite.require(row.crn_diff <= 1e-6, "CRN round trip within 1e-6 (" + row.label + ")");
    }
    suite.report["rows"] = rows;
    suite.require(rep.all_within_3se, "all rotation differences within 3 combined std errors");
    return suite.finish("invariance.csv", csv.str());
}

int cmd_translation_test(const RunConfig& cfg) {
    Suite suite(cfg, "translation-test");
    if (cfg.D != 1) {
        std::cerr << "error: translation-test currently supports D = 1 only\n";
        return 2;
    }
    BumpFunction f;
    f.center = Eigen::VectorXd::Zero(1);
    f.radius = cfg.translation_bump_radius;
    f.amplitude = 1.0;
    const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, cfg.translation_t);

    std::ostringstream csv;
    csv.precision(17);
    csv << "R,l_max,residual\n";
    json rows = json::array();
    std::vector<double> residuals;
    for (double R : cfg.translation_radii) {
        // The pulled-back support shrinks like 1/R; grow the band limit with R.
        const int l_max = std::max(cfg.l_max, static_cast<int>(16.0 * R));
        auto grid = build_quadrature(1, R, l_max);
        Transform tr(grid, l_max);
        const double r = translation_residual(f, t, R, cfg.k, tr);
        residuals.push_back(r);
        csv << R << "," << l_max << "," << r << "\n";
        rows.push_back({{"R", R}, {"l_max", l_max}, {"residual", r}});
    }
    suite.report["rows"] = rows;
    for (std::size_t i = 1; i < residuals.size(); ++i)
        suite.require(residuals[i] < residuals[i - 1], "residual strictly decreasing in R");
    if (residuals.size() >= 2)
        suite.require(residuals.back() < 0.1 * residuals.front(), "final residual below 10% of the first");
    return suite.finish("translation.csv", csv.str());
}

int cmd_schedule_sweep(const RunConfig& cfg) {
    Suite suite(cfg, "schedule-sweep");
    if (!cfg.rp_valid)
        std::cerr << "warning: schedule is not RP-valid (M_n R_n^D / Lambda_n does not vanish); running anyway\n";
    std::ostringstream csv;
    csv.precision(17);
    csv << "n,ratio,deviation,bound,std_error\n";
    json rows = json::array();
    for (int n : cfg.sweep_n) {
        RunConfig at_n = cfg;
        at_n.n = n;
        Context ctx(at_n, n);
        SuiteSetup setup = make_setup(at_n, ctx);
        // A scale-invariant V+ functional: the bump rides the growing radius.
        CylindricalFunctional C;
        BumpFunction b;
        b.center = Eigen::VectorXd::Zero(cfg.D);
        b.center(cfg.D - 1) = 0.3 * ctx.grid.R;
        b.radius = 0.2 * ctx.grid.R;
        b.amplitude = 1.0;
        C.test_functions = {b};
        C.ftilde = ftilde::clamped_identity(cfg.functional_bound);
        C.sup_bound = cfg.functional_bound;
        const RpDeviationReport rep = rp_deviation(pull_back(C, ctx.tr, cfg.k), setup);
        csv << n << "," << setup.schedule.ratio(n) << "," << rep.deviation << "," << rep.bound << ","
            << rep.std_error << "\n";
        rows.push_back({{"n", n},
                        {"ratio", setup.schedule.ratio(n)},
                        {"deviation", rep.deviation},
                        {"bound", rep.bound},
                        {"std_error", rep.std_error}});
        suite.require(rep.deviation <= rep.bound + 3.0 * rep.std_error,
                      "deviation within the scheduled bound at n = " + std::to_string(n));
    }
    suite.report["rows"] = rows;
    return suite.finish("schedule_sweep.csv", csv.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral Monte Carlo suites for regularized functional integrals on spheres"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    long samples = -1;
    int workers = -1;
    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_option("--seed", seed, "override the RNG seed");
    app.add_option("--samples", samples, "override the Monte Carlo sample count");
    app.add_option("--out", out_dir, "output directory for report.json and CSV tables");
    app.add_option("--workers", workers, "worker thread count (results are worker-count independent)");

    const std::vector<std::pair<std::string, int (*)(const RunConfig&)>> commands = {
        {"sample", cmd_sample},           {"estimate", cmd_estimate},
        {"rp-test", cmd_rp_test},         {"markov-test", cmd_markov_test},
        {"invariance-test", cmd_invariance_test}, {"translation-test", cmd_translation_test},
        {"schedule-sweep", cmd_schedule_sweep},
    };
    for (const auto& [name, fn] : commands) app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::string text;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config file '" << config_path << "'\n";
            return 2;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    ParseResult parsed = parse_config(text);
    if (app.count("--seed")) parsed.config.seed = seed;
    if (samples >= 0) parsed.config.samples = samples;
    if (!out_dir.empty()) parsed.config.out = out_dir;
    if (workers >= 1) parsed.config.workers = workers;
    if (samples >= 0 && samples < 2) parsed.errors.push_back("samples: must be >= 2");
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors) std::cerr << "config error: " << e << "\n";
        return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    int code = 2;
    try {
        for (const auto& [name, fn] : commands)
            if (app.get_subcommand(name)->parsed()) code = fn(parsed.config);
    } catch (const Error& e) {
        std::cerr << "suite error: " << e.what() << "\n";
        return 1;
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    // Wall clock goes to the console, not the report: reports are byte-identical
    // for identical (config, seed).
    std::cerr << "wall_clock_ms " << ms.count() << "\n";
    return code;
}
