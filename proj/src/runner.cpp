#include "ssep/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ssep/ensemble.hpp"
#include "ssep/exact_oracle.hpp"
#include "ssep/mdp_stats.hpp"
#include "ssep/rng.hpp"
#include "ssep/variational.hpp"

#ifndef SSEP_GIT_DESCRIBE
#define SSEP_GIT_DESCRIBE "unknown"
#endif

namespace ssep {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string num(double v) { return format("%.17g", v); }

fs::path make_run_dir(const fs::path& out, const std::string& command) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
    fs::create_directories(out);
    const std::string base = command + "-" + stamp;
    for (int n = 0;; ++n) {
        fs::path dir = out / (n == 0 ? base : base + "-" + std::to_string(n));
        // create_directory returns false if it already exists: never reuse a run directory
        if (fs::create_directory(dir)) return dir;
    }
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << s;
}

InitialLaw law_from(const std::string& s) {
    if (s == "bernoulli") return InitialLaw::Bernoulli;
    if (s == "fixed_count") return InitialLaw::FixedCount;
    return InitialLaw::BernoulliStar;
}

struct Outcome {
    int exit_code = kExitOk;
    std::string summary;
    json results = json::object();
};

Outcome run_simulate(const ExperimentConfig& c, const fs::path& dir) {
    EnsembleSpec spec;
    spec.law = law_from(c.text("law"));
    spec.rho = c.number("rho");
    spec.particle_count = c.integer("particle_count");
    spec.ring_safety_factor = c.number("ring_safety_factor");
    const double horizon = c.number("horizon");
    if (!(horizon > 0.0)) throw ParameterError("horizon must be > 0 for simulate");
    const auto records = c.integer("records");
    for (std::int64_t k = 1; k <= records; ++k) spec.times.push_back(horizon * static_cast<double>(k) / records);
    spec.L = c.integer("L") > 0 ? static_cast<int>(c.integer("L"))
                                 : ring_half_width_for(horizon, spec.ring_safety_factor, 2);
    spec.base_seed = c.seed();
    spec.replicas = c.integer("replicas");
    const auto samples = simulate_ensemble_parallel(spec, static_cast<int>(c.integer("threads")));

    std::ofstream m(dir / "moments.csv");
    m << "t,mean_X,var_X,mean_J,var_J\n";
    Outcome o;
    for (std::size_t k = 0; k < samples.times.size(); ++k) {
        const auto x = samples.x_column(k), j = samples.j_column(k);
        double mx = 0, mj = 0, vx = 0, vj = 0;
        const double n = static_cast<double>(x.size());
        for (std::size_t r = 0; r < x.size(); ++r) mx += x[r], mj += j[r];
        mx /= n;
        mj /= n;
        for (std::size_t r = 0; r < x.size(); ++r) vx += (x[r] - mx) * (x[r] - mx), vj += (j[r] - mj) * (j[r] - mj);
        vx /= std::max(1.0, n - 1.0);
        vj /= std::max(1.0, n - 1.0);
        m << num(samples.times[k]) << ',' << num(mx) << ',' << num(vx) << ',' << num(mj) << ',' << num(vj) << '\n';
        if (k + 1 == samples.times.size()) {
            o.results = {{"t", samples.times[k]}, {"mean_X", mx}, {"var_X", vx}, {"mean_J", mj}, {"var_J", vj},
                         {"L", spec.L}};
            o.summary = format("simulate: %lld replicas, L=%d, t=%g\n  E[X]=%.5g Var[X]=%.5g  E[J]=%.5g Var[J]=%.5g\n",
                               static_cast<long long>(spec.replicas), spec.L, samples.times[k], mx, vx, mj, vj);
        }
    }
    if (c.flag("write_samples")) {
        std::ofstream s(dir / "samples.csv");
        s << "replica,t,X,J\n";
        for (std::int64_t r = 0; r < samples.replicas; ++r)
            for (std::size_t k = 0; k < samples.times.size(); ++k)
                s << r << ',' << num(samples.times[k]) << ',' << samples.x(r, k) << ',' << samples.j(r, k) << '\n';
    }
    return o;
}

Outcome run_sweep(const ExperimentConfig& c, const fs::path& dir) {
    StatsOptions opt;
    opt.threads = static_cast<int>(c.integer("threads"));
    opt.confidence = c.number("confidence");
    opt.ring_safety_factor = c.number("ring_safety_factor");
    opt.law = law_from(c.text("law"));
    const auto horizons = c.numbers("horizons");
    const double rho = c.number("rho");
    const auto s = variance_sweep(rho, horizons, c.integer("replicas"), c.seed(), opt);
    std::ofstream f(dir / "sweep.csv");
    write_sweep_csv(f, s);

    const auto sig = sigma_constants(rho);
    Outcome o;
    o.summary = format("variance-sweep: rho=%g, %lld replicas\n", rho, static_cast<long long>(s.replicas));
    json rows = json::array();
    for (const auto& h : s.horizons) {
        o.summary += format("  t=%-8g Var[X]/sqrt(t)=%.5f [%.5f, %.5f]  Var[J]/sqrt(t)=%.5f [%.5f, %.5f]\n", h.t,
                            h.var_X_scaled.variance, h.var_X_scaled.ci.lo, h.var_X_scaled.ci.hi,
                            h.var_J_scaled.variance, h.var_J_scaled.ci.lo, h.var_J_scaled.ci.hi);
        rows.push_back({{"t", h.t}, {"var_X_over_sqrt_t", h.var_X_scaled.variance},
                        {"var_J_over_sqrt_t", h.var_J_scaled.variance}, {"ks_X", h.ks_X}, {"ks_J", h.ks_J}});
    }
    o.summary += format("  limits: sigma_X^2=%.5f sigma_J^2=%.5f; log-log slopes X=%.4f J=%.4f (target 0.5)\n",
                        sig.sigma_X2, sig.sigma_J2, s.slope_X.slope, s.slope_J.slope);
    o.results = {{"horizons", rows}, {"slope_X", s.slope_X.slope}, {"slope_J", s.slope_J.slope},
                 {"sigma_X2", sig.sigma_X2}, {"sigma_J2", sig.sigma_J2}};
    return o;
}

json curve_json(const EnsembleSummary& s, std::string& text) {
    json flagged = json::array();
    for (const auto& p : s.curve) {
        if (p.resolvable)
            text += format("  alpha=%-5g P=%.4e  scaled=%.4f [%.4f, %.4f]  gaussian=%.4f  limit=%.4f\n", p.alpha, p.prob,
                           p.scaled, p.scaled_ci.lo, p.scaled_ci.hi, p.gaussian_reference, p.limit_reference);
        else {
            text += format("  alpha=%-5g FLAGGED unresolvable (count %lld, expected %.1f)\n", p.alpha,
                           static_cast<long long>(p.count), p.reference_expected_count);
            flagged.push_back(p.alpha);
        }
    }
    const auto mono = check_monotone(s), convex = check_midpoint_convex(s), gauss = check_gaussian_agreement(s);
    text += format("  nonincreasing: %s  rate midpoint-convex: %s  within 3 CI widths of Gaussian reference: %s\n",
                   mono.passed ? "yes" : "no", convex.passed ? "yes" : "no", gauss.passed ? "yes" : "no");
    return {{"flagged_alphas", flagged}, {"monotone", mono.passed}, {"midpoint_convex", convex.passed},
            {"gaussian_agreement", gauss.passed}, {"failures", gauss.failures}};
}

Outcome run_mdp(const ExperimentConfig& c, const fs::path& dir) {
    ScalingParams sc;
    sc.N = c.integer("N");
    sc.theta = c.number("theta");
    sc.T = c.number("T");
    sc.rho = c.number("rho");
    StatsOptions opt;
    opt.threads = static_cast<int>(c.integer("threads"));
    opt.confidence = c.number("confidence");
    opt.ring_safety_factor = c.number("ring_safety_factor");
    opt.min_count = c.integer("min_count");
    const auto alphas = c.numbers("alphas");
    const auto samples = mdp_ensemble(sc, c.integer("replicas"), c.seed(), opt);

    Outcome o;
    o.summary = format("mdp-curve: N=%lld theta=%g T=%g rho=%g a_N=%.4f speed N/a_N^2=%.5f, %lld replicas\n",
                       static_cast<long long>(sc.N), sc.theta, sc.T, sc.rho, sc.a_N(), sc.speed(),
                       static_cast<long long>(samples.replicas));
    const auto J = curve_from_samples(samples, sc, alphas, Observable::Current, c.seed(), opt);
    {
        std::ofstream f(dir / "curve_J.csv");
        write_curve_csv(f, J);
    }
    o.summary += "  current J:\n";
    o.results["current"] = curve_json(J, o.summary);
    if (c.flag("tagged")) {
        std::vector<double> ax;
        for (const double a : alphas) ax.push_back(a / sc.rho);
        const auto X = curve_from_samples(samples, sc, ax, Observable::Tagged, c.seed(), opt);
        std::ofstream f(dir / "curve_X.csv");
        write_curve_csv(f, X);
        o.summary += "  tagged X (alpha / rho):\n";
        o.results["tagged"] = curve_json(X, o.summary);
        const auto track = check_tracking(J, X, sc.rho);
        o.results["tracking"] = {{"passed", track.passed}, {"failures", track.failures}};
        o.summary += format("  X at alpha tracks J at rho*alpha within intervals: %s\n", track.passed ? "yes" : "no");
    }
    return o;
}

Outcome run_variational(const ExperimentConfig& c, const fs::path& dir) {
    const double alpha = c.number("alpha"), T = c.number("T"), rho = c.number("rho");
    VariationalOptions opt;
    opt.qp_tol = c.number("qp_tol");
    opt.max_iter = static_cast<int>(c.integer("max_iter"));
    opt.u_width_factor = c.number("u_width_factor");
    opt.terminal_layer = c.number("terminal_layer");
    const double F_target = 0.5 * std::sqrt(std::numbers::pi) * alpha * alpha / std::sqrt(T);
    const double G_target = rho * (1.0 - rho) * rate_J(alpha, rho, T);

    Outcome o;
    std::ofstream f(dir / "variational.csv");
    f << "nt,nu,F,F_target,G,G_target,G_reflected,two_F_half,el_bulk,el_interior,terminal_dt,terminal_uu,"
         "iterations_F,iterations_G\n";
    o.summary = format("variational: alpha=%g T=%g rho=%g U=%g\n", alpha, T, rho, opt.u_width_factor * std::sqrt(T));
    json rows = json::array();
    const auto grids = c.grids("grids");
    for (std::size_t g = 0; g < grids.size(); ++g) {
        const auto [nt, nu] = grids[g];
        const Grid grid = Grid::with_width(T, nt, nu, opt.u_width_factor);
        const auto mf = minimize_F(alpha, T, grid, opt);
        const auto mg = minimize_G(alpha, T, rho, grid, opt);
        double reflected = NAN, two_half = NAN;
        if (nt % 2 == 0 && nt / 2 >= 4) {
            const Grid half{T / 2.0, grid.U, nt / 2, nu};
            VariationalOptions half_opt = opt;
            half_opt.u_width_factor = 0.0;  // U is inherited from the full grid
            const auto h = minimize_F(alpha / 2.0, T / 2.0, half, half_opt);
            const auto r = construct_reflected_minimizer(h.K, grid);
            reflected = eval_G(r.K, r.mu0, rho);
            two_half = 2.0 * h.report.value;
        }
        const auto& el = mf.report.el;
        f << nt << ',' << nu << ',' << num(mf.report.value) << ',' << num(F_target) << ',' << num(mg.report.value)
          << ',' << num(G_target) << ',' << num(reflected) << ',' << num(two_half) << ',' << num(el.bulk) << ','
          << num(el.interior) << ',' << num(el.terminal_dt) << ',' << num(el.terminal_uu) << ','
          << mf.report.iterations << ',' << mg.report.iterations << '\n';
        o.summary += format("  %4dx%-4d min F = %.6f (target %.5f, gap %+.2e)  min G = %.6f (target %.5f, gap %+.2e)\n",
                            nt, nu, mf.report.value, F_target, mf.report.value / F_target - 1.0, mg.report.value,
                            G_target, mg.report.value / G_target - 1.0);
        rows.push_back({{"nt", nt}, {"nu", nu}, {"F", mf.report.value}, {"G", mg.report.value},
                        {"G_reflected", reflected}, {"el_bulk", el.bulk}});
        if (g + 1 == grids.size() && c.flag("dump_fields")) {
            std::ofstream kf(dir / "field_F.csv"), kg(dir / "field_G.csv"), mu(dir / "mu0_G.csv");
            write_field_csv(kf, mf.K);
            write_field_csv(kg, mg.K);
            write_profile_csv(mu, mg.mu0);
        }
    }
    o.results = {{"grids", rows}, {"F_target", F_target}, {"G_target", G_target}};
    return o;
}

Outcome run_oracle(const ExperimentConfig& c, const fs::path& dir) {
    const auto rings = c.integers("rings");
    const auto times = c.numbers("times");
    const double threshold = c.number("tv_threshold");
    OracleOptions oo;
    oo.Jmax = static_cast<int>(c.integer("Jmax"));
    oo.Dmax = oo.Jmax;
    std::ofstream f(dir / "oracle.csv");
    f << "ring,particles,t,tv_X,tv_J,clipped_mass\n";
    Outcome o;
    o.summary = format("oracle-check: %lld replicas per case, threshold %g\n",
                       static_cast<long long>(c.integer("replicas")), threshold);
    double worst = 0.0;
    std::uint64_t case_index = 0;
    json rows = json::array();
    for (const auto ring : rings) {
        const int L = static_cast<int>(ring / 2);
        for (int k = 1; k < ring; ++k) {
            const auto gen = build_generator(L, k, oo.Jmax, oo);
            const auto init = conditioned_initial(gen);
            EnsembleSpec spec;
            spec.law = InitialLaw::FixedCount;
            spec.L = L;
            spec.particle_count = k;
            spec.times = times;
            spec.ring_safety_factor = 0.0;
            spec.replicas = c.integer("replicas");
            spec.base_seed = replica_seed(c.seed(), case_index++);
            const auto samples = simulate_ensemble_parallel(spec, static_cast<int>(c.integer("threads")));
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                const auto d = distribution_at(gen, init, times[ti], oo);
                std::vector<std::int64_t> xs(static_cast<std::size_t>(samples.replicas)), js(xs.size());
                for (std::int64_t r = 0; r < samples.replicas; ++r) {
                    xs[static_cast<std::size_t>(r)] = samples.x(r, ti);
                    js[static_cast<std::size_t>(r)] = samples.j(r, ti);
                }
                auto px = d.X, pj = d.J;
                px.push_back(d.clipped_mass);
                pj.push_back(d.clipped_mass);
                const double tvx = total_variation(px, clipped_histogram(xs, oo.Dmax));
                const double tvj = total_variation(pj, clipped_histogram(js, oo.Jmax));
                worst = std::max({worst, tvx, tvj});
                f << ring << ',' << k << ',' << num(times[ti]) << ',' << num(tvx) << ',' << num(tvj) << ','
                  << num(d.clipped_mass) << '\n';
                o.summary += format("  2L=%-2lld k=%-2d t=%-4g TV(X)=%.4f TV(J)=%.4f%s\n", static_cast<long long>(ring), k,
                                    times[ti], tvx, tvj, (tvx < threshold && tvj < threshold) ? "" : "  FAIL");
                rows.push_back({{"ring", ring}, {"particles", k}, {"t", times[ti]}, {"tv_X", tvx}, {"tv_J", tvj}});
            }
        }
    }
    o.exit_code = worst < threshold ? kExitOk : kExitFailure;
    o.summary += format("  worst TV %.4f -> %s\n", worst, o.exit_code == kExitOk ? "all below threshold" : "FAILED");
    o.results = {{"cases", rows}, {"worst_tv", worst}, {"passed", o.exit_code == kExitOk}};
    return o;
}

RunResult run_report(const ExperimentConfig& c) {
    const fs::path dir = c.text("run_dir");
    std::ifstream in(dir / "summary.json");
    if (!in) throw ConfigError("run_dir: no summary.json in '" + dir.string() + "'");
    json s;
    try {
        s = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("run_dir: summary.json is not valid JSON");
    }
    RunResult r;
    r.summary = format("run %s (%s, seed %s, %s, %.2f s)\n", dir.string().c_str(),
                       s.value("command", std::string("?")).c_str(), s.value("seed", json()).dump().c_str(),
                       s.value("git_describe", std::string("?")).c_str(), s.value("wall_time_s", 0.0));
    r.summary += s.value("summary", std::string());
    r.summary += "files:";
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const auto& n : names) r.summary += " " + n;
    r.summary += "\n";
    r.exit_code = s.value("exit_code", 0);
    return r;
}

}  // namespace

std::string git_describe() { return SSEP_GIT_DESCRIBE; }

RunResult run(const ExperimentConfig& config) {
    if (config.command == Command::Report) return run_report(config);

    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    result.run_dir = make_run_dir(config.text("out"), command_name(config.command));
    write_text(result.run_dir / "config.json", config.values.dump(2) + "\n");

    Outcome o;
    try {
        switch (config.command) {
            case Command::Simulate: o = run_simulate(config, result.run_dir); break;
            case Command::VarianceSweep: o = run_sweep(config, result.run_dir); break;
            case Command::MdpCurve: o = run_mdp(config, result.run_dir); break;
            case Command::Variational: o = run_variational(config, result.run_dir); break;
            case Command::OracleCheck: o = run_oracle(config, result.run_dir); break;
            case Command::Report: break;
        }
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("parameter: ") + e.what());
    } catch (const SolverError& e) {
        o.exit_code = kExitFailure;
        o.summary = std::string("solver failure: ") + e.what() + "\n";
    } catch (const AccuracyError& e) {
        o.exit_code = kExitFailure;
        o.summary = std::string("accuracy failure: ") + e.what() + "\n";
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json summary = {{"command", command_name(config.command)},
                    {"params", config.values},
                    {"seed", config.seed()},
                    {"git_describe", git_describe()},
                    {"wall_time_s", wall},
                    {"exit_code", o.exit_code},
                    {"results", o.results},
                    {"summary", o.summary}};
    write_text(result.run_dir / "summary.json", summary.dump(2) + "\n");
    result.exit_code = o.exit_code;
    result.summary = o.summary + "output: " + result.run_dir.string() + "\n";
    return result;
}

}  // namespace ssep
