#pragma once

// Command-line front end: configuration, subcommands and file emission.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavebif/continuation.hpp"
#include "wavebif/dispersion.hpp"
#include "wavebif/flows.hpp"
#include "wavebif/io.hpp"
#include "wavebif/operator.hpp"

namespace wavebif::cli {

inline constexpr const char* version = "0.1.0";
inline constexpr const char* output_dir_env = "WAVEBIF_OUTPUT_DIR";

struct RunConfig {
    // physical
    double L = 2.0 * std::numbers::pi;
    double h = 1.0;
    double g = 9.81;
    double sigma = 0.074;
    std::string vorticity = "constant:0";
    // grid
    int N = 64;
    int M = 200;
    // tolerances
    double ode_tol = default_ode_tol;
    double spectrum_tol = 1e-8;
    double validate_F_tol = 1e-8;
    double validate_bernoulli_tol = 1e-5;
    double validate_harmonicity_tol = 1e-4;
    // trivial
    double trivial_lambda_min = 0.5;
    double trivial_lambda_max = 5.0;
    int trivial_lambda_count = 10;
    // dispersion
    std::vector<int> dispersion_k{1, 2, 3};
    double dispersion_lambda_min = 0.5;
    double dispersion_lambda_max = 10.0;
    int dispersion_lambda_count = 50;
    // bifurcation points (also selects the origin of a continuation run)
    int k0 = 1;
    double bifurcation_lambda_min = 0.5;
    double bifurcation_lambda_max = 10.0;
    int samples = 400;
    // continuation
    int root_index = 0;
    ContinuationConfig continuation;
    std::string output_dir = ".";

    GridSpec grid() const { return GridSpec(L, h, N, M); }
    VorticitySpec vorticity_spec() const { return VorticitySpec::parse(vorticity); }
    Problem problem() const { return Problem(grid(), vorticity_spec(), g, sigma, ode_tol); }

    DispersionSetup dispersion_setup() const {
        DispersionSetup s;
        s.vorticity = vorticity_spec();
        s.L = L;
        s.h = h;
        s.g = g;
        s.sigma = sigma;
        s.ode_tol = ode_tol;
        s.spectrum_tol = spectrum_tol;
        return s;
    }

    void validate() const {
        require(std::isfinite(L) && L > 0.0, "config: L must be positive");
        require(std::isfinite(h) && h > 0.0, "config: h must be positive");
        require(std::isfinite(g) && g > 0.0, "config: g must be positive");
        require(std::isfinite(sigma) && sigma > 0.0, "config: sigma must be positive");
        require(N >= 4 && M >= 4, "config: need N >= 4 and M >= 4");
        (void)vorticity_spec();
        require(ode_tol > 0.0 && spectrum_tol > 0.0, "config: tolerances must be positive");
        require(trivial_lambda_count >= 1 && dispersion_lambda_count >= 1, "config: lambda_count must be positive");
        require(!dispersion_k.empty(), "config: dispersion.k must not be empty");
        require(k0 >= 1, "config: k0 must be at least 1");
        require(samples >= 3, "config: samples must be at least 3");
        require(root_index >= 0, "config: root_index must be non-negative");
        continuation.validate();
    }
};

namespace detail {

template <class T>
void take(const io::Json& obj, const char* key, T& dst) {
    if (!obj.contains(key)) return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const io::Json::exception&) {
        throw InvalidInput(std::string("config: field '") + key + "' has the wrong type");
    }
}

inline void check_keys(const io::Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw InvalidInput("config: '" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw InvalidInput("config: unknown key '" + where + "." + it.key() + "'");
    }
}

}  // namespace detail

/// Applies a JSON config document on top of `cfg`.
inline void apply_json(RunConfig& cfg, const io::Json& j) {
    using detail::check_keys;
    using detail::take;
    check_keys(j, "(root)", {"physical", "vorticity", "grid", "tolerances", "trivial", "dispersion", "bifurcation",
                             "continuation", "output_dir"});
    if (j.contains("physical")) {
        const auto& p = j.at("physical");
        check_keys(p, "physical", {"L", "h", "g", "sigma"});
        take(p, "L", cfg.L);
        take(p, "h", cfg.h);
        take(p, "g", cfg.g);
        take(p, "sigma", cfg.sigma);
    }
    take(j, "vorticity", cfg.vorticity);
    if (j.contains("grid")) {
        const auto& gr = j.at("grid");
        check_keys(gr, "grid", {"N", "M"});
        take(gr, "N", cfg.N);
        take(gr, "M", cfg.M);
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        check_keys(t, "tolerances", {"ode_tol", "spectrum_tol", "newton_tol", "validate_F", "validate_bernoulli",
                                     "validate_harmonicity"});
        take(t, "ode_tol", cfg.ode_tol);
        take(t, "spectrum_tol", cfg.spectrum_tol);
        take(t, "newton_tol", cfg.continuation.newton_tol);
        take(t, "validate_F", cfg.validate_F_tol);
        take(t, "validate_bernoulli", cfg.validate_bernoulli_tol);
        take(t, "validate_harmonicity", cfg.validate_harmonicity_tol);
    }
    if (j.contains("trivial")) {
        const auto& t = j.at("trivial");
        check_keys(t, "trivial", {"lambda_min", "lambda_max", "lambda_count"});
        take(t, "lambda_min", cfg.trivial_lambda_min);
        take(t, "lambda_max", cfg.trivial_lambda_max);
        take(t, "lambda_count", cfg.trivial_lambda_count);
    }
    if (j.contains("dispersion")) {
        const auto& d = j.at("dispersion");
        check_keys(d, "dispersion", {"k", "lambda_min", "lambda_max", "lambda_count"});
        take(d, "k", cfg.dispersion_k);
        take(d, "lambda_min", cfg.dispersion_lambda_min);
        take(d, "lambda_max", cfg.dispersion_lambda_max);
        take(d, "lambda_count", cfg.dispersion_lambda_count);
    }
    if (j.contains("bifurcation")) {
        const auto& b = j.at("bifurcation");
        check_keys(b, "bifurcation", {"k0", "lambda_min", "lambda_max", "samples"});
        take(b, "k0", cfg.k0);
        take(b, "lambda_min", cfg.bifurcation_lambda_min);
        take(b, "lambda_max", cfg.bifurcation_lambda_max);
        take(b, "samples", cfg.samples);
    }
    if (j.contains("continuation")) {
        const auto& c = j.at("continuation");
        auto& cc = cfg.continuation;
        check_keys(c, "continuation",
                   {"root_index", "direction", "s0", "ds0", "ds_min", "ds_max", "max_steps", "newton_max_iter",
                    "min_K2_stop", "min_depth_stop", "max_curvature_stop", "lambda_bound", "amplitude_bound",
                    "vorticity_Lp_bound", "vorticity_p", "lambda_weight"});
        take(c, "root_index", cfg.root_index);
        take(c, "direction", cc.direction);
        take(c, "s0", cc.s0);
        take(c, "ds0", cc.ds0);
        take(c, "ds_min", cc.ds_min);
        take(c, "ds_max", cc.ds_max);
        take(c, "max_steps", cc.max_steps);
        take(c, "newton_max_iter", cc.newton_max_iter);
        take(c, "min_K2_stop", cc.min_K2_stop);
        take(c, "min_depth_stop", cc.min_depth_stop);
        take(c, "max_curvature_stop", cc.max_curvature_stop);
        take(c, "lambda_bound", cc.lambda_bound);
        take(c, "amplitude_bound", cc.amplitude_bound);
        take(c, "vorticity_Lp_bound", cc.vorticity_Lp_bound);
        take(c, "vorticity_p", cc.vorticity_p);
        take(c, "lambda_weight", cc.lambda_weight);
    }
    take(j, "output_dir", cfg.output_dir);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config '" + path + "'");
    io::Json j;
    try {
        j = io::Json::parse(in);
    } catch (const io::Json::parse_error& e) {
        throw InvalidInput("config '" + path + "': " + e.what());
    }
    RunConfig cfg;
    apply_json(cfg, j);
    return cfg;
}

/// Effective configuration in the JSON layout accepted by apply_json.
inline io::Json to_json(const RunConfig& c) {
    io::Json j;
    j["physical"] = {{"L", c.L}, {"h", c.h}, {"g", c.g}, {"sigma", c.sigma}};
    j["vorticity"] = c.vorticity;
    j["grid"] = {{"N", c.N}, {"M", c.M}};
    j["tolerances"] = {{"ode_tol", c.ode_tol},
                       {"spectrum_tol", c.spectrum_tol},
                       {"newton_tol", c.continuation.newton_tol},
                       {"validate_F", c.validate_F_tol},
                       {"validate_bernoulli", c.validate_bernoulli_tol},
                       {"validate_harmonicity", c.validate_harmonicity_tol}};
    j["trivial"] = {{"lambda_min", c.trivial_lambda_min},
                    {"lambda_max", c.trivial_lambda_max},
                    {"lambda_count", c.trivial_lambda_count}};
    j["dispersion"] = {{"k", c.dispersion_k},
                       {"lambda_min", c.dispersion_lambda_min},
                       {"lambda_max", c.dispersion_lambda_max},
                       {"lambda_count", c.dispersion_lambda_count}};
    j["bifurcation"] = {{"k0", c.k0},
                        {"lambda_min", c.bifurcation_lambda_min},
                        {"lambda_max", c.bifurcation_lambda_max},
                        {"samples", c.samples}};
    const auto& cc = c.continuation;
    j["continuation"] = {{"root_index", c.root_index},
                         {"direction", cc.direction},
                         {"s0", cc.s0},
                         {"ds0", cc.ds0},
                         {"ds_min", cc.ds_min},
                         {"ds_max", cc.ds_max},
                         {"max_steps", cc.max_steps},
                         {"newton_max_iter", cc.newton_max_iter},
                         {"min_K2_stop", cc.min_K2_stop},
                         {"min_depth_stop", cc.min_depth_stop},
                         {"max_curvature_stop", cc.max_curvature_stop},
                         {"lambda_bound", cc.lambda_bound},
                         {"amplitude_bound", cc.amplitude_bound},
                         {"vorticity_Lp_bound", cc.vorticity_Lp_bound},
                         {"vorticity_p", cc.vorticity_p},
                         {"lambda_weight", cc.lambda_weight}};
    j["output_dir"] = c.output_dir;
    return j;
}

inline std::string csv_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return io::format_double(v);
}

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

inline void require_window_without_zero(double lo, double hi) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "lambda window must satisfy lambda_min < lambda_max");
    require(lo > 0.0 || hi < 0.0, "lambda window must not contain 0");
}

/// Files written by one command, relative to the output directory.
struct CommandOutput {
    std::vector<std::string> files;
    int exit_code = 0;
    std::string summary;
};

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw InvalidInput("cannot write '" + (dir / name).string() + "'");
    f.precision(17);
    return f;
}

}  // namespace detail

inline CommandOutput cmd_trivial(const RunConfig& cfg, const std::filesystem::path& dir) {
    const VorticitySpec vort = cfg.vorticity_spec();
    require(std::isfinite(cfg.trivial_lambda_min) && std::isfinite(cfg.trivial_lambda_max) &&
                cfg.trivial_lambda_min <= cfg.trivial_lambda_max,
            "trivial: need lambda_min <= lambda_max");
    auto mfile = detail::open_out(dir, "trivial_m.csv");
    auto pfile = detail::open_out(dir, "trivial_profiles.csv");
    mfile << "lambda,m,psi_min,unidirectional\n";
    pfile << "lambda,y,psi,psi_y\n";
    const auto lambdas = linspace(cfg.trivial_lambda_min, cfg.trivial_lambda_max, cfg.trivial_lambda_count);
    for (double lam : lambdas) {
        const TrivialFlow f = trivial_flow(lam, vort, cfg.h, cfg.M, cfg.ode_tol);
        mfile << csv_double(lam) << ',' << csv_double(f.m) << ',' << csv_double(psi_min(f)) << ','
              << (is_unidirectional(f) ? 1 : 0) << '\n';
        for (int j = 0; j < f.levels(); ++j)
            pfile << csv_double(lam) << ',' << csv_double(f.y(j)) << ',' << csv_double(f.psi(j)) << ','
                  << csv_double(f.psi_y(j)) << '\n';
    }
    return {{"trivial_m.csv", "trivial_profiles.csv"}, 0, std::to_string(lambdas.size()) + " laminar flows"};
}

inline CommandOutput cmd_dispersion(const RunConfig& cfg, const std::filesystem::path& dir) {
    require_window_without_zero(cfg.dispersion_lambda_min, cfg.dispersion_lambda_max);
    const auto rows = dispersion_table(cfg.dispersion_k,
                                       linspace(cfg.dispersion_lambda_min, cfg.dispersion_lambda_max,
                                                cfg.dispersion_lambda_count),
                                       cfg.dispersion_setup());
    auto f = detail::open_out(dir, "dispersion.csv");
    f << "k,lambda,d_value,in_spectrum,branch_index\n";
    for (const auto& r : rows)
        f << r.k << ',' << csv_double(r.lambda) << ',' << csv_double(r.d_value) << ',' << (r.in_spectrum ? 1 : 0) << ','
          << r.branch_index << '\n';
    return {{"dispersion.csv"}, 0, std::to_string(rows.size()) + " rows"};
}

inline std::vector<BifurcationPoint> find_points(const RunConfig& cfg) {
    require_window_without_zero(cfg.bifurcation_lambda_min, cfg.bifurcation_lambda_max);
    RootSearchOptions opt;
    opt.samples = cfg.samples;
    return find_bifurcation_points(cfg.k0, cfg.dispersion_setup(), cfg.bifurcation_lambda_min,
                                   cfg.bifurcation_lambda_max, opt);
}

inline CommandOutput cmd_bifurcation_points(const RunConfig& cfg, const std::filesystem::path& dir) {
    const auto pts = find_points(cfg);
    auto f = detail::open_out(dir, "bifurcation_points.jsonl");
    for (const auto& bp : pts) f << io::dump(io::to_json(bp)) << '\n';
    CommandOutput out{{"bifurcation_points.jsonl"}, 0, std::to_string(pts.size()) + " roots"};
    if (pts.empty()) {
        out.exit_code = exit_code(ErrorKind::empty_result);
        out.summary = "no bifurcation points in the lambda window";
    }
    return out;
}

inline std::string branch_stem(const RunConfig& cfg) {
    return "branch_k" + std::to_string(cfg.k0) + "_r" + std::to_string(cfg.root_index) +
           (cfg.continuation.direction > 0 ? "_plus" : "_minus");
}

inline CommandOutput cmd_continue(const RunConfig& cfg, const std::filesystem::path& dir) {
    const auto pts = find_points(cfg);
    if (pts.empty()) return {{}, exit_code(ErrorKind::empty_result), "no bifurcation points in the lambda window"};
    require(cfg.root_index < static_cast<int>(pts.size()),
            "root_index " + std::to_string(cfg.root_index) + " out of range (" + std::to_string(pts.size()) + " roots)");
    const BifurcationPoint& bp = pts[cfg.root_index];
    require(bp.kernel_dim == 1, "kernel dimension " + std::to_string(bp.kernel_dim) +
                                    " at lambda0; re-pose with period L/k0 to isolate a simple kernel");
    const Problem p = cfg.problem();
    const Branch br = run_branch(p, bp, cfg.continuation);
    const std::string stem = branch_stem(cfg);
    auto jf = detail::open_out(dir, stem + ".jsonl");
    auto cf = detail::open_out(dir, stem + "_summary.csv");
    io::write_branch(jf, cf, p, br);
    CommandOutput out{{stem + ".jsonl", stem + "_summary.csv"}, 0,
                      std::to_string(br.points.size()) + " points, termination " + to_string(br.termination)};
    if (br.points.empty()) {
        out.exit_code = exit_code(ErrorKind::numerical_failure);
        out.summary = br.message;
    }
    return out;
}

struct ValidationReport {
    io::Json json;
    bool pass = true;
};

inline ValidationReport validate_file(const RunConfig& cfg, const std::string& path, int record = -1) {
    const io::LoadedFile f = io::load_solution_file(path);
    require(!f.records.empty(), path + ": no solution records");
    require(record < static_cast<int>(f.records.size()),
            "record " + std::to_string(record) + " out of range (" + std::to_string(f.records.size()) + " records)");
    ValidationReport rep;
    io::Json recs = io::Json::array();
    for (std::size_t i = 0; i < f.records.size(); ++i) {
        if (record >= 0 && static_cast<int>(i) != record) continue;
        const auto& r = f.records[i];
        io::Json e;
        e["line"] = f.lines[i];
        if (r.step) e["step"] = *r.step;
        bool ok = true;
        try {
            const Problem p = r.problem(cfg.ode_tol);
            const Diagnostics d = diagnostics(p, r.state);
            const double harm = harmonicity_residual(r.state.w);
            ok = d.F_residual <= cfg.validate_F_tol && d.bernoulli_residual <= cfg.validate_bernoulli_tol &&
                 harm <= cfg.validate_harmonicity_tol && d.min_K2 > 0.0;
            e["F_residual"] = d.F_residual;
            e["bernoulli_residual"] = d.bernoulli_residual;
            e["harmonicity_residual"] = harm;
            e["diagnostics"] = io::to_json(d);
        } catch (const Error& err) {
            ok = false;
            e["error"] = err.what();
        }
        e["pass"] = ok;
        rep.pass = rep.pass && ok;
        recs.push_back(std::move(e));
    }
    rep.json["file"] = path;
    rep.json["thresholds"] = {{"F_residual", cfg.validate_F_tol},
                              {"bernoulli_residual", cfg.validate_bernoulli_tol},
                              {"harmonicity_residual", cfg.validate_harmonicity_tol}};
    rep.json["records"] = std::move(recs);
    rep.json["pass"] = rep.pass;
    return rep;
}

inline std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

inline std::string kind_label(ErrorKind k) {
    switch (k) {
        case ErrorKind::invalid_input: return "invalid_input";
        case ErrorKind::empty_result: return "empty_result";
        case ErrorKind::numerical_failure: return "numerical_failure";
    }
    return "numerical_failure";
}

inline void write_sidecar(const std::filesystem::path& dir, const std::string& command, const RunConfig& cfg,
                          const CommandOutput& out, double seconds) {
    io::Json j;
    j["command"] = command;
    j["version"] = version;
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["finished_utc"] = stamp;
    j["elapsed_seconds"] = seconds;
    j["exit_code"] = out.exit_code;
    j["outputs"] = out.files;
    j["config"] = to_json(cfg);
    auto f = detail::open_out(dir, command + ".meta.json");
    f << io::dump(j) << '\n';
}

/// Runs the CLI; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Steady periodic capillary-gravity waves with vorticity: laminar flows, dispersion relation, "
                 "bifurcation points and branch continuation.",
                 "wavebif"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig d;  // defaults shown in --help
    std::string config_path, output_dir = d.output_dir, vorticity = d.vorticity;
    app.add_option("-c,--config", config_path, "JSON config file; flags override its keys");
    auto* o_out = app.add_option("-o,--output-dir", output_dir,
                                 std::string("output directory (env ") + output_dir_env + " overrides the config value)")
                      ->capture_default_str();
    auto* o_L = app.add_option("--period", d.L, "period L")->capture_default_str();
    auto* o_h = app.add_option("--depth", d.h, "depth h")->capture_default_str();
    auto* o_g = app.add_option("--gravity", d.g, "gravitational constant g")->capture_default_str();
    auto* o_sigma = app.add_option("--sigma", d.sigma, "surface tension")->capture_default_str();
    auto* o_vort = app.add_option("--vorticity", vorticity, "constant:G | affine:A,B | poly:C0,C1,...")->capture_default_str();
    auto* o_N = app.add_option("--N", d.N, "cosine modes")->capture_default_str();
    auto* o_M = app.add_option("--M", d.M, "vertical intervals")->capture_default_str();
    auto* o_ode = app.add_option("--ode-tol", d.ode_tol, "ODE tolerance")->capture_default_str();

    auto* triv = app.add_subcommand("trivial", "laminar profiles and m(lambda) over a lambda grid");
    auto* o_tmin = triv->add_option("--lambda-min", d.trivial_lambda_min)->capture_default_str();
    auto* o_tmax = triv->add_option("--lambda-max", d.trivial_lambda_max)->capture_default_str();
    auto* o_tcount = triv->add_option("--lambda-count", d.trivial_lambda_count)->capture_default_str();

    auto* disp = app.add_subcommand("dispersion", "tabulate d(-(k nu)^2, lambda)");
    auto* o_dk = disp->add_option("--k", d.dispersion_k, "wave numbers")->capture_default_str();
    auto* o_dmin = disp->add_option("--lambda-min", d.dispersion_lambda_min)->capture_default_str();
    auto* o_dmax = disp->add_option("--lambda-max", d.dispersion_lambda_max)->capture_default_str();
    auto* o_dcount = disp->add_option("--lambda-count", d.dispersion_lambda_count)->capture_default_str();

    std::vector<CLI::Option*> bif_opts;
    auto add_bif = [&](CLI::App* sc) {
        bif_opts.push_back(sc->add_option("--k0", d.k0, "wave number of the kernel")->capture_default_str());
        bif_opts.push_back(sc->add_option("--lambda-min", d.bifurcation_lambda_min)->capture_default_str());
        bif_opts.push_back(sc->add_option("--lambda-max", d.bifurcation_lambda_max)->capture_default_str());
        bif_opts.push_back(sc->add_option("--samples", d.samples, "initial lambda samples")->capture_default_str());
    };
    auto* bif = app.add_subcommand("bifurcation-points", "roots of the dispersion relation for k0");
    add_bif(bif);
    auto* cont = app.add_subcommand("continue", "switch onto and trace the branch from a bifurcation point");
    add_bif(cont);
    auto& cc = d.continuation;
    std::vector<CLI::Option*> cont_opts{
        cont->add_option("--root-index", d.root_index, "which root in the window")->capture_default_str(),
        cont->add_option("--direction", cc.direction, "+1 or -1: sign of the initial amplitude")->capture_default_str(),
        cont->add_option("--s0", cc.s0, "initial amplitude parameter")->capture_default_str(),
        cont->add_option("--ds0", cc.ds0, "initial arclength step")->capture_default_str(),
        cont->add_option("--ds-min", cc.ds_min)->capture_default_str(),
        cont->add_option("--ds-max", cc.ds_max)->capture_default_str(),
        cont->add_option("--max-steps", cc.max_steps)->capture_default_str(),
        cont->add_option("--newton-tol", cc.newton_tol)->capture_default_str(),
        cont->add_option("--min-K2-stop", cc.min_K2_stop)->capture_default_str(),
        cont->add_option("--min-depth-stop", cc.min_depth_stop, "negative selects 1e-3 h")->capture_default_str(),
        cont->add_option("--lambda-bound", cc.lambda_bound)->capture_default_str(),
        cont->add_option("--amplitude-bound", cc.amplitude_bound)->capture_default_str(),
    };

    auto* val = app.add_subcommand("validate", "recompute residuals and diagnostics of stored solutions");
    std::string val_file;
    int val_record = -1;
    val->add_option("file", val_file, "solution JSON or branch JSONL file")->required();
    val->add_option("--record", val_record, "0-based record index (default: all)");
    auto* o_vF = val->add_option("--F-tol", d.validate_F_tol)->capture_default_str();
    auto* o_vB = val->add_option("--bernoulli-tol", d.validate_bernoulli_tol)->capture_default_str();
    auto* o_vH = val->add_option("--harmonicity-tol", d.validate_harmonicity_tol)->capture_default_str();

    auto fail = [&](ErrorKind k, const std::string& msg) {
        err << "wavebif: error[" << kind_label(k) << "]: " << one_line(msg) << '\n';
        return exit_code(k);
    };
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << version << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail(ErrorKind::invalid_input, e.what());
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        auto over = [](CLI::Option* o, auto& dst, const auto& src) {
            if (o->count() > 0) dst = src;
        };
        over(o_L, cfg.L, d.L);
        over(o_h, cfg.h, d.h);
        over(o_g, cfg.g, d.g);
        over(o_sigma, cfg.sigma, d.sigma);
        over(o_vort, cfg.vorticity, vorticity);
        over(o_N, cfg.N, d.N);
        over(o_M, cfg.M, d.M);
        over(o_ode, cfg.ode_tol, d.ode_tol);
        over(o_tmin, cfg.trivial_lambda_min, d.trivial_lambda_min);
        over(o_tmax, cfg.trivial_lambda_max, d.trivial_lambda_max);
        over(o_tcount, cfg.trivial_lambda_count, d.trivial_lambda_count);
        over(o_dk, cfg.dispersion_k, d.dispersion_k);
        over(o_dmin, cfg.dispersion_lambda_min, d.dispersion_lambda_min);
        over(o_dmax, cfg.dispersion_lambda_max, d.dispersion_lambda_max);
        over(o_dcount, cfg.dispersion_lambda_count, d.dispersion_lambda_count);
        for (std::size_t i = 0; i < bif_opts.size(); ++i) {
            switch (i % 4) {
                case 0: over(bif_opts[i], cfg.k0, d.k0); break;
                case 1: over(bif_opts[i], cfg.bifurcation_lambda_min, d.bifurcation_lambda_min); break;
                case 2: over(bif_opts[i], cfg.bifurcation_lambda_max, d.bifurcation_lambda_max); break;
                case 3: over(bif_opts[i], cfg.samples, d.samples); break;
            }
        }
        auto& c = cfg.continuation;
        over(cont_opts[0], cfg.root_index, d.root_index);
        over(cont_opts[1], c.direction, cc.direction);
        over(cont_opts[2], c.s0, cc.s0);
        over(cont_opts[3], c.ds0, cc.ds0);
        over(cont_opts[4], c.ds_min, cc.ds_min);
        over(cont_opts[5], c.ds_max, cc.ds_max);
        over(cont_opts[6], c.max_steps, cc.max_steps);
        over(cont_opts[7], c.newton_tol, cc.newton_tol);
        over(cont_opts[8], c.min_K2_stop, cc.min_K2_stop);
        over(cont_opts[9], c.min_depth_stop, cc.min_depth_stop);
        over(cont_opts[10], c.lambda_bound, cc.lambda_bound);
        over(cont_opts[11], c.amplitude_bound, cc.amplitude_bound);
        over(o_vF, cfg.validate_F_tol, d.validate_F_tol);
        over(o_vB, cfg.validate_bernoulli_tol, d.validate_bernoulli_tol);
        over(o_vH, cfg.validate_harmonicity_tol, d.validate_harmonicity_tol);
        if (const char* env = std::getenv(output_dir_env); env && *env) cfg.output_dir = env;
        if (o_out->count() > 0) cfg.output_dir = output_dir;
        cfg.validate();

        if (val->parsed()) {
            const ValidationReport rep = validate_file(cfg, val_file, val_record);
            out << io::dump(rep.json) << '\n';
            if (!rep.pass) {
                err << "wavebif: validation_failed: " << val_file << '\n';
                return 1;
            }
            return 0;
        }

        const std::filesystem::path dir(cfg.output_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw InvalidInput("cannot create output directory '" + dir.string() + "': " + ec.message());
        const auto t0 = std::chrono::steady_clock::now();
        std::string name;
        CommandOutput res;
        if (triv->parsed()) {
            name = "trivial";
            res = cmd_trivial(cfg, dir);
        } else if (disp->parsed()) {
            name = "dispersion";
            res = cmd_dispersion(cfg, dir);
        } else if (bif->parsed()) {
            name = "bifurcation-points";
            res = cmd_bifurcation_points(cfg, dir);
        } else {
            name = "continue";
            res = cmd_continue(cfg, dir);
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_sidecar(dir, name, cfg, res, secs);
        for (const auto& f : res.files) out << (dir / f).string() << '\n';
        if (res.exit_code != 0) {
            err << "wavebif: error[" << kind_label(res.exit_code == 3 ? ErrorKind::empty_result : ErrorKind::numerical_failure)
                << "]: " << one_line(res.summary) << '\n';
        }
        return res.exit_code;
    } catch (const Error& e) {
        return fail(e.kind(), e.what());
    } catch (const io::Json::exception& e) {
        return fail(ErrorKind::invalid_input, e.what());
    } catch (const std::exception& e) {
        return fail(ErrorKind::numerical_failure, e.what());
    }
}

}  // namespace wavebif::cli
