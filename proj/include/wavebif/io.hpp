#pragma once

// Solution records, branch files and CSV tables.
//
// Numbers are written with 17 significant digits so that a record reloads to the same doubles. Non-finite
// values are written as null.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavebif/continuation.hpp"
#include "wavebif/error.hpp"
#include "wavebif/operator.hpp"

namespace wavebif::io {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void dump_to(std::string& out, const Json& j) {
    switch (j.type()) {
        case Json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += Json(it.key()).dump();
                out += ':';
                dump_to(out, it.value());
            }
            out += '}';
            break;
        }
        case Json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                dump_to(out, j[i]);
            }
            out += ']';
            break;
        }
        case Json::value_t::number_float: out += format_double(j.get<double>()); break;
        default: out += j.dump();
    }
}

}  // namespace detail

/// Compact single-line JSON with 17-digit floats.
inline std::string dump(const Json& j) {
    std::string s;
    detail::dump_to(s, j);
    return s;
}

/// Reads a double that may have been written as null (non-finite).
inline double get_double(const Json& j, const std::string& key) {
    if (!j.contains(key)) throw InvalidInput("missing field '" + key + "'");
    const Json& v = j.at(key);
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) throw InvalidInput("field '" + key + "' must be a number");
    return v.get<double>();
}

inline Json to_json(const Diagnostics& d) {
    Json j;
    j["Q"] = d.Q;
    j["bernoulli_residual"] = d.bernoulli_residual;
    j["F_residual"] = d.F_residual;
    j["min_K2"] = d.min_K2;
    j["min_depth"] = d.min_depth;
    j["max_curvature"] = d.max_curvature;
    j["min_surface_speed"] = d.min_surface_speed;
    j["vorticity_Lp"] = d.vorticity_Lp;
    j["amplitude"] = d.amplitude;
    j["amplitude_norm"] = d.amplitude_norm;
    j["self_intersecting"] = d.self_intersecting;
    j["overhanging"] = d.overhanging;
    return j;
}

inline Diagnostics diagnostics_from_json(const Json& j) {
    Diagnostics d;
    d.Q = get_double(j, "Q");
    d.bernoulli_residual = get_double(j, "bernoulli_residual");
    d.F_residual = get_double(j, "F_residual");
    d.min_K2 = get_double(j, "min_K2");
    d.min_depth = get_double(j, "min_depth");
    d.max_curvature = get_double(j, "max_curvature");
    d.min_surface_speed = get_double(j, "min_surface_speed");
    d.vorticity_Lp = get_double(j, "vorticity_Lp");
    d.amplitude = get_double(j, "amplitude");
    d.amplitude_norm = get_double(j, "amplitude_norm");
    d.self_intersecting = j.at("self_intersecting").get<bool>();
    d.overhanging = j.at("overhanging").get<bool>();
    return d;
}

inline Json to_json(const BifurcationPoint& bp) {
    Json j;
    j["lambda0"] = bp.lambda0;
    j["k0"] = bp.k0;
    j["d_lambda"] = bp.d_lambda;
    j["kernel_dim"] = bp.kernel_dim;
    if (bp.closed_form_lambda) j["closed_form_lambda"] = *bp.closed_form_lambda;
    j["mu0"] = bp.mu0;
    j["d_value"] = bp.d_value;
    j["tangential"] = bp.tangential;
    return j;
}

/// Solution record: parameters, cosine coefficients of w (k = 0..N), phi on the 2N x M+1 strip grid with
/// rows indexed by x_i = i L / (2N) and columns by y_j = -h + j h / M, and diagnostics.
inline Json solution_json(const Problem& p, const State& s, const Diagnostics& d) {
    const GridSpec& g = p.grid();
    Json j;
    j["lambda"] = s.lambda;
    j["L"] = g.L();
    j["h"] = g.h();
    j["g"] = p.g();
    j["sigma"] = p.sigma();
    j["vorticity"] = p.vorticity().to_string();
    Json w = Json::array();
    for (int k = 0; k <= g.N(); ++k) w.push_back(s.w.coeff(k));
    j["w_coeffs"] = std::move(w);
    const Eigen::MatrixXd phi = StripField(s.phi).values();
    Json rows = Json::array();
    for (int i = 0; i < phi.rows(); ++i) {
        Json row = Json::array();
        for (int c = 0; c < phi.cols(); ++c) row.push_back(phi(i, c));
        rows.push_back(std::move(row));
    }
    j["phi_values"] = std::move(rows);
    j["diagnostics"] = to_json(d);
    return j;
}

struct SolutionRecord {
    GridSpec grid;
    VorticitySpec vorticity;
    double g = 0.0;
    double sigma = 0.0;
    State state;
    std::optional<Diagnostics> diagnostics;
    std::optional<int> step;
    std::optional<double> ds;

    Problem problem(double ode_tol = default_ode_tol) const { return Problem(grid, vorticity, g, sigma, ode_tol); }
};

inline bool is_solution_record(const Json& j) { return j.is_object() && j.contains("w_coeffs"); }

inline SolutionRecord parse_solution(const Json& j) {
    if (!is_solution_record(j)) throw InvalidInput("not a solution record (no w_coeffs)");
    const double L = get_double(j, "L"), h = get_double(j, "h");
    const double grav = get_double(j, "g"), sigma = get_double(j, "sigma");
    require(std::isfinite(L) && L > 0.0 && std::isfinite(h) && h > 0.0, "record: L and h must be positive");
    require(std::isfinite(grav) && grav > 0.0 && std::isfinite(sigma) && sigma > 0.0, "record: g and sigma must be positive");
    require(j.contains("vorticity") && j.at("vorticity").is_string(), "record: vorticity must be a string");
    const auto& wj = j.at("w_coeffs");
    require(wj.is_array() && wj.size() >= 3, "record: w_coeffs must be an array of at least 3 numbers");
    const int N = static_cast<int>(wj.size()) - 1;
    const auto& pj = j.at("phi_values");
    require(pj.is_array() && static_cast<int>(pj.size()) == 2 * N, "record: phi_values must have 2N rows");
    require(pj[0].is_array() && pj[0].size() >= 3, "record: phi_values rows must have at least 3 entries");
    const int M = static_cast<int>(pj[0].size()) - 1;
    const GridSpec grid(L, h, N, M);
    Eigen::VectorXd w(N + 1);
    for (int k = 0; k <= N; ++k) {
        require(wj[k].is_number(), "record: w_coeffs entries must be numbers");
        w(k) = wj[k].get<double>();
    }
    Eigen::MatrixXd phi(2 * N, M + 1);
    for (int i = 0; i < 2 * N; ++i) {
        require(pj[i].is_array() && static_cast<int>(pj[i].size()) == M + 1, "record: phi_values rows must have M+1 entries");
        for (int c = 0; c <= M; ++c) {
            require(pj[i][c].is_number(), "record: phi_values entries must be numbers");
            phi(i, c) = pj[i][c].get<double>();
        }
    }
    const double lambda = get_double(j, "lambda");
    require(std::isfinite(lambda), "record: lambda must be finite");
    SolutionRecord r{grid, VorticitySpec::parse(j.at("vorticity").get<std::string>()), grav, sigma,
                     State(lambda, PeriodicEvenFunction(grid, w), StripField(grid, phi).modal()), std::nullopt,
                     std::nullopt, std::nullopt};
    if (j.contains("diagnostics")) r.diagnostics = diagnostics_from_json(j.at("diagnostics"));
    if (j.contains("step")) r.step = j.at("step").get<int>();
    if (j.contains("ds")) r.ds = get_double(j, "ds");
    return r;
}

/// Branch file record for one point.
inline Json branch_point_json(const Problem& p, const BranchPoint& pt) {
    Json j = solution_json(p, pt.state, pt.diagnostics);
    j["step"] = pt.step;
    j["ds"] = pt.ds;
    j["newton_iterations"] = pt.newton_iterations;
    return j;
}

inline Json branch_trailer_json(const Branch& br) {
    Json j;
    j["termination"] = to_string(br.termination);
    j["points"] = br.points.size();
    j["direction"] = br.direction;
    j["origin"] = to_json(br.origin);
    if (br.returned_lambda) j["returned_lambda"] = *br.returned_lambda;
    if (!br.message.empty()) j["message"] = br.message;
    return j;
}

inline const char* branch_summary_header = "step,lambda,amplitude,Q,min_K2,min_depth,max_curvature,bernoulli_residual";

inline std::string branch_summary_row(const BranchPoint& pt) {
    const auto& d = pt.diagnostics;
    std::ostringstream os;
    os << pt.step;
    for (double v : {pt.state.lambda, d.amplitude, d.Q, d.min_K2, d.min_depth, d.max_curvature, d.bernoulli_residual})
        os << ',' << format_double(v);
    return os.str();
}

/// Line-delimited branch records followed by the trailer, and the CSV summary.
inline void write_branch(std::ostream& jsonl, std::ostream& csv, const Problem& p, const Branch& br) {
    csv << branch_summary_header << '\n';
    for (const auto& pt : br.points) {
        jsonl << dump(branch_point_json(p, pt)) << '\n';
        csv << branch_summary_row(pt) << '\n';
    }
    jsonl << dump(branch_trailer_json(br)) << '\n';
}

struct LoadedFile {
    std::vector<SolutionRecord> records;
    std::vector<int> lines;           // source line of each record (1-based)
    std::optional<Json> trailer;
};

/// Reads a single JSON solution document or a line-delimited branch file. Errors name the line.
inline LoadedFile load_solution_stream(std::istream& in, const std::string& name) {
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    LoadedFile out;
    auto add = [&](const Json& j, int line) {
        try {
            if (is_solution_record(j)) {
                out.records.push_back(parse_solution(j));
                out.lines.push_back(line);
            } else if (j.is_object() && j.contains("termination")) {
                out.trailer = j;
            } else {
                throw InvalidInput("record is neither a solution nor a branch trailer");
            }
        } catch (const Error& e) {
            throw InvalidInput(name + ":" + std::to_string(line) + ": " + e.what());
        } catch (const Json::exception& e) {
            throw InvalidInput(name + ":" + std::to_string(line) + ": " + e.what());
        }
    };
    const Json whole = Json::parse(text, nullptr, false);
    if (!whole.is_discarded() && whole.is_object()) {
        add(whole, 1);
        return out;
    }
    std::istringstream lines(text);
    std::string line;
    int no = 0;
    while (std::getline(lines, line)) {
        ++no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw InvalidInput(name + ":" + std::to_string(no) + ": parse error: " + e.what());
        }
        add(j, no);
    }
    if (out.records.empty() && !out.trailer) throw InvalidInput(name + ": no records");
    return out;
}

inline LoadedFile load_solution_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    return load_solution_stream(in, path);
}

/// Reconstructs a branch (points and termination) from a loaded branch file.
inline Branch branch_from_file(const LoadedFile& f) {
    require(f.trailer.has_value(), "branch file has no trailer record");
    Branch br;
    br.termination = termination_from_string(f.trailer->at("termination").get<std::string>());
    br.direction = f.trailer->value("direction", 1);
    if (f.trailer->contains("origin")) {
        const auto& o = f.trailer->at("origin");
        br.origin.lambda0 = get_double(o, "lambda0");
        br.origin.k0 = o.at("k0").get<int>();
        br.origin.d_lambda = get_double(o, "d_lambda");
        br.origin.kernel_dim = o.at("kernel_dim").get<int>();
        br.origin.mu0 = get_double(o, "mu0");
        br.origin.d_value = get_double(o, "d_value");
        br.origin.tangential = o.value("tangential", false);
        if (o.contains("closed_form_lambda")) br.origin.closed_form_lambda = get_double(o, "closed_form_lambda");
    }
    if (f.trailer->contains("returned_lambda")) br.returned_lambda = get_double(*f.trailer, "returned_lambda");
    br.message = f.trailer->value("message", "");
    for (const auto& r : f.records)
        br.points.push_back(BranchPoint{r.step.value_or(0), r.ds.value_or(0.0), 0, r.state,
                                        r.diagnostics.value_or(Diagnostics{})});
    return br;
}

}  // namespace wavebif::io
