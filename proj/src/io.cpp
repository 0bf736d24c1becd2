#include "cbilab/io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include "cbilab/harness.hpp"

namespace cbilab {

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json measure_to_json(const AtomMeasure& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : m.atoms) {
        arr.push_back({{"point", vector_to_json(a.point)}, {"weight", a.weight}});
    }
    return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array()) throw ParseError("field '" + field + "' must be an array of numbers");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            throw ParseError("field '" + field + "' entry " + std::to_string(i + 1) +
                             " is not a number");
        }
        v[static_cast<int>(i)] = j[i].get<double>();
    }
    return v;
}

AtomMeasure measure_from_json(const nlohmann::json& j, const std::string& field) {
    AtomMeasure m;
    if (j.is_null()) return m;
    if (!j.is_array()) throw ParseError("field '" + field + "' must be an array of atoms");
    for (std::size_t k = 0; k < j.size(); ++k) {
        const auto& entry = j[k];
        if (!entry.is_object() || !entry.contains("point") || !entry.contains("weight")) {
            throw ParseError("field '" + field + "' atom " + std::to_string(k + 1) +
                             " must be {point, weight}");
        }
        Atom a;
        a.point = vector_from_json(entry["point"], field + ".point");
        if (!entry["weight"].is_number()) {
            throw ParseError("field '" + field + "' atom " + std::to_string(k + 1) +
                             " weight is not a number");
        }
        a.weight = entry["weight"].get<double>();
        m.atoms.push_back(std::move(a));
    }
    return m;
}

}  // namespace

nlohmann::json model_to_json(const ModelSpec& spec) {
    nlohmann::json j;
    j["d"] = spec.d;
    j["c"] = vector_to_json(spec.c);
    j["beta"] = vector_to_json(spec.beta);
    j["B"] = matrix_to_json(spec.B);
    j["nu"] = measure_to_json(spec.nu);
    nlohmann::json mu = nlohmann::json::array();
    for (const auto& m : spec.mu) mu.push_back(measure_to_json(m));
    j["mu"] = std::move(mu);
    if (spec.x0_mean.size() > 0) j["x0_mean"] = vector_to_json(spec.x0_mean);
    return j;
}

ModelSpec model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("model document must be a JSON object");
    for (const char* field : {"d", "c", "beta", "B"}) {
        if (!j.contains(field)) throw ParseError(std::string("missing field '") + field + "'");
    }
    ModelSpec spec;
    if (!j["d"].is_number_integer()) throw ParseError("field 'd' must be an integer");
    spec.d = j["d"].get<int>();
    if (spec.d < 1) throw ParseError("field 'd' must be positive");
    spec.c = vector_from_json(j["c"], "c");
    spec.beta = vector_from_json(j["beta"], "beta");

    const auto& B = j["B"];
    if (!B.is_array() || static_cast<int>(B.size()) != spec.d) {
        throw ParseError("field 'B' must be an array of " + std::to_string(spec.d) + " rows");
    }
    spec.B.resize(spec.d, spec.d);
    for (int i = 0; i < spec.d; ++i) {
        const Eigen::VectorXd row = vector_from_json(B[i], "B row " + std::to_string(i + 1));
        if (row.size() != spec.d) {
            throw ParseError("field 'B' row " + std::to_string(i + 1) + " has wrong length");
        }
        spec.B.row(i) = row.transpose();
    }

    spec.nu = j.contains("nu") ? measure_from_json(j["nu"], "nu") : AtomMeasure{};
    spec.mu.assign(spec.d, AtomMeasure{});
    if (j.contains("mu") && !j["mu"].is_null()) {
        const auto& mu = j["mu"];
        if (!mu.is_array() || static_cast<int>(mu.size()) != spec.d) {
            throw ParseError("field 'mu' must be an array of " + std::to_string(spec.d) +
                             " measures");
        }
        for (int i = 0; i < spec.d; ++i) {
            spec.mu[i] = measure_from_json(mu[i], "mu_" + std::to_string(i + 1));
        }
    }
    if (j.contains("x0_mean") && !j["x0_mean"].is_null()) {
        spec.x0_mean = vector_from_json(j["x0_mean"], "x0_mean");
    }
    return spec;
}

ModelSpec load_model_file(const std::filesystem::path& path, nlohmann::json* raw_echo) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot open model file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (raw_echo) *raw_echo = j;
    return model_from_json(j);
}

nlohmann::json spectral_to_json(const SpectralSummary& s) {
    nlohmann::json j;
    j["s"] = s.s;
    j["u"] = vector_to_json(s.u);
    j["v"] = vector_to_json(s.v);
    j["Pi"] = matrix_to_json(s.Pi);
    if (std::isfinite(s.kappa)) {
        j["kappa"] = s.kappa;
    } else {
        j["kappa"] = "inf";
    }
    j["c"] = s.cconst;
    j["irreducible"] = s.irreducible;
    return j;
}

nlohmann::json coefficients_to_json(const DerivedCoefficients& c, bool ctilde_valid) {
    nlohmann::json j;
    j["Btilde"] = matrix_to_json(c.Btilde);
    j["betatilde"] = vector_to_json(c.betatilde);
    nlohmann::json ck = nlohmann::json::array();
    for (const auto& m : c.Ck) ck.push_back(matrix_to_json(m));
    j["Ck"] = std::move(ck);
    j["Cbar"] = matrix_to_json(c.Cbar);
    j["betatilde2"] = vector_to_json(c.betatilde2);
    if (ctilde_valid) j["Ctilde"] = matrix_to_json(c.Ctilde);
    j["V"] = matrix_to_json(c.V);
    j["a"] = c.a;
    j["b"] = c.b;
    return j;
}

nlohmann::json report_to_json(const ConvergenceReport& report) {
    nlohmann::json j;
    j["model"] = report.model_echo;
    j["spectral"] = spectral_to_json(report.spectral);
    j["coefficients"] = coefficients_to_json(report.coefficients, report.ctilde_valid);
    j["n_grid"] = report.n_grid;
    j["t"] = report.t;
    j["paths"] = report.paths;
    j["seed"] = report.seed;
    j["dt"] = report.dt;
    j["limit"] = {{"a", report.a},
                  {"b", report.b},
                  {"degenerate", report.degenerate},
                  {"gamma_shape", report.gamma_shape},
                  {"gamma_rate", report.gamma_rate}};
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& level : report.levels) {
        nlohmann::json l;
        l["n"] = level.n;
        l["ks"] = level.ks;
        l["ks_threshold"] = level.ks_threshold;
        l["freq_median_error"] = vector_to_json(level.freq_median_error);
        l["dropped_paths"] = level.dropped_paths;
        l["median_angle"] = level.median_angle;
        l["martingale_k"] = level.martingale_k;
        l["martingale_z"] = matrix_to_json(level.martingale_z);
        l["x_ratio_q1"] = level.x_ratio_q1;
        l["level_seed"] = level.level_seed;
        levels.push_back(std::move(l));
    }
    j["levels"] = std::move(levels);
    j["state_growth"] = {{"q", report.state_growth.q},
                         {"grid", report.state_growth.grid},
                         {"ratios", report.state_growth.ratios},
                         {"spread", report.state_growth.spread},
                         {"slope", report.state_growth.slope}};
    j["martingale_growth"] = {{"q", report.martingale_growth.q},
                              {"grid", report.martingale_growth.grid},
                              {"ratios", report.martingale_growth.ratios},
                              {"spread", report.martingale_growth.spread},
                              {"slope", report.martingale_growth.slope}};
    j["ks_summary"] = {{"max_step_increase", report.max_ks_step_increase},
                       {"weakly_decreasing", report.ks_weakly_decreasing}};
    // everything time-dependent lives here so the rest of the document is
    // reproducible byte for byte
    char stamp[32] = {0};
    const std::time_t now = std::time(nullptr);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["metadata"] = {{"runtime_seconds", report.runtime_seconds}, {"created", stamp}};
    return j;
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw FileNotFound("cannot write: " + file.string());
    return out;
}

}  // namespace

void write_convergence_outputs(const ConvergenceReport& report,
                               const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        auto out = open_out(out_dir / "report.json");
        out << report_to_json(report).dump(2) << "\n";
    }
    {
        auto out = open_out(out_dir / "ks.csv");
        out << "n,ks,threshold\n";
        for (const auto& level : report.levels) {
            out << level.n << "," << format_double(level.ks) << ","
                << format_double(level.ks_threshold) << "\n";
        }
    }
    {
        auto out = open_out(out_dir / "freq.csv");
        out << "n,type,median_error\n";
        for (const auto& level : report.levels) {
            for (int i = 0; i < level.freq_median_error.size(); ++i) {
                out << level.n << "," << (i + 1) << ","
                    << format_double(level.freq_median_error[i]) << "\n";
            }
        }
    }
    {
        auto out = open_out(out_dir / "moments.csv");
        out << "t_or_n,q,ratio\n";
        for (std::size_t i = 0; i < report.state_growth.grid.size(); ++i) {
            out << report.state_growth.grid[i] << "," << report.state_growth.q << ","
                << format_double(report.state_growth.ratios[i]) << "\n";
        }
        for (std::size_t i = 0; i < report.martingale_growth.grid.size(); ++i) {
            out << report.martingale_growth.grid[i] << "," << report.martingale_growth.q << ","
                << format_double(report.martingale_growth.ratios[i]) << "\n";
        }
    }
}

void write_paths_csv(const std::vector<Path>& paths, const std::filesystem::path& file) {
    auto out = open_out(file);
    const int d = paths.empty() ? 0 : static_cast<int>(paths.front().states.front().size());
    out << "t";
    for (int i = 1; i <= d; ++i) out << ",x" << i;
    out << ",path_id\n";
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const Path& path = paths[p];
        for (std::size_t k = 0; k < path.times.size(); ++k) {
            out << format_double(path.times[k]);
            for (int i = 0; i < d; ++i) out << "," << format_double(path.states[k][i]);
            out << "," << p << "\n";
        }
    }
}

void write_limit_csv(const std::vector<Path>& paths, const std::filesystem::path& file) {
    auto out = open_out(file);
    out << "t,x,path_id\n";
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const Path& path = paths[p];
        for (std::size_t k = 0; k < path.times.size(); ++k) {
            out << format_double(path.times[k]) << "," << format_double(path.states[k][0]) << ","
                << p << "\n";
        }
    }
}

void write_mean_csv(const std::vector<double>& times, const std::vector<Eigen::VectorXd>& means,
                    const std::filesystem::path& file) {
    auto out = open_out(file);
    const int d = means.empty() ? 0 : static_cast<int>(means.front().size());
    out << "t";
    for (int i = 1; i <= d; ++i) out << ",EX_" << i;
    out << "\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        out << format_double(times[k]);
        for (int i = 0; i < d; ++i) out << "," << format_double(means[k][i]);
        out << "\n";
    }
}

}  // namespace cbilab
