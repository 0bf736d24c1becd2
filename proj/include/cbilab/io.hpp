#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cbilab/coefficients.hpp"
#include "cbilab/model.hpp"
#include "cbilab/simulate.hpp"

#include "json.hpp"

namespace cbilab {

struct ConvergenceReport;  // harness.hpp

/// Model document layout: {"d", "c", "beta", "B" (array of rows),
/// "nu" ([{point, weight}]), "mu" (d such arrays), optional "x0_mean"}.
/// Missing nu/mu entries mean zero measures; unknown fields are ignored.
nlohmann::json model_to_json(const ModelSpec& spec);
ModelSpec model_from_json(const nlohmann::json& j);

/// Read and parse a model file; `raw_echo`, when given, receives the document
/// exactly as parsed (for verbatim provenance echoes).
ModelSpec load_model_file(const std::filesystem::path& path, nlohmann::json* raw_echo = nullptr);

nlohmann::json spectral_to_json(const SpectralSummary& s);
nlohmann::json coefficients_to_json(const DerivedCoefficients& c, bool ctilde_valid);

nlohmann::json report_to_json(const ConvergenceReport& report);

/// report.json plus the flat tables ks.csv (n, ks, threshold),
/// freq.csv (n, type, median_error) and moments.csv (t_or_n, q, ratio).
void write_convergence_outputs(const ConvergenceReport& report,
                               const std::filesystem::path& out_dir);

/// Lossless double formatting for CSV cells (17 significant digits, '.' decimal).
std::string format_double(double x);

/// Paths CSV: header t,x1,...,xd,path_id.
void write_paths_csv(const std::vector<Path>& paths, const std::filesystem::path& file);

/// Scalar paths CSV: header t,x,path_id.
void write_limit_csv(const std::vector<Path>& paths, const std::filesystem::path& file);

/// Mean CSV: header t,EX_1,...,EX_d.
void write_mean_csv(const std::vector<double>& times, const std::vector<Eigen::VectorXd>& means,
                    const std::filesystem::path& file);

}  // namespace cbilab
