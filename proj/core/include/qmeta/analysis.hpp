#pragma once

// Power-law fits and summary statistics over learning outcomes.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qmeta/es.hpp"
#include "qmeta/metatrain.hpp"

namespace qmeta {

/// infidelity = alpha * c_total^(-beta)
struct ScalingFit {
  double alpha = 0.0;
  double beta = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

/// Ordinary least squares of log10(y) on log10(x). Needs >= 2 points with
/// positive coordinates and at least two distinct x values.
ScalingFit fit_scaling(std::span<const std::pair<double, double>> points);
/// Fit over (mean_c_total, mean_infidelity) of each row.
ScalingFit fit_scaling(const std::vector<EvalRow>& rows);

struct Summary {
  std::size_t n = 0;
  double mean_c_total = 0.0;
  double se_c_total = 0.0;
  double mean_infidelity = 0.0;
  double se_infidelity = 0.0;
  double mean_t_h = 0.0;
  double se_t_h = 0.0;
  double halted_fraction = 0.0;
};

/// Sample means and standard errors (0 for a single outcome).
Summary summarize(std::span<const OutcomeRecord> outcomes);
Summary summarize(std::span<const LearnOutcome> outcomes);

/// Baseline mean minus candidate mean of the total success count.
double delta_c_total(const Summary& baseline, const Summary& candidate);

std::vector<OutcomeRecord> read_outcomes_jsonl(const std::filesystem::path& path);
std::vector<EvalRow> read_eval_csv(const std::filesystem::path& path);

/// Rows grouped by c_target from raw outcome records, in ascending c_target.
std::vector<EvalRow> rows_from_outcomes(std::span<const OutcomeRecord> outcomes);

/// Plain-text report of a fit and its input rows.
std::string scaling_report(const std::vector<EvalRow>& rows, const ScalingFit& fit);

}  // namespace qmeta
