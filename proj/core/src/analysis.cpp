#include "qmeta/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qmeta {

ScalingFit fit_scaling(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("scaling fit needs at least 2 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("scaling fit needs positive points");
    sx += std::log10(x);
    sy += std::log10(y);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log10(x) - mx;
    const double dy = std::log10(y) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("scaling fit needs distinct x values");
  const double slope = sxy / sxx;
  ScalingFit f;
  f.beta = -slope;
  f.alpha = std::pow(10.0, my - slope * mx);
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  f.n_points = static_cast<int>(points.size());
  return f;
}

ScalingFit fit_scaling(const std::vector<EvalRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(r.mean_c_total, r.mean_infidelity);
  return fit_scaling(pts);
}

namespace {

struct Acc {
  double sum = 0.0;
  double sq = 0.0;
  void add(double v) {
    sum += v;
    sq += v * v;
  }
  std::pair<double, double> mean_se(std::size_t n) const {
    const double dn = static_cast<double>(n);
    const double mean = sum / dn;
    if (n < 2) return {mean, 0.0};
    const double var = std::max(0.0, (sq - dn * mean * mean) / (dn - 1.0));
    return {mean, std::sqrt(var / dn)};
  }
};

template <class Outcome>
Summary summarize_any(std::span<const Outcome> outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("summary of an empty outcome set");
  Acc c, f, t;
  double halted = 0.0;
  for (const auto& o : outcomes) {
    c.add(static_cast<double>(o.c_total));
    f.add(o.infidelity);
    t.add(static_cast<double>(o.t_h));
    halted += o.halted ? 1.0 : 0.0;
  }
  Summary s;
  s.n = outcomes.size();
  std::tie(s.mean_c_total, s.se_c_total) = c.mean_se(s.n);
  std::tie(s.mean_infidelity, s.se_infidelity) = f.mean_se(s.n);
  std::tie(s.mean_t_h, s.se_t_h) = t.mean_se(s.n);
  s.halted_fraction = halted / static_cast<double>(s.n);
  return s;
}

}  // namespace

Summary summarize(std::span<const OutcomeRecord> outcomes) { return summarize_any(outcomes); }
Summary summarize(std::span<const LearnOutcome> outcomes) { return summarize_any(outcomes); }

double delta_c_total(const Summary& baseline, const Summary& candidate) {
  return baseline.mean_c_total - candidate.mean_c_total;
}

std::vector<OutcomeRecord> read_outcomes_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<OutcomeRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(outcome_from_jsonl(line));
  }
  return out;
}

std::vector<EvalRow> read_eval_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("c_target,mean_c_total,mean_infidelity,mean_t_h,n", 0) != 0) {
    throw std::runtime_error(path.string() + ": not an evaluation table");
  }
  std::vector<EvalRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 5) throw std::runtime_error(path.string() + ": short row '" + line + "'");
    EvalRow r;
    r.c_target = std::stoull(cells[0]);
    r.mean_c_total = std::stod(cells[1]);
    r.mean_infidelity = std::stod(cells[2]);
    r.mean_t_h = std::stod(cells[3]);
    r.n = std::stoi(cells[4]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<EvalRow> rows_from_outcomes(std::span<const OutcomeRecord> outcomes) {
  std::map<std::uint64_t, std::vector<OutcomeRecord>> groups;
  for (const auto& o : outcomes) groups[o.c_target].push_back(o);
  std::vector<EvalRow> rows;
  for (const auto& [c_target, group] : groups) {
    const Summary s = summarize(std::span<const OutcomeRecord>(group));
    rows.push_back({c_target, s.mean_c_total, s.mean_infidelity, s.mean_t_h, s.halted_fraction,
                    static_cast<int>(s.n)});
  }
  return rows;
}

std::string scaling_report(const std::vector<EvalRow>& rows, const ScalingFit& fit) {
  std::ostringstream out;
  char buf[160];
  out << "c_target      mean_c_total   mean_infidelity  mean_t_h      n\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-12llu  %-13.6g  %-15.6g  %-12.6g  %d\n",
                  static_cast<unsigned long long>(r.c_target), r.mean_c_total, r.mean_infidelity,
                  r.mean_t_h, r.n);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "fit: infidelity = %.6g * C^-%.6f  (R^2 = %.6f, %d points)\n",
                fit.alpha, fit.beta, fit.r_squared, fit.n_points);
  out << buf;
  return out.str();
}

}  // namespace qmeta
