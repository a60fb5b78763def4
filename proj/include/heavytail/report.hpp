#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heavytail/dataset.hpp"
#include "heavytail/gof.hpp"
#include "heavytail/inequality.hpp"

namespace heavytail {

struct AnalysisReport {
  std::string dataset;
  ModelKind hypothesis = ModelKind::Pareto;
  std::size_t bootstraps = 0;
  AlphaMode mode = AlphaMode::PaperLiteral;
  std::uint64_t seed = 0;
  double significance = default_significance;
  std::vector<YearOutcome> outcomes;
  std::optional<CoefficientSeries> coefficients;
};

namespace detail {

inline std::string decision_text(Decision d, ModelKind kind) {
  const std::string law = kind == ModelKind::Pareto ? "Pareto" : "Zipf";
  return d == Decision::NotRejected ? "not rejected (consistent with the " + law + " law)"
                                    : "rejected (not consistent with the " + law + " law)";
}

} // namespace detail

/// Human-readable report. Per-field blocks with the year index as suffix,
/// index 0 being the most recent year.
inline std::string render_text(const AnalysisReport &report) {
  const bool pareto = report.hypothesis == ModelKind::Pareto;
  const auto &years = report.outcomes;
  std::string out;
  auto line = [&](const std::string &s) {
    out += s;
    out += '\n';
  };
  auto num = format_number;

  line(std::string("Analyzing for ") + (pareto ? "Pareto" : "Zipf") + " distribution");
  line("Dataset: " + report.dataset);
  for (std::size_t i = 0; i < years.size(); ++i)
    line("Year " + std::to_string(i) + " = " + years[i].year);
  for (std::size_t i = 0; i < years.size(); ++i)
    if (!years[i].ok())
      line("ERROR " + std::to_string(i) + " (" + years[i].year + "): " + years[i].error);

  for (std::size_t i = 0; i < years.size(); ++i) {
    if (!years[i].ok())
      continue;
    const auto &fit = *years[i].fit;
    const auto idx = std::to_string(i);
    line("xmin" + idx + ": " + num(fit.xmin_initial));
    line("alpha" + idx + ": " + num(fit.alpha));
    if (!pareto)
      line("beta" + idx + ": " + num(fit.beta()));
  }
  if (pareto) {
    for (std::size_t i = 0; i < years.size(); ++i) {
      if (!years[i].ok())
        continue;
      const auto &fit = *years[i].fit;
      const auto idx = std::to_string(i);
      line("MIN D VALUE " + idx + " = " + num(fit.d_min) +
           "; D VALUE INDEX = " + std::to_string(fit.d_index));
      line("Estimated XMIN" + idx + " = " + num(fit.xmin_est));
    }
  }
  for (std::size_t i = 0; i < years.size(); ++i)
    if (years[i].ok())
      line("n1 " + std::to_string(i) + " = " + std::to_string(years[i].fit->n1));
  for (std::size_t i = 0; i < years.size(); ++i)
    if (years[i].ok())
      line("n2 " + std::to_string(i) + " = " + std::to_string(years[i].fit->n2));
  line("Bootstrapping for " + std::to_string(report.bootstraps) + " iterations");
  if (!pareto)
    line("WARNING: This might take a long time");
  for (std::size_t i = 0; i < years.size(); ++i)
    if (years[i].ok())
      line("KSTd " + std::to_string(i) + " = " + num(years[i].gof->kst_data));
  for (std::size_t i = 0; i < years.size(); ++i)
    if (years[i].ok())
      line("p-value: " + num(years[i].gof->p_value));
  for (std::size_t i = 0; i < years.size(); ++i)
    if (years[i].ok())
      line("Decision " + std::to_string(i) + " at significance " + num(report.significance) +
           ": " + detail::decision_text(years[i].gof->decision, report.hypothesis));

  if (report.coefficients) {
    const auto &rows = report.coefficients->rows;
    for (std::size_t i = 0; i < rows.size(); ++i)
      line("Decile coefficient " + std::to_string(i) + " = " + num(rows[i].decile));
    line("Quantile coefficient = quintile ratio (top/bottom 20%)");
    for (std::size_t i = 0; i < rows.size(); ++i)
      line("Quintile coefficient " + std::to_string(i) + " = " + num(rows[i].quintile));
    for (std::size_t i = 0; i < rows.size(); ++i)
      line("Quartile coefficient " + std::to_string(i) + " = " + num(rows[i].quartile));
    for (const auto &[year, why] : report.coefficients->skipped)
      line("Coefficients skipped for " + year + ": " + why);
  }
  return out;
}

inline nlohmann::ordered_json to_json(const CoefficientSeries &series) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto &row : series.rows)
    rows.push_back({{"year", row.year},
                    {"decile", row.decile},
                    {"quintile", row.quintile},
                    {"quartile", row.quartile}});
  return rows;
}

inline std::string render_json(const AnalysisReport &report) {
  nlohmann::ordered_json doc;
  doc["dataset"] = report.dataset;
  doc["hypothesis"] = report.hypothesis == ModelKind::Pareto ? "pareto" : "zipf";
  doc["bootstraps"] = report.bootstraps;
  doc["alpha_mode"] = to_string(report.mode);
  doc["seed"] = report.seed;
  doc["significance"] = report.significance;
  nlohmann::ordered_json years = nlohmann::ordered_json::array();
  nlohmann::ordered_json errors = nlohmann::ordered_json::array();
  for (const auto &outcome : report.outcomes) {
    if (!outcome.ok()) {
      errors.push_back({{"year", outcome.year}, {"message", outcome.error}});
      continue;
    }
    const auto &fit = *outcome.fit;
    const auto &gof = *outcome.gof;
    nlohmann::ordered_json item;
    item["year"] = outcome.year;
    item["xmin"] = fit.xmin_initial;
    item["alpha"] = fit.alpha;
    if (fit.kind == ModelKind::Zipf)
      item["beta"] = fit.beta();
    item["xmin_est"] = fit.xmin_est;
    item["d_min"] = fit.d_min;
    item["d_index"] = fit.d_index;
    item["n1"] = fit.n1;
    item["n2"] = fit.n2;
    item["kst"] = gof.kst_data;
    item["p_counter"] = gof.p_counter;
    item["p_value"] = gof.p_value;
    item["decision"] = to_string(gof.decision);
    item["excluded_rows"] = outcome.excluded_rows;
    years.push_back(std::move(item));
  }
  doc["years"] = std::move(years);
  doc["errors"] = std::move(errors);
  if (report.coefficients)
    doc["coefficients"] = to_json(*report.coefficients);
  return doc.dump(2) + "\n";
}

inline std::string render_csv(const AnalysisReport &report) {
  std::string out = "year,xmin,alpha,xmin_est,d_min,d_index,n1,n2,kst,p_value,decision\n";
  for (const auto &outcome : report.outcomes) {
    if (!outcome.ok())
      continue;
    const auto &fit = *outcome.fit;
    const auto &gof = *outcome.gof;
    out += csv::quote(outcome.year) + ',' + format_number(fit.xmin_initial) + ',' +
           format_number(fit.alpha) + ',' + format_number(fit.xmin_est) + ',' +
           format_number(fit.d_min) + ',' + std::to_string(fit.d_index) + ',' +
           std::to_string(fit.n1) + ',' + std::to_string(fit.n2) + ',' +
           format_number(gof.kst_data) + ',' + format_number(gof.p_value) + ',' +
           to_string(gof.decision) + '\n';
  }
  return out;
}

/// Plot data: one row per year, most recent first.
inline std::string render_coefficients_csv(const CoefficientSeries &series) {
  std::string out = "year,decile,quintile,quartile\n";
  for (const auto &row : series.rows)
    out += csv::quote(row.year) + ',' + format_number(row.decile) + ',' +
           format_number(row.quintile) + ',' + format_number(row.quartile) + '\n';
  return out;
}

} // namespace heavytail
