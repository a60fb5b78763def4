// heavytail: fit Pareto/Zipf laws to ranking data, bootstrap goodness-of-fit,
// inequality ratios, and ranking-page ingestion.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heavytail/heavytail.hpp"

namespace fs = std::filesystem;
using namespace heavytail;

namespace {

enum ExitCode : int { Success = 0, TransportFailure = 1, InputFailure = 2, AnalysisFailure = 3 };

int exit_code_for(const Error &e) {
  switch (e.code()) {
  case ErrorCode::Transport:
  case ErrorCode::Timeout:
    return TransportFailure;
  case ErrorCode::InsufficientData:
  case ErrorCode::DegenerateData:
    return AnalysisFailure;
  default:
    return InputFailure;
  }
}

struct GlobalOptions {
  double timeout_seconds = 0.0;
  std::size_t parallel = 4;
  std::string selectors_path;
  std::uint64_t seed = 12345;
};

FetchOptions fetch_options(const GlobalOptions &g) {
  FetchOptions options = FetchOptions::from_environment();
  if (g.timeout_seconds > 0.0)
    options.timeout = std::chrono::milliseconds(static_cast<long long>(g.timeout_seconds * 1000.0));
  return options;
}

Selectors selectors(const GlobalOptions &g) {
  if (g.selectors_path.empty())
    return {};
  return Selectors::from_json_text(read_text_file(g.selectors_path));
}

bool is_url(const std::string &s) {
  return s.starts_with("http://") || s.starts_with("https://");
}

bool is_html_path(const fs::path &p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".html" || ext == ".htm";
}

void print_warnings(const std::vector<std::string> &warnings) {
  for (const auto &w : warnings)
    std::cerr << "warning: " << w << '\n';
}

/// Dataset from a ranking URL, a local ranking page, or a JSON/CSV file.
Dataset acquire(const std::string &input, const GlobalOptions &g) {
  const auto sel = selectors(g);
  if (is_url(input)) {
    HttplibTransport transport;
    auto pages = download_ranking(input, transport, fetch_options(g), sel, g.parallel);
    print_warnings(pages.warnings);
    auto built = build_dataset(IndexEntry{input, input}, pages.pages, sel);
    print_warnings(built.warnings);
    return std::move(built.dataset);
  }
  if (is_html_path(input)) {
    const std::string markup = read_text_file(input);
    auto years = parse_years(markup, sel);
    const std::string label = years.fallback ? std::string(fallback_year_label)
                                             : years.years.front().label;
    auto built = build_dataset(IndexEntry{fs::path(input).stem().string(), input},
                               {PageInput{label, markup}}, sel);
    print_warnings(built.warnings);
    return std::move(built.dataset);
  }
  return load_dataset(input);
}

// --- fetch-index ------------------------------------------------------------

int cmd_fetch_index(const std::string &url, const GlobalOptions &g) {
  try {
    HttplibTransport transport;
    const std::string body = fetch_page(url, transport, fetch_options(g));
    const auto entries = parse_index(body, selectors(g));
    for (std::size_t i = 0; i < entries.size(); ++i)
      std::cout << (i + 1) << ". " << entries[i].title << '\t'
                << resolve_url(url, entries[i].href) << '\n';
    std::cerr << "Downloaded Datalist successfully (" << entries.size() << " rankings)\n";
    return Success;
  } catch (const Error &e) {
    // Parse failures are reported the same way as a failed connection.
    std::cerr << "Could not connect to " << url << ": " << e.what() << '\n';
    return TransportFailure;
  }
}

// --- fetch ------------------------------------------------------------------

struct FetchArgs {
  std::string url;
  std::vector<std::string> pages; // LABEL=FILE
  std::string out;
  std::string name;
  std::string format;
};

FileFormat parse_format(const std::string &format, const fs::path &out) {
  if (format == "json")
    return FileFormat::Json;
  if (format == "csv")
    return FileFormat::Csv;
  return format_for_path(out);
}

int cmd_fetch(const FetchArgs &args, const GlobalOptions &g) {
  const auto sel = selectors(g);
  BuildReport built;
  if (!args.pages.empty()) {
    std::vector<PageInput> pages;
    for (const auto &spec : args.pages) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0)
        throw Error(ErrorCode::Validation, "--page expects LABEL=FILE, got '" + spec + "'");
      pages.push_back(PageInput{spec.substr(0, eq), read_text_file(spec.substr(eq + 1))});
    }
    const std::string name = args.name.empty() ? "dataset" : args.name;
    built = build_dataset(IndexEntry{name, args.pages.front().substr(args.pages.front().find('=') + 1)},
                          pages, sel);
  } else {
    if (args.url.empty())
      throw Error(ErrorCode::Validation, "fetch needs a ranking URL or --page LABEL=FILE");
    HttplibTransport transport;
    try {
      auto pages = download_ranking(args.url, transport, fetch_options(g), sel, g.parallel);
      print_warnings(pages.warnings);
      built = build_dataset(IndexEntry{args.name.empty() ? args.url : args.name, args.url},
                            pages.pages, sel);
    } catch (const Error &e) {
      if (e.code() == ErrorCode::Transport || e.code() == ErrorCode::Timeout)
        std::cerr << "Could not connect to " << args.url << '\n';
      throw;
    }
  }
  print_warnings(built.warnings);
  save_dataset(built.dataset, args.out, parse_format(args.format, args.out));
  std::cerr << "saved " << built.dataset.years.size() << " year(s), layout "
            << to_string(built.format) << ", to " << args.out << '\n';
  return Success;
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string input;
  std::string dist = "pareto";
  std::size_t bootstraps = 1000;
  std::string alpha_mode = "paper";
  double significance = default_significance;
  std::string output = "text";
  bool with_coefs = false;
  std::string uniform_lower = "one";
};

int cmd_analyze(const AnalyzeArgs &args, const GlobalOptions &g) {
  Dataset dataset = acquire(args.input, g);
  require_values(dataset);

  AnalysisReport report;
  report.dataset = dataset.name;
  report.hypothesis = args.dist == "zipf" ? ModelKind::Zipf : ModelKind::Pareto;
  report.bootstraps = args.bootstraps;
  report.mode = args.alpha_mode == "refit" ? AlphaMode::ClausetRefit : AlphaMode::PaperLiteral;
  report.seed = g.seed;
  report.significance = args.significance;

  TestOptions options;
  options.workers = g.parallel;
  options.significance = args.significance;
  options.uniform_lower = args.uniform_lower == "data-min" ? UniformLower::DataMin : UniformLower::One;
  report.outcomes = run_test(dataset, report.hypothesis, args.bootstraps, report.mode, g.seed, options);
  if (args.with_coefs)
    report.coefficients = coefficient_series(dataset);

  for (const auto &outcome : report.outcomes) {
    if (outcome.excluded_rows > 0)
      std::cerr << "warning: year " << outcome.year << ": " << outcome.excluded_rows
                << " row(s) without a numeric value excluded\n";
    if (!outcome.ok())
      std::cerr << "error: year " << outcome.year << ": " << outcome.error << '\n';
  }

  if (args.output == "json")
    std::cout << render_json(report);
  else if (args.output == "csv")
    std::cout << render_csv(report);
  else
    std::cout << render_text(report);

  const bool any_ok = std::any_of(report.outcomes.begin(), report.outcomes.end(),
                                  [](const YearOutcome &o) { return o.ok(); });
  return any_ok ? Success : AnalysisFailure;
}

// --- coefs ------------------------------------------------------------------

int cmd_coefs(const std::string &input, const std::string &out, const GlobalOptions &g) {
  const Dataset dataset = acquire(input, g);
  require_values(dataset);
  const auto series = coefficient_series(dataset);
  for (const auto &[year, why] : series.skipped)
    std::cerr << "warning: year " << year << " skipped: " << why << '\n';
  if (series.rows.empty())
    throw Error(ErrorCode::Validation, "no year has at least 2 numeric values");
  const std::string csv_text = render_coefficients_csv(series);
  if (out.empty())
    std::cout << csv_text;
  else
    write_text_file(out, csv_text);
  return Success;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string dist = "pareto";
  double alpha = 2.5;
  double xmin = 1.0;
  std::size_t n = 100;
  std::size_t ranks = 0;
  std::size_t years = 1;
  int first_year = 2020;
  std::string out;
};

int cmd_simulate(const SimulateArgs &args, const GlobalOptions &g) {
  if (args.n < 1 || args.years < 1)
    throw Error(ErrorCode::Validation, "--n and --years must be at least 1");
  const bool pareto = args.dist == "pareto";
  const DistributionModel model =
      pareto ? DistributionModel::pareto(args.alpha, args.xmin)
             : DistributionModel::zipf(args.alpha, args.ranks == 0 ? args.n : args.ranks);

  Dataset dataset;
  dataset.name = pareto ? "synthetic pareto(alpha=" + format_number(args.alpha) +
                              ", xmin=" + format_number(args.xmin) + ")"
                        : "synthetic zipf(s=" + format_number(args.alpha) +
                              ", N=" + std::to_string(model.n_ranks()) + ")";
  dataset.source = "simulate seed=" + std::to_string(g.seed);
  for (std::size_t y = 0; y < args.years; ++y) {
    auto rng = RandomStream::derive(g.seed, {y});
    std::vector<double> values;
    if (pareto) {
      values = pareto_sample(model, rng, args.n);
    } else {
      for (std::size_t r : zipf_sample(model, rng, args.n))
        values.push_back(static_cast<double>(r));
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    YearTable table;
    table.label = std::to_string(args.first_year - static_cast<int>(y));
    for (std::size_t r = 0; r < order.size(); ++r) {
      char brand[32];
      std::snprintf(brand, sizeof brand, "brand-%04zu", order[r] + 1);
      table.rows.push_back(Row{static_cast<std::int64_t>(r + 1), brand, values[order[r]]});
    }
    dataset.years.push_back(std::move(table));
  }
  save_dataset(dataset, args.out, format_for_path(args.out));
  return Success;
}

// --- convert ----------------------------------------------------------------

int cmd_convert(const std::string &in, const std::string &out, const std::string &format) {
  const Dataset dataset = load_dataset(in);
  save_dataset(dataset, out, parse_format(format, out));
  return Success;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Heavy-tailed distribution fitting for ranking data"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--timeout", g.timeout_seconds, "HTTP timeout in seconds (env HEAVYTAIL_TIMEOUT)")
      ->check(CLI::PositiveNumber);
  app.add_option("--parallel", g.parallel, "Worker threads for bootstrap and page downloads")
      ->check(CLI::Range(1, 256));
  app.add_option("--selectors", g.selectors_path, "JSON file overriding the HTML selectors")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master random seed");

  std::string index_url;
  auto *fetch_index = app.add_subcommand("fetch-index", "List the rankings on an index page");
  fetch_index->add_option("url", index_url, "Index page URL")->required();

  FetchArgs fetch;
  auto *fetch_cmd = app.add_subcommand("fetch", "Download a ranking (all years) into a dataset file");
  fetch_cmd->add_option("url", fetch.url, "Ranking page URL");
  fetch_cmd->add_option("--page", fetch.pages, "Local page as LABEL=FILE (repeatable, newest first)");
  fetch_cmd->add_option("-o,--out", fetch.out, "Output file (.json or .csv)")->required();
  fetch_cmd->add_option("--name", fetch.name, "Dataset name");
  fetch_cmd->add_option("--format", fetch.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  AnalyzeArgs analyze;
  auto *analyze_cmd = app.add_subcommand("analyze", "Fit a law and run the bootstrap test per year");
  analyze_cmd->add_option("input", analyze.input, "Dataset file, ranking page (.html) or URL")->required();
  analyze_cmd->add_option("--dist", analyze.dist, "Hypothesis")->check(CLI::IsMember({"pareto", "zipf"}));
  analyze_cmd->add_option("--bootstraps", analyze.bootstraps, "Bootstrap iterations")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
  analyze_cmd->add_option("--alpha-mode", analyze.alpha_mode, "Exponent handling during the xmin scan")
      ->check(CLI::IsMember({"paper", "refit"}));
  analyze_cmd->add_option("--significance", analyze.significance, "Significance level")
      ->check(CLI::Range(0.0, 1.0));
  analyze_cmd->add_option("--output", analyze.output, "Report format")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  analyze_cmd->add_flag("--with-coefs", analyze.with_coefs, "Append decile/quintile/quartile ratios");
  analyze_cmd->add_option("--uniform-lower", analyze.uniform_lower,
                          "Lower bound of the uniform component below the cutoff")
      ->check(CLI::IsMember({"one", "data-min"}));

  std::string coefs_input, coefs_out;
  auto *coefs_cmd = app.add_subcommand("coefs", "Per-year ratio coefficients as CSV");
  coefs_cmd->add_option("input", coefs_input, "Dataset file, ranking page (.html) or URL")->required();
  coefs_cmd->add_option("-o,--out", coefs_out, "Write CSV to a file instead of stdout");

  SimulateArgs sim;
  auto *sim_cmd = app.add_subcommand("simulate", "Write a synthetic dataset drawn from a model");
  sim_cmd->add_option("--dist", sim.dist, "Model")->check(CLI::IsMember({"pareto", "zipf"}));
  sim_cmd->add_option("--alpha", sim.alpha, "Pareto alpha or Zipf exponent s");
  sim_cmd->add_option("--xmin", sim.xmin, "Pareto lower cutoff");
  sim_cmd->add_option("--n", sim.n, "Observations per year");
  sim_cmd->add_option("--ranks", sim.ranks, "Zipf truncation N (default: --n)");
  sim_cmd->add_option("--years", sim.years, "Number of years");
  sim_cmd->add_option("--first-year", sim.first_year, "Label of the most recent year");
  sim_cmd->add_option("-o,--out", sim.out, "Output file (.json or .csv)")->required();

  std::string convert_in, convert_out, convert_format;
  auto *convert_cmd = app.add_subcommand("convert", "Convert a dataset between JSON and CSV");
  convert_cmd->add_option("input", convert_in, "Input dataset")->required()->check(CLI::ExistingFile);
  convert_cmd->add_option("output", convert_out, "Output dataset")->required();
  convert_cmd->add_option("--format", convert_format, "Output format (default: by extension)")
      ->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? Success : InputFailure;
  }

  try {
    if (*fetch_index)
      return cmd_fetch_index(index_url, g);
    if (*fetch_cmd)
      return cmd_fetch(fetch, g);
    if (*analyze_cmd)
      return cmd_analyze(analyze, g);
    if (*coefs_cmd)
      return cmd_coefs(coefs_input, coefs_out, g);
    if (*sim_cmd)
      return cmd_simulate(sim, g);
    if (*convert_cmd)
      return cmd_convert(convert_in, convert_out, convert_format);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return InputFailure;
  }
  return InputFailure;
}
