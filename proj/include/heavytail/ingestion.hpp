#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heavytail/dataset.hpp"
#include "heavytail/error.hpp"
#include "heavytail/html.hpp"

namespace heavytail {

/// CSS selectors used to locate the index list, the ranking rows and the
/// year selector. Defaults match the RankingTheBrands markup.
struct Selectors {
  std::string index_anchor = "a.listRankings";
  std::string index_name = "span.rankingName";
  std::string row = "div.top100row";
  std::string rank = "div.pos";
  std::string name = "div.name";
  std::string value = "div.weighted";
  std::string year_select = "select[name]";
  std::string year_option = "option";

  /// Overrides from a JSON object; unknown keys are rejected.
  static Selectors from_json_text(std::string_view text) {
    Selectors sel;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error &e) {
      throw Error(ErrorCode::Validation, std::string("selector file: ") + e.what());
    }
    if (!doc.is_object())
      throw Error(ErrorCode::Validation, "selector file: expected an object");
    std::pair<const char *, std::string *> fields[] = {
        {"index_anchor", &sel.index_anchor}, {"index_name", &sel.index_name},
        {"row", &sel.row},                   {"rank", &sel.rank},
        {"name", &sel.name},                 {"value", &sel.value},
        {"year_select", &sel.year_select},   {"year_option", &sel.year_option}};
    for (const auto &[key, value] : doc.items()) {
      std::string *target = nullptr;
      for (auto &[name, field] : fields)
        if (key == name)
          target = field;
      if (!target)
        throw Error(ErrorCode::Validation, "selector file: unknown key '/" + key + "'");
      if (!value.is_string())
        throw Error(ErrorCode::Validation, "selector file: /" + key + " must be a string");
      *target = value.get<std::string>();
      html::Selector check(*target);
    }
    return sel;
  }
};

struct IndexEntry {
  std::string title;
  std::string href;

  bool operator==(const IndexEntry &) const = default;
};

enum class ColumnFormat { NameOnly, RankName, NameValue, RankNameValue };

inline bool has_rank(ColumnFormat f) {
  return f == ColumnFormat::RankName || f == ColumnFormat::RankNameValue;
}
inline bool has_value(ColumnFormat f) {
  return f == ColumnFormat::NameValue || f == ColumnFormat::RankNameValue;
}

inline std::string to_string(ColumnFormat f) {
  switch (f) {
  case ColumnFormat::NameOnly: return "Name";
  case ColumnFormat::RankName: return "Rank,Name";
  case ColumnFormat::NameValue: return "Name,Value";
  case ColumnFormat::RankNameValue: return "Rank,Name,Value";
  }
  return "?";
}

/// Decimal normalization for ranking cells. Spaces are dropped; "7,011" and
/// "1,234,567.5" use commas as thousands separators; a single comma followed
/// by one or two digits ("9,5") is a decimal comma. Anything else is rejected.
inline std::optional<double> parse_decimal(std::string_view raw) {
  std::string s;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto c = static_cast<unsigned char>(raw[i]);
    if (c == 0xC2 && i + 1 < raw.size() && static_cast<unsigned char>(raw[i + 1]) == 0xA0) {
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
      continue;
    s += raw[i];
  }
  if (s.empty())
    return std::nullopt;

  static const std::regex plain(R"(^\d+(\.\d+)?$|^\.\d+$)");
  static const std::regex grouped(R"(^\d{1,3}(,\d{3})+(\.\d+)?$)");
  static const std::regex decimal_comma(R"(^\d+,\d{1,2}$)");

  std::string normalized;
  if (std::regex_match(s, plain)) {
    normalized = s;
  } else if (std::regex_match(s, grouped)) {
    for (char c : s)
      if (c != ',')
        normalized += c;
  } else if (std::regex_match(s, decimal_comma)) {
    normalized = s;
    normalized[normalized.find(',')] = '.';
  } else {
    return std::nullopt;
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(normalized.data(), normalized.data() + normalized.size(), value);
  if (ec != std::errc{} || ptr != normalized.data() + normalized.size())
    return std::nullopt;
  return value;
}

/// Pairs the i-th ranking name with the i-th ranking link, in page order.
inline std::vector<IndexEntry> parse_index(std::string_view markup,
                                           const Selectors &sel = {}) {
  const html::Document doc(markup);
  const auto anchors = html::select_all(doc.root(), html::Selector(sel.index_anchor));
  const auto names = html::select_all(doc.root(), html::Selector(sel.index_name));
  if (anchors.empty() && names.empty())
    throw Error(ErrorCode::EmptyIndex, "no rankings found in index page");
  if (anchors.size() != names.size())
    throw Error(ErrorCode::Structure, "index has " + std::to_string(anchors.size()) +
                                          " ranking links but " + std::to_string(names.size()) +
                                          " ranking names");
  std::vector<IndexEntry> entries;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    IndexEntry entry{html::normalize_space(names[i]->text_content()),
                     anchors[i]->attribute("href").value_or("")};
    if (entry.title.empty() || entry.href.empty())
      throw Error(ErrorCode::Structure,
                  "index entry " + std::to_string(i) + " has an empty title or link");
    entries.push_back(std::move(entry));
  }
  return entries;
}

namespace detail {

inline ColumnFormat format_of_row(const html::Node &row, const Selectors &sel) {
  const auto *rank = html::select_first(row, html::Selector(sel.rank));
  const auto *name = html::select_first(row, html::Selector(sel.name));
  const auto *value = html::select_first(row, html::Selector(sel.value));
  // A rank cell that exists but is empty counts as no rank.
  const bool rank_present = rank && !html::normalize_space(rank->text_content()).empty();
  const bool name_present = name != nullptr;
  const bool value_present = value != nullptr;

  if (!name_present)
    throw Error(ErrorCode::Format, "Failed to form a table: first row has no name cell");
  if (rank_present && value_present)
    return ColumnFormat::RankNameValue;
  if (rank_present)
    return ColumnFormat::RankName;
  if (value_present)
    return ColumnFormat::NameValue;
  return ColumnFormat::NameOnly;
}

} // namespace detail

/// Column layout decided from the first ranking row's cells.
inline ColumnFormat detect_format(std::string_view markup, const Selectors &sel = {}) {
  const html::Document doc(markup);
  const auto *row = html::select_first(doc.root(), html::Selector(sel.row));
  if (!row)
    throw Error(ErrorCode::NoTable, "page has no '" + sel.row + "' rows");
  return detail::format_of_row(*row, sel);
}

struct YearOption {
  std::string label;
  std::string value;

  bool operator==(const YearOption &) const = default;
};

struct YearList {
  std::vector<YearOption> years;
  std::vector<std::string> warnings;
  /// True when the page had no year selector and is its own single year.
  bool fallback = false;
};

inline constexpr std::string_view fallback_year_label = "current";

/// Options of the year selector in document order. Options without a value
/// attribute are skipped with a warning. Without a selector the page itself is
/// the only year, labelled "current".
inline YearList parse_years(std::string_view markup, const Selectors &sel = {}) {
  const html::Document doc(markup);
  YearList list;
  const auto *select = html::select_first(doc.root(), html::Selector(sel.year_select));
  if (!select) {
    list.fallback = true;
    list.years.push_back(YearOption{std::string(fallback_year_label), ""});
    list.warnings.emplace_back("no year selector found; treating the page as a single year");
    return list;
  }
  const auto options = html::select_all(*select, html::Selector(sel.year_option));
  for (std::size_t i = 0; i < options.size(); ++i) {
    const auto label = html::normalize_space(options[i]->text_content());
    auto value = options[i]->attribute("value");
    if (!value) {
      list.warnings.push_back("year option " + std::to_string(i) + " ('" + label +
                              "') has no value attribute; skipped");
      continue;
    }
    list.years.push_back(YearOption{label, *value});
  }
  if (list.years.empty()) {
    list.fallback = true;
    list.years.push_back(YearOption{std::string(fallback_year_label), ""});
    list.warnings.emplace_back("year selector has no usable options; treating the page as a single year");
  }
  return list;
}

struct PageParse {
  YearTable table;
  /// Rows whose value cell could not be parsed (kept with an absent value).
  std::size_t value_warnings = 0;
  /// Rows dropped because the name cell was missing or empty.
  std::size_t dropped_rows = 0;
};

/// One row per ranking row element, filled according to `format`.
inline PageParse parse_ranking_page(std::string_view markup, ColumnFormat format,
                                    std::string year_label = {}, const Selectors &sel = {}) {
  const html::Document doc(markup);
  const auto rows = html::select_all(doc.root(), html::Selector(sel.row));
  if (rows.empty())
    throw Error(ErrorCode::EmptyTable, "page has no '" + sel.row + "' rows");

  const html::Selector rank_sel(sel.rank), name_sel(sel.name), value_sel(sel.value);
  PageParse out;
  out.table.label = std::move(year_label);
  for (const auto *row : rows) {
    Row parsed;
    const auto *name = html::select_first(*row, name_sel);
    parsed.brand = name ? html::normalize_space(name->text_content()) : std::string{};
    if (parsed.brand.empty()) {
      ++out.dropped_rows;
      continue;
    }
    if (has_rank(format)) {
      if (const auto *cell = html::select_first(*row, rank_sel)) {
        const auto text = html::normalize_space(cell->text_content());
        std::int64_t rank = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), rank);
        if (ec == std::errc{} && ptr == text.data() + text.size())
          parsed.rank = rank;
      }
    }
    if (has_value(format)) {
      const auto *cell = html::select_first(*row, value_sel);
      if (cell)
        parsed.value = parse_decimal(cell->text_content());
      if (!parsed.value)
        ++out.value_warnings;
    }
    out.table.rows.push_back(std::move(parsed));
  }
  if (out.table.rows.empty())
    throw Error(ErrorCode::EmptyTable, "no row has a brand name");

  // Ranks must be unique within a year; drop repeated ones.
  std::vector<std::int64_t> seen;
  for (auto &r : out.table.rows) {
    if (!r.rank)
      continue;
    if (std::find(seen.begin(), seen.end(), *r.rank) != seen.end())
      r.rank.reset();
    else
      seen.push_back(*r.rank);
  }
  return out;
}

struct PageInput {
  std::string label;
  std::string markup;
};

struct BuildReport {
  Dataset dataset;
  ColumnFormat format = ColumnFormat::NameOnly;
  std::vector<std::string> warnings;
};

/// Detects the layout on the first page and applies it to every page; a page
/// with a different layout is a structure error naming that year.
inline BuildReport build_dataset(const IndexEntry &entry, const std::vector<PageInput> &pages,
                                 const Selectors &sel = {}) {
  if (pages.empty())
    throw Error(ErrorCode::Precondition, "no pages to build a dataset from");
  BuildReport report;
  report.dataset.name = entry.title;
  report.dataset.source = entry.href;
  report.format = detect_format(pages.front().markup, sel);
  for (std::size_t i = 0; i < pages.size(); ++i) {
    const auto &page = pages[i];
    const ColumnFormat format = detect_format(page.markup, sel);
    if (format != report.format)
      throw Error(ErrorCode::Structure,
                  "year '" + page.label + "' (page " + std::to_string(i + 1) + ") has layout " +
                      to_string(format) + ", expected " + to_string(report.format));
    auto parsed = parse_ranking_page(page.markup, format, page.label, sel);
    if (parsed.value_warnings > 0)
      report.warnings.push_back("year '" + page.label + "': " +
                                std::to_string(parsed.value_warnings) +
                                " rows without a parsable value");
    if (parsed.dropped_rows > 0)
      report.warnings.push_back("year '" + page.label + "': " +
                                std::to_string(parsed.dropped_rows) + " rows without a name dropped");
    report.dataset.years.push_back(std::move(parsed.table));
  }
  validate_dataset(report.dataset);
  return report;
}

/// Value-bearing layouts are required before any analysis.
inline void require_values(const Dataset &dataset) {
  if (!dataset.has_values())
    throw Error(ErrorCode::Format, "dataset '" + dataset.name + "' has no numeric values");
}

} // namespace heavytail
