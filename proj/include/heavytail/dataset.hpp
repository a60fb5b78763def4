#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "heavytail/error.hpp"

namespace heavytail {

struct Row {
  std::optional<std::int64_t> rank;
  std::string brand;
  std::optional<double> value;

  bool operator==(const Row &) const = default;
};

struct YearTable {
  std::string label;
  std::vector<Row> rows;

  /// Values of rows that carry one, in row order.
  std::vector<double> values() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto &row : rows)
      if (row.value)
        out.push_back(*row.value);
    return out;
  }

  std::size_t missing_values() const {
    std::size_t n = 0;
    for (const auto &row : rows)
      n += row.value ? 0 : 1;
    return n;
  }

  bool operator==(const YearTable &) const = default;
};

struct Dataset {
  std::string name;
  std::string source;
  std::vector<YearTable> years;

  bool has_values() const {
    for (const auto &year : years)
      for (const auto &row : year.rows)
        if (row.value)
          return true;
    return false;
  }

  bool operator==(const Dataset &) const = default;
};

enum class FileFormat { Json, Csv };

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{})
    return std::to_string(value);
  return std::string(buf, end);
}

/// Checks the structural invariants: nonempty years, unique labels, nonempty
/// brands, unique ranks within a year, finite values. Errors name a JSON pointer.
inline void validate_dataset(const Dataset &dataset) {
  if (dataset.years.empty())
    throw Error(ErrorCode::Validation, "/years: dataset has no years");
  std::set<std::string> labels;
  for (std::size_t y = 0; y < dataset.years.size(); ++y) {
    const auto &year = dataset.years[y];
    const std::string at = "/years/" + std::to_string(y);
    if (!labels.insert(year.label).second)
      throw Error(ErrorCode::Validation, at + "/label: duplicate year label '" + year.label + "'");
    std::set<std::int64_t> ranks;
    for (std::size_t r = 0; r < year.rows.size(); ++r) {
      const auto &row = year.rows[r];
      const std::string row_at = at + "/rows/" + std::to_string(r);
      if (row.brand.empty())
        throw Error(ErrorCode::Validation, row_at + "/brand: empty brand");
      if (row.rank && !ranks.insert(*row.rank).second)
        throw Error(ErrorCode::Validation,
                    row_at + "/rank: duplicate rank " + std::to_string(*row.rank));
      if (row.value && !std::isfinite(*row.value))
        throw Error(ErrorCode::Validation, row_at + "/value: not finite");
    }
  }
}

// --- JSON ---------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const Dataset &dataset) {
  nlohmann::ordered_json years = nlohmann::ordered_json::array();
  for (const auto &year : dataset.years) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto &row : year.rows) {
      nlohmann::ordered_json item;
      item["rank"] = row.rank ? nlohmann::ordered_json(*row.rank) : nlohmann::ordered_json(nullptr);
      item["brand"] = row.brand;
      item["value"] = row.value ? nlohmann::ordered_json(*row.value) : nlohmann::ordered_json(nullptr);
      rows.push_back(std::move(item));
    }
    years.push_back({{"label", year.label}, {"rows", std::move(rows)}});
  }
  nlohmann::ordered_json doc;
  doc["name"] = dataset.name;
  doc["source"] = dataset.source;
  doc["years"] = std::move(years);
  return doc;
}

inline std::string dataset_to_json_text(const Dataset &dataset) {
  return to_json(dataset).dump(2) + "\n";
}

inline Dataset dataset_from_json_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorCode::Validation, std::string("malformed JSON: ") + e.what());
  }
  auto fail = [](const std::string &pointer, const std::string &what) {
    throw Error(ErrorCode::Validation, pointer + ": " + what);
  };
  if (!doc.is_object())
    fail("", "expected an object");
  Dataset dataset;
  if (!doc.contains("name") || !doc["name"].is_string())
    fail("/name", "expected a string");
  if (!doc.contains("source") || !doc["source"].is_string())
    fail("/source", "expected a string");
  if (!doc.contains("years") || !doc["years"].is_array())
    fail("/years", "expected an array");
  dataset.name = doc["name"].get<std::string>();
  dataset.source = doc["source"].get<std::string>();

  const auto &years = doc["years"];
  for (std::size_t y = 0; y < years.size(); ++y) {
    const std::string at = "/years/" + std::to_string(y);
    const auto &year = years[y];
    if (!year.is_object())
      fail(at, "expected an object");
    if (!year.contains("label") || !year["label"].is_string())
      fail(at + "/label", "expected a string");
    if (!year.contains("rows") || !year["rows"].is_array())
      fail(at + "/rows", "expected an array");
    YearTable table;
    table.label = year["label"].get<std::string>();
    const auto &rows = year["rows"];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string row_at = at + "/rows/" + std::to_string(r);
      const auto &item = rows[r];
      if (!item.is_object())
        fail(row_at, "expected an object");
      Row row;
      if (!item.contains("rank"))
        fail(row_at + "/rank", "missing");
      if (item["rank"].is_number_integer())
        row.rank = item["rank"].get<std::int64_t>();
      else if (!item["rank"].is_null())
        fail(row_at + "/rank", "expected an integer or null");
      if (!item.contains("brand") || !item["brand"].is_string())
        fail(row_at + "/brand", "expected a string");
      row.brand = item["brand"].get<std::string>();
      if (!item.contains("value"))
        fail(row_at + "/value", "missing");
      if (item["value"].is_number())
        row.value = item["value"].get<double>();
      else if (!item["value"].is_null())
        fail(row_at + "/value", "expected a number or null");
      table.rows.push_back(std::move(row));
    }
    dataset.years.push_back(std::move(table));
  }
  validate_dataset(dataset);
  return dataset;
}

// --- CSV ----------------------------------------------------------------------

namespace csv {

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct Record {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// RFC 4180 reader. Quoted fields may span lines; `line` is where a record starts.
inline std::vector<Record> parse(std::string_view text) {
  std::vector<Record> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(current.fields.size() == 1 && current.fields[0].empty()))
      records.push_back(std::move(current));
    current = Record{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n')
          ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
        ++i;
      ++line;
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes)
    throw Error(ErrorCode::Validation,
                "line " + std::to_string(current.line) + ": unterminated quoted field");
  if (field_started || !field.empty() || !current.fields.empty())
    end_record();
  return records;
}

} // namespace csv

inline constexpr std::string_view csv_header = "dataset,year,rank,brand,value";

inline std::string dataset_to_csv_text(const Dataset &dataset) {
  for (const auto &year : dataset.years)
    if (year.rows.empty())
      throw Error(ErrorCode::Validation,
                  "year '" + year.label + "' has no rows and cannot be represented in CSV");
  std::string out(csv_header);
  out += "\r\n";
  for (const auto &year : dataset.years) {
    for (const auto &row : year.rows) {
      out += csv::quote(dataset.name);
      out += ',';
      out += csv::quote(year.label);
      out += ',';
      if (row.rank)
        out += std::to_string(*row.rank);
      out += ',';
      out += csv::quote(row.brand);
      out += ',';
      if (row.value)
        out += format_number(*row.value);
      out += "\r\n";
    }
  }
  return out;
}

/// Header must name dataset, year and brand; rank and value columns are
/// optional (absent means null). Years keep their first-appearance order.
inline Dataset dataset_from_csv_text(std::string_view text, std::string source = {}) {
  if (text.starts_with("\xEF\xBB\xBF"))
    text.remove_prefix(3);
  const auto records = csv::parse(text);
  if (records.empty())
    throw Error(ErrorCode::Validation, "line 1: missing CSV header");

  const auto &header = records.front();
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.fields.size(); ++i)
      if (header.fields[i] == name)
        return i;
    return std::nullopt;
  };
  const auto c_dataset = column("dataset");
  const auto c_year = column("year");
  const auto c_brand = column("brand");
  const auto c_rank = column("rank");
  const auto c_value = column("value");
  if (!c_dataset || !c_year || !c_brand)
    throw Error(ErrorCode::Validation,
                "line " + std::to_string(header.line) +
                    ": missing CSV header (need at least dataset,year,brand)");

  Dataset dataset;
  dataset.source = std::move(source);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto &rec = records[i];
    const std::string at = "line " + std::to_string(rec.line);
    if (rec.fields.size() != header.fields.size())
      throw Error(ErrorCode::Validation, at + ": expected " +
                                             std::to_string(header.fields.size()) +
                                             " fields, found " + std::to_string(rec.fields.size()));
    if (i == 1)
      dataset.name = rec.fields[*c_dataset];
    else if (rec.fields[*c_dataset] != dataset.name)
      throw Error(ErrorCode::Validation, at + ": rows from more than one dataset");

    Row row;
    row.brand = rec.fields[*c_brand];
    if (c_rank && !rec.fields[*c_rank].empty()) {
      const auto &text_rank = rec.fields[*c_rank];
      std::int64_t rank = 0;
      auto [ptr, ec] = std::from_chars(text_rank.data(), text_rank.data() + text_rank.size(), rank);
      if (ec != std::errc{} || ptr != text_rank.data() + text_rank.size())
        throw Error(ErrorCode::Validation, at + ": rank '" + text_rank + "' is not an integer");
      row.rank = rank;
    }
    if (c_value && !rec.fields[*c_value].empty()) {
      const auto &text_value = rec.fields[*c_value];
      double value = 0.0;
      auto [ptr, ec] =
          std::from_chars(text_value.data(), text_value.data() + text_value.size(), value);
      if (ec != std::errc{} || ptr != text_value.data() + text_value.size() || !std::isfinite(value))
        throw Error(ErrorCode::Validation, at + ": value '" + text_value + "' is not a number");
      row.value = value;
    }
    if (row.brand.empty())
      throw Error(ErrorCode::Validation, at + ": empty brand");

    const auto &label = rec.fields[*c_year];
    YearTable *target = nullptr;
    for (auto &year : dataset.years)
      if (year.label == label)
        target = &year;
    if (!target) {
      dataset.years.push_back(YearTable{label, {}});
      target = &dataset.years.back();
    }
    target->rows.push_back(std::move(row));
  }
  if (dataset.years.empty())
    throw Error(ErrorCode::Validation, "line 2: CSV has a header but no rows");
  validate_dataset(dataset);
  return dataset;
}

// --- files --------------------------------------------------------------------

inline std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Validation, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_text_file(const std::filesystem::path &path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::Validation, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out)
    throw Error(ErrorCode::Validation, "write to '" + path.string() + "' failed");
}

inline FileFormat format_for_path(const std::filesystem::path &path) {
  auto ext = path.extension().string();
  for (auto &c : ext)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".csv" ? FileFormat::Csv : FileFormat::Json;
}

inline void save_dataset(const Dataset &dataset, const std::filesystem::path &path,
                         FileFormat format) {
  validate_dataset(dataset);
  write_text_file(path, format == FileFormat::Json ? dataset_to_json_text(dataset)
                                                   : dataset_to_csv_text(dataset));
}

/// Format chosen by extension (.csv) or, failing that, by sniffing for '{'.
inline Dataset load_dataset(const std::filesystem::path &path) {
  const std::string text = read_text_file(path);
  if (format_for_path(path) == FileFormat::Csv)
    return dataset_from_csv_text(text, path.string());
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] != '{' && path.extension() != ".json")
    return dataset_from_csv_text(text, path.string());
  return dataset_from_json_text(text);
}

} // namespace heavytail
