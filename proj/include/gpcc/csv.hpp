#ifndef GPCC_CSV_HPP_
#define GPCC_CSV_HPP_

// RFC 4180 CSV: comma separator, optional double quotes, header row
// required, '.' decimal point, ISO-8601 dates.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gpcc/errors.hpp"
#include "gpcc/timeseries.hpp"

namespace gpcc {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or npos.
  std::size_t find(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) {
        return i;
      }
    }
    return npos;
  }

  std::size_t require(std::string_view name) const {
    const auto i = find(name);
    if (i == npos) {
      throw CsvError("missing column '" + std::string(name) + "'");
    }
    return i;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

inline CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::vector<std::string> row;
  std::string field;
  std::size_t line = 1;
  bool quoted = false;
  bool field_started = false;
  bool after_quote = false;
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    if (table.header.empty()) {
      table.header = std::move(row);
    } else if (!(row.size() == 1 && row[0].empty() && !field_started)) {
      if (row.size() != table.header.size()) {
        throw CsvError("line " + std::to_string(line) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(row.size()));
      }
      table.rows.push_back(std::move(row));
    }
    row.clear();
    field_started = false;
    after_quote = false;
    ++line;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (field_started || after_quote) {
        throw CsvError("line " + std::to_string(line) + ": stray quote");
      }
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
      after_quote = false;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
        ++i;
      }
      end_row();
    } else {
      if (after_quote) {
        throw CsvError("line " + std::to_string(line) + ": text after closing quote");
      }
      field += c;
      field_started = true;
    }
  }
  if (quoted) {
    throw CsvError("unterminated quoted field");
  }
  if (field_started || !row.empty()) {
    end_row();
  }
  if (table.header.empty() || (table.header.size() == 1 && table.header[0].empty())) {
    throw CsvError("missing header row");
  }
  return table;
}

inline std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CsvError("cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline CsvTable read_csv_file(const std::string &path) {
  try {
    return parse_csv(read_text_file(path));
  } catch (const CsvError &e) {
    throw CsvError(path + ": " + e.what());
  }
}

/// Strict decimal number; the whole field must parse.
inline double parse_number(std::string_view s, std::size_t row, std::string_view column) {
  double v = 0.0;
  const auto *first = s.data();
  const auto *last = s.data() + s.size();
  if (!s.empty() && *first == '+') {
    ++first;
  }
  const auto [p, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || p != last) {
    throw CsvError("row " + std::to_string(row) + ", column '" + std::string(column) +
                   "': not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline Date parse_date_field(std::string_view s, std::size_t row) {
  const auto d = parse_iso_date(s);
  if (!d) {
    throw CsvError("row " + std::to_string(row) + ": not an ISO-8601 date: '" +
                   std::string(s) + "'");
  }
  return *d;
}

/// Shortest text that parses back to the same double; empty for NaN.
inline std::string format_number(double v) {
  if (std::isnan(v)) {
    return "";
  }
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') {
      out += '"';
    }
  }
  return out + "\"";
}

inline void write_csv_row(std::ostream &out, const std::vector<std::string> &fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    out << (i ? "," : "") << csv_escape(fields[i]);
  }
  out << '\n';
}

enum class SeriesKind { Auto, Return, Price };

/// Two-column (date, value) series. The value column named return/log_return
/// is taken as log-returns; price/close is differenced into log-returns.
inline ReturnSeries parse_return_series(const CsvTable &t, SeriesKind kind = SeriesKind::Auto) {
  if (t.header.size() != 2) {
    throw CsvError("series CSV needs exactly two columns (date, value)");
  }
  if (t.header[0] != "date" && t.header[0] != "timestamp") {
    throw CsvError("first column must be 'date' or 'timestamp'");
  }
  const std::string &name = t.header[1];
  if (kind == SeriesKind::Auto) {
    if (name == "return" || name == "log_return") {
      kind = SeriesKind::Return;
    } else if (name == "price" || name == "close") {
      kind = SeriesKind::Price;
    } else {
      throw CsvError("cannot tell returns from prices by column '" + name +
                     "'; name it return or price");
    }
  }
  ReturnSeries s;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    s.dates.push_back(parse_date_field(t.rows[r][0], r + 2));
    s.values.push_back(parse_number(t.rows[r][1], r + 2, name));
  }
  s.validate();
  return kind == SeriesKind::Price ? log_returns(s) : s;
}

/// (date|t, u, v) pseudo-series.
inline PseudoSeries parse_pseudo_series(const CsvTable &t) {
  const auto iu = t.require("u");
  const auto iv = t.require("v");
  const auto id = t.find("date");
  PseudoSeries s;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double u = parse_number(t.rows[r][iu], r + 2, "u");
    const double v = parse_number(t.rows[r][iv], r + 2, "v");
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
      throw CsvError("row " + std::to_string(r + 2) + ": (u, v) outside the open unit square");
    }
    s.pairs.push_back({u, v});
    if (id != CsvTable::npos) {
      s.dates.push_back(parse_date_field(t.rows[r][id], r + 2));
    }
  }
  return s;
}

inline void write_pseudo_series(std::ostream &out, const PseudoSeries &s) {
  const bool dated = !s.dates.empty();
  write_csv_row(out, {dated ? "date" : "t", "u", "v"});
  for (std::size_t i = 0; i < s.size(); ++i) {
    write_csv_row(out, {dated ? format_iso_date(s.dates[i]) : std::to_string(i),
                        format_number(s.pairs[i].u), format_number(s.pairs[i].v)});
  }
}

} // namespace gpcc

#endif // GPCC_CSV_HPP_
