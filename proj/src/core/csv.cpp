#include "civitopic/csv.hpp"

#include "civitopic/error.hpp"
#include "civitopic/io_util.hpp"

#include <ostream>

namespace civitopic::csv {

std::vector<Row> parse(std::string_view content) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };

  // Skip a UTF-8 byte order mark.
  if (content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);

  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        field_started = true;
        break;
      case '\r':
        if (i + 1 < content.size() && content[i + 1] == '\n') ++i;
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) fail(ErrorCode::format, "unterminated quoted CSV field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const Row& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(row[i]);
  }
  return out;
}

Table::Table(std::vector<Row> rows) {
  if (!rows.empty()) {
    header_ = std::move(rows.front());
    rows.erase(rows.begin());
  }
  rows_ = std::move(rows);
}

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::required_column(std::string_view name) const {
  auto col = column(name);
  if (!col) fail(ErrorCode::schema, "missing required field '" + std::string(name) + "'");
  return *col;
}

std::string_view Table::field(std::size_t row, std::size_t col) const {
  const Row& r = rows_.at(row);
  if (col >= r.size()) return {};
  return r[col];
}

Table read_table(const std::string& path) { return Table(parse(io::read_file(path))); }

void Writer::write(const Row& row) { out_ << format_row(row) << '\n'; }

}  // namespace civitopic::csv
