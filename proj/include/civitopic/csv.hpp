#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace civitopic::csv {

using Row = std::vector<std::string>;

/// RFC-4180 parse: quoted fields may contain commas, doubled quotes and line
/// breaks. Accepts LF or CRLF record separators. A trailing newline does not
/// produce an empty record.
std::vector<Row> parse(std::string_view content);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

/// Header-indexed view over parsed rows.
class Table {
 public:
  explicit Table(std::vector<Row> rows);

  const Row& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }
  const Row& row(std::size_t i) const { return rows_[i]; }

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t required_column(std::string_view name) const;

  /// Field text, or empty when the row is short.
  std::string_view field(std::size_t row, std::size_t col) const;

 private:
  Row header_;
  std::vector<Row> rows_;
};

Table read_table(const std::string& path);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void write(const Row& row);

 private:
  std::ostream& out_;
};

}  // namespace civitopic::csv
