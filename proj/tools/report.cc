#include "report.h"

#include <algorithm>
#include <sstream>

#include "pcol/errors.h"

namespace pcol::cli {

Format ParseFormat(std::string_view name) {
  if (name == "csv") return Format::kCsv;
  if (name == "json") return Format::kJson;
  if (name == "md") return Format::kMarkdown;
  throw Error(ErrorCode::kInvalidInput, "unknown format '" + std::string(name) + "'");
}

void Report::AddRow(const Json& row) {
  for (const auto& [key, value] : row.items()) {
    if (std::find(columns_.begin(), columns_.end(), key) == columns_.end()) {
      throw Error(ErrorCode::kInternal, "report has no column '" + key + "'");
    }
  }
  std::vector<Json> cells;
  for (const auto& c : columns_) cells.push_back(row.contains(c) ? row.at(c) : Json());
  rows_.push_back(std::move(cells));
}

std::string CellText(const Json& cell) {
  if (cell.is_null()) return "";
  if (cell.is_string()) return cell.get<std::string>();
  return cell.dump();
}

std::string CsvQuote(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string Report::Csv() const {
  std::ostringstream out;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    out << (c ? "," : "") << CsvQuote(columns_[c]);
  }
  out << "\n";
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << CsvQuote(CellText(row[c]));
    }
    out << "\n";
  }
  return out.str();
}

std::string Report::JsonText() const {
  Json rows = Json::array();
  for (const auto& row : rows_) {
    Json obj = Json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[columns_[c]] = row[c];
    rows.push_back(std::move(obj));
  }
  return rows.dump(2) + "\n";
}

std::string Report::Markdown() const {
  std::vector<std::size_t> width(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) width[c] = std::max<std::size_t>(3, columns_[c].size());
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], CellText(row[c]).size());
  }
  std::ostringstream out;
  auto line = [&](auto cell) {
    out << "|";
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      const std::string text = cell(c);
      out << " " << text << std::string(width[c] - text.size(), ' ') << " |";
    }
    out << "\n";
  };
  line([&](std::size_t c) { return columns_[c]; });
  line([&](std::size_t c) { return std::string(width[c], '-'); });
  for (const auto& row : rows_) line([&](std::size_t c) { return CellText(row[c]); });
  return out.str();
}

std::string Report::Render(Format format) const {
  switch (format) {
    case Format::kCsv:
      return Csv();
    case Format::kJson:
      return JsonText();
    case Format::kMarkdown:
      return Markdown();
  }
  return {};
}

}  // namespace pcol::cli
