#ifndef PCOL_TOOLS_REPORT_H_
#define PCOL_TOOLS_REPORT_H_

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace pcol::cli {

using Json = nlohmann::ordered_json;

enum class Format { kCsv, kJson, kMarkdown };

Format ParseFormat(std::string_view name);

// Rows of named cells with a fixed column order. Cells are JSON scalars so
// every format prints numbers with the same shortest round-trip text; null
// renders as an empty CSV/markdown cell.
class Report {
 public:
  explicit Report(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  // Missing columns become null; unknown keys throw.
  void AddRow(const Json& row);
  std::size_t size() const { return rows_.size(); }

  std::string Render(Format format) const;
  std::string Csv() const;
  std::string JsonText() const;
  std::string Markdown() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Json>> rows_;
};

std::string CellText(const Json& cell);
std::string CsvQuote(const std::string& text);

}  // namespace pcol::cli

#endif  // PCOL_TOOLS_REPORT_H_
