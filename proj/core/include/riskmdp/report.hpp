#pragma once

#include "riskmdp/embedded.hpp"
#include "riskmdp/stationary.hpp"
#include "riskmdp/timegrid.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace riskmdp {

struct CsvTable {
    std::string name;  ///< file stem
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Everything a command produced: the JSON body plus its tables for CSV output.
struct RunReport {
    nlohmann::json body = nlohmann::json::object();
    std::vector<CsvTable> tables;
};

enum class ReportFormat { json, csv };
[[nodiscard]] std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept;

/// 17 significant digits, always with a decimal point or exponent; "inf" for infinity.
[[nodiscard]] std::string format_real(double v);
[[nodiscard]] std::string format_real(const ExtReal& v);

[[nodiscard]] CsvTable value_table_csv(const std::vector<std::string>& states, const ValueTable& v);
/// Rows sorted by (t, state order).
[[nodiscard]] CsvTable grid_csv(const std::vector<std::string>& states, const MarkovValueGrid& g);
[[nodiscard]] CsvTable trace_csv(const IterationTrace& trace);
[[nodiscard]] CsvTable policy_csv(const std::vector<std::string>& states, const std::vector<std::string>& actions,
                                  const StationaryPolicy& f);
[[nodiscard]] CsvTable markov_policy_csv(const std::vector<std::string>& states,
                                         const std::vector<std::string>& actions, const MarkovPolicyGrid& g);

[[nodiscard]] std::string to_csv(const CsvTable& table);

/**
 * json: the report body is written to `out` (a file path).
 * csv: one <name>.csv per table inside the directory `out`, created if needed.
 * Returns the files written; throws std::runtime_error on I/O failure.
 */
std::vector<std::filesystem::path> write_report(const RunReport& report, ReportFormat format,
                                                const std::filesystem::path& out);

}  // namespace riskmdp
