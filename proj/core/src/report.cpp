#include "riskmdp/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace riskmdp {

std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept {
    if (text == "json") return ReportFormat::json;
    if (text == "csv") return ReportFormat::csv;
    return std::nullopt;
}

std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    std::array<char, 40> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    (void)ec;
    std::string s(buf.data(), end);
    if (s.find_first_of(".e") == std::string::npos) {
        s += ".0";
    } else if (s.find('e') == std::string::npos) {
        // Drop trailing zeros in the fraction but keep one digit after the point.
        while (s.size() > 2 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
    }
    return s;
}

std::string format_real(const ExtReal& v) { return v.is_inf() ? "inf" : format_real(v.value()); }

CsvTable value_table_csv(const std::vector<std::string>& states, const ValueTable& v) {
    CsvTable t{"values", {"state", "value"}, {}};
    for (StateIndex x = 0; x < v.size(); ++x) t.rows.push_back({states[x], format_real(v[x])});
    return t;
}

CsvTable grid_csv(const std::vector<std::string>& states, const MarkovValueGrid& g) {
    CsvTable t{"grid", {"t", "state", "value"}, {}};
    for (std::size_t k = 0; k < g.times.size(); ++k)
        for (StateIndex x = 0; x < states.size(); ++x)
            t.rows.push_back({format_real(g.times[k]), states[x], format_real(g.values[k][x])});
    return t;
}

CsvTable trace_csv(const IterationTrace& trace) {
    CsvTable t{"trace", {"iter", "delta", "weighted_delta", "inf_count"}, {}};
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        t.rows.push_back({std::to_string(i + 1), format_real(r.delta), format_real(r.weighted_delta),
                          std::to_string(r.inf_count)});
    }
    return t;
}

CsvTable policy_csv(const std::vector<std::string>& states, const std::vector<std::string>& actions,
                    const StationaryPolicy& f) {
    CsvTable t{"policy", {"state", "action"}, {}};
    for (StateIndex x = 0; x < f.action.size(); ++x) t.rows.push_back({states[x], actions[f.action[x]]});
    return t;
}

CsvTable markov_policy_csv(const std::vector<std::string>& states, const std::vector<std::string>& actions,
                           const MarkovPolicyGrid& g) {
    CsvTable t{"policy", {"t", "state", "action"}, {}};
    for (std::size_t k = 0; k < g.times.size(); ++k)
        for (StateIndex x = 0; x < states.size(); ++x)
            t.rows.push_back({format_real(g.times[k]), states[x], actions[g.action[k][x]]});
    return t;
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(table.header);
    for (const auto& row : table.rows) line(row);
    return out;
}

std::vector<std::filesystem::path> write_report(const RunReport& report, ReportFormat format,
                                                const std::filesystem::path& out) {
    auto write_file = [](const std::filesystem::path& path, const std::string& content) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
        f << content;
        if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
    };
    std::vector<std::filesystem::path> written;
    if (format == ReportFormat::json) {
        write_file(out, report.body.dump(2) + "\n");
        written.push_back(out);
        return written;
    }
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw std::runtime_error("cannot create directory '" + out.string() + "': " + ec.message());
    for (const auto& table : report.tables) {
        const auto path = out / (table.name + ".csv");
        write_file(path, to_csv(table));
        written.push_back(path);
    }
    return written;
}

}  // namespace riskmdp
