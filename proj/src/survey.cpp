#include "semaxis/survey.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <set>

#include "semaxis/error.hpp"
#include "semaxis/saxd.hpp"

namespace semaxis {

namespace {

std::string trim(std::string_view s) {
    const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)); };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> cells;
};

// RFC 4180 fields: quoted cells may hold commas, doubled quotes and newlines.
std::vector<CsvRow> split_csv(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    std::vector<CsvRow> rows;
    CsvRow row;
    std::string cell;
    bool quoted = false;
    bool any = false;
    std::size_t line = 1;
    row.line = 1;
    auto end_row = [&] {
        if (any || !cell.empty() || !row.cells.empty()) {
            row.cells.push_back(trim(cell));
            bool blank = row.cells.size() == 1 && row.cells[0].empty();
            if (!blank) rows.push_back(std::move(row));
        }
        row = CsvRow{};
        cell.clear();
        any = false;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                cell += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.cells.push_back(trim(cell));
            cell.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_row();
            row.line = ++line;
        } else {
            cell += c;
        }
    }
    if (quoted) fail(ErrorKind::parse, "unterminated quoted CSV field");
    end_row();
    return rows;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string normalize_label(std::string_view label) {
    std::string out = trim(label);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

SurveyIngest parse_survey_csv(std::string_view text) {
    const auto rows = split_csv(text);
    require(!rows.empty(), ErrorKind::parse, "survey CSV is empty");
    const auto& header = rows.front().cells;
    require(normalize_label(header.front()) == "word", ErrorKind::parse,
            "survey CSV must start with a 'word' column, found '" + header.front() + "'");
    require(header.size() >= 2, ErrorKind::parse, "survey CSV has no scale columns");

    SurveyIngest out;
    std::set<std::string> seen_scales;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const std::string& s = header[c];
        require(!s.empty(), ErrorKind::parse, "survey column " + std::to_string(c + 1) +
                                                  " has no label");
        require(s.find('-') != std::string::npos, ErrorKind::parse,
                "scale label '" + s + "' is not of the form pos-neg");
        require(seen_scales.insert(normalize_label(s)).second, ErrorKind::duplicate_name,
                "duplicate scale label '" + s + "'");
        out.table.scales.push_back(s);
    }

    const std::size_t width = header.size();
    std::vector<double> values;
    std::set<std::string> seen_words;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& cells = rows[r].cells;
        const std::string word = cells.front();
        auto reject = [&](std::string reason) {
            out.rejected.push_back({rows[r].line, word, std::move(reason)});
        };
        if (word.empty()) {
            reject("empty word label");
            continue;
        }
        if (cells.size() != width) {
            reject("has " + std::to_string(cells.size()) + " cells, header has " +
                   std::to_string(width));
            continue;
        }
        std::vector<double> row;
        std::string bad;
        for (std::size_t c = 1; c < width; ++c) {
            const auto v = parse_number(cells[c]);
            if (!v) {
                bad = cells[c].empty() ? "missing value for '" + header[c] + "'"
                                       : "non-numeric value '" + cells[c] + "' for '" +
                                             header[c] + "'";
                break;
            }
            row.push_back(*v);
        }
        if (!bad.empty()) {
            reject(bad);
            continue;
        }
        if (!seen_words.insert(normalize_label(word)).second) {
            reject("duplicate word");
            continue;
        }
        out.table.words.push_back(word);
        values.insert(values.end(), row.begin(), row.end());
    }
    out.table.ratings =
        DenseMatrix(out.table.words.size(), out.table.scales.size(), std::move(values));
    return out;
}

SurveyIngest read_survey_csv(const std::filesystem::path& path) {
    const auto bytes = io::read_bytes(path);
    return parse_survey_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                             bytes.size()));
}

SurveyTable require_complete(SurveyIngest ingest) {
    if (!ingest.rejected.empty()) {
        std::string msg = std::to_string(ingest.rejected.size()) + " survey row(s) rejected:";
        for (const auto& r : ingest.rejected)
            msg += "\n  line " + std::to_string(r.line) + " '" + r.word + "': " + r.reason;
        fail(ErrorKind::aggregate, msg);
    }
    require(!ingest.table.words.empty(), ErrorKind::invalid_input, "survey has no rows");
    return std::move(ingest.table);
}

std::string format_survey_csv(const SurveyTable& table) {
    std::string out = "word";
    for (const auto& s : table.scales) out += "," + quote_if_needed(s);
    out += "\n";
    char buf[40];
    for (std::size_t i = 0; i < table.words.size(); ++i) {
        out += quote_if_needed(table.words[i]);
        for (std::size_t j = 0; j < table.scales.size(); ++j) {
            std::snprintf(buf, sizeof buf, ",%.17g", table.ratings(i, j));
            out += buf;
        }
        out += "\n";
    }
    return out;
}

void write_survey_csv(const std::filesystem::path& path, const SurveyTable& table) {
    const std::string text = format_survey_csv(table);
    io::write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                    text.size()));
}

}  // namespace semaxis
