#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "semaxis/linalg.hpp"

namespace semaxis {

/// Word x scale rating matrix. Scale labels name their poles, "pos-neg".
struct SurveyTable {
    std::vector<std::string> words;
    std::vector<std::string> scales;
    DenseMatrix ratings;  // words x scales
};

struct SurveyRejection {
    std::size_t line = 0;  // 1-based line in the CSV
    std::string word;
    std::string reason;
};

/// Every data row ends up either in the table or in `rejected`.
struct SurveyIngest {
    SurveyTable table;
    std::vector<SurveyRejection> rejected;
};

/// Header problems (first column not "word", unlabeled or duplicate scales,
/// a scale without a '-') are hard errors; bad rows are rejected.
SurveyIngest parse_survey_csv(std::string_view text);
SurveyIngest read_survey_csv(const std::filesystem::path& path);

/// Throws an aggregate error listing every rejected row, if any.
SurveyTable require_complete(SurveyIngest ingest);

/// Values printed with 17 significant digits, so they read back exactly.
std::string format_survey_csv(const SurveyTable& table);
void write_survey_csv(const std::filesystem::path& path, const SurveyTable& table);

/// Lowercased, whitespace-trimmed label used for word and scale matching.
std::string normalize_label(std::string_view label);

}  // namespace semaxis
