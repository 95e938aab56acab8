#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "roundtable/experiment.hpp"

namespace roundtable::report {

struct ReportTable {
  std::string title;
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;
  std::vector<std::vector<double>> cells;  // row-major, dims match labels
  /// Optional per-cell suffixes (significance markers); empty or same shape.
  std::vector<std::vector<std::string>> markers;
  int precision = 4;
};

void validate_table(const ReportTable& table);

/// Rows = the three conditions; column pairs = agent x {Cosine, ROUGE};
/// cells are whole-article means across articles.
ReportTable table_conditions_by_agent(const std::vector<eval::EvaluationResult>& results,
                                      const std::vector<std::string>& agent_order);

/// Blocks of segment x condition rows, one column per agent; cells are mean
/// per-segment cosine. Articles must agree on their segment label sets.
ReportTable table_granular(const std::vector<eval::EvaluationResult>& results,
                           const std::vector<std::string>& agent_order);

/// Rows = {vanilla, discussion}; columns = agents; cells = mean deltas with
/// a '*' marker wherever the matching t test is significant.
ReportTable table_improvements(const std::vector<eval::ImprovementRecord>& improvements,
                               const std::vector<experiment::TTestRow>& ttests,
                               const std::vector<std::string>& agent_order);

enum class EmitFormat { csv, markdown };

/// Deterministic rendering: fixed precision (round half to even), fixed
/// ordering, LF line endings, locale-independent decimal points.
std::string render(const ReportTable& table, EmitFormat format);

void emit(const ReportTable& table, EmitFormat format, const std::filesystem::path& path);

}  // namespace roundtable::report
