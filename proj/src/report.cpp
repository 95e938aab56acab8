#include "roundtable/report.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "roundtable/io.hpp"
#include "roundtable/text.hpp"

namespace roundtable::report {

using discussion::Condition;

namespace {

const std::vector<std::pair<Condition, std::string>>& condition_rows() {
  static const std::vector<std::pair<Condition, std::string>> rows{
      {Condition::original, "Original News"},
      {Condition::vanilla, "News With Vanilla Supplement"},
      {Condition::discussion, "News With Discussion Supplement"},
  };
  return rows;
}

struct MeanAccumulator {
  double sum = 0.0;
  int count = 0;
  void add(double v) {
    sum += v;
    ++count;
  }
  double mean() const { return count == 0 ? 0.0 : sum / count; }
};

}  // namespace

void validate_table(const ReportTable& table) {
  if (table.cells.size() != table.row_labels.size()) {
    throw ValidationError("table '" + table.title + "': row count mismatch");
  }
  for (const auto& row : table.cells) {
    if (row.size() != table.column_labels.size()) {
      throw ValidationError("table '" + table.title + "': column count mismatch");
    }
  }
  if (!table.markers.empty()) {
    if (table.markers.size() != table.cells.size()) {
      throw ValidationError("table '" + table.title + "': marker shape mismatch");
    }
    for (std::size_t i = 0; i < table.markers.size(); ++i) {
      if (table.markers[i].size() != table.cells[i].size()) {
        throw ValidationError("table '" + table.title + "': marker shape mismatch");
      }
    }
  }
  if (table.precision < 0) {
    throw ValidationError("table '" + table.title + "': negative precision");
  }
}

ReportTable table_conditions_by_agent(const std::vector<eval::EvaluationResult>& results,
                                      const std::vector<std::string>& agent_order) {
  for (const auto& [condition, label] : condition_rows()) {
    const bool present = std::any_of(results.begin(), results.end(), [&](const auto& r) {
      return r.condition == condition;
    });
    if (!present) {
      throw ValidationError("results are missing condition '" +
                            std::string(condition_name(condition)) + "'");
    }
  }

  ReportTable table;
  table.title = "Agent Comprehension Scores Across Different Domains";
  for (const auto& agent : agent_order) {
    table.column_labels.push_back(agent + " Cosine");
    table.column_labels.push_back(agent + " ROUGE");
  }

  for (const auto& [condition, label] : condition_rows()) {
    table.row_labels.push_back(label);
    std::vector<double> row;
    for (const auto& agent : agent_order) {
      MeanAccumulator cosine, rouge;
      for (const auto& r : results) {
        if (r.condition == condition && r.agent_id == agent) {
          cosine.add(r.whole_article.cosine);
          rouge.add(r.whole_article.rouge_f1);
        }
      }
      row.push_back(cosine.mean());
      row.push_back(rouge.mean());
    }
    table.cells.push_back(std::move(row));
  }
  validate_table(table);
  return table;
}

ReportTable table_granular(const std::vector<eval::EvaluationResult>& results,
                           const std::vector<std::string>& agent_order) {
  if (results.empty()) throw ValidationError("no results to tabulate");

  // All articles must carry the same segment label set.
  std::map<std::string, std::set<std::string>> labels_by_article;
  for (const auto& r : results) {
    auto& labels = labels_by_article[r.article_id];
    for (const auto& [label, score] : r.per_segment) labels.insert(label);
  }
  const std::set<std::string>& reference = labels_by_article.begin()->second;
  std::vector<std::string> offenders;
  for (const auto& [article_id, labels] : labels_by_article) {
    if (labels != reference) offenders.push_back(article_id);
  }
  if (!offenders.empty()) {
    throw ValidationError("articles disagree on segment labels: " +
                          text::join(offenders, ", "));
  }
  if (reference.empty()) throw ValidationError("results carry no per-segment scores");

  ReportTable table;
  table.title = "Granular Agent Comprehension Scores by News Article Section";
  table.column_labels = agent_order;

  for (const auto& segment : reference) {
    for (const auto& [condition, label] : condition_rows()) {
      table.row_labels.push_back(segment + " Part / " + label);
      std::vector<double> row;
      for (const auto& agent : agent_order) {
        MeanAccumulator acc;
        for (const auto& r : results) {
          if (r.condition != condition || r.agent_id != agent) continue;
          auto it = r.per_segment.find(segment);
          if (it != r.per_segment.end()) acc.add(it->second.cosine);
        }
        row.push_back(acc.mean());
      }
      table.cells.push_back(std::move(row));
    }
  }
  validate_table(table);
  return table;
}

ReportTable table_improvements(const std::vector<eval::ImprovementRecord>& improvements,
                               const std::vector<experiment::TTestRow>& ttests,
                               const std::vector<std::string>& agent_order) {
  if (improvements.empty()) throw ValidationError("no improvement records to tabulate");

  ReportTable table;
  table.title = "Average Improvement in Agent Comprehension";
  table.column_labels = agent_order;

  for (const auto condition : {Condition::vanilla, Condition::discussion}) {
    table.row_labels.push_back(condition == Condition::vanilla
                                   ? "Improve for Vanilla Supplement"
                                   : "Improve for Discussion Supplement");
    std::vector<double> row;
    std::vector<std::string> marks;
    for (const auto& agent : agent_order) {
      MeanAccumulator acc;
      for (const auto& rec : improvements) {
        if (rec.condition == condition && rec.agent_id == agent) acc.add(rec.delta_cosine);
      }
      row.push_back(acc.mean());

      auto it = std::find_if(ttests.begin(), ttests.end(), [&](const experiment::TTestRow& t) {
        return t.agent_id == agent && t.condition == condition;
      });
      marks.push_back(it != ttests.end() && it->test.significant ? "*" : "");
    }
    table.cells.push_back(std::move(row));
    table.markers.push_back(std::move(marks));
  }
  validate_table(table);
  return table;
}

namespace {

std::string cell_text(const ReportTable& table, std::size_t i, std::size_t j) {
  std::string out = text::format_fixed(table.cells[i][j], table.precision);
  if (!table.markers.empty() && !table.markers[i][j].empty()) out += table.markers[i][j];
  return out;
}

std::string render_csv(const ReportTable& table) {
  std::string out = text::csv_field(table.title);
  for (const auto& label : table.column_labels) out += "," + text::csv_field(label);
  out.push_back('\n');
  for (std::size_t i = 0; i < table.row_labels.size(); ++i) {
    out += text::csv_field(table.row_labels[i]);
    for (std::size_t j = 0; j < table.column_labels.size(); ++j) {
      out += "," + text::csv_field(cell_text(table, i, j));
    }
    out.push_back('\n');
  }
  return out;
}

std::string render_markdown(const ReportTable& table) {
  std::string out = "| " + table.title + " |";
  for (const auto& label : table.column_labels) out += " " + label + " |";
  out.push_back('\n');
  out += "| --- |";
  for (std::size_t j = 0; j < table.column_labels.size(); ++j) out += " --- |";
  out.push_back('\n');
  for (std::size_t i = 0; i < table.row_labels.size(); ++i) {
    out += "| " + table.row_labels[i] + " |";
    for (std::size_t j = 0; j < table.column_labels.size(); ++j) {
      out += " " + cell_text(table, i, j) + " |";
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace

std::string render(const ReportTable& table, EmitFormat format) {
  validate_table(table);
  return format == EmitFormat::csv ? render_csv(table) : render_markdown(table);
}

void emit(const ReportTable& table, EmitFormat format, const std::filesystem::path& path) {
  io::write_file_atomic(path, render(table, format));
}

}  // namespace roundtable::report
