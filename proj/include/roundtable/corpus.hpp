#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roundtable/agent_memory.hpp"
#include "roundtable/llm_provider.hpp"

namespace roundtable::corpus {

struct Segment {
  std::string domain_label;
  std::size_t char_start = 0;  // byte offset into the UTF-8 body
  std::size_t char_end = 0;
  std::string text;  // body[char_start, char_end)
};

struct NewsArticle {
  std::string id;
  std::string title;
  std::string body;
  std::vector<Segment> segments;
  std::string source;
  std::optional<std::string> published_at;  // ISO-8601 date
};

struct Corpus {
  std::vector<NewsArticle> articles;
  std::vector<std::string> domain_set;
};

const std::vector<std::string>& default_domain_set();

void validate_article(const NewsArticle& article, const std::vector<std::string>& domain_set);
void validate_corpus(const Corpus& corpus);

/// Line-delimited records, one article per line, fields exactly
/// id/title/body/segments/source/published_at. Load order preserved.
Corpus load_corpus(const std::filesystem::path& path,
                   std::vector<std::string> domain_set = default_domain_set());

/// Canonical re-serialization: load(save(C)) == C byte-for-byte on re-save.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Paragraph-level domain classification, adjacent same-label paragraphs
/// merged. Articles that already carry segments are returned unchanged.
NewsArticle segment_article(const NewsArticle& article,
                            const std::vector<std::string>& domain_set,
                            llm::Provider& classifier,
                            const memory::ProceduralTemplate* classify_template = nullptr);

}  // namespace roundtable::corpus
