#include "roundtable/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>

#include "roundtable/io.hpp"
#include "roundtable/text.hpp"

namespace roundtable::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<std::string>& default_domain_set() {
  static const std::vector<std::string> domains{"Finance", "Law", "Agriculture", "Technology"};
  return domains;
}

void validate_article(const NewsArticle& article, const std::vector<std::string>& domain_set) {
  auto fail = [&](const std::string& why) {
    throw ValidationError("article '" + article.id + "': " + why);
  };
  if (article.id.empty()) throw ValidationError("article with empty id");
  if (article.body.empty()) fail("body is empty");
  if (article.published_at && !text::is_iso_date(*article.published_at)) {
    fail("published_at '" + *article.published_at + "' is not an ISO-8601 date");
  }

  std::size_t prev_end = 0;
  bool first = true;
  // Segments must be ordered, non-overlapping, in bounds, and label-valid.
  for (const auto& seg : article.segments) {
    if (seg.char_start >= seg.char_end) {
      fail("segment range [" + std::to_string(seg.char_start) + ", " +
           std::to_string(seg.char_end) + ") is inverted or empty");
    }
    if (seg.char_end > article.body.size()) {
      fail("segment range end " + std::to_string(seg.char_end) + " exceeds body size " +
           std::to_string(article.body.size()));
    }
    if (!first && seg.char_start < prev_end) {
      fail("segments overlap at offset " + std::to_string(seg.char_start));
    }
    if (std::find(domain_set.begin(), domain_set.end(), seg.domain_label) == domain_set.end()) {
      fail("unknown domain label '" + seg.domain_label + "'");
    }
    const std::string covered = article.body.substr(seg.char_start, seg.char_end - seg.char_start);
    if (!seg.text.empty() && seg.text != covered) {
      fail("segment text does not match body range [" + std::to_string(seg.char_start) + ", " +
           std::to_string(seg.char_end) + ")");
    }
    prev_end = seg.char_end;
    first = false;
  }
}

void validate_corpus(const Corpus& corpus) {
  if (corpus.domain_set.empty()) throw ValidationError("domain set is empty");
  std::set<std::string> seen_domains(corpus.domain_set.begin(), corpus.domain_set.end());
  if (seen_domains.size() != corpus.domain_set.size()) {
    throw ValidationError("domain set contains duplicates");
  }
  std::set<std::string> ids;
  for (const auto& article : corpus.articles) {
    validate_article(article, corpus.domain_set);
    if (!ids.insert(article.id).second) {
      throw ValidationError("duplicate article id '" + article.id + "'");
    }
  }
}

namespace {

NewsArticle article_from_json(const json& record, std::size_t line_no) {
  NewsArticle article;
  try {
    article.id = record.at("id").get<std::string>();
    article.title = record.at("title").get<std::string>();
    article.body = record.at("body").get<std::string>();
    for (const auto& seg : record.at("segments")) {
      Segment s;
      s.domain_label = seg.at("domain").get<std::string>();
      s.char_start = seg.at("start").get<std::size_t>();
      s.char_end = seg.at("end").get<std::size_t>();
      article.segments.push_back(std::move(s));
    }
    article.source = record.at("source").get<std::string>();
    if (!record.at("published_at").is_null()) {
      article.published_at = record.at("published_at").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what());
  }
  // Inverted ranges would make substr throw below; validate first, then
  // materialize segment text from the body.
  for (auto& seg : article.segments) {
    if (seg.char_start < seg.char_end && seg.char_end <= article.body.size()) {
      seg.text = article.body.substr(seg.char_start, seg.char_end - seg.char_start);
    }
  }
  return article;
}

ordered_json article_to_json(const NewsArticle& article) {
  ordered_json segments = ordered_json::array();
  for (const auto& seg : article.segments) {
    segments.push_back(ordered_json{
        {"domain", seg.domain_label}, {"start", seg.char_start}, {"end", seg.char_end}});
  }
  ordered_json record{{"id", article.id},
                      {"title", article.title},
                      {"body", article.body},
                      {"segments", std::move(segments)},
                      {"source", article.source},
                      {"published_at", nullptr}};
  if (article.published_at) record["published_at"] = *article.published_at;
  return record;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, std::vector<std::string> domain_set) {
  Corpus corpus;
  corpus.domain_set = std::move(domain_set);

  const std::string content = io::read_file(path);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) nl = content.size();
    ++line_no;
    std::string_view line(content.data() + start, nl - start);
    start = nl + 1;
    if (text::trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    corpus.articles.push_back(article_from_json(record, line_no));
  }
  validate_corpus(corpus);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  validate_corpus(corpus);
  std::string out;
  for (const auto& article : corpus.articles) {
    out += article_to_json(article).dump();
    out.push_back('\n');
  }
  io::write_file_atomic(path, out);
}

NewsArticle segment_article(const NewsArticle& article, const std::vector<std::string>& domain_set,
                            llm::Provider& classifier,
                            const memory::ProceduralTemplate* classify_template) {
  if (article.body.empty()) {
    throw ValidationError("article '" + article.id + "': body is empty");
  }
  if (!article.segments.empty()) return article;  // curated segments win

  const memory::ProceduralTemplate& tpl =
      classify_template ? *classify_template
                        : memory::default_template(memory::Stage::segment_classify);
  const std::string domains = text::join(domain_set, ", ");

  struct LabeledParagraph {
    std::size_t start, end;
    std::string label;
  };
  std::vector<LabeledParagraph> labeled;
  for (const auto& [start, end] : text::paragraph_spans(article.body)) {
    const std::string paragraph = article.body.substr(start, end - start);
    llm::ChatRequest request;
    request.model_name = classifier.config().chat_model;
    request.max_tokens = 16;
    request.request_tag = "segment_classify:" + article.id;
    request.messages = {{llm::Role::user, memory::render_template(tpl, {{"domains", domains},
                                                                        {"paragraph", paragraph}})}};
    const std::string label = text::trim(classifier.complete(request).content);
    if (std::find(domain_set.begin(), domain_set.end(), label) == domain_set.end()) {
      throw ProviderError("classifier returned label '" + label + "' outside the domain set for article '" +
                          article.id + "'");
    }
    labeled.push_back({start, end, label});
  }

  NewsArticle out = article;
  for (const auto& lp : labeled) {
    if (!out.segments.empty() && out.segments.back().domain_label == lp.label) {
      out.segments.back().char_end = lp.end;  // merge adjacent same-label paragraphs
    } else {
      out.segments.push_back({lp.label, lp.start, lp.end, {}});
    }
  }
  for (auto& seg : out.segments) {
    seg.text = out.body.substr(seg.char_start, seg.char_end - seg.char_start);
  }
  validate_article(out, domain_set);
  return out;
}

}  // namespace roundtable::corpus
