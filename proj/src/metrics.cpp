#include "roundtable/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "roundtable/errors.hpp"
#include "roundtable/text.hpp"

namespace roundtable::eval {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("cosine_similarity: dimension mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw ValidationError("cosine_similarity: empty vectors");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine_similarity: zero vector");
  double value = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(value, -1.0, 1.0);
}

std::string_view rouge_variant_name(RougeVariant v) {
  return v == RougeVariant::rouge_l ? "rouge_l" : "rouge_1";
}

RougeVariant rouge_variant_from_name(std::string_view name) {
  if (name == "rouge_l") return RougeVariant::rouge_l;
  if (name == "rouge_1") return RougeVariant::rouge_1;
  throw ParseError("unknown rouge variant: " + std::string(name));
}

namespace {

RougeScore from_counts(double matches, std::size_t candidate_len, std::size_t reference_len) {
  RougeScore score;
  if (candidate_len == 0 || reference_len == 0) return score;
  score.precision = matches / static_cast<double>(candidate_len);
  score.recall = matches / static_cast<double>(reference_len);
  if (score.precision + score.recall > 0.0) {
    score.f1 = 2.0 * score.precision * score.recall / (score.precision + score.recall);
  }
  return score;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0) return 0;
  // Two-row DP over token sequences.
  std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace

RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
  const auto cand = text::tokenize(candidate);
  const auto ref = text::tokenize(reference);
  const std::size_t lcs = lcs_length(cand, ref);
  return from_counts(static_cast<double>(lcs), cand.size(), ref.size());
}

RougeScore rouge_1(std::string_view candidate, std::string_view reference) {
  const auto cand = text::tokenize(candidate);
  const auto ref = text::tokenize(reference);
  if (cand.empty() || ref.empty()) return {};
  std::unordered_map<std::string, long> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  double matches = 0.0;
  for (const auto& t : cand) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      matches += 1.0;
      --it->second;
    }
  }
  return from_counts(matches, cand.size(), ref.size());
}

RougeScore rouge(RougeVariant variant, std::string_view candidate, std::string_view reference) {
  return variant == RougeVariant::rouge_l ? rouge_l(candidate, reference)
                                          : rouge_1(candidate, reference);
}

}  // namespace roundtable::eval
