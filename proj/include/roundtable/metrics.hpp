#pragma once

#include <span>
#include <string>
#include <string_view>

namespace roundtable::eval {

/// dot(a,b) / (|a|·|b|). Throws on dimension mismatch or a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

enum class RougeVariant { rouge_l, rouge_1 };
std::string_view rouge_variant_name(RougeVariant v);
RougeVariant rouge_variant_from_name(std::string_view name);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// LCS-based: precision = LCS/|candidate|, recall = LCS/|reference|, F1 the
/// harmonic mean. Empty token list on either side scores all zeros.
/// Tokenization: lowercase, punctuation stripped, whitespace split.
RougeScore rouge_l(std::string_view candidate, std::string_view reference);

/// Clipped unigram overlap, same degenerate-input handling.
RougeScore rouge_1(std::string_view candidate, std::string_view reference);

RougeScore rouge(RougeVariant variant, std::string_view candidate, std::string_view reference);

}  // namespace roundtable::eval
