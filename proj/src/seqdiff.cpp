#include "structrec/seqdiff.hpp"

#include <algorithm>

namespace structrec {

std::string_view to_string(FailureSignature sig) {
  switch (sig) {
    case FailureSignature::one_token_short: return "one-token-short";
    case FailureSignature::one_token_long: return "one-token-long";
    case FailureSignature::wrong_token: return "wrong-token";
    case FailureSignature::other: return "other";
  }
  return "?";
}

namespace {

// True when `shorter` equals `longer` with one token removed.
bool one_deletion(std::span<const Token> shorter, std::span<const Token> longer) {
  if (shorter.size() + 1 != longer.size()) return false;
  auto [s, l] = std::mismatch(shorter.begin(), shorter.end(), longer.begin());
  return std::equal(s, shorter.end(), l + 1);
}

}  // namespace

FailureSignature failure_signature(std::span<const Token> pred, std::span<const Token> gold) {
  if (std::equal(pred.begin(), pred.end(), gold.begin(), gold.end())) {
    throw DomainError("failure_signature called on a correct prediction");
  }
  if (one_deletion(pred, gold)) return FailureSignature::one_token_short;
  if (one_deletion(gold, pred)) return FailureSignature::one_token_long;
  if (pred.size() == gold.size()) return FailureSignature::wrong_token;
  return FailureSignature::other;
}

}  // namespace structrec
