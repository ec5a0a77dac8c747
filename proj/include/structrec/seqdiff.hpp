#pragma once

#include <span>
#include <string_view>

#include "structrec/term.hpp"

namespace structrec {

enum class FailureSignature { one_token_short, one_token_long, wrong_token, other };

std::string_view to_string(FailureSignature sig);

// Classifies a wrong prediction against its gold sequence.
// one_token_short: pred is gold with exactly one token deleted.
// one_token_long: gold is pred with exactly one token deleted.
// wrong_token: same length, at least one position differs.
// Throws DomainError when pred equals gold.
FailureSignature failure_signature(std::span<const Token> pred, std::span<const Token> gold);

}  // namespace structrec
