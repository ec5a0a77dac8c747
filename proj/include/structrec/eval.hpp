#pragma once

// Scoring of externally produced predictions against gold records, and
// step-by-step checking of model-written reduction traces.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "structrec/dataset.hpp"
#include "structrec/seqdiff.hpp"
#include "structrec/trace_format.hpp"

namespace structrec {

struct PredictionRecord {
  std::string id;
  // Sampling order; Hit@k looks at the first k.
  std::vector<Tokens> candidates;
};

using Predictions = std::vector<PredictionRecord>;

// JSONL lines {"id": ..., "candidates": [[tok, ...], ...]}. A candidate may
// also be a single string, split on whitespace. Throws SchemaError with the
// 1-based line number, or IoError.
Predictions parse_predictions(std::istream& in);
Predictions read_predictions(const std::filesystem::path& path);

// Gold order, each paired with its prediction. Throws IdMismatch on a
// missing, extra or duplicated id.
std::vector<const PredictionRecord*> align(std::span<const PredictionRecord> preds,
                                           std::span<const ExampleRecord> gold);

// Fractions over the gold set; 0 for an empty set.
double exact_match(std::span<const PredictionRecord> preds, std::span<const ExampleRecord> gold);
// Throws DomainError when k == 0.
double hit_at_k(std::span<const PredictionRecord> preds, std::span<const ExampleRecord> gold,
                std::size_t k);

enum class BreakdownKey { bits, depth, edge_group, tree_depth };
std::string_view to_string(BreakdownKey key);
// Throws DomainError.
BreakdownKey parse_breakdown_key(std::string_view text);

struct BucketRow {
  std::uint64_t key = 0;
  std::size_t n = 0;
  std::size_t correct = 0;
  // One entry per requested k.
  std::vector<double> hit;

  double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(correct) / n; }
};

struct Breakdown {
  BreakdownKey key = BreakdownKey::edge_group;
  std::vector<std::size_t> ks;
  // Ascending by key; empty buckets are left out.
  std::vector<BucketRow> rows;
};

// Throws DomainError when a gold record lacks the key's metadata.
Breakdown breakdown(std::span<const PredictionRecord> preds, std::span<const ExampleRecord> gold,
                    BreakdownKey key, std::span<const std::size_t> ks = {});

struct MetricsReport {
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::vector<std::size_t> ks;
  std::vector<double> hit;
  std::map<FailureSignature, std::size_t> signatures;
  std::vector<Breakdown> breakdowns;
};

// Hit@k for every k in `ks`, failure signatures of wrong first candidates,
// the edge-group table and any extra breakdowns.
MetricsReport evaluate(std::span<const PredictionRecord> preds, std::span<const ExampleRecord> gold,
                       std::vector<std::size_t> ks = {1, 3, 5},
                       std::span<const BreakdownKey> keys = {});

enum class ReportFormat { text, json };
ReportFormat parse_report_format(std::string_view text);

std::string render_report(const MetricsReport& report, ReportFormat format);

enum class TraceError {
  illegal_rule,
  token_mutation,
  missing_termination,
  premature_termination,
  rule_order_swap,
  malformed_state,
};

std::string_view to_string(TraceError label);

struct TraceJudgment {
  bool valid = true;
  // Index of the first wrong state (state 0 is the initial call). Equals
  // the state count when the trace ends before normal form.
  std::optional<std::size_t> first_bad_step;
  std::optional<TraceError> label;
  std::string detail;
};

// Checks a rendered trace of `program`: s in paren style with single
// steps, preorder / inorder in arrow style with level steps. When `input`
// is given, state 0 must be exactly the call on it. Throws DomainError for
// an unsupported program.
TraceJudgment validate_trace(std::string_view text, std::string_view program,
                             const std::optional<Term>& input = std::nullopt);

// Accepts trace_s / trace_inorder style task names as well as bare
// program names.
std::string trace_program_for_task(std::string_view task);

struct TraceReport {
  std::size_t n = 0;
  std::size_t valid = 0;
  std::map<TraceError, std::size_t> labels;
  // (line or record index, judgment) for each invalid trace.
  std::vector<std::pair<std::size_t, TraceJudgment>> failures;
};

// Plain lines are traces of `program`. JSON lines are gold records whose
// target holds the trace and whose input pins state 0.
TraceReport validate_trace_file(std::istream& in, std::string_view program);
std::string render_trace_report(const TraceReport& report, ReportFormat format);

}  // namespace structrec
