// structrec: dataset generation, reduction, shortcut emulation, ASM runs and
// evaluation from the command line.
//
// Exit codes: 0 ok, 2 bad flags, 3 I/O, 4 malformed input, 5 fuel or step
// budget exhausted, 6 prediction/gold id mismatch, 1 anything else.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "structrec/dataset.hpp"
#include "structrec/eval.hpp"
#include "structrec/shortcut.hpp"

using namespace structrec;

namespace {

ValueRange parse_range(const std::string& text, const char* flag) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument("no colon");
    std::size_t used = 0;
    const std::string lo = text.substr(0, colon), hi = text.substr(colon + 1);
    ValueRange r{std::stoull(lo, &used), 0};
    if (used != lo.size()) throw std::invalid_argument("trailing");
    r.hi = std::stoull(hi, &used);
    if (used != hi.size()) throw std::invalid_argument("trailing");
    if (r.lo > r.hi) throw std::invalid_argument("empty");
    return r;
  } catch (const std::logic_error&) {
    throw DomainError(std::string(flag) + " expects LO:HI with LO <= HI, got '" + text + "'");
  }
}

void print_tokens(const Tokens& t) { std::cout << join_tokens(t) << "\n"; }

struct GenOptions {
  std::string task = "successor";
  std::string order = "reverse";
  std::string range = "1:131072";
  std::string random_bits;
  std::size_t count = 1000;
  std::string exclude;
  std::string edge_cases;
  std::string depths = "5:6";
  std::string alphabet = "abc";
  std::size_t train = 20000;
  std::size_t test = 1000;
  std::string program = "inorder";
  std::optional<std::size_t> k;
  std::string remap;
  std::size_t pad = 0;
  std::size_t k1 = 1;
  std::size_t k2 = 1;
  bool upweight = false;
  std::uint64_t seed = kDefaultSeed;
  std::string out = "data";
};

int cmd_gen(const GenOptions& o) {
  DatasetSpec spec;
  spec.order = parse_order(o.order);
  spec.range = parse_range(o.range, "--range");
  spec.count = o.count;
  if (!o.exclude.empty()) spec.exclude = parse_range(o.exclude, "--exclude");
  const ValueRange depths = parse_range(o.depths, "--depths");
  spec.trees = TreeSpec{depths.lo, depths.hi, o.alphabet, o.train, o.test, o.seed};
  spec.program = o.program;
  spec.k = o.k;
  if (!o.remap.empty()) spec.remap = VocabRemap::parse(o.remap);
  spec.pad_max = o.pad;
  spec.k1 = o.k1;
  spec.k2 = o.k2;
  spec.upweight = o.upweight;
  spec.seed = o.seed;
  if (o.task == "successor") {
    if (!o.edge_cases.empty() && !o.random_bits.empty()) {
      throw DomainError("--edge-cases and --random-bits are separate datasets");
    }
    spec.task = "successor";
    if (!o.edge_cases.empty()) {
      const ValueRange b = parse_range(o.edge_cases, "--edge-cases");
      spec.task = "edge";
      spec.bits_lo = b.lo;
      spec.bits_hi = b.hi;
    } else if (!o.random_bits.empty()) {
      const ValueRange b = parse_range(o.random_bits, "--random-bits");
      spec.task = "random";
      spec.bits_lo = b.lo;
      spec.bits_hi = b.hi;
    }
  } else if (o.task == "trees") {
    spec.task = "traversal";
  } else if (o.task == "traces" || o.task == "single_step") {
    spec.task = o.task;
  } else {
    throw DomainError("unknown dataset '" + o.task + "'");
  }
  const auto splits = generate(spec);
  const std::filesystem::path dir(o.out);
  const auto manifest = write_dataset(spec, splits, dir);
  for (const auto& f : manifest["files"]) {
    std::cout << (dir / f["file"].get<std::string>()).string() << "  " << f["records"].get<std::size_t>()
              << " records  sha256 " << f["sha256"].get<std::string>() << "\n";
  }
  std::cout << (dir / "manifest.json").string() << "\n";
  return 0;
}

struct ReduceOptions {
  std::string program;
  std::vector<std::string> inputs;
  bool trace = false;
  std::optional<std::size_t> k;
  std::string style;
  std::string order = "reverse";
  std::optional<std::size_t> fuel;
};

Term parse_program_input(const std::string& program, const std::string& text, SeqOrder order) {
  const Tokens t = split_trace_tokens(text);
  if (program == "s") {
    TokenSeq seq{t, order};
    if (order == SeqOrder::natural) seq = reorder(seq, SeqOrder::constructor_reverse);
    return delinearize(seq.tokens, bin_pos_def());
  }
  if (program == "add") return delinearize(t, peano_def());
  return tree_parse(t);
}

int cmd_reduce(const ReduceOptions& o) {
  const SeqOrder order = parse_order(o.order);
  if (order == SeqOrder::tree_appendix) throw DomainError("--order must be reverse or natural");
  const Program* prog = builtin_programs().find(o.program);
  if (prog == nullptr) throw DomainError("unknown program '" + o.program + "'");
  if (o.inputs.size() != prog->arity()) {
    throw DomainError(o.program + " takes " + std::to_string(prog->arity()) + " argument(s)");
  }
  if (o.k && *o.k == 0) throw DomainError("--k must be at least 1");
  ExprList args;
  for (const auto& in : o.inputs) args.push_back(Expr::value(parse_program_input(o.program, in, order)));
  const Expr call = Expr::call(o.program, std::move(args));

  TraceStyle style = o.program == "s" ? TraceStyle::paren
                     : o.program == "add" ? TraceStyle::term
                                          : TraceStyle::arrow;
  if (!o.style.empty()) style = parse_trace_style(o.style);

  const Reducer reducer;
  const std::size_t fuel = o.fuel ? *o.fuel : default_fuel(call);
  if (o.k) {
    std::cout << render_state(reducer.reduce_k(call, *o.k).result, style) << "\n";
    return 0;
  }
  const Reduction red = reducer.reduce(call, fuel);
  if (o.trace) {
    std::cout << render_trace(red.trace, style) << "\n";
    return 0;
  }
  if (red.result.is_value()) {
    TokenSeq seq = linearize(red.result.term());
    if (order == SeqOrder::natural && o.program == "s") seq = reorder(seq, SeqOrder::natural);
    print_tokens(seq.tokens);
  } else {
    print_tokens(Tokens(red.result.tokens().begin(), red.result.tokens().end()));
  }
  return 0;
}

struct ShortcutOptions {
  std::string order;
  std::string mode = "faithful";
  std::string input;
  std::string range;
  bool diff = false;
  bool log = false;
  std::string format = "text";
};

int cmd_shortcut(const ShortcutOptions& o) {
  const ShortcutKind kind{parse_shortcut_order(o.order), parse_shortcut_mode(o.mode)};
  if (o.format != "text" && o.format != "jsonl") throw DomainError("--format must be text or jsonl");
  if (!o.input.empty()) {
    if (o.diff || !o.range.empty()) throw DomainError("--input excludes --range and --diff");
    const Tokens in = split_tokens(o.input);
    if (o.log) {
      const AsmRun run = emulate_run(kind, in, true);
      std::cout << render_log(run);
      print_tokens(run.output);
    } else {
      print_tokens(emulate(kind, in));
    }
    return 0;
  }
  const ValueRange r = parse_range(o.range.empty() ? "1:1024" : o.range, "--range");
  if (r.lo == 0) throw DomainError("--range starts at 1");
  if (o.diff) {
    const DiffReport report = diff_against_oracle(kind, r.lo, r.hi);
    std::cout << (o.format == "jsonl" ? render_diff_jsonl(report) : render_diff_text(report));
    return 0;
  }
  const SeqOrder seq = kind.order == ShortcutOrder::natural ? SeqOrder::natural : SeqOrder::constructor_reverse;
  for (std::uint64_t n = r.lo; n <= r.hi; ++n) {
    const Tokens in = encode_in_order(n, seq);
    std::cout << n << "\t" << join_tokens(in) << "\t" << join_tokens(emulate(kind, in)) << "\n";
  }
  return 0;
}

struct AsmOptions {
  std::string machine;
  std::string input;
  std::string mode = "faithful";
  bool log = false;
  std::size_t budget = 4096;
};

int cmd_asm(const AsmOptions& o) {
  const Tokens in = split_tokens(o.input);
  if (o.machine == "rasm") {
    const RasmRun run = rasm_run(successor_rasm(), in, o.budget);
    print_tokens(run.output);
    std::cout << "steps " << run.steps << "\nchild_agents " << run.child_agents << "\nmax_depth " << run.max_depth
              << "\n";
    return 0;
  }
  const AsmMachine* m = nullptr;
  if (o.machine == "successor") {
    m = &successor_asm();
  } else if (o.machine == "natural" || o.machine == "reverse") {
    m = &shortcut_machine({parse_shortcut_order(o.machine), parse_shortcut_mode(o.mode)});
  } else {
    throw DomainError("unknown machine '" + o.machine + "'");
  }
  const AsmRun run = asm_run(*m, in, o.budget, o.log);
  if (o.log) std::cout << render_log(run);
  print_tokens(run.output);
  std::cout << "steps " << run.steps << "\nmax_fired " << run.max_fired << "\n";
  return 0;
}

struct EvalOptions {
  std::string gold;
  std::string pred;
  std::string traces;
  std::string program;
  std::vector<std::size_t> ks{1, 3, 5};
  std::vector<std::string> breakdowns;
  std::string format = "text";
};

int cmd_eval(const EvalOptions& o) {
  const ReportFormat format = parse_report_format(o.format);
  if (!o.traces.empty()) {
    std::ifstream f(o.traces, std::ios::binary);
    if (!f) throw IoError("cannot open " + o.traces);
    std::cout << render_trace_report(validate_trace_file(f, o.program), format);
    return 0;
  }
  if (o.gold.empty() || o.pred.empty()) throw DomainError("eval needs --gold and --pred, or --validate-traces");
  std::vector<BreakdownKey> keys;
  for (const auto& b : o.breakdowns) keys.push_back(parse_breakdown_key(b));
  const Records gold = read_jsonl(o.gold);
  const Predictions preds = read_predictions(o.pred);
  std::cout << render_report(evaluate(preds, gold, o.ks, keys), format);
  return 0;
}

template <class F>
int guarded(F&& run) {
  try {
    return run();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return 4;
  } catch (const SchemaError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return 4;
  } catch (const FuelExhausted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const BudgetExhausted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const IdMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 6;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural recursion toolkit: datasets, reduction traces, shortcut emulators, evaluation"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a dataset with a manifest");
  g->add_option("dataset", gen.task, "successor | trees | traces | single_step")
      ->required()
      ->check(CLI::IsMember({"successor", "trees", "traces", "single_step"}));
  g->add_option("--order", gen.order, "Successor token order: reverse | natural");
  g->add_option("--range", gen.range, "Successor values LO:HI");
  g->add_option("--random-bits", gen.random_bits, "Random test set: bit lengths LO:HI");
  g->add_option("--count", gen.count, "Random test set size");
  g->add_option("--exclude", gen.exclude, "Random test set: values LO:HI to leave out");
  g->add_option("--edge-cases", gen.edge_cases, "Edge-case groups over bit lengths LO:HI");
  g->add_option("--depths", gen.depths, "Tree depths LO:HI");
  g->add_option("--alphabet", gen.alphabet, "Tree labels, one character each");
  g->add_option("--train", gen.train, "Training trees");
  g->add_option("--test", gen.test, "Test trees");
  g->add_option("--program", gen.program, "Traversal or trace program: preorder | inorder | s");
  g->add_option("--k", gen.k, "Targets after k reduction levels instead of the normal form");
  g->add_option("--remap", gen.remap, "Token substitution, e.g. X0=a,X1=b,01=c");
  g->add_option("--pad", gen.pad, "Random PAD prefix of 0..P tokens");
  g->add_option("--k1", gen.k1, "Copies (or weight) of group-1 edge records");
  g->add_option("--k2", gen.k2, "Copies (or weight) of group-2 edge records");
  g->add_flag("--upweight", gen.upweight, "Turn --k1/--k2 into weights instead of copies");
  g->add_option("--seed", gen.seed, "Seed for every random draw");
  g->add_option("--out", gen.out, "Output directory")->envname("STRUCTREC_OUT_DIR");

  ReduceOptions red;
  auto* r = app.add_subcommand("reduce", "Reduce a program call to normal form");
  r->add_option("program", red.program, "s | add | preorder | inorder")->required();
  r->add_option("inputs", red.inputs, "Argument token sequences (add takes two)")->required();
  r->add_flag("--trace", red.trace, "Print every reduction level");
  r->add_option("--k", red.k, "Print the state after k levels");
  r->add_option("--style", red.style, "Trace style: paren | arrow | term (default depends on the program)");
  r->add_option("--order", red.order, "bin_pos input and output order: reverse | natural");
  r->add_option("--fuel", red.fuel, "Level budget (default: enough for structural recursion)");

  ShortcutOptions sc;
  auto* s = app.add_subcommand("shortcut", "Run a shortcut emulator");
  s->add_option("order", sc.order, "natural | reverse")->required()->check(CLI::IsMember({"natural", "reverse"}));
  s->add_option("--mode", sc.mode, "faithful | corrected")->check(CLI::IsMember({"faithful", "corrected"}));
  s->add_option("--input", sc.input, "One input in the emulator's order");
  s->add_option("--range", sc.range, "Values LO:HI (default 1:1024)");
  s->add_flag("--diff", sc.diff, "Report disagreements with the reduction oracle");
  s->add_flag("--log", sc.log, "Print the fired rules of every step (with --input)");
  s->add_option("--format", sc.format, "Diff format: text | jsonl");

  AsmOptions as;
  auto* a = app.add_subcommand("asm", "Run an abstract state machine");
  a->add_option("machine", as.machine, "successor | rasm | natural | reverse")
      ->required()
      ->check(CLI::IsMember({"successor", "rasm", "natural", "reverse"}));
  a->add_option("--input", as.input, "Input tokens")->required();
  a->add_option("--mode", as.mode, "Shortcut mode: faithful | corrected");
  a->add_flag("--log", as.log, "Print the fired rules of every step");
  a->add_option("--budget", as.budget, "Step budget per agent");

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Score predictions or validate traces");
  e->add_option("--gold", ev.gold, "Gold JSONL")->envname("STRUCTREC_GOLD");
  e->add_option("--pred", ev.pred, "Prediction JSONL")->envname("STRUCTREC_PRED");
  e->add_option("--validate-traces", ev.traces, "Trace file: plain lines or gold trace records");
  e->add_option("--program", ev.program, "Program of plain trace lines: s | preorder | inorder");
  e->add_option("--k", ev.ks, "Hit@k cut-offs")->delimiter(',');
  e->add_option("--breakdown", ev.breakdowns, "Extra tables: bits | depth | edge_group | tree_depth");
  e->add_option("--format", ev.format, "text | json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  if (g->parsed()) return guarded([&] { return cmd_gen(gen); });
  if (r->parsed()) return guarded([&] { return cmd_reduce(red); });
  if (s->parsed()) return guarded([&] { return cmd_shortcut(sc); });
  if (a->parsed()) return guarded([&] { return cmd_asm(as); });
  return guarded([&] { return cmd_eval(ev); });
}
