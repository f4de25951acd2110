// xanim: validate, import, run, generate and serve executable class models.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "xanim/codegen.hpp"
#include "xanim/ingest.hpp"
#include "xanim/runtime.hpp"
#include "xanim/stepd.hpp"
#include "xanim/trace.hpp"
#include "xanim/value_json.hpp"

namespace {

using namespace xanim;

constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure("cannot write " + path);
  out << data;
  if (!out.flush()) throw Failure("cannot write " + path);
}

bool looks_like_xml(const std::string& path, const std::string& text) {
  auto ext = std::filesystem::path(path).extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".xmi" || ext == ".xml") return true;
  if (ext == ".json") return false;
  std::size_t i = 0;
  if (text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  return i < text.size() && text[i] == '<';
}

void print_diagnostics(const std::string& where, const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds) std::cerr << where << ": " << to_string(d) << "\n";
}

ClassModel load_model(const std::string& path) {
  auto text = read_file(path);
  if (looks_like_xml(path, text)) {
    auto imp = import_xmi(text);
    print_diagnostics(path, imp.warnings);
    return std::move(imp.model);
  }
  return load_model_json(text);
}

std::shared_ptr<const FusedModel> load_fused(const std::string& model_path, const std::string& methods_path) {
  auto model = load_model(model_path);
  auto bundle = load_method_bundle(read_file(methods_path));
  return std::make_shared<const FusedModel>(fuse(std::move(model), bundle));
}

// Parse errors and unbound entries, as printable diagnostics.
std::vector<std::string> fused_problems(const FusedModel& f) {
  std::vector<std::string> out;
  for (const auto& d : f.diagnostics)
    out.push_back(d.key.class_name + "." + d.key.method + ": " + to_string(d.diagnostic));
  for (const auto& k : f.unbound)
    out.push_back(k.class_name + "." + k.method + ": no such method in the class model");
  return out;
}

void require_clean(const FusedModel& f) {
  auto problems = fused_problems(f);
  if (problems.empty()) return;
  for (const auto& p : problems) std::cerr << p << "\n";
  throw Failure("the method bundle has " + std::to_string(problems.size()) + " problem(s)");
}

MethodKey parse_entry(const std::string& entry_text) {
  auto dot = entry_text.find('.');
  if (dot == std::string::npos || !is_identifier(entry_text.substr(0, dot)) || !is_identifier(entry_text.substr(dot + 1)))
    throw UsageError("entry must look like Class.Method, got '" + entry_text + "'");
  return {entry_text.substr(0, dot), entry_text.substr(dot + 1)};
}

int cmd_validate(const std::string& model_path, const std::string& methods_path) {
  ClassModel model;
  try {
    model = load_model(model_path);
  } catch (const IngestError& e) {
    print_diagnostics(model_path, e.diagnostics());
    std::cerr << model_path << ": " << ingest_error_kind_name(e.kind()) << ": " << e.what() << "\n";
    return kFailure;
  }
  auto bundle = load_method_bundle(read_file(methods_path));
  auto fused = fuse(std::move(model), bundle);
  auto problems = fused_problems(fused);
  for (const auto& p : problems) std::cerr << p << "\n";
  return problems.empty() ? 0 : kFailure;
}

int cmd_import(const std::string& in, const std::string& out) {
  auto imp = import_xmi(read_file(in));
  print_diagnostics(in, imp.warnings);
  write_file(out, save_model_json(imp.model));
  return 0;
}

struct RunArgs {
  std::string model, methods, entry, args, trace;
  std::uint64_t max_steps = kDefaultStepBudget;
};

int cmd_run(const RunArgs& a) {
  auto key = parse_entry(a.entry);
  std::vector<Value> args;
  if (!a.args.empty()) {
    try {
      args = values_from_json_text(a.args);
    } catch (const std::exception& e) {
      throw UsageError(std::string("--args: ") + e.what());
    }
  }
  auto fused = load_fused(a.model, a.methods);
  require_clean(*fused);

  TraceLog log;
  std::unique_ptr<ExecSession> session;
  try {
    session = start_session(fused, key.class_name, key.method, std::move(args), collect_into(log),
                            SessionOptions{a.max_steps});
  } catch (const StartError& e) {
    std::cerr << "cannot start " << a.entry << ": " << start_error_kind_name(e.kind()) << ": " << e.what() << "\n";
    return kFailure;
  }
  auto snap = run_to_completion(*session);
  if (!a.trace.empty()) write_file(a.trace, serialize_trace(log));
  std::cout << snap.to_json() << "\n";
  if (snap.status != SessionStatus::Finished) {
    for (const auto& e : log)
      if (e.type() == EventType::Error) std::cerr << "runtime error: " << serialize_event(e) << "\n";
    return kFailure;
  }
  return 0;
}

int cmd_gen(const std::string& model, const std::string& methods, const std::string& out, const std::string& entry) {
  std::optional<MethodKey> key;
  if (!entry.empty()) key = parse_entry(entry);
  auto fused = load_fused(model, methods);
  try {
    auto unit = generate_program(*fused, key);
    write_file(out, unit.source);
  } catch (const CodegenError& e) {
    std::cerr << codegen_error_kind_name(e.kind()) << ": " << e.what() << "\n";
    return kFailure;
  }
  return 0;
}

int cmd_serve(const std::string& model, const std::string& methods, int port, bool use_stdio, std::uint64_t max_steps) {
  auto fused = load_fused(model, methods);
  require_clean(*fused);
  SessionOptions opts{max_steps};
  if (use_stdio) {
    stepd::serve_stdio(fused, std::cin, std::cout, opts);
    return 0;
  }
  if (port < 0) throw UsageError("serve needs --port or --stdio");
  stepd::WebSocketServer server(fused, {"127.0.0.1", static_cast<std::uint16_t>(port), opts});
  std::cerr << "listening on ws://127.0.0.1:" << server.port() << "\n";
  server.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Executable class models with OAL method bodies"};
  app.require_subcommand(1);

  std::string model, methods, out;
  auto* validate = app.add_subcommand("validate", "Check a model and method bundle; diagnostics go to stderr");
  validate->add_option("model", model, "Model JSON or XMI")->required();
  validate->add_option("methods", methods, "Method bundle JSON")->required();

  std::string xmi_in;
  auto* import = app.add_subcommand("import-xmi", "Convert an XMI 2.1 class diagram to Model JSON");
  import->add_option("input", xmi_in, "XMI file")->required();
  import->add_option("-o,--output", out, "Model JSON to write")->required();

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Execute an entry method and print the final snapshot");
  run->add_option("--model", ra.model)->required();
  run->add_option("--methods", ra.methods)->required();
  run->add_option("--entry", ra.entry, "Class.Method")->required();
  run->add_option("--args", ra.args, "JSON list of tagged values");
  run->add_option("--trace", ra.trace, "Write the event trace (JSONL) here");
  run->add_option("--max-steps", ra.max_steps, "Command budget")->check(CLI::PositiveNumber);

  std::string gen_entry;
  auto* gen = app.add_subcommand("gen", "Generate a Python program");
  gen->add_option("--model", model)->required();
  gen->add_option("--methods", methods)->required();
  gen->add_option("-o,--output", out)->required();
  gen->add_option("--entry", gen_entry, "Class.Method run by the program's main guard");

  int port = -1;
  bool use_stdio = false;
  std::uint64_t serve_steps = kDefaultStepBudget;
  auto* serve = app.add_subcommand("serve", "Run the stepping service");
  serve->add_option("--model", model)->required();
  serve->add_option("--methods", methods)->required();
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_flag("--stdio", use_stdio, "Newline-delimited frames on stdin/stdout");
  serve->add_option("--max-steps", serve_steps)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*validate) return cmd_validate(model, methods);
    if (*import) return cmd_import(xmi_in, out);
    if (*run) return cmd_run(ra);
    if (*gen) return cmd_gen(model, methods, out, gen_entry);
    if (*serve) return cmd_serve(model, methods, port, use_stdio, serve_steps);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IngestError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << to_string(d) << "\n";
    std::cerr << ingest_error_kind_name(e.kind()) << ": " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
