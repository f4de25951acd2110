#include "support.hpp"

#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "xanim/codegen.hpp"
#include "xanim/value_json.hpp"

namespace xt {

std::filesystem::path fixtures_dir() { return XANIM_FIXTURES_DIR; }
std::string python_exe() { return XANIM_PYTHON; }
std::string cli_exe() { return XANIM_CLI; }

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

std::vector<Fixture> load_fixtures() {
  std::vector<Fixture> out;
  for (const auto& entry : std::filesystem::directory_iterator(fixtures_dir())) {
    if (!entry.is_directory() || !std::filesystem::exists(entry.path() / "fixture.json")) continue;
    Fixture f;
    f.name = entry.path().filename().string();
    f.dir = entry.path();
    f.model_text = read_text(f.dir / "model.json");
    f.methods_text = read_text(f.dir / "methods.json");
    auto j = nlohmann::json::parse(read_text(f.dir / "fixture.json"));
    auto entry_text = j.at("entry").get<std::string>();
    auto dot = entry_text.find('.');
    f.entry = {entry_text.substr(0, dot), entry_text.substr(dot + 1)};
    f.args_json = j.value("args", nlohmann::json::array()).dump();
    f.args = values_from_json_text(f.args_json);
    f.expect_status = j.at("expect_status").get<std::string>();
    f.max_steps = j.value("max_steps", kDefaultStepBudget);
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const Fixture& a, const Fixture& b) { return a.name < b.name; });
  return out;
}

const Fixture& fixture(const std::string& name) {
  static const auto all = load_fixtures();
  for (const auto& f : all)
    if (f.name == name) return f;
  throw std::runtime_error("no fixture " + name);
}

std::shared_ptr<const FusedModel> fuse_texts(const std::string& model_json, const std::string& methods_json) {
  return std::make_shared<const FusedModel>(fuse(load_model_json(model_json), load_method_bundle(methods_json)));
}

std::shared_ptr<const FusedModel> fuse_fixture(const Fixture& f) { return fuse_texts(f.model_text, f.methods_text); }

RunResult run_entry(std::shared_ptr<const FusedModel> fused, const MethodKey& entry, std::vector<Value> args,
                    std::uint64_t budget) {
  RunResult r;
  auto s = start_session(std::move(fused), entry.class_name, entry.method, std::move(args), collect_into(r.log),
                         SessionOptions{budget});
  r.snap = run_to_completion(*s);
  return r;
}

RunResult run_fixture(const Fixture& f) { return run_entry(fuse_fixture(f), f.entry, f.args, f.max_steps); }

// ---- processes -------------------------------------------------------------

ProcResult run_process(const std::vector<std::string>& argv, const std::string& input) {
  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (pipe(in_pipe) || pipe(out_pipe) || pipe(err_pipe)) throw std::runtime_error("pipe failed");
  pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    dup2(in_pipe[0], 0);
    dup2(out_pipe[1], 1);
    dup2(err_pipe[1], 2);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);
  signal(SIGPIPE, SIG_IGN);

  ProcResult r;
  std::size_t written = 0;
  int in_fd = in_pipe[1];
  if (input.empty()) {
    close(in_fd);
    in_fd = -1;
  }
  bool out_open = true, err_open = true;
  char buf[65536];
  while (out_open || err_open) {
    std::vector<pollfd> fds;
    if (in_fd >= 0) fds.push_back({in_fd, POLLOUT, 0});
    if (out_open) fds.push_back({out_pipe[0], POLLIN, 0});
    if (err_open) fds.push_back({err_pipe[0], POLLIN, 0});
    if (poll(fds.data(), fds.size(), -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (const auto& p : fds) {
      if (!p.revents) continue;
      if (p.fd == in_fd) {
        auto n = write(in_fd, input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if (n < 0 || written == input.size()) {
          close(in_fd);
          in_fd = -1;
        }
      } else {
        auto n = read(p.fd, buf, sizeof buf);
        bool is_out = p.fd == out_pipe[0];
        if (n > 0) {
          (is_out ? r.out : r.err).append(buf, static_cast<std::size_t>(n));
        } else {
          (is_out ? out_open : err_open) = false;
        }
      }
    }
  }
  if (in_fd >= 0) close(in_fd);
  close(out_pipe[0]);
  close(err_pipe[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return r;
}

TempDir::TempDir() {
  auto tmpl = (std::filesystem::temp_directory_path() / "xanim-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

ProcResult run_generated(const FusedModel& fused, const MethodKey& entry, const std::string& args_json,
                         std::uint64_t budget, const TempDir& dir, const std::string& stem) {
  auto unit = generate_program(fused, entry);
  auto path = dir / (stem + ".py");
  write_text(path, unit.source);
  return run_process({python_exe(), path.string(), "--args", args_json, "--max-steps", std::to_string(budget)});
}

// ---- replay oracle ---------------------------------------------------------

Snapshot replay(std::span<const TraceEvent> events, SessionStatus status_if_open) {
  std::map<InstanceId, ObjectInstance> heap;
  std::set<Link> links;
  Snapshot s;
  s.status = status_if_open;
  int depth = 0;
  for (const auto& e : events) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, event::InstanceCreated>) {
            heap[p.id] = ObjectInstance{p.id, p.class_name, {}};
          } else if constexpr (std::is_same_v<T, event::AttributeSet>) {
            heap.at(p.id).attrs[p.attr] = p.value;
          } else if constexpr (std::is_same_v<T, event::InstanceDeleted>) {
            heap.erase(p.id);
          } else if constexpr (std::is_same_v<T, event::LinkCreated>) {
            links.insert({p.rel, p.a, p.b});
          } else if constexpr (std::is_same_v<T, event::LinkRemoved>) {
            links.erase({p.rel, p.a, p.b});
          } else if constexpr (std::is_same_v<T, event::MethodCall>) {
            ++depth;
          } else if constexpr (std::is_same_v<T, event::MethodReturn>) {
            if (--depth == 0) s.return_value = p.value;
          } else if constexpr (std::is_same_v<T, event::RunFinished>) {
            s.status = p.status == "finished" ? SessionStatus::Finished : SessionStatus::Failed;
          } else if constexpr (std::is_same_v<T, event::Error>) {
            s.status = SessionStatus::Failed;
            s.return_value.reset();
          }
        },
        e.payload);
  }
  for (auto& [id, inst] : heap) s.instances.push_back(std::move(inst));
  s.links.assign(links.begin(), links.end());
  return s;
}

// ---- random programs -------------------------------------------------------

namespace {

using Rng = std::mt19937_64;

int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }
template <class T>
const T& choose(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(v.size()) - 1))];
}

struct GenClass {
  std::string name;
  int super = -1;
  int handle_target = 0;  // class index of attribute h<i>
};

struct GenRel {
  std::string id;
  int from, to;
};

struct ModelShape {
  std::vector<GenClass> classes;
  std::vector<GenRel> rels;

  bool is_a(int c, int ancestor) const {
    for (int k = c; k >= 0; k = classes[static_cast<std::size_t>(k)].super)
      if (k == ancestor) return true;
    return false;
  }
  // Attribute owners visible from class c.
  std::vector<int> lineage(int c) const {
    std::vector<int> out;
    for (int k = c; k >= 0; k = classes[static_cast<std::size_t>(k)].super) out.push_back(k);
    return out;
  }
};

class BodyGen {
 public:
  BodyGen(Rng& rng, const ModelShape& shape, int owner, bool is_static, int min_callee)
      : rng_(rng), m_(shape), owner_(owner), static_(is_static), min_callee_(min_callee) {}

  std::string body(const std::string& epilogue) {
    std::string out;
    out += "i = " + std::to_string(pick(rng_, 0, 5)) + ";\n";
    out += "j = " + std::to_string(pick(rng_, 1, 4)) + ";\n";
    out += "t = \"\";\n";
    out += "r = 0.5;\n";
    out += "select many ss from instances of " + cls(owner_) + ";\n";
    int creates = pick(rng_, 1, 2);
    for (int k = 0; k < creates; ++k) {
      int c = pick(rng_, 0, static_cast<int>(m_.classes.size()) - 1);
      if (handles_.count(c)) continue;
      out += "create object instance o" + std::to_string(c) + " of " + cls(c) + ";\n";
      handles_.insert(c);
    }
    int n = pick(rng_, 2, 6);
    for (int k = 0; k < n; ++k) out += stmt(1, "");
    out += epilogue;
    return out;
  }

 private:
  std::string cls(int c) const { return m_.classes[static_cast<std::size_t>(c)].name; }
  std::string hv(int c) const { return "o" + std::to_string(c); }

  // Some live handle variable, as (name, class).
  std::optional<std::pair<std::string, int>> any_handle() {
    std::vector<std::pair<std::string, int>> hs;
    for (int c : handles_) hs.push_back({hv(c), c});
    if (!static_) hs.push_back({"self", owner_});
    if (hs.empty()) return std::nullopt;
    return choose(rng_, hs);
  }

  std::string int_expr(int d) {
    switch (pick(rng_, 0, d > 1 ? 4 : 8)) {
      case 0: return std::to_string(pick(rng_, 0, 9));
      case 1: return "i";
      case 2: return "j";
      case 3: return "i + " + std::to_string(pick(rng_, 1, 3));
      case 4: return "i * j - 1";
      case 5: {
        auto h = any_handle();
        if (!h) return "j";
        auto line = m_.lineage(h->second);
        return h->first + ".n" + std::to_string(choose(rng_, line));
      }
      case 6: return "cardinality ss";
      case 7: return "(i + j) * " + int_expr(d + 1);
      default: return "-j";
    }
  }

  std::string bool_expr() {
    switch (pick(rng_, 0, 5)) {
      case 0: return "i < " + std::to_string(pick(rng_, 0, 6));
      case 1: return "j >= i and i != 3";
      case 2: return "not (i == j)";
      case 3: return "empty ss or i > 2";
      case 4: return "r < 2.0";
      default: {
        auto h = any_handle();
        if (!h) return "true";
        return h->first + ".f" + std::to_string(choose(rng_, m_.lineage(h->second)));
      }
    }
  }

  std::string ind(int d) const { return std::string(static_cast<std::size_t>(4 * (d - 1)), ' '); }

  std::string call_stmt(const std::string& p) {
    std::vector<int> callee;
    for (int c = min_callee_; c < static_cast<int>(m_.classes.size()); ++c) callee.push_back(c);
    if (callee.empty()) return p + "i = i + 1;\n";
    int c = choose(rng_, callee);
    std::string C = std::to_string(c);
    switch (pick(rng_, 0, 2)) {
      case 0:
        handles_.insert(c);
        return p + hv(c) + " = " + cls(c) + ".Mk" + C + "();\n";
      case 1: {
        // Any live instance of c or a subclass.
        for (int h : handles_)
          if (m_.is_a(h, c)) return p + hv(h) + ".Do" + C + "();\n";
        return p + "t = t + \"-\";\n";
      }
      default:
        for (int h : handles_)
          if (m_.is_a(h, c)) return p + "i = " + hv(h) + ".Op" + C + "(j);\n";
        return p + "j = j + 1;\n";
    }
  }

  std::string stmt(int d, const std::string&) {
    std::string p = ind(d);
    int hi = d >= 3 ? 11 : 15;
    switch (pick(rng_, 0, hi)) {
      case 0: return p + "i = " + int_expr(1) + ";\n";
      case 1: return p + "r = r + i / " + std::to_string(pick(rng_, 1, 4)) + ";\n";
      case 2: return p + "t = t + \"" + std::string(1, static_cast<char>('a' + pick(rng_, 0, 25))) + "\";\n";
      case 3: {
        auto h = any_handle();
        if (!h) return p + "j = j + i;\n";
        auto line = m_.lineage(h->second);
        int a = choose(rng_, line);
        switch (pick(rng_, 0, 3)) {
          case 0: return p + h->first + ".n" + std::to_string(a) + " = " + int_expr(1) + ";\n";
          case 1: return p + h->first + ".s" + std::to_string(a) + " = t;\n";
          case 2: return p + h->first + ".f" + std::to_string(a) + " = " + bool_expr() + ";\n";
          default: {
            int target = m_.classes[static_cast<std::size_t>(a)].handle_target;
            for (int c : handles_)
              if (m_.is_a(c, target)) return p + h->first + ".h" + std::to_string(a) + " = " + hv(c) + ";\n";
            return p + h->first + ".h" + std::to_string(a) + " = none;\n";
          }
        }
      }
      case 4: {
        int c = pick(rng_, 0, static_cast<int>(m_.classes.size()) - 1);
        handles_.insert(c);
        return p + "create object instance " + hv(c) + " of " + cls(c) + ";\n";
      }
      case 5: {
        int c = pick(rng_, 0, static_cast<int>(m_.classes.size()) - 1);
        if (!handles_.count(c) || !chance(rng_, 0.3)) return p + "select many ss from instances of " + cls(c) + ";\n";
        return p + "delete object instance " + hv(c) + ";\n";
      }
      case 6: {
        int c = pick(rng_, 0, static_cast<int>(m_.classes.size()) - 1);
        auto attr = std::to_string(choose(rng_, m_.lineage(c)));
        handles_.insert(c);
        return p + "select any " + hv(c) + " from instances of " + cls(c) + " where (selected.n" + attr +
               " >= 0);\n";
      }
      case 7: {
        if (m_.rels.empty()) return p + "i = i - 1;\n";
        const auto& rel = choose(rng_, m_.rels);
        int from = -1, to = -1;
        for (int c : handles_) {
          if (from < 0 && m_.is_a(c, rel.from)) from = c;
          if (to < 0 && m_.is_a(c, rel.to) && c != from) to = c;
        }
        if (from < 0 || to < 0) return p + "select many ss from instances of " + cls(rel.to) + ";\n";
        if (chance(rng_, 0.75)) return p + "relate " + hv(from) + " to " + hv(to) + " across " + rel.id + ";\n";
        return p + "unrelate " + hv(from) + " from " + hv(to) + " across " + rel.id + ";\n";
      }
      case 8: {
        if (m_.rels.empty()) return p + "j = j * 2;\n";
        const auto& rel = choose(rng_, m_.rels);
        for (int c : handles_) {
          if (m_.is_a(c, rel.from))
            return p + "select many ss related by " + hv(c) + "->" + cls(rel.to) + "[" + rel.id + "];\n";
          if (m_.is_a(c, rel.to)) {
            handles_.insert(rel.from);
            return p + "select any " + hv(rel.from) + " related by " + hv(c) + "->" + cls(rel.from) + "[" + rel.id +
                   "];\n";
          }
        }
        return p + "select many ss from instances of " + cls(rel.from) + ";\n";
      }
      case 9:
      case 10: return call_stmt(p);
      case 11: return p + "t = t + \"#\";\n";
      case 12: {
        std::string s = p + "if (" + bool_expr() + ")\n";
        s += block(d + 1);
        if (chance(rng_, 0.4)) s += p + "elif (" + bool_expr() + ")\n" + block(d + 1);
        if (chance(rng_, 0.5)) s += p + "else\n" + block(d + 1);
        return s + p + "end if;\n";
      }
      case 13: {
        std::string w = "w" + std::to_string(d);
        std::string s = p + w + " = 0;\n" + p + "while (" + w + " < " + std::to_string(pick(rng_, 0, 3)) + ")\n";
        s += block(d + 1);
        s += ind(d + 1) + w + " = " + w + " + 1;\n";
        return s + p + "end while;\n";
      }
      case 14: {
        std::string e = "e" + std::to_string(d);
        std::string s = p + "for each " + e + " in ss\n";
        s += ind(d + 1) + "i = i + 1;\n";
        if (chance(rng_, 0.5)) s += ind(d + 1) + "if (" + e + " == none)\n" + ind(d + 2) + "i = 0;\n" + ind(d + 1) + "end if;\n";
        return s + p + "end for;\n";
      }
      default: return p + "ss = ss;\n";
    }
  }

  // Handles bound inside a nested block may never be assigned at run time.
  std::string block(int d) {
    auto outer = handles_;
    std::string s;
    int n = pick(rng_, 1, 3);
    for (int k = 0; k < n; ++k) s += stmt(d, "");
    handles_ = outer;
    return s;
  }

  Rng& rng_;
  const ModelShape& m_;
  int owner_;
  bool static_;
  int min_callee_;
  std::set<int> handles_;
};

}  // namespace

RandomProgram random_program(std::uint64_t seed) {
  Rng rng(seed);
  ModelShape shape;
  int nc = pick(rng, 1, 5);
  for (int c = 0; c < nc; ++c) {
    GenClass g;
    g.name = "K" + std::to_string(c);
    if (c > 0 && chance(rng, 0.4)) g.super = pick(rng, 0, c - 1);
    g.handle_target = pick(rng, 0, nc - 1);
    shape.classes.push_back(g);
  }
  int nr = pick(rng, 0, 3);
  static const std::vector<std::string> mults = {"1", "0..1", "0..*", "1..*"};
  for (int k = 0; k < nr; ++k) shape.rels.push_back({"R" + std::to_string(k + 1), pick(rng, 0, nc - 1), pick(rng, 0, nc - 1)});

  nlohmann::ordered_json model;
  model["classes"] = nlohmann::ordered_json::array();
  for (int c = 0; c < nc; ++c) {
    auto C = std::to_string(c);
    nlohmann::ordered_json cj;
    cj["name"] = shape.classes[static_cast<std::size_t>(c)].name;
    cj["attributes"] = {{{"name", "n" + C}, {"type", "Integer"}},
                        {{"name", "s" + C}, {"type", "String"}},
                        {{"name", "x" + C}, {"type", "Real"}},
                        {{"name", "f" + C}, {"type", "Boolean"}},
                        {{"name", "h" + C}, {"type", "K" + std::to_string(shape.classes[static_cast<std::size_t>(c)].handle_target)}}};
    cj["methods"] = nlohmann::ordered_json::array();
    if (c == 0) cj["methods"].push_back({{"name", "Run"}, {"static", true}, {"params", nlohmann::ordered_json::array()}, {"returns", nullptr}});
    cj["methods"].push_back({{"name", "Op" + C}, {"static", false}, {"params", {{{"name", "p"}, {"type", "Integer"}}}}, {"returns", "Integer"}});
    cj["methods"].push_back({{"name", "Do" + C}, {"static", false}, {"params", nlohmann::ordered_json::array()}, {"returns", nullptr}});
    cj["methods"].push_back({{"name", "Mk" + C}, {"static", true}, {"params", nlohmann::ordered_json::array()}, {"returns", "K" + C}});
    model["classes"].push_back(cj);
  }
  model["relations"] = nlohmann::ordered_json::array();
  for (const auto& r : shape.rels)
    model["relations"].push_back({{"id", r.id},
                                  {"kind", chance(rng, 0.3) ? "composition" : "association"},
                                  {"from", "K" + std::to_string(r.from)},
                                  {"to", "K" + std::to_string(r.to)},
                                  {"fromMult", choose(rng, mults)},
                                  {"toMult", choose(rng, mults)}});
  model["generalizations"] = nlohmann::ordered_json::array();
  for (int c = 0; c < nc; ++c)
    if (shape.classes[static_cast<std::size_t>(c)].super >= 0)
      model["generalizations"].push_back({{"sub", "K" + std::to_string(c)},
                                          {"super", "K" + std::to_string(shape.classes[static_cast<std::size_t>(c)].super)}});

  nlohmann::ordered_json bundle;
  bundle["methods"] = nlohmann::ordered_json::array();
  auto add = [&](int c, const std::string& m, const std::string& code) {
    bundle["methods"].push_back({{"class", "K" + std::to_string(c)}, {"method", m}, {"code", code}});
  };
  add(0, "Run", BodyGen(rng, shape, 0, true, 0).body(""));
  for (int c = 0; c < nc; ++c) {
    auto C = std::to_string(c);
    add(c, "Op" + C, BodyGen(rng, shape, c, false, c + 1).body("return i + p;\n"));
    if (!chance(rng, 0.15)) add(c, "Do" + C, BodyGen(rng, shape, c, false, c + 1).body(""));
    add(c, "Mk" + C, "create object instance made of K" + C + ";\nmade.n" + C + " = " + std::to_string(pick(rng, 0, 9)) +
                         ";\nreturn made;\n");
  }
  return {model.dump(), bundle.dump(), {"K0", "Run"}};
}

std::string random_body_source(std::mt19937_64& rng) {
  static const std::vector<std::string> idents = {"a", "b", "cnt", "obj", "Dog", "_x", "endx", "selectedY", "R"};
  static const std::vector<std::string> classes = {"Dog", "Cat", "K0", "Park"};
  static const std::vector<std::string> binops = {"+", "-", "*", "/", "==", "!=", "<", "<=", ">", ">=", "and", "or"};

  std::function<std::string(int)> expr = [&](int d) -> std::string {
    int k = pick(rng, 0, d >= 3 ? 9 : 15);
    switch (k) {
      case 0: return std::to_string(pick(rng, 0, 1000000));
      case 1: return std::to_string(pick(rng, 0, 99)) + "." + std::to_string(pick(rng, 0, 999));
      case 2: {
        std::string s = "\"";
        int n = pick(rng, 0, 6);
        for (int q = 0; q < n; ++q) {
          int c = pick(rng, 0, 9);
          s += c == 0 ? "\\\"" : c == 1 ? "\\\\" : c == 2 ? " " : std::string(1, static_cast<char>('a' + pick(rng, 0, 25)));
        }
        return s + "\"";
      }
      case 3: return chance(rng, 0.5) ? "true" : "false";
      case 4: return "none";
      case 5: return "self";
      case 6: return choose(rng, idents);
      case 7: return "selected." + choose(rng, idents);
      case 8: return choose(rng, idents) + "." + choose(rng, idents);
      case 9: return "self." + choose(rng, idents);
      case 10: return "(" + expr(d + 1) + " " + choose(rng, binops) + " " + expr(d + 1) + ")";
      case 11: return "-" + expr(d + 1);
      case 12: return std::string(chance(rng, 0.5) ? "not " : "cardinality ") + expr(d + 1);
      case 13: return std::string(chance(rng, 0.5) ? "empty " : "not_empty ") + expr(d + 1);
      case 14: {
        std::string s = (chance(rng, 0.5) ? choose(rng, idents) : std::string("self")) + "." + choose(rng, idents) + "(";
        int n = pick(rng, 0, 3);
        for (int q = 0; q < n; ++q) s += (q ? ", " : "") + expr(d + 1);
        return s + ")";
      }
      default: return expr(d + 1) + " " + choose(rng, binops) + " " + expr(d + 1);
    }
  };
  auto var = [&] { return choose(rng, idents); };
  auto rel = [&] { return "R" + std::to_string(pick(rng, 1, 99)); };
  std::function<std::string(int)> stmt = [&](int d) -> std::string {
    int k = pick(rng, 0, d >= 3 ? 11 : 14);
    switch (k) {
      case 0: return "create object instance " + var() + " of " + choose(rng, classes) + ";\n";
      case 1: return "delete object instance " + var() + ";\n";
      case 2: return std::string(chance(rng, 0.3) ? "assign " : "") + var() + " = " + expr(0) + ";\n";
      case 3: return (chance(rng, 0.5) ? std::string("self") : var()) + "." + var() + " = " + expr(0) + ";\n";
      case 4: {
        std::string s = "select " + std::string(chance(rng, 0.5) ? "any " : "many ") + var() + " from instances of " +
                        choose(rng, classes);
        if (chance(rng, 0.5)) s += " where (" + expr(0) + ")";
        return s + ";\n";
      }
      case 5: {
        static const std::vector<std::string> q = {"one", "any", "many"};
        std::string s = "select " + choose(rng, q) + " " + var() + " related by " + var();
        int n = pick(rng, 1, 3);
        for (int i = 0; i < n; ++i) s += "->" + choose(rng, classes) + "[" + rel() + "]";
        return s + ";\n";
      }
      case 6: return "relate " + var() + " to " + var() + " across " + rel() + ";\n";
      case 7: return "unrelate " + var() + " from " + var() + " across " + rel() + ";\n";
      case 8: return chance(rng, 0.5) ? "return;\n" : "return " + expr(0) + ";\n";
      case 9:
      case 10: {
        std::string s = (chance(rng, 0.5) ? std::string("self") : var()) + "." + var() + "(";
        int n = pick(rng, 0, 2);
        for (int q = 0; q < n; ++q) s += (q ? ", " : "") + expr(1);
        return s + ");\n";
      }
      case 11: return "// comment " + var() + "\n" + var() + " = 1;\n";
      case 12: {
        std::string s = "if (" + expr(0) + ")\n";
        int n = pick(rng, 0, 2);
        for (int q = 0; q < n; ++q) s += stmt(d + 1);
        int elifs = pick(rng, 0, 2);
        for (int e = 0; e < elifs; ++e) {
          s += "elif (" + expr(0) + ")\n";
          s += stmt(d + 1);
        }
        if (chance(rng, 0.5)) s += "else\n" + stmt(d + 1);
        return s + "end if;\n";
      }
      case 13: {
        std::string s = "while (" + expr(0) + ")\n";
        int n = pick(rng, 0, 2);
        for (int q = 0; q < n; ++q) s += stmt(d + 1);
        return s + "end while;\n";
      }
      default: {
        std::string s = "for each " + var() + " in " + var() + "\n";
        int n = pick(rng, 0, 2);
        for (int q = 0; q < n; ++q) s += stmt(d + 1);
        return s + "end for;\n";
      }
    }
  };
  std::string out;
  int n = pick(rng, 1, 8);
  for (int k = 0; k < n; ++k) out += stmt(1);
  return out;
}

}  // namespace xt
