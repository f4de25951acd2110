#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "xanim/ingest.hpp"
#include "xanim/runtime.hpp"
#include "xanim/trace.hpp"

namespace xt {

using namespace xanim;

std::filesystem::path fixtures_dir();
std::string python_exe();
std::string cli_exe();

std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& s);

// ---- fixture corpus --------------------------------------------------------

struct Fixture {
  std::string name;
  std::filesystem::path dir;
  std::string model_text;
  std::string methods_text;
  MethodKey entry;
  std::vector<Value> args;
  std::string args_json;
  std::string expect_status;
  std::uint64_t max_steps = kDefaultStepBudget;
};

std::vector<Fixture> load_fixtures();
const Fixture& fixture(const std::string& name);
std::shared_ptr<const FusedModel> fuse_texts(const std::string& model_json, const std::string& methods_json);
std::shared_ptr<const FusedModel> fuse_fixture(const Fixture& f);

struct RunResult {
  TraceLog log;
  Snapshot snap;
};

RunResult run_entry(std::shared_ptr<const FusedModel> fused, const MethodKey& entry, std::vector<Value> args = {},
                    std::uint64_t budget = kDefaultStepBudget);
RunResult run_fixture(const Fixture& f);

// ---- processes -------------------------------------------------------------

struct ProcResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs argv[0] with the given stdin; captures both output streams.
ProcResult run_process(const std::vector<std::string>& argv, const std::string& input = {});

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Generates `fused`'s Python program for `entry`, runs it and returns stdout.
ProcResult run_generated(const FusedModel& fused, const MethodKey& entry, const std::string& args_json,
                         std::uint64_t budget, const TempDir& dir, const std::string& stem = "prog");

// ---- replay oracle ---------------------------------------------------------

/// Folds state-changing events over an empty heap. `status` and the entry's
/// return value come from the framing events when present.
Snapshot replay(std::span<const TraceEvent> events, SessionStatus status_if_open = SessionStatus::Running);

// ---- random programs -------------------------------------------------------

struct RandomProgram {
  std::string model_json;
  std::string methods_json;
  MethodKey entry;
};

/// A valid model of 1..5 classes with generated bodies of nesting depth <= 3.
/// Call graph is acyclic, so every run terminates within a modest budget.
RandomProgram random_program(std::uint64_t seed);

/// Syntactically varied body (not necessarily runnable) for parser tests.
std::string random_body_source(std::mt19937_64& rng);

}  // namespace xt
