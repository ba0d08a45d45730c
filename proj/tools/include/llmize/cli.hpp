#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "llmize/benchmarks.hpp"
#include "llmize/optimizers.hpp"
#include "llmize/types.hpp"

namespace llmize::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitAborted = 2;

inline constexpr std::string_view kHistoryCsvHeader =
    "step_index,best_of_step,mean_of_step,best_so_far,sampling_temperature,sa_temperature,cooling_rate";

/// Shortest decimal text that parses back to the same double.
std::string format_shortest(double value);

// ---------------------------------------------------------------------------
// Result files

/// Canonical result.json text (sorted keys, shortest round-trip floats).
/// Wall time is omitted unless `include_wall_time` is set, so that seeded runs
/// produce byte-identical files.
std::string result_to_json(const OptimizationResult& result, bool include_wall_time = false);
OptimizationResult result_from_json(std::string_view text);

std::string history_csv(const OptimizationResult& result);

struct HistoryRow {
  double step_index = 0.0;
  double best_of_step = 0.0;
  double mean_of_step = 0.0;
  double best_so_far = 0.0;
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads the plotting columns of a history CSV. Throws CsvError naming the
/// first offending row.
std::vector<HistoryRow> read_history_csv(std::string_view text);

std::string convergence_svg(const std::vector<HistoryRow>& rows);
std::string tour_svg(const TspInstance& instance, const Permutation& route);

// ---------------------------------------------------------------------------
// Run files

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& file, std::size_t line, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + message), file(file), line(line) {}
  std::string file;
  std::size_t line;
};

struct ObjectiveBlock {
  std::optional<std::string> benchmark;
  std::size_t tsp_cities = 10;
  std::uint64_t instance_seed = 42;
  // external-command objective
  std::vector<std::string> command;
  std::string description;
  std::optional<std::string> domain_knowledge;
  Direction direction = Direction::Minimize;
  std::optional<SolutionSchema> schema;
};

struct BackendBlock {
  enum class Kind { Perturb, Scripted, Http } kind = Kind::Perturb;
  std::uint64_t seed = 0;
  std::optional<double> step_scale;
  std::filesystem::path transcript;
  HttpChatConfig http;
};

struct SeedBlock {
  std::size_t count = 8;
  SeedStyle style = SeedStyle::UniformRandom;
  std::uint64_t seed = 0;
};

struct CallbackBlock {
  std::optional<std::pair<std::size_t, double>> early_stopping;  // patience, min_delta
  std::optional<double> target;
  struct Adaptive {
    std::size_t window;
    double bump;
    double ceiling;
  };
  std::optional<Adaptive> adaptive_sampling;
};

struct RunFile {
  Strategy strategy = Strategy::Opro;
  ObjectiveBlock objective;
  BackendBlock backend;
  std::optional<SeedBlock> seeds;
  RunConfig run;
  SaSettings hlmsa;
  CallbackBlock callbacks;
  std::filesystem::path output_dir;
  bool record_wall_time = false;
};

/// Strict parse: unknown keys and ill-typed values raise ConfigError with the
/// file name, the offending key, and its line. Relative paths are resolved
/// against the config file's directory.
RunFile parse_run_file(const std::filesystem::path& path);
RunFile parse_run_file_text(std::string_view text, const std::string& file_name,
                            const std::filesystem::path& base_dir);

/// Objective that runs `argv` once per candidate, writing the rendered
/// solution to stdin and reading one real from stdout.
Objective external_command_objective(std::vector<std::string> argv, Direction direction);

// ---------------------------------------------------------------------------
// Commands. Each returns a process exit status.

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

struct BenchArgs {
  std::string name;
  Strategy strategy = Strategy::Opro;
  std::uint64_t seed = 7;
  std::optional<std::uint64_t> instance_seed;
  std::size_t tsp_cities = 10;
  std::optional<std::size_t> max_steps;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> workers;
  std::filesystem::path out_dir = "llmize-out";
  // Setting a model switches from the perturb backend to HTTP.
  std::optional<std::string> http_model;
  std::optional<std::string> http_base_url;
  bool record_wall_time = false;
};

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err);

int cmd_plot(const std::filesystem::path& history_csv_path, const std::filesystem::path& out_svg_path,
             std::ostream& out, std::ostream& err);

/// Full command-line entry point (subcommands run, bench, plot).
int main_with_args(int argc, char** argv);

}  // namespace llmize::cli
