#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "llmize/history.hpp"
#include "llmize/rng.hpp"
#include "llmize/types.hpp"

namespace llmize {

enum class Strategy { Opro, Hlmea, Hlmsa };

std::string to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& text);

/// Instruction appended to every prompt, exactly once.
inline constexpr std::string_view kOutputFormatContract =
    "Return each solution inside <solution> and </solution> tags. Inside the tags use only the solution "
    "encoding described above, with no extra text.";

inline constexpr std::string_view kHistoryLinePrefix = "solution: ";
inline constexpr std::string_view kTrajectoryLinePrefix = "trajectory ";
inline constexpr std::string_view kScoreSeparator = " | score: ";

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  // Machine-readable copies of what the prose asks for. Offline backends use
  // these instead of reading instructions.
  std::size_t batch = 1;
  std::vector<std::string> requested_tags;
};

struct SamplingParams {
  double model_temperature = 0.7;
  std::size_t max_output_tokens = 2048;
  std::optional<std::int64_t> seed;

  void validate() const;
};

/// Tag names the given strategy asks the model to fill in.
std::vector<std::string> strategy_tags(Strategy strategy);

/// Assembles the prompt for one step.
///
/// `strategy_state` carries per-step scalars echoed into the text (`step`,
/// `sa_temperature`). `trajectories` is only rendered for HLMSA.
PromptBundle build_prompt(const ProblemSpec& spec, const History& history, Strategy strategy,
                          const std::map<std::string, double>& strategy_state, std::size_t batch,
                          std::span<const EvaluatedSolution> trajectories = {});

// ---------------------------------------------------------------------------
// Parsing model output

class ZeroCandidates : public std::runtime_error {
 public:
  explicit ZeroCandidates(std::size_t rejected)
      : std::runtime_error("no valid <solution> block in model output (" + std::to_string(rejected) +
                           " malformed)"),
        rejected_blocks(rejected) {}
  std::size_t rejected_blocks;
};

struct ParsedProposal {
  std::vector<SolutionValue> candidates;
  std::map<std::string, double> hyperparams;
  std::size_t rejected_blocks = 0;
};

/// Parses the interior of one `<solution>` block. Returns nullopt when it
/// does not match the schema's shape.
std::optional<SolutionValue> parse_solution_text(std::string_view text, const SolutionSchema& schema);

/// Extracts every `<solution>` block and each expected scalar tag from raw
/// model text. Throws ZeroCandidates when no block parses.
ParsedProposal parse_proposal(std::string_view raw, const SolutionSchema& schema,
                              std::span<const std::string> expected_tags);

/// Clamps an optional parsed tag into [lo, hi]; absent or non-finite values
/// become `fallback`.
double clamp_tag(std::optional<double> value, double lo, double hi, double fallback);

// ---------------------------------------------------------------------------
// Backends

class TransportError : public std::runtime_error {
 public:
  TransportError(int status, const std::string& what) : std::runtime_error(what), status(status) {}
  int status;  // HTTP status, or 0 when no response was received
};

class ScriptExhausted : public std::runtime_error {
 public:
  ScriptExhausted() : std::runtime_error("scripted proposer has no more responses") {}
};

/// Source of raw proposal text for one prompt.
///
/// Implementations must tolerate concurrent calls from independent runs.
class Proposer {
 public:
  virtual ~Proposer() = default;
  virtual std::string propose(const PromptBundle& bundle, const SamplingParams& params) = 0;
  virtual std::string name() const = 0;
};

/// Replays canned responses in order.
class ScriptedProposer final : public Proposer {
 public:
  explicit ScriptedProposer(std::vector<std::string> responses);

  std::string propose(const PromptBundle& bundle, const SamplingParams& params) override;
  std::string name() const override { return "scripted"; }
  std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  std::deque<std::string> queue_;
};

struct PerturbConfig {
  std::uint64_t seed = 0;
  double step_scale = 0.1;
  // Contents for requested tags; unknown tags fall back to 0.5.
  std::map<std::string, double> tag_defaults = {
      {"cooling_rate", 0.92}, {"elitism_rate", 0.1}, {"mutation_rate", 0.3}, {"crossover_rate", 0.7}};
};

/// Offline stand-in for a language model: perturbs the best rendered history
/// entry (or, when the prompt lists annealing trajectories, each trajectory in
/// order). Output is a pure function of (seed, bundle, sampling params).
class PerturbProposer final : public Proposer {
 public:
  PerturbProposer(SolutionSchema schema, PerturbConfig config);

  std::string propose(const PromptBundle& bundle, const SamplingParams& params) override;
  std::string name() const override { return "perturb"; }

 private:
  SolutionValue perturb(const SolutionValue& base, Rng& rng) const;
  SolutionValue sample(Rng& rng) const;

  SolutionSchema schema_;
  PerturbConfig config_;
};

struct HttpChatConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::optional<std::string> api_key;  // overrides the environment variable
  std::string api_key_env = "LLMIZE_API_KEY";
  std::chrono::milliseconds timeout{120'000};
  int max_retries = 1;  // transport-level retries after the first attempt
};

/// OpenAI-compatible `POST {base_url}/chat/completions` client.
class HttpChatProposer final : public Proposer {
 public:
  explicit HttpChatProposer(HttpChatConfig config);

  std::string propose(const PromptBundle& bundle, const SamplingParams& params) override;
  std::string name() const override { return "http"; }

  /// JSON body sent for `bundle`; exposed for tests.
  std::string request_body(const PromptBundle& bundle, const SamplingParams& params) const;

 private:
  HttpChatConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string token_;
};

}  // namespace llmize
