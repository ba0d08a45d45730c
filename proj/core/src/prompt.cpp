#include <sstream>

#include "llmize/proposer.hpp"

namespace llmize {

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Opro: return "opro";
    case Strategy::Hlmea: return "hlmea";
    case Strategy::Hlmsa: return "hlmsa";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& text) {
  for (auto s : {Strategy::Opro, Strategy::Hlmea, Strategy::Hlmsa}) {
    if (to_string(s) == text) return s;
  }
  throw ContractViolation("unknown strategy '" + text + "' (expected opro, hlmea or hlmsa)");
}

void SamplingParams::validate() const {
  if (!(model_temperature >= 0.0 && model_temperature <= 2.0)) {
    throw ContractViolation("model temperature must lie in [0, 2]");
  }
  if (max_output_tokens == 0) throw ContractViolation("max_output_tokens must be >= 1");
}

std::vector<std::string> strategy_tags(Strategy strategy) {
  switch (strategy) {
    case Strategy::Opro: return {};
    case Strategy::Hlmea: return {"elitism_rate", "mutation_rate", "crossover_rate"};
    case Strategy::Hlmsa: return {"cooling_rate"};
  }
  return {};
}

namespace {

std::string describe_encoding(const SolutionSchema& schema) {
  std::ostringstream out;
  if (const auto* rv = std::get_if<RealVectorSchema>(&schema)) {
    out << "A solution is a comma-separated list of " << rv->dim() << " real numbers (x1";
    for (std::size_t i = 1; i < rv->dim(); ++i) out << ", x" << i + 1;
    out << "). Bounds:";
    for (std::size_t i = 0; i < rv->dim(); ++i) {
      out << (i ? ";" : "") << " x" << i + 1 << " in [" << format_prompt_number(rv->bounds[i].lower) << ", "
          << format_prompt_number(rv->bounds[i].upper) << "]";
    }
    out << ".";
  } else if (const auto* p = std::get_if<PermutationSchema>(&schema)) {
    out << "A solution is a comma-separated ordering of the integers 0 to " << p->n - 1
        << ", each appearing exactly once.";
  } else {
    const auto& ks = std::get<KeyedScalarsSchema>(schema);
    out << "A solution is a comma-separated list of key=value pairs, one for each key:";
    for (std::size_t i = 0; i < ks.keys.size(); ++i) {
      out << (i ? "," : "") << " " << ks.keys[i] << " in [" << format_prompt_number(ks.bounds[i].lower) << ", "
          << format_prompt_number(ks.bounds[i].upper) << "]";
    }
    out << ".";
  }
  return out.str();
}

void tag_request(std::ostringstream& out, const std::vector<std::string>& tags, std::string_view what) {
  out << "Also state " << what << " as";
  for (std::size_t i = 0; i < tags.size(); ++i) {
    out << (i == 0 ? " " : (i + 1 == tags.size() ? " and " : ", ")) << "<" << tags[i] << ">value</" << tags[i]
        << ">";
  }
  out << ".\n";
}

}  // namespace

PromptBundle build_prompt(const ProblemSpec& spec, const History& history, Strategy strategy,
                          const std::map<std::string, double>& strategy_state, std::size_t batch,
                          std::span<const EvaluatedSolution> trajectories) {
  if (batch == 0) throw ContractViolation("build_prompt: batch must be >= 1");

  PromptBundle bundle;
  bundle.batch = batch;
  bundle.requested_tags = strategy_tags(strategy);

  std::ostringstream sys;
  sys << "You are an optimization engine. You propose candidate solutions to a black-box "
      << (spec.direction == Direction::Minimize ? "minimization" : "maximization")
      << " problem and learn from the scores of earlier candidates.\n"
      << describe_encoding(spec.schema) << "\n"
      << kOutputFormatContract;
  bundle.system_text = sys.str();

  const bool minimize = spec.direction == Direction::Minimize;
  std::ostringstream user;
  user << "Problem:\n" << spec.description << "\n";
  if (spec.domain_knowledge && !spec.domain_knowledge->empty()) {
    user << "\nDomain knowledge:\n" << *spec.domain_knowledge << "\n";
  }
  if (auto it = strategy_state.find("step"); it != strategy_state.end()) {
    user << "\nOptimization step: " << static_cast<long long>(it->second) << "\n";
  }

  user << "\nPreviously evaluated solutions, ordered from worst to best ("
       << (minimize ? "lower" : "higher") << " scores are better):\n";
  for (const auto& e : history.entries()) {
    user << kHistoryLinePrefix << render_solution(e.solution) << kScoreSeparator << format_prompt_number(e.score)
         << "\n";
  }

  user << "\n";
  switch (strategy) {
    case Strategy::Opro:
      user << "Propose " << batch << " new, distinct solutions better than the best shown.\n";
      break;
    case Strategy::Hlmea:
      user << "Reason as an evolutionary algorithm. Select parent solutions from the history above, favouring "
              "the best ones, recombine them with crossover and apply mutation to explore nearby. Every "
              "offspring must be unique and must differ from every solution already shown.\n"
           << "Propose " << batch << " new, distinct offspring solutions.\n";
      tag_request(user, bundle.requested_tags, "the elitism rate, mutation rate and crossover rate you used");
      break;
    case Strategy::Hlmsa: {
      user << "You are driving " << trajectories.size()
           << " simulated annealing trajectories that share one temperature schedule. Current state of each "
              "trajectory:\n";
      for (std::size_t i = 0; i < trajectories.size(); ++i) {
        user << kTrajectoryLinePrefix << i + 1 << ": " << render_solution(trajectories[i].solution)
             << kScoreSeparator << format_prompt_number(trajectories[i].score) << "\n";
      }
      double t = 1.0;
      if (auto it = strategy_state.find("sa_temperature"); it != strategy_state.end()) t = it->second;
      user << "Current annealing temperature: " << format_prompt_number(t) << "\n"
           << "Propose exactly " << batch
           << " solutions, one neighbouring solution per trajectory, listed in trajectory order. A neighbour is a "
              "small, informed modification of that trajectory's current solution; larger moves are acceptable "
              "while the temperature is high.\n";
      tag_request(user, bundle.requested_tags, "the cooling rate for the next step, a number strictly between 0 and 1,");
      break;
    }
  }
  bundle.user_text = user.str();
  return bundle;
}

}  // namespace llmize
