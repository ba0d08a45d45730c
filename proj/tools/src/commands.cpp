#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "llmize/cli.hpp"

namespace llmize::cli {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out.flush()) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string registry_list() {
  std::string list;
  for (const auto& n : benchmark_names()) list += (list.empty() ? "" : ", ") + n;
  return list;
}

void apply_env(HttpChatConfig& http) {
  if (const char* url = std::getenv("LLMIZE_BASE_URL"); url != nullptr && *url != '\0') http.base_url = url;
}

struct Prepared {
  ProblemSpec spec;
  Objective objective;
  std::vector<SolutionValue> seeds;
  std::unique_ptr<Proposer> proposer;
  std::optional<TspInstance> tsp;
};

int emit(const OptimizationResult& result, const std::filesystem::path& dir, bool record_wall_time,
         const std::optional<TspInstance>& tsp, std::ostream& out, std::ostream& err) {
  try {
    std::filesystem::create_directories(dir);
    write_file(dir / "result.json", result_to_json(result, record_wall_time));
    const auto csv = history_csv(result);
    write_file(dir / "history.csv", csv);
    if (!result.steps.empty()) write_file(dir / "convergence.svg", convergence_svg(read_history_csv(csv)));
    if (tsp) write_file(dir / "tour.svg", tour_svg(*tsp, std::get<Permutation>(result.best.solution)));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  out << "best=" << format_shortest(result.best.score) << " steps=" << result.steps.size()
      << " termination=" << to_string(result.termination.kind) << "\n";
  if (result.termination.kind == TerminationKind::Aborted) {
    err << "run aborted: " << result.termination.message << "\n";
    return kExitAborted;
  }
  return kExitOk;
}

int execute(Strategy strategy, Prepared& p, const RunConfig& run, const SaSettings& sa,
            std::vector<Callback> callbacks, const std::filesystem::path& dir, bool record_wall_time,
            std::ostream& out, std::ostream& err) {
  std::vector<EvaluatedSolution> initial;
  try {
    initial = evaluate_seeds(p.objective, p.seeds, run.eval_policy());
  } catch (const EvaluationFailed& e) {
    err << "seed evaluation failed: " << e.what() << "\n";
    return kExitAborted;
  }
  const auto result = run_strategy(strategy, p.spec, p.objective, *p.proposer, run, std::move(callbacks), initial, sa);
  return emit(result, dir, record_wall_time, p.tsp, out, err);
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  RunFile rf;
  Prepared p;
  std::vector<Callback> callbacks;
  try {
    rf = parse_run_file(config_path);
    rf.run.validate();
    rf.run.sampling.validate();
    std::optional<double> default_scale;

    if (rf.objective.benchmark) {
      auto bench = make_benchmark(*rf.objective.benchmark,
                                  {rf.objective.tsp_cities, rf.objective.instance_seed, rf.run.rng_seed});
      p.spec = std::move(bench.spec);
      if (rf.objective.domain_knowledge) p.spec.domain_knowledge = rf.objective.domain_knowledge;
      p.objective = std::move(bench.objective);
      p.seeds = std::move(bench.seeds);
      p.tsp = std::move(bench.tsp);
      default_scale = bench.perturb_step_scale;
    } else {
      p.spec = ProblemSpec{rf.objective.description, rf.objective.domain_knowledge, rf.objective.direction,
                           *rf.objective.schema};
      p.objective = external_command_objective(rf.objective.command, rf.objective.direction);
    }
    p.spec.validate();
    if (rf.seeds || !rf.objective.benchmark) {
      const auto sb = rf.seeds.value_or(SeedBlock{});
      p.seeds = seed_samples(p.spec.schema, sb.count, sb.seed, sb.style);
    }

    switch (rf.backend.kind) {
      case BackendBlock::Kind::Perturb: {
        PerturbConfig pc;
        pc.seed = rf.backend.seed;
        pc.step_scale = rf.backend.step_scale.value_or(default_scale.value_or(pc.step_scale));
        p.proposer = std::make_unique<PerturbProposer>(p.spec.schema, pc);
        break;
      }
      case BackendBlock::Kind::Scripted: {
        const auto doc = nlohmann::json::parse(read_file(rf.backend.transcript));
        if (!doc.is_array()) throw std::runtime_error("transcript must be a JSON array of strings");
        std::vector<std::string> responses;
        for (const auto& r : doc) {
          if (!r.is_string()) throw std::runtime_error("transcript must be a JSON array of strings");
          responses.push_back(r.get<std::string>());
        }
        p.proposer = std::make_unique<ScriptedProposer>(std::move(responses));
        break;
      }
      case BackendBlock::Kind::Http: {
        auto http = rf.backend.http;
        apply_env(http);
        p.proposer = std::make_unique<HttpChatProposer>(http);
        break;
      }
    }

    if (rf.callbacks.early_stopping) {
      callbacks.push_back(early_stopping(rf.callbacks.early_stopping->first, rf.callbacks.early_stopping->second));
    }
    if (rf.callbacks.target) callbacks.push_back(target_stop(*rf.callbacks.target));
    if (const auto& a = rf.callbacks.adaptive_sampling) {
      callbacks.push_back(adaptive_sampling(a->window, a->bump, a->ceiling));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return execute(rf.strategy, p, rf.run, rf.hlmsa, std::move(callbacks), rf.output_dir, rf.record_wall_time, out,
                 err);
}

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
  BenchmarkProblem bench;
  try {
    bench = make_benchmark(args.name, {args.tsp_cities, args.instance_seed.value_or(args.seed), args.seed});
  } catch (const std::out_of_range&) {
    err << "error: unknown benchmark '" << args.name << "' (available: " << registry_list() << ")\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  RunConfig run = bench.run;
  if (args.max_steps) run.max_steps = *args.max_steps;
  if (args.batch) run.batch = *args.batch;
  if (args.workers) run.workers = *args.workers;

  Prepared p;
  p.spec = bench.spec;
  p.objective = bench.objective;
  p.seeds = bench.seeds;
  p.tsp = bench.tsp;
  std::vector<Callback> callbacks;
  try {
    run.validate();
    if (args.http_model) {
      HttpChatConfig http;
      http.model = *args.http_model;
      apply_env(http);
      if (args.http_base_url) http.base_url = *args.http_base_url;
      p.proposer = std::make_unique<HttpChatProposer>(http);
    } else {
      PerturbConfig pc;
      pc.seed = args.seed;
      pc.step_scale = bench.perturb_step_scale;
      p.proposer = std::make_unique<PerturbProposer>(p.spec.schema, pc);
    }
    if (bench.target) callbacks.push_back(target_stop(*bench.target));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return execute(args.strategy, p, run, SaSettings{}, std::move(callbacks), args.out_dir, args.record_wall_time, out,
                 err);
}

int cmd_plot(const std::filesystem::path& history_csv_path, const std::filesystem::path& out_svg_path,
             std::ostream& out, std::ostream& err) {
  try {
    const auto rows = read_history_csv(read_file(history_csv_path));
    if (out_svg_path.has_parent_path()) std::filesystem::create_directories(out_svg_path.parent_path());
    write_file(out_svg_path, convergence_svg(rows));
    out << "wrote " << out_svg_path.string() << " (" << rows.size() << " rows)\n";
  } catch (const std::exception& e) {
    err << "error: " << history_csv_path.string() << ": " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

int main_with_args(int argc, char** argv) {
  CLI::App app{"LLM-driven black-box optimisation"};
  app.require_subcommand(1);

  std::filesystem::path config;
  auto* run = app.add_subcommand("run", "Run an optimisation described by a JSON config file");
  run->add_option("config", config, "Path to the run file")->required();

  BenchArgs bench;
  std::string strategy = "opro";
  std::optional<std::uint64_t> instance_seed;
  std::optional<std::size_t> steps, batch, workers;
  std::optional<std::string> model, base_url;
  std::string out_dir = bench.out_dir.string();
  auto* b = app.add_subcommand("bench", "Run a built-in benchmark");
  b->add_option("name", bench.name, "Benchmark name (" + registry_list() + ")")->required();
  b->add_option("--strategy", strategy, "opro, hlmea or hlmsa")->capture_default_str();
  b->add_option("--seed", bench.seed, "Seed for seed samples, the backend and (by default) the instance")
      ->capture_default_str();
  b->add_option("--instance-seed", instance_seed, "Seed for the TSP instance");
  b->add_option("--n", bench.tsp_cities, "Number of TSP cities")->capture_default_str();
  b->add_option("--steps", steps, "Override max_steps");
  b->add_option("--batch", batch, "Override the batch size");
  b->add_option("--workers", workers, "Parallel objective evaluations");
  b->add_option("--out", out_dir, "Output directory")->capture_default_str();
  b->add_option("--model", model, "Use the HTTP backend with this model");
  b->add_option("--base-url", base_url, "HTTP backend base URL");
  b->add_flag("--record-wall-time", bench.record_wall_time, "Include wall time in result.json");

  std::filesystem::path csv, svg;
  auto* plot = app.add_subcommand("plot", "Draw a convergence chart from history.csv");
  plot->add_option("csv", csv, "history.csv path")->required();
  plot->add_option("svg", svg, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*run) return cmd_run(config, std::cout, std::cerr);
  if (*plot) return cmd_plot(csv, svg, std::cout, std::cerr);

  try {
    bench.strategy = strategy_from_string(strategy);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  bench.instance_seed = instance_seed;
  bench.max_steps = steps;
  bench.batch = batch;
  bench.workers = workers;
  bench.http_model = model;
  bench.http_base_url = base_url;
  bench.out_dir = out_dir;
  return cmd_bench(bench, std::cout, std::cerr);
}

}  // namespace llmize::cli
