#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "llmize/evaluation.hpp"
#include "llmize/optimizers.hpp"
#include "llmize/types.hpp"

namespace llmize {

inline constexpr double kConvexPenalty = 1e6;
inline constexpr double kLpPenalty = 1e6;
inline constexpr double kTspInvalidRoute = 1e9;

/// (x1-3)^2 + (x2+2)^2 + sin(x1+x2) + 4 on [0,5]^2; points outside the box
/// pay kConvexPenalty on top of the formula value.
double convex2d(const SolutionValue& x);

/// Z = 3x1 + 4x2 + 6x3 under three resource constraints and x >= 0, to be
/// maximised. Infeasible points score Z - kLpPenalty.
double lp3(const SolutionValue& x);

struct City {
  double x = 0.0;
  double y = 0.0;
};

struct TspInstance {
  std::vector<City> cities;
  std::uint64_t seed = 0;
  std::size_t n() const { return cities.size(); }
};

/// n cities drawn uniformly from [0,100]^2.
TspInstance tsp_generate(std::size_t n, std::uint64_t seed);

/// Closed-tour Euclidean length; invalid routes score kTspInvalidRoute.
double tsp_length(const TspInstance& instance, const Permutation& route);

class InstanceTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TspTour {
  Permutation route;
  double length = 0.0;
};

/// Exhaustive search with city 0 fixed and mirrored tours skipped.
/// Throws InstanceTooLarge above 10 cities.
TspTour tsp_bruteforce(const TspInstance& instance);

enum class SeedStyle { Grid, UniformRandom };

/// Deterministic seed solutions. Grid lays round(count^(1/dim)) points per
/// axis (at least 2) including the box corners, and is only defined for real
/// vectors.
std::vector<SolutionValue> seed_samples(const SolutionSchema& schema, std::size_t count, std::uint64_t seed,
                                        SeedStyle style);

// ---------------------------------------------------------------------------
// Reference optima, computed without the optimisers.

struct ConvexOptimum {
  double x1 = 0.0;
  double x2 = 0.0;
  double value = 0.0;
};

/// Three rounds of 21x21 grid search over the feasible box, each round
/// shrinking the window around the incumbent to one grid cell either side.
ConvexOptimum convex_grid_oracle();

struct LpOptimum {
  std::vector<double> x;
  double value = 0.0;
  std::size_t feasible_vertices = 0;
};

/// Enumerates every intersection of three of the six constraint planes, keeps
/// the feasible ones, and returns the best.
LpOptimum lp_vertex_oracle();

// ---------------------------------------------------------------------------
// Registry used by the command-line tool.

struct BenchmarkOptions {
  std::size_t tsp_cities = 10;
  std::uint64_t instance_seed = 42;
  std::uint64_t seed = 7;  // drives seed samples and the run
};

struct BenchmarkProblem {
  std::string name;
  ProblemSpec spec;
  Objective objective;
  std::vector<SolutionValue> seeds;
  std::optional<double> target;
  RunConfig run;
  double perturb_step_scale = 0.1;
  std::optional<TspInstance> tsp;
};

std::vector<std::string> benchmark_names();

/// Throws std::out_of_range for names outside benchmark_names().
BenchmarkProblem make_benchmark(const std::string& name, const BenchmarkOptions& options = {});

}  // namespace llmize
