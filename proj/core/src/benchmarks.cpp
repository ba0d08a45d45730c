#include "llmize/benchmarks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "llmize/rng.hpp"

namespace llmize {

namespace {

const std::vector<double>& real_values(const SolutionValue& x, std::size_t dim, const char* who) {
  const auto* rv = std::get_if<RealVector>(&x);
  if (!rv || rv->values.size() != dim) {
    throw ContractViolation(std::string(who) + ": expected a real vector of dimension " + std::to_string(dim));
  }
  return rv->values;
}

double convex_formula(double x1, double x2) {
  return (x1 - 3.0) * (x1 - 3.0) + (x2 + 2.0) * (x2 + 2.0) + std::sin(x1 + x2) + 4.0;
}

// Rows of A x <= b: three resource constraints then -x_i <= 0.
constexpr std::array<std::array<double, 3>, 6> kLpA{{
    {2, 3, 1},
    {1, 2, 3},
    {4, 1, 2},
    {-1, 0, 0},
    {0, -1, 0},
    {0, 0, -1},
}};
constexpr std::array<double, 6> kLpB{15, 20, 16, 0, 0, 0};
constexpr std::array<double, 3> kLpC{3, 4, 6};

double lp_objective(const std::vector<double>& x) { return kLpC[0] * x[0] + kLpC[1] * x[1] + kLpC[2] * x[2]; }

bool lp_feasible(const std::vector<double>& x, double tol) {
  for (std::size_t r = 0; r < kLpA.size(); ++r) {
    const double lhs = kLpA[r][0] * x[0] + kLpA[r][1] * x[1] + kLpA[r][2] * x[2];
    if (lhs > kLpB[r] + tol) return false;
  }
  return true;
}

double det3(const std::array<std::array<double, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace

double convex2d(const SolutionValue& x) {
  const auto& v = real_values(x, 2, "convex2d");
  const double value = convex_formula(v[0], v[1]);
  const bool feasible = v[0] >= 0.0 && v[0] <= 5.0 && v[1] >= 0.0 && v[1] <= 5.0;
  return feasible ? value : value + kConvexPenalty;
}

double lp3(const SolutionValue& x) {
  const auto& v = real_values(x, 3, "lp3");
  const double z = lp_objective(v);
  return lp_feasible(v, 0.0) ? z : z - kLpPenalty;
}

TspInstance tsp_generate(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ContractViolation("tsp_generate: need at least 2 cities");
  Rng rng(seed);
  TspInstance inst;
  inst.seed = seed;
  inst.cities.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(0.0, 100.0);
    const double y = rng.uniform(0.0, 100.0);
    inst.cities.push_back({x, y});
  }
  return inst;
}

double tsp_length(const TspInstance& instance, const Permutation& route) {
  const std::size_t n = instance.n();
  if (!is_bijection(route.order, n)) return kTspInvalidRoute;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = instance.cities[route.order[k]];
    const auto& b = instance.cities[route.order[(k + 1) % n]];
    total += std::hypot(a.x - b.x, a.y - b.y);
  }
  return total;
}

TspTour tsp_bruteforce(const TspInstance& instance) {
  const std::size_t n = instance.n();
  if (n > 10) throw InstanceTooLarge("tsp_bruteforce: " + std::to_string(n) + " cities exceeds the limit of 10");
  if (n < 2) throw ContractViolation("tsp_bruteforce: need at least 2 cities");

  std::vector<std::vector<double>> dist(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      dist[i][j] = std::hypot(instance.cities[i].x - instance.cities[j].x, instance.cities[i].y - instance.cities[j].y);
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  TspTour best{Permutation{order}, std::numeric_limits<double>::infinity()};
  do {
    if (n > 2 && order[1] > order[n - 1]) continue;  // mirror of a tour already seen
    double len = 0.0;
    for (std::size_t k = 0; k < n; ++k) len += dist[order[k]][order[(k + 1) % n]];
    if (len < best.length) best = TspTour{Permutation{order}, len};
  } while (std::next_permutation(order.begin() + 1, order.end()));
  return best;
}

std::vector<SolutionValue> seed_samples(const SolutionSchema& schema, std::size_t count, std::uint64_t seed,
                                        SeedStyle style) {
  validate_schema(schema);
  if (count == 0) throw ContractViolation("seed_samples: count must be >= 1");
  std::vector<SolutionValue> out;

  if (style == SeedStyle::Grid) {
    const auto* rv = std::get_if<RealVectorSchema>(&schema);
    if (!rv) throw ContractViolation("seed_samples: grid seeding needs a real-vector schema");
    const std::size_t dim = rv->dim();
    const auto per_axis = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::lround(std::pow(static_cast<double>(count), 1.0 / static_cast<double>(dim)))));
    std::vector<std::size_t> idx(dim, 0);
    while (true) {
      RealVector point;
      for (std::size_t d = 0; d < dim; ++d) {
        const auto& b = rv->bounds[d];
        const double t = static_cast<double>(idx[d]) / static_cast<double>(per_axis - 1);
        point.values.push_back(idx[d] + 1 == per_axis ? b.upper : b.lower + t * (b.upper - b.lower));
      }
      out.emplace_back(std::move(point));
      std::size_t d = dim;
      while (d > 0 && ++idx[d - 1] == per_axis) idx[--d] = 0;
      if (d == 0) break;
    }
    return out;
  }

  Rng rng(seed);
  for (std::size_t c = 0; c < count; ++c) {
    if (const auto* rv = std::get_if<RealVectorSchema>(&schema)) {
      RealVector v;
      for (const auto& b : rv->bounds) v.values.push_back(rng.uniform(b.lower, b.upper));
      out.emplace_back(std::move(v));
    } else if (const auto* ps = std::get_if<PermutationSchema>(&schema)) {
      Permutation p;
      p.order.resize(ps->n);
      std::iota(p.order.begin(), p.order.end(), 0);
      rng.shuffle(std::span<int>(p.order));
      out.emplace_back(std::move(p));
    } else {
      const auto& ks = std::get<KeyedScalarsSchema>(schema);
      KeyedScalars k;
      for (std::size_t i = 0; i < ks.keys.size(); ++i) {
        k.pairs.emplace_back(ks.keys[i], rng.uniform(ks.bounds[i].lower, ks.bounds[i].upper));
      }
      out.emplace_back(std::move(k));
    }
  }
  return out;
}

ConvexOptimum convex_grid_oracle() {
  constexpr int kPoints = 21;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{5.0, 5.0};
  ConvexOptimum best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (int round = 0; round < 3; ++round) {
    for (int i = 0; i < kPoints; ++i) {
      for (int j = 0; j < kPoints; ++j) {
        const double x1 = lo[0] + (hi[0] - lo[0]) * i / (kPoints - 1);
        const double x2 = lo[1] + (hi[1] - lo[1]) * j / (kPoints - 1);
        const double v = convex_formula(x1, x2);
        if (v < best.value) best = {x1, x2, v};
      }
    }
    const double w0 = (hi[0] - lo[0]) / (kPoints - 1);
    const double w1 = (hi[1] - lo[1]) / (kPoints - 1);
    lo = {std::max(0.0, best.x1 - w0), std::max(0.0, best.x2 - w1)};
    hi = {std::min(5.0, best.x1 + w0), std::min(5.0, best.x2 + w1)};
  }
  return best;
}

LpOptimum lp_vertex_oracle() {
  LpOptimum best;
  best.value = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < kLpA.size(); ++a) {
    for (std::size_t b = a + 1; b < kLpA.size(); ++b) {
      for (std::size_t c = b + 1; c < kLpA.size(); ++c) {
        const std::array<std::array<double, 3>, 3> m{kLpA[a], kLpA[b], kLpA[c]};
        const double d = det3(m);
        if (std::abs(d) < 1e-12) continue;
        const std::array<double, 3> rhs{kLpB[a], kLpB[b], kLpB[c]};
        std::vector<double> x(3);
        for (std::size_t col = 0; col < 3; ++col) {
          auto mc = m;
          for (std::size_t r = 0; r < 3; ++r) mc[r][col] = rhs[r];
          x[col] = det3(mc) / d;
        }
        if (!lp_feasible(x, 1e-9)) continue;
        ++best.feasible_vertices;
        const double z = lp_objective(x);
        if (z > best.value) {
          best.value = z;
          best.x = x;
        }
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

std::vector<std::string> benchmark_names() { return {"convex2d", "lp3", "tsp"}; }

BenchmarkProblem make_benchmark(const std::string& name, const BenchmarkOptions& options) {
  BenchmarkProblem p;
  p.name = name;
  p.run.rng_seed = options.seed;

  if (name == "convex2d") {
    p.spec.description =
        "Minimize f(x1, x2) = (x1 - 3)^2 + (x2 + 2)^2 + sin(x1 + x2) + 4 subject to 0 <= x1 <= 5 and "
        "0 <= x2 <= 5. Solutions outside the box receive a large penalty.";
    p.spec.direction = Direction::Minimize;
    p.spec.schema = uniform_box(2, 0.0, 5.0);
    p.objective = Objective{convex2d, Direction::Minimize, "convex2d", "box-constrained smooth function", false};
    p.seeds = seed_samples(p.spec.schema, 9, options.seed, SeedStyle::Grid);
    p.target = 7.95;
    p.run.max_steps = 60;
    p.run.batch = 8;
    p.run.history_capacity = 20;
    p.perturb_step_scale = 0.05;
  } else if (name == "lp3") {
    p.spec.description =
        "Maximize Z = 3*x1 + 4*x2 + 6*x3 subject to 2*x1 + 3*x2 + x3 <= 15, x1 + 2*x2 + 3*x3 <= 20, "
        "4*x1 + x2 + 2*x3 <= 16 and x1, x2, x3 >= 0. Infeasible solutions receive a large negative penalty.";
    p.spec.direction = Direction::Maximize;
    p.spec.schema = uniform_box(3, 0.0, 10.0);
    p.objective = Objective{lp3, Direction::Maximize, "lp3", "three-variable linear program", false};
    p.seeds = seed_samples(p.spec.schema, 10, options.seed, SeedStyle::UniformRandom);
    p.target = 40.5;
    p.run.max_steps = 99;
    p.run.batch = 10;
    p.run.history_capacity = 20;
    p.perturb_step_scale = 0.02;
  } else if (name == "tsp") {
    const auto n = options.tsp_cities;
    auto inst = tsp_generate(n, options.instance_seed);
    std::ostringstream desc;
    desc << "Find the shortest closed tour visiting each of " << n
         << " cities exactly once and returning to the start. Distances are Euclidean. City coordinates:";
    for (std::size_t i = 0; i < n; ++i) {
      desc << (i ? "," : "") << " " << i << ": (" << format_prompt_number(inst.cities[i].x) << ", "
           << format_prompt_number(inst.cities[i].y) << ")";
    }
    desc << ". Invalid routes receive a very large length.";
    p.spec.description = desc.str();
    p.spec.direction = Direction::Minimize;
    p.spec.schema = PermutationSchema{n};
    p.objective = Objective{[inst](const SolutionValue& v) {
                              const auto* route = std::get_if<Permutation>(&v);
                              return route ? tsp_length(inst, *route) : kTspInvalidRoute;
                            },
                            Direction::Minimize, "tsp", "euclidean travelling salesman", false};
    p.seeds = seed_samples(p.spec.schema, 8, options.seed, SeedStyle::UniformRandom);
    // Summation order differs between rotations of the same tour.
    if (n <= 10) p.target = tsp_bruteforce(inst).length + 1e-9;
    p.run.max_steps = 249;
    p.run.batch = 8;
    p.run.history_capacity = 20;
    p.tsp = std::move(inst);
  } else {
    std::string known;
    for (const auto& n : benchmark_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::out_of_range("unknown benchmark '" + name + "' (known: " + known + ")");
  }
  p.spec.validate();
  return p;
}

}  // namespace llmize
