#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <thread>

#include "llmize/benchmarks.hpp"
#include "llmize/history.hpp"
#include "llmize/proposer.hpp"
#include "test_support.hpp"

namespace llmize {
namespace {

using testing::Gen;

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

ProblemSpec convex_spec() { return make_benchmark("convex2d").spec; }

// ---------------------------------------------------------------------------
// build_prompt

TEST(BuildPrompt, EmptyHistoryOpro) {
  const auto spec = convex_spec();
  const History h(20, spec.direction);
  const auto b = build_prompt(spec, h, Strategy::Opro, {}, 4);
  EXPECT_NE(b.user_text.find(spec.description), std::string::npos);
  EXPECT_NE(b.user_text.find("Propose 4 new"), std::string::npos);
  EXPECT_EQ(b.batch, 4U);
  EXPECT_TRUE(b.requested_tags.empty());
  EXPECT_EQ(count_of(b.user_text, std::string(kHistoryLinePrefix)), 0U);
}

TEST(BuildPrompt, OutputContractAppearsExactlyOnce) {
  const auto spec = convex_spec();
  History h(20, spec.direction);
  h.insert(EvaluatedSolution(RealVector{{1.0, 1.0}}, 9.0));
  for (auto s : {Strategy::Opro, Strategy::Hlmea, Strategy::Hlmsa}) {
    const auto b = build_prompt(spec, h, s, {{"sa_temperature", 1.0}}, 2, h.entries());
    const auto all = b.system_text + "\n" + b.user_text;
    EXPECT_EQ(count_of(all, std::string(kOutputFormatContract)), 1U) << to_string(s);
  }
}

TEST(BuildPrompt, HistoryLinesOrderedWorstToBest) {
  const auto tsp = make_benchmark("tsp", {7, 42, 7});
  History h(20, Direction::Minimize);
  Gen g(9);
  std::vector<double> scores;
  for (int i = 0; i < 5; ++i) {
    Permutation p{g.permutation(7)};
    const double len = tsp_length(*tsp.tsp, p);
    h.insert(EvaluatedSolution(p, len));
    scores.push_back(len);
  }
  const auto b = build_prompt(tsp.spec, h, Strategy::Opro, {}, 8);

  std::vector<double> shown;
  std::istringstream lines(b.user_text);
  for (std::string line; std::getline(lines, line);) {
    if (!line.starts_with(kHistoryLinePrefix)) continue;
    const auto at = line.rfind(kScoreSeparator);
    shown.push_back(std::stod(line.substr(at + kScoreSeparator.size())));
  }
  ASSERT_EQ(shown.size(), 5U);
  std::sort(scores.begin(), scores.end(), std::greater<>());
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(shown[i], scores[i], 1e-3 * scores[i]);
}

TEST(BuildPrompt, HlmsaEchoesTemperature) {
  const auto lp = make_benchmark("lp3");
  History h(20, lp.spec.direction);
  h.insert(EvaluatedSolution(RealVector{{1.0, 1.0, 1.0}}, 13.0));
  const auto b = build_prompt(lp.spec, h, Strategy::Hlmsa, {{"sa_temperature", 1.0}}, 3, h.entries());
  EXPECT_NE(b.user_text.find("temperature"), std::string::npos);
  EXPECT_NE(b.user_text.find("1.0"), std::string::npos);
  EXPECT_EQ(b.requested_tags, (std::vector<std::string>{"cooling_rate"}));
}

TEST(BuildPrompt, HlmeaRequestsRates) {
  EXPECT_EQ(strategy_tags(Strategy::Hlmea),
            (std::vector<std::string>{"elitism_rate", "mutation_rate", "crossover_rate"}));
  EXPECT_TRUE(strategy_tags(Strategy::Opro).empty());
}

TEST(BuildPrompt, ZeroBatchRejected) {
  const auto spec = convex_spec();
  EXPECT_THROW(build_prompt(spec, History(2, spec.direction), Strategy::Opro, {}, 0), ContractViolation);
}

// ---------------------------------------------------------------------------
// parse_proposal

const std::vector<std::string> kNoTags;

TEST(ParseProposal, SpecExamples) {
  const auto one = parse_proposal("<solution>3.47, 0.0</solution>", uniform_box(2, 0, 5), kNoTags);
  ASSERT_EQ(one.candidates.size(), 1U);
  EXPECT_EQ(std::get<RealVector>(one.candidates[0]).values, (std::vector<double>{3.47, 0.0}));

  const auto perm =
      parse_proposal("<solution>0,1,2</solution><solution>0,1,1</solution>", PermutationSchema{3}, kNoTags);
  ASSERT_EQ(perm.candidates.size(), 1U);
  EXPECT_EQ(std::get<Permutation>(perm.candidates[0]).order, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(perm.rejected_blocks, 1U);

  const std::vector<std::string> tags{"cooling_rate"};
  const auto tagged =
      parse_proposal("<solution>1,2</solution><cooling_rate>0.9</cooling_rate>", uniform_box(2, 0, 5), tags);
  EXPECT_EQ(tagged.hyperparams.at("cooling_rate"), 0.9);
}

TEST(ParseProposal, AdversarialTexts) {
  const auto schema = uniform_box(2, 0, 5);
  struct Case {
    std::string raw;
    std::size_t candidates;
    std::size_t rejected;
  };
  const std::vector<Case> cases{
      {"Sure! Here you go: <solution>1, 2</solution> and also <solution>3,4</solution>. Hope it helps.", 2, 0},
      {"<solution><solution>1,2</solution>", 1, 1},
      {"<solution>1,2</solution><solution>3,4", 1, 1},
      {"<solution>1,2,3</solution><solution>[1.5, 2.5]</solution>", 1, 1},
      {"<solution>one, two</solution><solution>1,2</solution>", 1, 1},
      {"</solution>1,2<solution>2,1</solution>", 1, 0},
      {"<solution> nan, 1</solution><solution>1e999,1</solution><solution>+1,-1</solution>", 1, 2},
      {"<solution>\n  0.5,\n  0.25\n</solution>", 1, 0},
  };
  for (const auto& c : cases) {
    SCOPED_TRACE(c.raw);
    const auto p = parse_proposal(c.raw, schema, kNoTags);
    EXPECT_EQ(p.candidates.size(), c.candidates);
    EXPECT_EQ(p.rejected_blocks, c.rejected);
  }
}

TEST(ParseProposal, ZeroCandidatesCarriesRejectedCount) {
  const auto schema = uniform_box(2, 0, 5);
  for (const std::string raw : {"", "no tags at all", "<solution>1</solution><solution>x,y</solution>",
                                "<solution>1,2"}) {
    try {
      parse_proposal(raw, schema, kNoTags);
      ADD_FAILURE() << "expected ZeroCandidates for: " << raw;
    } catch (const ZeroCandidates& e) {
      EXPECT_EQ(e.rejected_blocks, count_of(raw, "<solution>"));
    }
  }
}

TEST(ParseProposal, KeyedScalarsStrictKeys) {
  const KeyedScalarsSchema schema{{"u", "p"}, {{32, 512}, {0, 0.6}}};
  EXPECT_TRUE(parse_solution_text("u=64, p=0.2", schema).has_value());
  EXPECT_TRUE(parse_solution_text("p=0.2; u=64", schema).has_value());
  EXPECT_FALSE(parse_solution_text("u=64", schema).has_value());
  EXPECT_FALSE(parse_solution_text("u=64, p=0.2, q=1", schema).has_value());
  EXPECT_FALSE(parse_solution_text("u=64, u=65, p=0.2", schema).has_value());
  const auto v = parse_solution_text("p=0.2, u=64", schema);
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(std::get<KeyedScalars>(*v).pairs.front().first, "u");
}

TEST(ParseProposal, FirstParseableTagWins) {
  const std::vector<std::string> tags{"mutation_rate", "crossover_rate"};
  const auto p = parse_proposal(
      "<mutation_rate>high</mutation_rate><mutation_rate>0.3</mutation_rate><mutation_rate>0.9</mutation_rate>"
      "<solution>1,1</solution>",
      uniform_box(2, 0, 5), tags);
  EXPECT_EQ(p.hyperparams.at("mutation_rate"), 0.3);
  EXPECT_FALSE(p.hyperparams.contains("crossover_rate"));
}

void round_trip(testing::SchemaAndValue (*make)(Gen&), std::uint64_t seed) {
  Gen g(seed);
  for (int i = 0; i < 1000; ++i) {
    const auto sv = make(g);
    const std::string raw = "noise <solution>" + render_solution(sv.value) + "</solution> trailing";
    const auto p = parse_proposal(raw, sv.schema, kNoTags);
    ASSERT_EQ(p.candidates.size(), 1U) << raw;
    EXPECT_EQ(p.rejected_blocks, 0U);
    EXPECT_TRUE(p.candidates[0] == sv.value) << raw;
  }
}

TEST(ParseProposalProperty, RoundTripRealVector) { round_trip(testing::random_real_vector, 101); }
TEST(ParseProposalProperty, RoundTripPermutation) { round_trip(testing::random_permutation, 202); }
TEST(ParseProposalProperty, RoundTripKeyedScalars) { round_trip(testing::random_keyed, 303); }

TEST(ParseProposalProperty, NoFabricationAndFullAccounting) {
  // Random mixtures of valid, invalid, nested and truncated blocks.
  Gen g(404);
  const auto schema = uniform_box(2, -100, 100);
  const std::vector<std::string> fragments{
      "<solution>1.5, 2.5</solution>", "<solution>7,8,9</solution>", "<solution>abc</solution>",
      "<solution>", "</solution>", "prose ", "\n", "<solution>-3, 4e1</solution>", "<solutio>1,2</solutio>"};
  for (int trial = 0; trial < 1000; ++trial) {
    std::string raw;
    const auto parts = g.between(0, 10);
    for (std::int64_t i = 0; i < parts; ++i) raw += fragments[static_cast<std::size_t>(g.between(0, 8))];
    std::size_t valid_interiors = 0;
    ParsedProposal p;
    try {
      p = parse_proposal(raw, schema, kNoTags);
    } catch (const ZeroCandidates& e) {
      EXPECT_EQ(e.rejected_blocks, count_of(raw, "<solution>")) << raw;
      continue;
    }
    EXPECT_EQ(p.candidates.size() + p.rejected_blocks, count_of(raw, "<solution>")) << raw;
    for (const auto& c : p.candidates) {
      const std::string rendered = render_solution(c);
      // Every candidate must come from a block interior that is literally present.
      if (rendered == "1.5, 2.5") {
        EXPECT_NE(raw.find("<solution>1.5, 2.5</solution>"), std::string::npos) << raw;
      } else {
        EXPECT_EQ(rendered, "-3.0, 40.0");
        EXPECT_NE(raw.find("<solution>-3, 4e1</solution>"), std::string::npos) << raw;
      }
      ++valid_interiors;
    }
    EXPECT_GE(valid_interiors, 1U);
  }
}

// ---------------------------------------------------------------------------
// clamp_tag

TEST(ClampTag, SpecExamples) {
  EXPECT_EQ(clamp_tag(0.9, 0.5, 0.99, 0.92), 0.9);
  EXPECT_EQ(clamp_tag(1.7, 0.5, 0.99, 0.92), 0.99);
  EXPECT_EQ(clamp_tag(std::nullopt, 0.5, 0.99, 0.92), 0.92);
  EXPECT_EQ(clamp_tag(0.1, 0.5, 0.99, 0.92), 0.5);
  EXPECT_EQ(clamp_tag(std::nan(""), 0.5, 0.99, 0.92), 0.92);
}

TEST(ClampTag, RejectsBadBounds) {
  EXPECT_THROW(clamp_tag(0.5, 0.9, 0.5, 0.7), ContractViolation);
  EXPECT_THROW(clamp_tag(0.5, 0.5, 0.99, 0.2), ContractViolation);
}

// ---------------------------------------------------------------------------
// Backends

TEST(ScriptedProposer, ReplaysThenExhausts) {
  ScriptedProposer p({"<solution>1,2,0</solution>"});
  EXPECT_EQ(p.propose({}, {}), "<solution>1,2,0</solution>");
  EXPECT_THROW(p.propose({}, {}), ScriptExhausted);
}

TEST(ScriptedProposer, ConcurrentCallsEachGetOneResponse) {
  std::vector<std::string> script;
  for (int i = 0; i < 400; ++i) script.push_back(std::to_string(i));
  ScriptedProposer p(script);
  std::vector<std::vector<std::string>> got(4);
  {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < 4; ++t) {
      threads.emplace_back([&, t] {
        for (int i = 0; i < 100; ++i) got[t].push_back(p.propose({}, {}));
      });
    }
  }
  std::vector<std::string> all;
  for (auto& g : got) all.insert(all.end(), g.begin(), g.end());
  std::sort(all.begin(), all.end());
  std::sort(script.begin(), script.end());
  EXPECT_EQ(all, script);
  EXPECT_EQ(p.remaining(), 0U);
}

PromptBundle bundle_with_best(const ProblemSpec& spec, const SolutionValue& best, std::size_t batch) {
  History h(20, spec.direction);
  h.insert(EvaluatedSolution(best, 1.0));
  return build_prompt(spec, h, Strategy::Opro, {}, batch);
}

TEST(PerturbProposer, StaysWithinStepOfBest) {
  const auto spec = convex_spec();
  PerturbProposer p(spec.schema, {.seed = 7, .step_scale = 0.1});
  const auto raw = p.propose(bundle_with_best(spec, RealVector{{3.0, 0.5}}, 2), {});
  const auto parsed = parse_proposal(raw, spec.schema, kNoTags);
  ASSERT_EQ(parsed.candidates.size(), 2U);
  for (const auto& c : parsed.candidates) {
    const auto& v = std::get<RealVector>(c).values;
    EXPECT_LE(std::abs(v[0] - 3.0), 0.5 + 1e-5);
    EXPECT_LE(std::abs(v[1] - 0.5), 0.5 + 1e-5);
  }
}

TEST(PerturbProposer, DeterministicPerBundle) {
  const auto spec = convex_spec();
  PerturbProposer a(spec.schema, {.seed = 7});
  PerturbProposer b(spec.schema, {.seed = 7});
  PerturbProposer c(spec.schema, {.seed = 8});
  const auto bundle = bundle_with_best(spec, RealVector{{1.0, 1.0}}, 4);
  const auto ra = a.propose(bundle, {});
  EXPECT_EQ(ra, b.propose(bundle, {}));
  EXPECT_EQ(ra, a.propose(bundle, {}));
  EXPECT_NE(ra, c.propose(bundle, {}));
  SamplingParams hot;
  hot.model_temperature = 1.2;
  EXPECT_NE(ra, a.propose(bundle, hot));
}

TEST(PerturbProposer, PermutationMovesAreValidTranspositions) {
  const PermutationSchema schema{9};
  ProblemSpec spec{"tour", std::nullopt, Direction::Minimize, schema};
  PerturbProposer p(schema, {.seed = 3});
  Gen g(3);
  for (int i = 0; i < 200; ++i) {
    const Permutation base{g.permutation(9)};
    History h(5, Direction::Minimize);
    h.insert(EvaluatedSolution(base, 1.0));
    const auto parsed = parse_proposal(p.propose(build_prompt(spec, h, Strategy::Opro, {{"step", i * 1.0}}, 3), {}),
                                       schema, kNoTags);
    ASSERT_EQ(parsed.candidates.size(), 3U);
    for (const auto& c : parsed.candidates) {
      const auto& o = std::get<Permutation>(c).order;
      std::size_t moved = 0;
      for (std::size_t k = 0; k < o.size(); ++k) moved += o[k] != base.order[k];
      EXPECT_LE(moved, 4U);
    }
  }
}

TEST(PerturbProposer, FillsRequestedTags) {
  const auto spec = convex_spec();
  PerturbProposer p(spec.schema, {.seed = 1});
  History h(4, spec.direction);
  h.insert(EvaluatedSolution(RealVector{{1.0, 1.0}}, 5.0));
  const auto raw = p.propose(build_prompt(spec, h, Strategy::Hlmea, {}, 2), {});
  const auto tags = strategy_tags(Strategy::Hlmea);
  const auto parsed = parse_proposal(raw, spec.schema, tags);
  EXPECT_EQ(parsed.hyperparams.at("mutation_rate"), 0.3);
  EXPECT_EQ(parsed.hyperparams.size(), 3U);
}

TEST(HttpChatProposer, RejectsBadBaseUrl) {
  EXPECT_THROW(HttpChatProposer({.base_url = "localhost:8080", .model = "m"}), ContractViolation);
}

TEST(HttpChatProposer, RequestBodyHasExactlyTheContractFields) {
  HttpChatProposer p({.base_url = "http://127.0.0.1:1/v1", .model = "test-model", .api_key = "k"});
  PromptBundle b;
  b.system_text = "sys";
  b.user_text = "usr";
  SamplingParams params;
  params.model_temperature = 0.5;
  params.max_output_tokens = 77;
  EXPECT_EQ(p.request_body(b, params),
            R"({"max_tokens":77,"messages":[{"content":"sys","role":"system"},{"content":"usr","role":"user"}],)"
            R"("model":"test-model","temperature":0.5})");
}

}  // namespace
}  // namespace llmize
