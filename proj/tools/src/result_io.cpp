#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "llmize/cli.hpp"

namespace llmize::cli {

using nlohmann::json;

std::string format_shortest(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

namespace {

json solution_to_json(const SolutionValue& value) {
  if (const auto* rv = std::get_if<RealVector>(&value)) {
    return json{{"type", "real_vector"}, {"values", rv->values}};
  }
  if (const auto* p = std::get_if<Permutation>(&value)) {
    return json{{"type", "permutation"}, {"order", p->order}};
  }
  json pairs = json::array();
  for (const auto& [k, v] : std::get<KeyedScalars>(value).pairs) pairs.push_back(json::array({k, v}));
  return json{{"type", "keyed_scalars"}, {"pairs", pairs}};
}

SolutionValue solution_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "real_vector") return RealVector{j.at("values").get<std::vector<double>>()};
  if (type == "permutation") return Permutation{j.at("order").get<std::vector<int>>()};
  if (type == "keyed_scalars") {
    KeyedScalars ks;
    for (const auto& p : j.at("pairs")) ks.pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<double>());
    return ks;
  }
  throw std::runtime_error("unknown solution type '" + type + "'");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string result_to_json(const OptimizationResult& result, bool include_wall_time) {
  json steps = json::array();
  for (const auto& s : result.steps) {
    steps.push_back(json{
        {"step_index", s.step_index},
        {"best_of_step", s.best_of_step},
        {"mean_of_step", s.mean_of_step},
        {"best_so_far", s.best_so_far},
        {"sampling_temperature", s.sampling_temperature},
        {"sa_temperature", optional_number(s.sa_temperature)},
        {"cooling_rate", optional_number(s.cooling_rate)},
        {"parsed_tags", s.parsed_tags},
        {"rejected_blocks", s.rejected_blocks},
    });
  }
  json doc{
      {"strategy", result.strategy},
      {"direction", to_string(result.direction)},
      {"best", json{{"solution", solution_to_json(result.best.solution)}, {"score", result.best.score}}},
      {"steps", steps},
      {"termination", json{{"kind", to_string(result.termination.kind)}, {"message", result.termination.message}}},
      {"evaluations_used", result.evaluations_used},
      {"proposer_calls", result.proposer_calls},
      {"run_info", result.run_info},
  };
  if (include_wall_time) {
    doc["wall_time_ms"] = std::chrono::duration<double, std::milli>(result.wall_time).count();
  }
  return doc.dump(2) + "\n";
}

OptimizationResult result_from_json(std::string_view text) {
  const json doc = json::parse(text);
  OptimizationResult r;
  r.strategy = doc.at("strategy").get<std::string>();
  r.direction = direction_from_string(doc.at("direction").get<std::string>());
  r.best = EvaluatedSolution(solution_from_json(doc.at("best").at("solution")), doc.at("best").at("score").get<double>());
  for (const auto& s : doc.at("steps")) {
    StepStats st;
    st.step_index = s.at("step_index").get<std::size_t>();
    st.best_of_step = s.at("best_of_step").get<double>();
    st.mean_of_step = s.at("mean_of_step").get<double>();
    st.best_so_far = s.at("best_so_far").get<double>();
    st.sampling_temperature = s.at("sampling_temperature").get<double>();
    st.sa_temperature = optional_from(s.at("sa_temperature"));
    st.cooling_rate = optional_from(s.at("cooling_rate"));
    st.parsed_tags = s.at("parsed_tags").get<std::map<std::string, double>>();
    st.rejected_blocks = s.at("rejected_blocks").get<std::size_t>();
    r.steps.push_back(std::move(st));
  }
  r.termination.kind = termination_from_string(doc.at("termination").at("kind").get<std::string>());
  r.termination.message = doc.at("termination").at("message").get<std::string>();
  r.evaluations_used = doc.at("evaluations_used").get<std::size_t>();
  r.proposer_calls = doc.at("proposer_calls").get<std::size_t>();
  r.run_info = doc.at("run_info").get<std::map<std::string, double>>();
  if (doc.contains("wall_time_ms")) {
    r.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::duration<double, std::milli>(doc["wall_time_ms"].get<double>()));
  }
  return r;
}

std::string history_csv(const OptimizationResult& result) {
  std::string out(kHistoryCsvHeader);
  out += "\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_shortest(*v) : std::string(); };
  for (const auto& s : result.steps) {
    out += std::to_string(s.step_index) + "," + format_shortest(s.best_of_step) + "," +
           format_shortest(s.mean_of_step) + "," + format_shortest(s.best_so_far) + "," +
           format_shortest(s.sampling_temperature) + "," + opt(s.sa_temperature) + "," + opt(s.cooling_rate) + "\n";
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::vector<HistoryRow> read_history_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw CsvError("history CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);

  auto column = [&](const char* name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw CsvError(std::string("history CSV header is missing column '") + name + "'");
  };
  const std::size_t c_step = column("step_index");
  const std::size_t c_best_step = column("best_of_step");
  const std::size_t c_mean = column("mean_of_step");
  const std::size_t c_best = column("best_so_far");

  std::vector<HistoryRow> rows;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_number;
    const auto fields = split_csv_line(line);
    auto bad = [&](const std::string& why) {
      return CsvError("history CSV row " + std::to_string(row_number) + " (line " + std::to_string(row_number + 1) +
                      "): " + why);
    };
    if (fields.size() != header.size()) {
      throw bad("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    auto number = [&](std::size_t col) {
      const auto& f = fields[col];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw bad("column '" + header[col] + "' is not a number: '" + f + "'");
      }
      return v;
    };
    rows.push_back(HistoryRow{number(c_step), number(c_best_step), number(c_mean), number(c_best)});
  }
  if (rows.empty()) throw CsvError("history CSV has no data rows");
  return rows;
}

}  // namespace llmize::cli
