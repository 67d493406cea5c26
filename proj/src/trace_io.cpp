#include "arp/trace_io.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace arp {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_empty(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

SubsolverMethod parse_subsolver(const std::string& name) {
  if (name == "exact") return SubsolverMethod::ExactSecular;
  if (name == "descent") return SubsolverMethod::InnerDescent;
  throw Error("unknown subsolver '" + name + "'");
}

TensorBranch parse_branch(const std::string& name) {
  for (TensorBranch b : {TensorBranch::Exact, TensorBranch::FiniteDifference, TensorBranch::KeepConstant,
                         TensorBranch::Psb, TensorBranch::Dfp, TensorBranch::DfpGuardFallback,
                         TensorBranch::DegenerateFallback}) {
    if (to_string(b) == name) return b;
  }
  throw Error("unknown tensor branch '" + name + "'");
}

std::string subsolver_name(SubsolverMethod m) { return m == SubsolverMethod::ExactSecular ? "exact" : "descent"; }

}  // namespace

json config_to_json(const SolverConfig& c) {
  return json{{"p", c.p},
              {"strategy", to_string(c.strategy.kind)},
              {"m", c.strategy.m},
              {"sigma0", c.sigma0},
              {"theta1", c.theta1},
              {"theta2", c.theta2},
              {"eps1", c.eps1},
              {"eps2", c.eps2},
              {"max_iters", c.max_iters},
              {"inner_budget", c.subsolver.inner_budget},
              {"subsolver", subsolver_name(c.subsolver.method)},
              {"dfp_mu", c.strategy.dfp_mu},
              {"dfp_L", c.strategy.dfp_L},
              {"dfp_sigma", c.strategy.dfp_sigma_bar},
              {"h_floor", c.strategy.h_floor},
              {"audit", c.audit},
              {"lipschitz", c.lipschitz ? json(*c.lipschitz) : json(nullptr)},
              {"seed", c.seed}};
}

SolverConfig config_from_json(const json& j) {
  SolverConfig c;
  c.p = j.at("p").get<int>();
  c.strategy.kind = parse_strategy(j.at("strategy").get<std::string>());
  c.strategy.m = j.at("m").get<int>();
  c.sigma0 = j.at("sigma0").get<double>();
  c.theta1 = j.at("theta1").get<double>();
  c.theta2 = j.at("theta2").get<double>();
  c.eps1 = j.at("eps1").get<double>();
  c.eps2 = j.at("eps2").get<double>();
  c.max_iters = j.at("max_iters").get<long>();
  c.subsolver.inner_budget = j.at("inner_budget").get<int>();
  c.subsolver.method = parse_subsolver(j.at("subsolver").get<std::string>());
  c.strategy.dfp_mu = j.at("dfp_mu").get<double>();
  c.strategy.dfp_L = j.at("dfp_L").get<double>();
  c.strategy.dfp_sigma_bar = j.at("dfp_sigma").get<double>();
  c.strategy.h_floor = j.at("h_floor").get<double>();
  c.audit = j.value("audit", true);
  c.lipschitz = number_or_empty(j, "lipschitz");
  c.seed = j.value("seed", std::uint64_t{0});
  return c;
}

json row_to_json(const TraceRow& r, bool include_timing) {
  json j{{"record", "iter"},
         {"k", r.k},
         {"grad_norm", r.grad_norm},
         {"min_grad_norm", r.min_grad_norm},
         {"chi", r.chi},
         {"beta", optional_number(r.beta)},
         {"sigma", r.sigma},
         {"xi", r.xi},
         {"restart", r.restart},
         {"branch", to_string(r.branch)},
         {"h", optional_number(r.h)},
         {"h_floor_active", r.h_floor_active},
         {"f_value", optional_number(r.f_value)},
         {"step_norm", optional_number(r.step_norm)},
         {"inner_iterations", r.inner_iterations},
         {"used_exact_subsolver", r.used_exact_subsolver},
         {"oracle_calls", r.oracle_calls.calls}};
  if (r.condition1) {
    const auto& a = *r.condition1;
    j["condition1"] = {{"frob_residual", a.frob_residual},
                       {"op_residual", a.op_residual},
                       {"bound", a.bound},
                       {"roundoff", a.roundoff},
                       {"violated", a.violated}};
  } else {
    j["condition1"] = nullptr;
  }
  j["secant"] = r.secant ? json{{"before", r.secant->before}, {"after", r.secant->after}} : json(nullptr);
  if (r.certificate) {
    const auto& c = *r.certificate;
    j["certificate"] = {{"model_decrease", c.model_decrease}, {"grad_norm", c.grad_norm},
                        {"lam_min_model", c.lam_min_model},   {"theta1_rhs", c.theta1_rhs},
                        {"theta2_rhs", c.theta2_rhs},         {"decrease_ok", c.decrease_ok},
                        {"theta1_ok", c.theta1_ok},           {"theta2_ok", c.theta2_ok}};
  } else {
    j["certificate"] = nullptr;
  }
  if (include_timing) j["wall_time"] = r.wall_time;
  return j;
}

TraceRow row_from_json(const json& j) {
  TraceRow r;
  r.k = j.at("k").get<long>();
  r.grad_norm = j.at("grad_norm").get<double>();
  r.min_grad_norm = j.at("min_grad_norm").get<double>();
  r.chi = j.at("chi").get<double>();
  r.beta = number_or_empty(j, "beta");
  r.sigma = j.at("sigma").get<double>();
  r.xi = j.at("xi").get<double>();
  r.restart = j.at("restart").get<bool>();
  r.branch = parse_branch(j.at("branch").get<std::string>());
  r.h = number_or_empty(j, "h");
  r.h_floor_active = j.value("h_floor_active", false);
  r.f_value = number_or_empty(j, "f_value");
  r.step_norm = number_or_empty(j, "step_norm");
  r.inner_iterations = j.value("inner_iterations", 0);
  r.used_exact_subsolver = j.value("used_exact_subsolver", false);
  r.oracle_calls.calls = j.at("oracle_calls").get<std::vector<std::int64_t>>();
  if (j.contains("condition1") && !j["condition1"].is_null()) {
    const json& a = j["condition1"];
    r.condition1 = Condition1Audit{true, a.at("frob_residual").get<double>(), a.at("op_residual").get<double>(),
                                   a.at("bound").get<double>(), a.at("roundoff").get<double>(),
                                   a.at("violated").get<bool>()};
  }
  if (j.contains("secant") && !j["secant"].is_null()) {
    r.secant = SecantProgress{j["secant"].at("before").get<double>(), j["secant"].at("after").get<double>()};
  }
  if (j.contains("certificate") && !j["certificate"].is_null()) {
    const json& c = j["certificate"];
    StepCertificate cert;
    cert.model_decrease = c.at("model_decrease").get<double>();
    cert.grad_norm = c.at("grad_norm").get<double>();
    cert.lam_min_model = c.at("lam_min_model").get<double>();
    cert.theta1_rhs = c.at("theta1_rhs").get<double>();
    cert.theta2_rhs = c.at("theta2_rhs").get<double>();
    cert.decrease_ok = c.at("decrease_ok").get<bool>();
    cert.theta1_ok = c.at("theta1_ok").get<bool>();
    cert.theta2_ok = c.at("theta2_ok").get<bool>();
    r.certificate = cert;
  }
  r.wall_time = j.value("wall_time", 0.0);
  return r;
}

void write_jsonl(const RunTrace& trace, std::ostream& out, bool include_timing) {
  json header{{"record", "header"},
              {"schema_version", kTraceSchemaVersion},
              {"problem", trace.problem},
              {"dim", trace.dim},
              {"config", config_to_json(trace.config)}};
  out << header.dump() << '\n';
  for (const auto& row : trace.rows) out << row_to_json(row, include_timing).dump() << '\n';
  std::vector<double> x(trace.x_final.data(), trace.x_final.data() + trace.x_final.size());
  json summary{{"record", "summary"},
               {"termination", to_string(trace.termination)},
               {"message", trace.message},
               {"iterations", trace.iterations()},
               {"rows", trace.rows.size()},
               {"oracle_totals", trace.oracle_totals.calls},
               {"x_final", x}};
  out << summary.dump() << '\n';
}

LoadedTrace read_jsonl(std::istream& in) {
  LoadedTrace loaded;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    const std::string kind = j.value("record", "");
    if (kind == "header") {
      const int version = j.value("schema_version", -1);
      if (version != kTraceSchemaVersion) {
        throw Error("unsupported trace schema version " + std::to_string(version));
      }
      loaded.header = j;
    } else if (kind == "iter") {
      if (loaded.header.is_null()) throw Error("trace: iteration record before header");
      loaded.rows.push_back(row_from_json(j));
    } else if (kind == "summary") {
      loaded.summary = j;
    } else {
      throw Error("trace line " + std::to_string(lineno) + ": unknown record type '" + kind + "'");
    }
  }
  if (loaded.header.is_null()) throw Error("trace: missing header record");
  return loaded;
}

std::vector<std::string> summary_csv_columns() {
  return {"schema_version", "problem",       "dim",          "p",          "strategy",   "m",
          "eps1",           "eps2",          "seed",         "termination", "iterations", "final_grad_norm",
          "min_grad_norm",  "final_chi",     "final_sigma",  "calls_f",    "calls_d1",   "calls_d2",
          "calls_d3",       "calls_d4"};
}

void write_summary_csv_header(std::ostream& out) {
  const auto cols = summary_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void write_summary_csv_row(const RunTrace& t, std::ostream& out) {
  std::ostringstream s;
  s << std::setprecision(17);
  const TraceRow* last = t.rows.empty() ? nullptr : &t.rows.back();
  auto num = [&](double v) { s << ',' << v; };
  s << kTraceSchemaVersion << ',' << t.problem << ',' << t.dim << ',' << t.config.p << ','
    << to_string(t.config.strategy.kind) << ',' << t.config.strategy.m;
  num(t.config.eps1);
  num(t.config.eps2);
  s << ',' << t.config.seed << ',' << to_string(t.termination) << ',' << t.iterations();
  if (last) {
    num(last->grad_norm);
    num(last->min_grad_norm);
    num(last->chi);
    num(last->sigma);
  } else {
    s << ",,,,";
  }
  for (int i = 0; i <= 4; ++i) s << ',' << t.oracle_totals.order(i);
  out << s.str() << '\n';
}

}  // namespace arp
