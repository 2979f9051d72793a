#include "wreath/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "wreath/errors.hpp"
#include "wreath/markov.hpp"
#include "wreath/word_metric.hpp"

namespace wreath {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fnv1a64_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

OutputRecord write_atomically(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << content;
    if (!f.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
  return {path, content.size(), fnv1a64_hex(content)};
}

std::string format_real(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string walk_csv(const WalkSample& sample) {
  std::string out = "group,t,trial,displacement\n";
  const std::string g = to_string(sample.group);
  for (std::size_t c = 0; c < sample.times.size(); ++c) {
    for (Eigen::Index r = 0; r < sample.trials(); ++r) {
      out += g;
      out += ',';
      out += std::to_string(sample.times[c]);
      out += ',';
      out += std::to_string(r);
      out += ',';
      out += std::to_string(sample.displacements(r, static_cast<Eigen::Index>(c)));
      out += '\n';
    }
  }
  return out;
}

std::string compression_csv(const CompressionReport& report) {
  std::string out = "alpha,distance,norm,errorBound\n";
  for (const auto& o : report.observations) {
    out += format_real(report.alpha) + "," + std::to_string(o.distance) + "," + format_real(o.norm) + "," +
           format_real(o.error_bound) + "\n";
  }
  return out;
}

std::string tail_csv(const TailEstimate& tail) {
  std::string out = "t,c,beta,deltaHat,stderr\n";
  for (std::size_t i = 0; i < tail.times.size(); ++i) {
    out += std::to_string(tail.times[i]) + "," + format_real(tail.c) + "," + format_real(tail.beta) + "," +
           format_real(tail.delta_hat[i]) + "," + format_real(tail.standard_errors[i]) + "\n";
  }
  return out;
}

OutputRecord emit_plot_data(const WalkSample& sample, const fs::path& path) {
  return write_atomically(path, walk_csv(sample));
}
OutputRecord emit_plot_data(const CompressionReport& report, const fs::path& path) {
  return write_atomically(path, compression_csv(report));
}
OutputRecord emit_plot_data(const TailEstimate& tail, const fs::path& path) {
  return write_atomically(path, tail_csv(tail));
}

namespace {

// Accumulates outputs of one subcommand run and writes its manifest last.
class RunContext {
 public:
  RunContext(std::string command, fs::path out_dir)
      : command_(std::move(command)), out_dir_(std::move(out_dir)), start_(std::chrono::steady_clock::now()) {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    started_at_ = buf;
  }

  json config = json::object();
  std::optional<std::uint64_t> seed;

  void write(const std::string& name, const std::string& content) {
    outputs_.push_back(write_atomically(out_dir_ / name, content));
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void finish(const std::string& stem) {
    json m;
    m["tool"] = "wreath";
    m["toolVersion"] = kToolVersion;
    m["command"] = command_;
    m["config"] = config;
    m["seed"] = seed ? json(*seed) : json(nullptr);
    m["startedAt"] = started_at_;
    m["wallClockSeconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json outs = json::array();
    for (const auto& o : outputs_) {
      outs.push_back({{"path", o.path.filename().string()}, {"bytes", o.bytes}, {"fnv1a64", o.checksum}});
    }
    m["outputs"] = outs;
    write_atomically(out_dir_ / (stem + ".manifest.json"), m.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path out_dir_;
  std::chrono::steady_clock::time_point start_;
  std::string started_at_;
  std::vector<OutputRecord> outputs_;
};

json witness_json(const MetricWitness& w) {
  return {{"total", w.total},
          {"lampCost", w.lamp_cost},
          {"travelCost", w.travel_cost},
          {"direction", to_string(w.direction)}};
}

json tail_json(const TailEstimate& tail) {
  json rows = json::array();
  for (std::size_t i = 0; i < tail.times.size(); ++i) {
    rows.push_back({{"t", tail.times[i]}, {"deltaHat", tail.delta_hat[i]}, {"stderr", tail.standard_errors[i]}});
  }
  return {{"c", tail.c}, {"beta", tail.beta}, {"table", rows}};
}

json embedding_distance_json(const EmbeddingDistance& d) {
  auto tail = [](const TailDescriptor& t) {
    return json{{"cutoff", t.cutoff},       {"cursorGap", t.cursor_gap}, {"estimate", t.estimate},
                {"error", t.error},         {"crudeBound", t.crude_bound}};
  };
  return {{"value", d.value},
          {"errorBound", d.error_bound},
          {"cursorPart", d.cursor_part},
          {"lampPart", d.lamp_part},
          {"phiExplicit", d.phi_explicit},
          {"rightTail", tail(d.right_tail)},
          {"leftTail", tail(d.left_tail)}};
}

json compression_json(const CompressionReport& r) {
  return {{"alpha", r.alpha},
          {"targetExponent", r.target_exponent},
          {"observations", r.observations.size()},
          {"fittedExponent", r.fitted_exponent},
          {"fittedIntercept", r.fitted_intercept},
          {"fittedR2", r.fitted_r2},
          {"fittedLowerConstant", r.fitted_lower_constant},
          {"lipschitzMax", r.lipschitz_max}};
}

std::vector<Int> default_time_grid(Int tmax) {
  if (tmax < 1) throw ValidationError("tmax must be positive");
  std::vector<Int> times;
  for (Int t = 16; t <= tmax; t *= 2) times.push_back(t);
  if (times.empty() || times.back() != tmax) times.push_back(tmax);
  return times;
}

// ---------------------------------------------------------------------------
// metric

struct MetricOptions {
  std::string a = "0;";
  std::string b = "0;";
  bool oracle = false;
  Int max_radius = 12;
};

int cmd_metric(const MetricOptions& o, RunContext& ctx, std::ostream& out) {
  const auto a = decode(o.a);
  const auto b = decode(o.b);
  ctx.config = {{"a", o.a}, {"b", o.b}, {"oracle", o.oracle}, {"maxRadius", o.max_radius}};
  const auto w = distance(a, b);
  json j = witness_json(w);
  j["a"] = encode(a);
  j["b"] = encode(b);
  int status = kExitOk;
  if (o.oracle) {
    const Int bfs = distance_bfs(a, b, o.max_radius);
    j["oracle"] = bfs;
    j["agrees"] = bfs == w.total;
    if (bfs != w.total) status = kExitAssertion;
  }
  ctx.write_json("metric.json", j);
  ctx.finish("metric");
  out << j.dump(2) << "\n";
  return status;
}

// ---------------------------------------------------------------------------
// walk

struct WalkOptions {
  std::string group = "zwrz";
  Int tmax = 16384;
  Int trials = 2000;
  std::uint64_t seed = 0;
  std::vector<Int> times;
  unsigned workers = 0;
  std::optional<double> beta;
  Int reference = 1024;
};

json walk_summary(const WalkSample& sample, const BetaEstimate& fit, const TailEstimate& tail) {
  const auto mean = sample.mean_displacement();
  const auto median = sample.median_displacement();
  json per_t = json::array();
  for (std::size_t i = 0; i < sample.times.size(); ++i) {
    per_t.push_back({{"t", sample.times[i]}, {"mean", mean[i]}, {"median", median[i]}});
  }
  return {{"group", to_string(sample.group)},
          {"trials", sample.trials()},
          {"seed", sample.seed},
          {"betaHat", fit.beta},
          {"betaStderr", fit.beta_stderr},
          {"ci95", {fit.beta - 1.96 * fit.beta_stderr, fit.beta + 1.96 * fit.beta_stderr}},
          {"intercept", fit.intercept},
          {"r2", fit.r2},
          {"displacement", per_t},
          {"tail", tail_json(tail)}};
}

int cmd_walk(const WalkOptions& o, RunContext& ctx, std::ostream& out) {
  const WalkGroup group = parse_walk_group(o.group);
  const std::vector<Int> times = o.times.empty() ? default_time_grid(o.tmax) : o.times;
  ctx.config = {{"group", o.group}, {"tmax", o.tmax}, {"trials", o.trials}, {"times", times},
                {"reference", o.reference}};
  ctx.seed = o.seed;
  const auto sample = simulate(group, times, o.trials, o.seed, o.workers);
  const auto fit = estimate_beta(sample);
  const double beta = o.beta.value_or(group == WalkGroup::Integers ? 0.5 : 0.75);
  Int reference = o.reference;
  if (std::find(times.begin(), times.end(), reference) == times.end()) reference = times[times.size() / 2];
  const double c = rule_constant(sample, beta, reference);
  const auto tail = estimate_tail(sample, c, beta);

  const std::string stem = "walk_" + to_string(group);
  ctx.write(stem + ".csv", walk_csv(sample));
  ctx.write(stem + "_tail.csv", tail_csv(tail));
  json summary = walk_summary(sample, fit, tail);
  summary["referenceTime"] = reference;
  ctx.write_json(stem + "_summary.json", summary);
  ctx.finish(stem);
  out << summary.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// markov

struct VerifyOptions {
  Int chains = 500;
  Int max_states = 10;
  Int max_dim = 4;
  Int tmax = 64;
  double p = 2;
  std::uint64_t seed = 0;
};

int cmd_markov_verify(const VerifyOptions& o, RunContext& ctx, std::ostream& out) {
  if (o.chains < 1 || o.max_states < 1 || o.max_dim < 1 || o.tmax < 1) {
    throw ValidationError("chains, max-states, max-dim and tmax must be positive");
  }
  ctx.config = {{"chains", o.chains}, {"maxStates", o.max_states}, {"maxDim", o.max_dim}, {"tmax", o.tmax},
                {"p", o.p}};
  ctx.seed = o.seed;
  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<Int> states(1, o.max_states);
  std::uniform_int_distribution<Int> dims(1, o.max_dim);
  std::string csv = "chain,states,dim,t,lhs,rhs\n";
  double worst = -std::numeric_limits<double>::infinity();
  Int violations = 0;
  for (Int c = 0; c < o.chains; ++c) {
    const Int n = states(rng);
    const Int dim = dims(rng);
    const std::uint64_t chain_seed = rng();
    const auto chain = random_reversible_chain(n, chain_seed);
    const auto emb = random_embedding(n, dim, chain_seed ^ 0x5bd1e995ULL);
    const auto profile = markov_type_profile(chain, emb, o.p, o.tmax);
    for (std::size_t i = 0; i < profile.size(); ++i) {
      const double gap = profile[i].lhs - profile[i].rhs;
      worst = std::max(worst, gap);
      if (gap > kStepTolerance) ++violations;
      csv += std::to_string(c) + "," + std::to_string(n) + "," + std::to_string(dim) + "," + std::to_string(i + 1) +
             "," + format_real(profile[i].lhs) + "," + format_real(profile[i].rhs) + "\n";
    }
  }
  json j = {{"chains", o.chains}, {"p", o.p}, {"tmax", o.tmax}, {"maxExcess", worst},
            {"tolerance", kStepTolerance}, {"violations", violations}, {"holds", violations == 0}};
  ctx.write("markov_verify.csv", csv);
  ctx.write_json("markov_verify.json", j);
  ctx.finish("markov_verify");
  out << j.dump(2) << "\n";
  return violations == 0 ? kExitOk : kExitAssertion;
}

struct SubsetSpec {
  std::string kind;  // box | ball | random
  Int radius = 0;
};

SubsetSpec parse_subset(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ValidationError("subset spec must look like box:R, ball:R or random:R");
  SubsetSpec s;
  s.kind = text.substr(0, colon);
  const std::string r = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(r.data(), r.data() + r.size(), s.radius);
  if (ec != std::errc() || ptr != r.data() + r.size() || s.radius < 0) {
    throw ValidationError("subset radius must be a nonnegative integer: '" + text + "'");
  }
  if (s.kind != "box" && s.kind != "ball" && s.kind != "random") throw ValidationError("unknown subset kind '" + s.kind + "'");
  return s;
}

template <typename Vertex>
std::vector<Vertex> keep_random_half(std::vector<Vertex> all, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vertex> kept;
  for (auto& v : all) {
    if (rng() >> 63) kept.push_back(std::move(v));
  }
  if (kept.empty()) kept.push_back(all.front());
  return kept;
}

std::vector<Int> integer_subset(const SubsetSpec& s, std::uint64_t seed) {
  std::vector<Int> v;
  for (Int x = -s.radius; x <= s.radius; ++x) v.push_back(x);
  return s.kind == "random" ? keep_random_half(std::move(v), seed) : v;
}

std::vector<GridPoint> grid_subset(const SubsetSpec& s, std::uint64_t seed) {
  if (s.kind == "box") {
    std::vector<GridPoint> v;
    for (Int x = -s.radius; x <= s.radius; ++x) {
      for (Int y = -s.radius; y <= s.radius; ++y) v.push_back({x, y});
    }
    return v;
  }
  auto v = grid_host().ball({0, 0}, s.radius);
  return s.kind == "random" ? keep_random_half(std::move(v), seed) : v;
}

std::vector<GroupElement> lamplighter_subset(const SubsetSpec& s, std::uint64_t seed) {
  if (s.kind == "box") return truncated_lamplighter_box(s.radius, 1);
  auto v = ball_elements(ball(s.radius));
  return s.kind == "random" ? keep_random_half(std::move(v), seed) : v;
}

template <typename Vertex>
json delayed_report(const CayleyHost<Vertex>& host, std::vector<Vertex> subset) {
  const SubsetWalkSpec<Vertex> spec{host, std::move(subset)};
  const auto chain = delayed_walk(spec);
  const auto d = chain.diagnostics();
  Int interior = 0;
  for (Eigen::Index i = 0; i < chain.size(); ++i) interior += chain.transition()(i, i) == 0.0;
  return {{"host", host.name},
          {"states", chain.size()},
          {"zeroDelayStates", interior},
          {"rowSumError", d.row_sum_error},
          {"stationarityError", d.stationarity_error},
          {"detailedBalanceError", d.detailed_balance_error},
          {"tolerance", kChainTolerance},
          {"passes", d.passes(kChainTolerance)}};
}

struct DelayedOptions {
  std::string host = "zwrz-trunc";
  std::string subset = "box:2";
  std::uint64_t seed = 0;
};

int cmd_markov_delayed(const DelayedOptions& o, RunContext& ctx, std::ostream& out) {
  const auto spec = parse_subset(o.subset);
  ctx.config = {{"host", o.host}, {"subset", o.subset}};
  ctx.seed = o.seed;
  json j;
  if (o.host == "z") {
    j = delayed_report(integer_host(), integer_subset(spec, o.seed));
  } else if (o.host == "z2") {
    j = delayed_report(grid_host(), grid_subset(spec, o.seed));
  } else if (o.host == "zwrz-trunc" || o.host == "zwrz") {
    j = delayed_report(lamplighter_host(), lamplighter_subset(spec, o.seed));
  } else {
    throw ValidationError("unknown host '" + o.host + "' (expected z, z2 or zwrz-trunc)");
  }
  j["subset"] = o.subset;
  ctx.write_json("markov_delayed.json", j);
  ctx.finish("markov_delayed");
  out << j.dump(2) << "\n";
  return j["passes"].get<bool>() ? kExitOk : kExitAssertion;
}

struct ReplayOptions {
  std::string host = "z";
  std::string core = "box:20";
  Int t = 4;
  double p = 2;
  std::string rho = "identity";
  std::optional<double> threshold;
  std::uint64_t seed = 0;
};

json replay_json(const ReplayReport& r) {
  json j = {{"coreSize", r.core_size},     {"fattenedSize", r.fattened_size},
            {"epsilon", r.epsilon},        {"t", r.t},
            {"p", r.p},                    {"markovLhs", r.markov_lhs},
            {"markovRhs", r.markov_rhs},   {"graphRhs", r.graph_rhs},
            {"upper", r.upper},            {"rhoFull", r.rho_full},
            {"restricted", r.restricted},  {"freeExpectation", r.free_expectation},
            {"lower", r.lower},            {"holds", r.holds},
            {"violations", r.violations}};
  if (r.threshold) {
    j["threshold"] = *r.threshold;
    j["tailProbability"] = *r.tail_probability;
    j["tailBound"] = *r.tail_bound;
    j["finalBound"] = *r.final_bound;
  }
  return j;
}

// rho_hat(s) = min |f(x) - f(y)| over pairs of `vertices` at distance >= s.
template <typename Vertex>
std::function<double(double)> pairwise_empirical_rho(const CayleyHost<Vertex>& host,
                                                     const std::vector<Vertex>& vertices,
                                                     const std::function<Eigen::VectorXd(const Vertex&)>& emb) {
  std::vector<Eigen::VectorXd> points;
  for (const auto& v : vertices) points.push_back(emb(v));
  std::map<Int, double> best;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i; j < vertices.size(); ++j) {
      const Int d = host.distance(vertices[i], vertices[j]);
      const double gap = (points[i] - points[j]).norm();
      auto [it, fresh] = best.try_emplace(d, gap);
      if (!fresh) it->second = std::min(it->second, gap);
    }
  }
  std::vector<std::pair<Int, double>> suffix(best.begin(), best.end());
  for (std::size_t i = suffix.size(); i-- > 1;) suffix[i - 1].second = std::min(suffix[i - 1].second, suffix[i].second);
  return [suffix](double s) {
    for (const auto& [d, v] : suffix) {
      if (static_cast<double>(d) >= s) return v;
    }
    return suffix.back().second;
  };
}

template <typename Vertex>
ReplayReport replay_on(const CayleyHost<Vertex>& host, const std::vector<Vertex>& core, const ReplayOptions& o,
                       const std::function<Eigen::VectorXd(const Vertex&)>& emb) {
  std::function<double(double)> rho;
  if (o.rho == "identity") {
    rho = [](double s) { return s; };
  } else if (o.rho == "zero") {
    rho = [](double) { return 0.0; };
  } else if (o.rho == "empirical") {
    rho = pairwise_empirical_rho(host, folner_fatten(core, o.t, host).vertices, emb);
  } else {
    throw ValidationError("unknown rho '" + o.rho + "' (expected identity, zero or empirical)");
  }
  return proposition_replay(core, o.t, emb, rho, o.p, host, o.threshold);
}

// Cursor followed by the lamp values on a fixed window.
std::function<Eigen::VectorXd(const GroupElement&)> lamplighter_coordinates(Int lo, Int hi) {
  return [lo, hi](const GroupElement& g) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(hi - lo + 2);
    v(0) = static_cast<double>(g.cursor);
    for (const auto& [j, x] : g.lamps) {
      if (j < lo || j > hi) throw ValidationError("lamp outside the embedding window at " + encode(g));
      v(j - lo + 1) = static_cast<double>(x);
    }
    return v;
  };
}

int cmd_markov_replay(const ReplayOptions& o, RunContext& ctx, std::ostream& out) {
  const auto spec = parse_subset(o.core);
  ctx.config = {{"host", o.host}, {"F", o.core}, {"t", o.t}, {"p", o.p}, {"rho", o.rho}};
  if (o.threshold) ctx.config["threshold"] = *o.threshold;
  ctx.seed = o.seed;
  ReplayReport rep;
  if (o.host == "z") {
    rep = replay_on<Int>(integer_host(), integer_subset(spec, o.seed), o,
                         [](const Int& x) { return Eigen::VectorXd::Constant(1, static_cast<double>(x)); });
  } else if (o.host == "z2") {
    rep = replay_on<GridPoint>(grid_host(), grid_subset(spec, o.seed), o, [](const GridPoint& g) {
      Eigen::VectorXd v(2);
      v << static_cast<double>(g.x), static_cast<double>(g.y);
      return v;
    });
  } else if (o.host == "zwrz-trunc" || o.host == "zwrz") {
    const auto core = lamplighter_subset(spec, o.seed);
    Int lo = 0, hi = 0;
    for (const auto& g : core) {
      lo = std::min(lo, g.cursor);
      hi = std::max(hi, g.cursor);
      if (!g.lamps.empty()) {
        lo = std::min(lo, g.lamps.min_position());
        hi = std::max(hi, g.lamps.max_position());
      }
    }
    rep = replay_on<GroupElement>(lamplighter_host(), core, o, lamplighter_coordinates(lo - o.t, hi + o.t));
  } else {
    throw ValidationError("unknown host '" + o.host + "' (expected z, z2 or zwrz-trunc)");
  }
  json j = replay_json(rep);
  j["host"] = o.host;
  ctx.write_json("markov_replay.json", j);
  ctx.finish("markov_replay");
  out << j.dump(2) << "\n";
  return rep.holds ? kExitOk : kExitAssertion;
}

// ---------------------------------------------------------------------------
// bound

struct BoundOptions {
  std::optional<double> beta;
  std::optional<int> iterated_k;
  int table_rows = 6;
  std::optional<double> rho;
  double m = 1;
  double delta = 1;
  double p = 2;
  Int t = 1;
};

json rational_json(const Rational& r) {
  return {{"num", r.num}, {"den", r.den}, {"value", r.value()}};
}

int cmd_bound(const BoundOptions& o, RunContext& ctx, std::ostream& out) {
  if (!o.beta && !o.iterated_k && !o.rho) throw ValidationError("bound needs --beta, --iterated-k or --rho");
  json j;
  json table = json::array();
  for (int k = 1; k <= o.table_rows; ++k) {
    const auto row = iterated_wreath_row(k);
    table.push_back({{"k", k}, {"beta", rational_json(row.beta)}, {"alphaUpper", rational_json(row.bound)}});
  }
  j["iteratedTable"] = table;
  int status = kExitOk;
  if (o.beta) {
    j["beta"] = *o.beta;
    j["alphaUpper"] = alpha_upper(*o.beta);
    for (const auto& row : table) {
      if (std::abs(row["beta"]["value"].get<double>() - *o.beta) < 1e-15) j["matchingRow"] = row;
    }
    out << format_real(alpha_upper(*o.beta)) << "\n";
  }
  if (o.iterated_k) {
    const auto row = iterated_wreath_row(*o.iterated_k);
    j["iterated"] = {{"k", row.k}, {"beta", rational_json(row.beta)}, {"alphaUpper", rational_json(row.bound)}};
    out << row.bound.num << "/" << row.bound.den << "\n";
  }
  if (o.rho) {
    const auto s = proposition_bound(*o.rho, o.m, o.delta, o.p, o.t);
    j["proposition"] = {{"lhs", s.lhs}, {"rhs", s.rhs}, {"holds", s.lhs <= s.rhs}};
    if (s.lhs > s.rhs) status = kExitAssertion;
  }
  ctx.config = {{"tableRows", o.table_rows}};
  if (o.beta) ctx.config["beta"] = *o.beta;
  if (o.iterated_k) ctx.config["iteratedK"] = *o.iterated_k;
  ctx.write_json("bound.json", j);
  ctx.finish("bound");
  out << j.dump(2) << "\n";
  return status;
}

// ---------------------------------------------------------------------------
// embed

struct EmbedOptions {
  double alpha = 0.45;
  double eps = 1e-6;
  std::string a = "0;";
  std::string b = "0;";
  Int count = 100;
  std::uint64_t seed = 0;
  std::string sampler = "ball";
  Int size = 6;
};

int cmd_embed_norms(const EmbedOptions& o, RunContext& ctx, std::ostream& out) {
  ctx.config = {{"alpha", o.alpha}, {"eps", o.eps}};
  const auto audit = lipschitz_audit(o.alpha, o.eps);
  json gens = json::array();
  const auto& s = canonical_generators();
  for (std::size_t i = 0; i < s.size(); ++i) {
    json g = embedding_distance_json(audit.generators[i]);
    g["generator"] = encode(s[i]);
    gens.push_back(g);
  }
  const double l2 = audit.lipschitz * audit.lipschitz;
  const double scaled = (l2 - 1) * (1 - 2 * o.alpha);
  json j = {{"alpha", o.alpha},
            {"lipschitz", audit.lipschitz},
            {"errorBound", audit.error_bound},
            {"generators", gens},
            {"lipschitzSquaredTimesOneMinus2Alpha", l2 * (1 - 2 * o.alpha)},
            {"auditedC", scaled},
            {"constantC", kLipschitzConstantC},
            {"holds", scaled <= kLipschitzConstantC}};
  ctx.write_json("embed_norms.json", j);
  ctx.finish("embed_norms");
  out << j.dump(2) << "\n";
  return scaled <= kLipschitzConstantC ? kExitOk : kExitAssertion;
}

int cmd_embed_pair(const EmbedOptions& o, RunContext& ctx, std::ostream& out) {
  ctx.config = {{"alpha", o.alpha}, {"eps", o.eps}, {"a", o.a}, {"b", o.b}};
  const auto a = decode(o.a);
  const auto b = decode(o.b);
  json j = embedding_distance_json(f_alpha_distance(a, b, o.alpha, o.eps));
  j["a"] = encode(a);
  j["b"] = encode(b);
  j["wordDistance"] = distance(a, b).total;
  ctx.write_json("embed_pair.json", j);
  ctx.finish("embed_pair");
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_embed_scan(const EmbedOptions& o, RunContext& ctx, std::ostream& out) {
  ctx.config = {{"alpha", o.alpha}, {"eps", o.eps}, {"count", o.count}, {"sampler", o.sampler}, {"size", o.size}};
  ctx.seed = o.seed;
  const SamplerSpec spec{parse_sampler_kind(o.sampler), o.size};
  const auto report = compression_scan(o.alpha, spec, o.count, o.eps, o.seed);
  const auto audit = lipschitz_audit(o.alpha, o.eps);
  json j = compression_json(report);
  j["sampler"] = o.sampler;
  j["lipschitzAudit"] = audit.lipschitz;
  const bool holds = report.lipschitz_max <= audit.lipschitz + o.eps && report.fitted_lower_constant > 0;
  j["holds"] = holds;
  ctx.write("embed_scan.csv", compression_csv(report));
  ctx.write_json("embed_scan.json", j);
  ctx.finish("embed_scan");
  out << j.dump(2) << "\n";
  return holds ? kExitOk : kExitAssertion;
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineOptions {
  double alpha = 0.45;
  std::uint64_t seed = 0;
  Int trials = 2000;
  Int tmax = 16384;
  double eps = 1e-6;
  unsigned workers = 0;
};

int cmd_pipeline(const PipelineOptions& o, RunContext& ctx, std::ostream& out) {
  validate_alpha(o.alpha);
  ctx.config = {{"alpha", o.alpha}, {"trials", o.trials}, {"tmax", o.tmax}, {"eps", o.eps}};
  ctx.seed = o.seed;

  // displacement statistics
  const auto times = default_time_grid(o.tmax);
  const auto sample = simulate(WalkGroup::Lamplighter, times, o.trials, o.seed, o.workers);
  const auto fit = estimate_beta(sample);
  const Int reference = std::find(times.begin(), times.end(), 1024) != times.end() ? 1024 : times[times.size() / 2];
  const double c = rule_constant(sample, fit.beta, reference);
  const auto tail = estimate_tail(sample, c, fit.beta);

  // tested times: dyadic 2^6 .. 2^12 within the grid
  std::vector<std::size_t> tested;
  double max_threshold = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= 64 && times[i] <= 4096) {
      tested.push_back(i);
      max_threshold = std::max(max_threshold, c * std::pow(static_cast<double>(times[i]), fit.beta));
    }
  }
  if (tested.empty()) throw ValidationError("pipeline needs tmax >= 64");

  // empirical compression of F_alpha / Lipschitz constant
  const auto audit = lipschitz_audit(o.alpha, o.eps);
  std::vector<GroupElement> elements = sample_elements({SamplerKind::Ball, 6}, o.alpha, 1 << 30, o.seed);
  for (auto& g : balanced_family(o.alpha, static_cast<Int>(std::ceil(std::max(max_threshold, 200.0)))))
    elements.push_back(std::move(g));
  const auto report = compression_scan(o.alpha, elements, o.eps);
  const EmpiricalCompression rho_hat(report.observations, 1.0 / audit.lipschitz);

  std::string csv = "t,threshold,deltaHat,rhoHat,lhs,rhs\n";
  json rows = json::array();
  bool holds = true;
  for (std::size_t i : tested) {
    const Int t = times[i];
    const double threshold = c * std::pow(static_cast<double>(t), fit.beta);
    const double delta = tail.delta_hat[i];
    const auto r = rho_hat(threshold);
    json row = {{"t", t}, {"threshold", threshold}, {"deltaHat", delta}};
    if (!r || !(delta > 0)) {
      holds = false;
      row["holds"] = false;
      rows.push_back(row);
      continue;
    }
    const auto sides = proposition_bound(*r, 1.0, delta, 2.0, t);
    const bool ok = sides.lhs <= sides.rhs;
    holds = holds && ok;
    row["rhoHat"] = *r;
    row["lhs"] = sides.lhs;
    row["rhs"] = sides.rhs;
    row["holds"] = ok;
    rows.push_back(row);
    csv += std::to_string(t) + "," + format_real(threshold) + "," + format_real(delta) + "," + format_real(*r) +
           "," + format_real(sides.lhs) + "," + format_real(sides.rhs) + "\n";
  }
  json j = {{"alpha", o.alpha},
            {"betaHat", fit.beta},
            {"c", c},
            {"referenceTime", reference},
            {"alphaUpperFromBetaHat", alpha_upper(std::min(1.0, fit.beta))},
            {"lipschitz", audit.lipschitz},
            {"compression", compression_json(report)},
            {"rows", rows},
            {"holds", holds}};
  ctx.write("pipeline.csv", csv);
  ctx.write("pipeline_walk_tail.csv", tail_csv(tail));
  ctx.write("pipeline_compression.csv", compression_csv(report));
  ctx.write_json("pipeline.json", j);
  ctx.finish("pipeline");
  out << j.dump(2) << "\n";
  return holds ? kExitOk : kExitAssertion;
}

// ---------------------------------------------------------------------------
// config file: key=value lines become --key value unless the flag is present

std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::optional<std::string> path;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!path) return kept;
  std::ifstream f(*path);
  if (!f) throw ValidationError("cannot read config file " + *path);
  auto present = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(kept.begin(), kept.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  std::string line;
  while (std::getline(f, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw ValidationError("config line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (present(key)) continue;
    if (value == "true") {
      extra.push_back("--" + key);
    } else if (value != "false") {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  kept.insert(kept.end(), extra.begin(), extra.end());
  return kept;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Z wr Z word metric, random walks, Markov type and compression experiments", "wreath"};
  app.require_subcommand(1);
  std::string out_dir = "out";
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  auto seed_option = [](CLI::App* sub, std::uint64_t& seed) {
    sub->add_option("--seed", seed, "RNG seed")->envname("WREATH_SEED")->capture_default_str();
  };

  MetricOptions metric;
  auto* metric_cmd = app.add_subcommand("metric", "word-metric distance between two encoded elements");
  metric_cmd->add_option("--a", metric.a, "element encoding, e.g. '2; -1:3, 4:-2'")->required();
  metric_cmd->add_option("--b", metric.b, "element encoding")->capture_default_str();
  metric_cmd->add_flag("--oracle", metric.oracle, "cross-check against breadth-first search");
  metric_cmd->add_option("--max-radius", metric.max_radius, "BFS radius limit")->capture_default_str();

  WalkOptions walk;
  auto* walk_cmd = app.add_subcommand("walk", "simulate the simple random walk and fit displacement exponents");
  walk_cmd->add_option("--group", walk.group, "z or zwrz")->capture_default_str();
  walk_cmd->add_option("--tmax", walk.tmax, "largest time of the dyadic grid")->capture_default_str();
  walk_cmd->add_option("--trials", walk.trials)->capture_default_str();
  seed_option(walk_cmd, walk.seed);
  walk_cmd->add_option("--times", walk.times, "explicit time grid")->delimiter(',');
  walk_cmd->add_option("--workers", walk.workers, "0 = hardware concurrency");
  walk_cmd->add_option("--beta", walk.beta, "exponent for the tail table (default 1/2 for z, 3/4 for zwrz)");
  walk_cmd->add_option("--reference", walk.reference, "reference time for the tail constant")->capture_default_str();

  auto* markov_cmd = app.add_subcommand("markov", "Markov type checks");
  markov_cmd->require_subcommand(1);
  VerifyOptions verify;
  auto* verify_cmd = markov_cmd->add_subcommand("verify", "random reversible chain campaign");
  verify_cmd->add_option("--chains", verify.chains)->capture_default_str();
  verify_cmd->add_option("--max-states", verify.max_states)->capture_default_str();
  verify_cmd->add_option("--max-dim", verify.max_dim)->capture_default_str();
  verify_cmd->add_option("--tmax", verify.tmax)->capture_default_str();
  verify_cmd->add_option("--p", verify.p)->capture_default_str();
  seed_option(verify_cmd, verify.seed);

  DelayedOptions delayed;
  auto* delayed_cmd = markov_cmd->add_subcommand("delayed", "build and validate a delayed subset walk");
  delayed_cmd->add_option("--host", delayed.host, "z, z2 or zwrz-trunc")->capture_default_str();
  delayed_cmd->add_option("--subset", delayed.subset, "box:R, ball:R or random:R")->capture_default_str();
  seed_option(delayed_cmd, delayed.seed);

  ReplayOptions replay;
  auto* replay_cmd = markov_cmd->add_subcommand("replay", "exact replay of the Folner inequality chain");
  replay_cmd->add_option("--host", replay.host, "z, z2 or zwrz-trunc")->capture_default_str();
  replay_cmd->add_option("--F", replay.core, "core set: box:R, ball:R or random:R")->capture_default_str();
  replay_cmd->add_option("--t", replay.t)->capture_default_str();
  replay_cmd->add_option("--p", replay.p)->capture_default_str();
  replay_cmd->add_option("--rho", replay.rho, "identity, zero or empirical")->capture_default_str();
  replay_cmd->add_option("--threshold", replay.threshold, "c t^beta for the tail step");
  seed_option(replay_cmd, replay.seed);

  BoundOptions bound;
  auto add_bound_options = [&bound](CLI::App* cmd) {
    cmd->add_option("--beta", bound.beta, "displacement exponent");
    cmd->add_option("--iterated-k", bound.iterated_k, "iterated wreath depth k");
    cmd->add_option("--table-rows", bound.table_rows)->capture_default_str();
    cmd->add_option("--rho", bound.rho, "rho(c t^beta) for the proposition display");
    cmd->add_option("--M", bound.m)->capture_default_str();
    cmd->add_option("--delta", bound.delta)->capture_default_str();
    cmd->add_option("--p", bound.p)->capture_default_str();
    cmd->add_option("--t", bound.t)->capture_default_str();
  };
  auto* bound_cmd = app.add_subcommand("bound", "compression exponent upper bounds");
  add_bound_options(bound_cmd);
  auto* markov_bound_cmd = markov_cmd->add_subcommand("bound", "same as the top-level bound command");
  add_bound_options(markov_bound_cmd);

  EmbedOptions embed;
  auto* embed_cmd = app.add_subcommand("embed", "the F_alpha embedding");
  embed_cmd->require_subcommand(1);
  auto add_alpha = [&embed](CLI::App* cmd) {
    cmd->add_option("--alpha", embed.alpha)->capture_default_str();
    cmd->add_option("--eps", embed.eps)->capture_default_str();
  };
  auto* norms_cmd = embed_cmd->add_subcommand("norms", "generator audit");
  add_alpha(norms_cmd);
  auto* pair_cmd = embed_cmd->add_subcommand("pair", "distance between two encoded elements");
  add_alpha(pair_cmd);
  pair_cmd->add_option("--a", embed.a)->required();
  pair_cmd->add_option("--b", embed.b)->capture_default_str();
  auto* scan_cmd = embed_cmd->add_subcommand("scan", "compression report over a sampler");
  add_alpha(scan_cmd);
  scan_cmd->add_option("--count", embed.count)->capture_default_str();
  scan_cmd->add_option("--sampler", embed.sampler, "ball, cursor, lamp, balanced or walk")->capture_default_str();
  scan_cmd->add_option("--size", embed.size, "ball radius, spread, max distance or walk length")
      ->capture_default_str();
  seed_option(scan_cmd, embed.seed);

  PipelineOptions pipeline;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "walk + embedding + proposition bound end to end");
  pipeline_cmd->add_option("--alpha", pipeline.alpha)->capture_default_str();
  pipeline_cmd->add_option("--trials", pipeline.trials)->capture_default_str();
  pipeline_cmd->add_option("--tmax", pipeline.tmax)->capture_default_str();
  pipeline_cmd->add_option("--eps", pipeline.eps)->capture_default_str();
  pipeline_cmd->add_option("--workers", pipeline.workers);
  seed_option(pipeline_cmd, pipeline.seed);

  try {
    std::vector<std::string> args = apply_config_file(raw_args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    std::ostringstream diag;
    const int code = app.exit(e, out, diag);
    err << diag.str();
    return code == 0 ? kExitOk : kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*metric_cmd) {
      RunContext ctx("metric", out_dir);
      return cmd_metric(metric, ctx, out);
    }
    if (*walk_cmd) {
      RunContext ctx("walk", out_dir);
      return cmd_walk(walk, ctx, out);
    }
    if (*markov_cmd) {
      if (*verify_cmd) {
        RunContext ctx("markov verify", out_dir);
        return cmd_markov_verify(verify, ctx, out);
      }
      if (*delayed_cmd) {
        RunContext ctx("markov delayed", out_dir);
        return cmd_markov_delayed(delayed, ctx, out);
      }
      if (*replay_cmd) {
        RunContext ctx("markov replay", out_dir);
        return cmd_markov_replay(replay, ctx, out);
      }
      RunContext ctx("markov bound", out_dir);
      return cmd_bound(bound, ctx, out);
    }
    if (*bound_cmd) {
      RunContext ctx("bound", out_dir);
      return cmd_bound(bound, ctx, out);
    }
    if (*embed_cmd) {
      if (*norms_cmd) {
        RunContext ctx("embed norms", out_dir);
        return cmd_embed_norms(embed, ctx, out);
      }
      if (*pair_cmd) {
        RunContext ctx("embed pair", out_dir);
        return cmd_embed_pair(embed, ctx, out);
      }
      RunContext ctx("embed scan", out_dir);
      return cmd_embed_scan(embed, ctx, out);
    }
    RunContext ctx("pipeline", out_dir);
    return cmd_pipeline(pipeline, ctx, out);
  } catch (const AssertionFailure& e) {
    err << "assertion failed: " << e.what() << "\n";
    return kExitAssertion;
  } catch (const ResourceLimit& e) {
    err << "resource limit: " << e.what() << "\n";
    return kExitResource;
  } catch (const OutOfRange& e) {
    err << "out of range: " << e.what() << "\n";
    return kExitResource;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ArithmeticOverflow& e) {
    err << "overflow: " << e.what() << "\n";
    return kExitValidation;
  } catch (const EstimationError& e) {
    err << "estimation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace wreath
