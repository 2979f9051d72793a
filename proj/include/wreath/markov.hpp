#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wreath/errors.hpp"
#include "wreath/group.hpp"
#include "wreath/stats.hpp"

namespace wreath {

inline constexpr double kChainTolerance = 1e-12;
inline constexpr double kStepTolerance = 1e-9;

template <typename Scalar>
struct ChainDiagnostics {
  Scalar row_sum_error{0};
  Scalar stationarity_error{0};
  Scalar detailed_balance_error{0};
  Scalar pi_sum_error{0};
  Scalar min_entry{0};

  bool passes(Scalar tol) const {
    return row_sum_error <= tol && stationarity_error <= tol && detailed_balance_error <= tol &&
           pi_sum_error <= tol && min_entry >= -tol;
  }
};

/// Markov chain on {0, ..., n-1} with transition matrix a and marginal pi.
/// Construction does not validate; call validate() or diagnostics().
template <typename Scalar = double>
class FiniteChain {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  FiniteChain() = default;
  FiniteChain(Vector pi, Matrix a) : pi_(std::move(pi)), a_(std::move(a)) {
    if (a_.rows() != a_.cols() || a_.rows() != pi_.size() || pi_.size() == 0) {
      throw ValidationError("chain shape mismatch: pi has " + std::to_string(pi_.size()) + " entries, a is " +
                            std::to_string(a_.rows()) + "x" + std::to_string(a_.cols()));
    }
  }

  Eigen::Index size() const noexcept { return pi_.size(); }
  const Vector& pi() const noexcept { return pi_; }
  const Matrix& transition() const noexcept { return a_; }

  ChainDiagnostics<Scalar> diagnostics() const {
    ChainDiagnostics<Scalar> d;
    d.min_entry = std::min(a_.minCoeff(), pi_.minCoeff());
    d.row_sum_error = (a_.rowwise().sum().array() - Scalar(1)).abs().maxCoeff();
    d.pi_sum_error = std::abs(pi_.sum() - Scalar(1));
    d.stationarity_error = (a_.transpose() * pi_ - pi_).cwiseAbs().maxCoeff();
    Matrix flow = pi_.asDiagonal() * a_;
    d.detailed_balance_error = (flow - flow.transpose()).cwiseAbs().maxCoeff();
    return d;
  }

  void validate(Scalar tol = Scalar(kChainTolerance)) const {
    const auto d = diagnostics();
    if (d.min_entry < -tol) throw ValidationError("chain has negative probabilities");
    if (d.row_sum_error > tol) throw ValidationError("transition rows do not sum to 1");
    if (d.pi_sum_error > tol) throw ValidationError("pi is not a probability vector");
    if (d.stationarity_error > tol) throw ValidationError("pi is not stationary for the transition matrix");
    if (d.detailed_balance_error > tol) throw ValidationError("chain violates detailed balance");
  }

 private:
  Vector pi_;
  Matrix a_;
};

/// Row i holds f(i); every row has the same dimension.
template <typename Scalar = double>
struct PointEmbedding {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> points;

  void validate(Eigen::Index states) const {
    if (points.cols() < 1) throw ValidationError("embedding dimension must be at least 1");
    if (points.rows() != states) throw ValidationError("embedding does not cover every state");
    if (!points.allFinite()) throw ValidationError("embedding has non-finite coordinates");
  }
};

/// a^t by repeated multiplication; switches to a sparse right factor for
/// large state spaces.
template <typename Scalar>
typename FiniteChain<Scalar>::Matrix transition_power(const FiniteChain<Scalar>& chain, std::int64_t t) {
  using Matrix = typename FiniteChain<Scalar>::Matrix;
  if (t < 0) throw ValidationError("transition power must be nonnegative");
  const auto n = chain.size();
  Matrix p = Matrix::Identity(n, n);
  if (n > 128) {
    Eigen::SparseMatrix<Scalar> a = chain.transition().sparseView();
    for (std::int64_t i = 0; i < t; ++i) p = (p * a).eval();
  } else {
    for (std::int64_t i = 0; i < t; ++i) p = (p * chain.transition()).eval();
  }
  return p;
}

template <typename Scalar>
typename FiniteChain<Scalar>::Matrix pairwise_distance_power(const PointEmbedding<Scalar>& emb, Scalar p) {
  const auto n = emb.points.rows();
  typename FiniteChain<Scalar>::Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      d(i, j) = std::pow((emb.points.row(i) - emb.points.row(j)).norm(), p);
    }
  }
  return d;
}

/// sum_ij pi_i m_ij w_ij with compensated accumulation
template <typename Scalar, typename M1, typename M2>
Scalar weighted_expectation(const typename FiniteChain<Scalar>::Vector& pi, const M1& m, const M2& w) {
  CompensatedSum<Scalar> acc;
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    CompensatedSum<Scalar> row;
    for (Eigen::Index j = 0; j < pi.size(); ++j) {
      if (m(i, j) != Scalar(0)) row += m(i, j) * w(i, j);
    }
    acc += pi(i) * row.value();
  }
  return acc.value();
}

template <typename Scalar>
struct MarkovSides {
  Scalar lhs{0};  // E ||f(Z_t) - f(Z_0)||^p
  Scalar rhs{0};  // t E ||f(Z_1) - f(Z_0)||^p
};

template <typename Scalar>
void validate_markov_inputs(const FiniteChain<Scalar>& chain, const PointEmbedding<Scalar>& emb, Scalar p) {
  chain.validate();
  emb.validate(chain.size());
  if (!(p >= Scalar(1)) || !std::isfinite(static_cast<double>(p))) throw ValidationError("p must be >= 1");
}

/// Both sides of the Markov type inequality at K = 1, with exact matrix powers.
template <typename Scalar>
MarkovSides<Scalar> markov_type_sides(const FiniteChain<Scalar>& chain, const PointEmbedding<Scalar>& emb, Scalar p,
                                      std::int64_t t) {
  validate_markov_inputs(chain, emb, p);
  if (t < 1) throw ValidationError("t must be at least 1");
  const auto dist = pairwise_distance_power(emb, p);
  const auto power = transition_power(chain, t);
  MarkovSides<Scalar> s;
  s.lhs = weighted_expectation<Scalar>(chain.pi(), power, dist);
  s.rhs = static_cast<Scalar>(t) * weighted_expectation<Scalar>(chain.pi(), chain.transition(), dist);
  return s;
}

/// markov_type_sides for every t = 1..tmax, reusing successive powers.
template <typename Scalar>
std::vector<MarkovSides<Scalar>> markov_type_profile(const FiniteChain<Scalar>& chain,
                                                     const PointEmbedding<Scalar>& emb, Scalar p,
                                                     std::int64_t tmax) {
  validate_markov_inputs(chain, emb, p);
  if (tmax < 1) throw ValidationError("tmax must be at least 1");
  const auto dist = pairwise_distance_power(emb, p);
  const Scalar one_step = weighted_expectation<Scalar>(chain.pi(), chain.transition(), dist);
  std::vector<MarkovSides<Scalar>> out;
  typename FiniteChain<Scalar>::Matrix power = chain.transition();
  for (std::int64_t t = 1; t <= tmax; ++t) {
    if (t > 1) power = (power * chain.transition()).eval();
    out.push_back({weighted_expectation<Scalar>(chain.pi(), power, dist), static_cast<Scalar>(t) * one_step});
  }
  return out;
}

using IntMatrix = Eigen::Matrix<Int, Eigen::Dynamic, Eigen::Dynamic>;

/// Symmetric positive integer weights on a connected graph (random spanning
/// tree plus extra edges and self-loops).
IntMatrix random_weighted_graph(Int n, std::uint64_t seed);

/// a_ij = w_ij / sum_k w_ik, pi_i proportional to sum_k w_ik.
FiniteChain<double> chain_from_weights(const IntMatrix& weights);

FiniteChain<double> random_reversible_chain(Int n, std::uint64_t seed);

/// Uniform points in [-1, 1]^dim, one row per state.
PointEmbedding<double> random_embedding(Int states, Int dim, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Cayley-graph hosts and subset walks

/// Vertices of Z^2.
struct GridPoint {
  Int x = 0;
  Int y = 0;
  friend bool operator==(const GridPoint&, const GridPoint&) = default;
  friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
};

}  // namespace wreath

template <>
struct std::hash<wreath::GridPoint> {
  std::size_t operator()(const wreath::GridPoint& g) const noexcept {
    return std::hash<std::int64_t>{}(g.x * 0x9e3779b97f4a7c15LL ^ g.y);
  }
};

namespace wreath {

/// A Cayley graph given by its right action of an ordered, inverse-closed
/// generator list, together with its word metric.
template <typename Vertex>
struct CayleyHost {
  std::string name;
  std::size_t degree = 0;
  Vertex identity{};
  std::function<Vertex(const Vertex&, std::size_t)> step;
  std::function<Int(const Vertex&, const Vertex&)> distance;
  std::function<std::vector<Vertex>(const Vertex&, Int)> ball;
  std::function<std::string(const Vertex&)> describe;
};

CayleyHost<Int> integer_host();
CayleyHost<GridPoint> grid_host();
CayleyHost<GroupElement> lamplighter_host();

/// Elements with cursor and support in [-radius, radius] and lamp values in
/// [-max_lamp, max_lamp].
std::vector<GroupElement> truncated_lamplighter_box(Int radius, Int max_lamp);

template <typename Vertex>
struct SubsetWalkSpec {
  CayleyHost<Vertex> host;
  std::vector<Vertex> subset;  // state i of the chain is subset[i]
};

template <typename Vertex>
std::unordered_map<Vertex, Eigen::Index> index_vertices(const std::vector<Vertex>& vertices) {
  std::unordered_map<Vertex, Eigen::Index> index;
  index.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!index.emplace(vertices[i], static_cast<Eigen::Index>(i)).second) {
      throw ValidationError("subset lists a vertex twice");
    }
  }
  return index;
}

/// Walk that proposes a uniform generator and stays put when the proposal
/// leaves the subset; uniform marginal.
template <typename Vertex>
FiniteChain<double> delayed_walk(const SubsetWalkSpec<Vertex>& spec) {
  if (spec.subset.empty()) throw ValidationError("delayed walk needs a nonempty subset");
  if (spec.host.degree == 0) throw ValidationError("host has no generators");
  const auto index = index_vertices(spec.subset);
  const auto n = static_cast<Eigen::Index>(spec.subset.size());
  const double w = 1.0 / static_cast<double>(spec.host.degree);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vertex& x = spec.subset[static_cast<std::size_t>(i)];
    std::size_t inside = 0;
    for (std::size_t s = 0; s < spec.host.degree; ++s) {
      const Vertex y = spec.host.step(x, s);
      auto it = index.find(y);
      if (it == index.end()) continue;
      bool back = false;
      for (std::size_t r = 0; r < spec.host.degree && !back; ++r) back = spec.host.step(y, r) == x;
      if (!back) throw ValidationError("host adjacency is not symmetric at " + spec.host.describe(x));
      a(i, it->second) += w;
      ++inside;
    }
    a(i, i) += 1.0 - static_cast<double>(inside) * w;
  }
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return FiniteChain<double>(std::move(pi), std::move(a));
}

template <typename Vertex>
struct FolnerSet {
  std::vector<Vertex> vertices;  // the core F first, in input order, then A \ F
  std::size_t core_size = 0;

  std::size_t boundary_size() const { return vertices.size() - core_size; }
  /// |A \ F| / |F|
  double ratio() const { return static_cast<double>(boundary_size()) / static_cast<double>(core_size); }
};

/// A = union of the radius-t balls around the points of F.
template <typename Vertex>
FolnerSet<Vertex> folner_fatten(const std::vector<Vertex>& core, Int t, const CayleyHost<Vertex>& host,
                                std::size_t cap = 10'000'000) {
  if (t < 0) throw ValidationError("fattening radius must be nonnegative");
  if (core.empty()) throw ValidationError("Folner core must be nonempty");
  FolnerSet<Vertex> out;
  auto index = index_vertices(core);
  out.vertices = core;
  out.core_size = core.size();
  for (const auto& x : core) {
    for (auto& y : host.ball(x, t)) {
      if (index.emplace(y, static_cast<Eigen::Index>(out.vertices.size())).second) {
        out.vertices.push_back(std::move(y));
        if (out.vertices.size() > cap) throw ResourceLimit("fattened set exceeds cap");
      }
    }
  }
  return out;
}

/// Exact law of d(W_t, e) for the free walk, by dynamic programming over
/// vertex distributions.
template <typename Vertex>
std::map<Int, double> walk_distance_law(const CayleyHost<Vertex>& host, Int t) {
  if (t < 0) throw ValidationError("t must be nonnegative");
  std::unordered_map<Vertex, double> dist{{host.identity, 1.0}};
  const double w = 1.0 / static_cast<double>(host.degree);
  for (Int i = 0; i < t; ++i) {
    std::unordered_map<Vertex, double> next;
    for (const auto& [x, pr] : dist) {
      for (std::size_t s = 0; s < host.degree; ++s) next[host.step(x, s)] += pr * w;
    }
    dist = std::move(next);
  }
  std::map<Int, double> law;
  for (const auto& [x, pr] : dist) law[host.distance(host.identity, x)] += pr;
  return law;
}

struct ReplayReport {
  std::size_t core_size = 0;
  std::size_t fattened_size = 0;
  double epsilon = 0;  // |A \ F| / |F|
  Int t = 0;
  double p = 2;

  double markov_lhs = 0;      // E d_X(f(Z_t), f(Z_0))^p
  double markov_rhs = 0;      // t E d_X(f(Z_1), f(Z_0))^p
  double graph_rhs = 0;       // t E d(Z_1, Z_0)^p
  double upper = 0;           // t, the final upper bound with M_p = 1
  double rho_full = 0;        // E rho(d(Z_t, Z_0))^p
  double restricted = 0;      // (1/|A|) sum_{x in F} E[rho(d(Z_t, Z_0))^p | Z_0 = x]
  double free_expectation = 0;  // E rho(d(W_t, e))^p from the exact free-walk law
  double lower = 0;           // |F|/|A| * free_expectation

  std::optional<double> threshold;        // c t^beta, when supplied
  std::optional<double> tail_probability;  // Pr(d(W_t, e) >= threshold)
  std::optional<double> tail_bound;        // rho(threshold)^p * tail_probability
  std::optional<double> final_bound;       // tail_probability / (1 + epsilon) * rho(threshold)^p

  bool holds = false;
  std::vector<std::string> violations;
};

/// Exact finite replay of the amenable-group argument: build the delayed walk
/// on the fattened set and evaluate every term of the inequality chain
/// final_bound <= lower = restricted <= rho_full <= markov_lhs <= markov_rhs
/// <= graph_rhs <= upper. Requires p in [1, 2] (constant-1 Markov type of
/// Euclidean targets), a 1-Lipschitz embedding, rho nondecreasing on the
/// attained distances and rho(d(x,y)) <= |f(x) - f(y)| on attained pairs.
template <typename Vertex>
ReplayReport proposition_replay(const std::vector<Vertex>& core, Int t,
                                const std::function<Eigen::VectorXd(const Vertex&)>& embedding,
                                const std::function<double(double)>& rho, double p,
                                const CayleyHost<Vertex>& host, std::optional<double> threshold = std::nullopt) {
  if (!(p >= 1.0 && p <= 2.0)) throw ValidationError("replay requires p in [1, 2]");
  if (t < 0) throw ValidationError("t must be nonnegative");
  constexpr double tol = 1e-12;

  ReplayReport rep;
  rep.t = t;
  rep.p = p;
  rep.threshold = threshold;
  const auto fat = folner_fatten(core, t, host);
  rep.core_size = fat.core_size;
  rep.fattened_size = fat.vertices.size();
  rep.epsilon = fat.ratio();
  rep.upper = static_cast<double>(t);

  const SubsetWalkSpec<Vertex> spec{host, fat.vertices};
  const auto chain = delayed_walk(spec);
  chain.validate();
  const auto n = chain.size();

  PointEmbedding<double> emb;
  {
    const Eigen::VectorXd first = embedding(fat.vertices.front());
    emb.points.resize(n, first.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd v = embedding(fat.vertices[static_cast<std::size_t>(i)]);
      if (v.size() != first.size()) throw ValidationError("embedding dimension varies between vertices");
      emb.points.row(i) = v.transpose();
    }
    emb.validate(n);
  }
  const auto& a = chain.transition();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || a(i, j) == 0.0) continue;
      const double len = (emb.points.row(i) - emb.points.row(j)).norm();
      if (len > 1.0 + tol) {
        throw ValidationError("embedding is not 1-Lipschitz on edge " +
                              host.describe(fat.vertices[static_cast<std::size_t>(i)]) + " -- " +
                              host.describe(fat.vertices[static_cast<std::size_t>(j)]));
      }
    }
  }

  const auto law = walk_distance_law(host, t);
  const Eigen::MatrixXd power = transition_power(chain, t);
  std::map<double, double> rho_samples;  // argument -> rho(argument), attained distances only
  auto rho_of = [&](Int d) {
    const double x = static_cast<double>(d);
    return rho_samples.try_emplace(x, rho(x)).first->second;
  };
  for (const auto& [d, pr] : law) rho_of(d);
  Eigen::MatrixXd graph_dist = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd rho_pow = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (power(i, j) == 0.0 && a(i, j) == 0.0) continue;
      const auto& x = fat.vertices[static_cast<std::size_t>(i)];
      const auto& y = fat.vertices[static_cast<std::size_t>(j)];
      const Int d = host.distance(x, y);
      graph_dist(i, j) = std::pow(static_cast<double>(d), p);
      if (power(i, j) != 0.0) {
        const double r = rho_of(d);
        const double gap = (emb.points.row(i) - emb.points.row(j)).norm();
        if (r > gap + tol) {
          throw ValidationError("rho exceeds the embedded distance on pair " + host.describe(x) + " -- " +
                                host.describe(y));
        }
        rho_pow(i, j) = std::pow(r, p);
      }
    }
  }
  if (threshold) rho_samples.try_emplace(*threshold, rho(*threshold));
  for (auto it = rho_samples.begin(); std::next(it) != rho_samples.end(); ++it) {
    if (std::next(it)->second < it->second - tol) {
      throw ValidationError("rho decreases between arguments " + std::to_string(it->first) + " and " +
                            std::to_string(std::next(it)->first));
    }
  }

  const auto& pi = chain.pi();
  const auto dist = pairwise_distance_power(emb, p);
  rep.markov_lhs = weighted_expectation<double>(pi, power, dist);
  rep.markov_rhs = static_cast<double>(t) * weighted_expectation<double>(pi, a, dist);
  rep.graph_rhs = static_cast<double>(t) * weighted_expectation<double>(pi, a, graph_dist);
  rep.rho_full = weighted_expectation<double>(pi, power, rho_pow);
  CompensatedSum<double> restricted;
  for (std::size_t i = 0; i < fat.core_size; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    CompensatedSum<double> acc;
    for (Eigen::Index j = 0; j < n; ++j) acc += power(row, j) * rho_pow(row, j);
    restricted += acc.value();
  }
  rep.restricted = restricted.value() / static_cast<double>(n);
  CompensatedSum<double> free;
  for (const auto& [d, pr] : law) free += pr * std::pow(rho_samples.at(static_cast<double>(d)), p);
  rep.free_expectation = free.value();
  rep.lower = static_cast<double>(rep.core_size) / static_cast<double>(n) * rep.free_expectation;

  if (threshold) {
    double tail = 0;
    for (const auto& [d, pr] : law) {
      if (static_cast<double>(d) >= *threshold) tail += pr;
    }
    const double r = std::pow(rho_samples.at(*threshold), p);
    rep.tail_probability = tail;
    rep.tail_bound = r * tail;
    rep.final_bound = tail / (1.0 + rep.epsilon) * r;
  }

  auto check = [&](bool ok, const std::string& what) {
    if (!ok) rep.violations.push_back(what);
  };
  constexpr double slack = kStepTolerance;
  if (rep.final_bound) check(*rep.final_bound <= rep.lower + slack, "final_bound <= lower");
  if (rep.tail_bound) check(*rep.tail_bound <= rep.free_expectation + slack, "tail_bound <= free_expectation");
  check(std::abs(rep.lower - rep.restricted) <= slack, "lower == restricted");
  check(rep.restricted <= rep.rho_full + slack, "restricted <= rho_full");
  check(rep.rho_full <= rep.markov_lhs + slack, "rho_full <= markov_lhs");
  check(rep.markov_lhs <= rep.markov_rhs + slack, "markov_lhs <= markov_rhs");
  check(rep.markov_rhs <= rep.graph_rhs + slack, "markov_rhs <= graph_rhs");
  check(rep.graph_rhs <= rep.upper + slack, "graph_rhs <= upper");
  check(rep.lower <= rep.upper + slack, "lower <= upper");
  rep.holds = rep.violations.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Bound calculator

struct Rational {
  Int num = 0;
  Int den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// min(1, 1 / (2 beta)) for beta in (0, 1].
double alpha_upper(double beta);
/// Same bound for a rational beta, reduced exactly.
Rational alpha_upper(Rational beta);

struct IteratedRow {
  int k = 0;
  Rational beta;   // 1 - 2^-k
  Rational bound;  // 1 / (2 - 2^(1-k))
};

IteratedRow iterated_wreath_row(int k);

struct BoundSides {
  double lhs = 0;  // rho(c t^beta)
  double rhs = 0;  // M delta^(-1/p) t^(1/p)
};

BoundSides proposition_bound(double rho_value, double m, double delta, double p, Int t);

}  // namespace wreath
