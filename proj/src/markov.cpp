#include "wreath/markov.hpp"

#include <memory>
#include <numeric>
#include <random>

#include "wreath/word_metric.hpp"

namespace wreath {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

IntMatrix random_weighted_graph(Int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("chain needs at least one state");
  auto rng = seeded_engine(seed, 0x636861696eULL);
  std::uniform_int_distribution<Int> weight(1, 100);
  std::bernoulli_distribution extra(0.3);
  std::bernoulli_distribution loop(0.5);
  IntMatrix w = IntMatrix::Zero(n, n);
  for (Int i = 1; i < n; ++i) {
    std::uniform_int_distribution<Int> parent(0, i - 1);
    const Int j = parent(rng);
    w(i, j) = w(j, i) = weight(rng);
  }
  for (Int i = 0; i < n; ++i) {
    for (Int j = i + 1; j < n; ++j) {
      if (w(i, j) == 0 && extra(rng)) w(i, j) = w(j, i) = weight(rng);
    }
    if (loop(rng) || n == 1) w(i, i) = weight(rng);
  }
  return w;
}

FiniteChain<double> chain_from_weights(const IntMatrix& weights) {
  const auto n = weights.rows();
  if (n == 0 || weights.cols() != n) throw ValidationError("weight matrix must be square and nonempty");
  if (weights != weights.transpose()) throw ValidationError("weight matrix must be symmetric");
  if (weights.minCoeff() < 0) throw ValidationError("weights must be nonnegative");
  const Eigen::Matrix<Int, Eigen::Dynamic, 1> degree = weights.rowwise().sum();
  if (degree.minCoeff() <= 0) throw ValidationError("every state needs positive weight");
  const double total = static_cast<double>(degree.sum());
  Eigen::VectorXd pi(n);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pi(i) = static_cast<double>(degree(i)) / total;
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = static_cast<double>(weights(i, j)) / static_cast<double>(degree(i));
  }
  return FiniteChain<double>(std::move(pi), std::move(a));
}

FiniteChain<double> random_reversible_chain(Int n, std::uint64_t seed) {
  return chain_from_weights(random_weighted_graph(n, seed));
}

PointEmbedding<double> random_embedding(Int states, Int dim, std::uint64_t seed) {
  if (states < 1 || dim < 1) throw ValidationError("embedding needs positive size and dimension");
  auto rng = seeded_engine(seed, 0x656d626564ULL);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  PointEmbedding<double> emb;
  emb.points.resize(states, dim);
  for (Eigen::Index i = 0; i < emb.points.rows(); ++i) {
    for (Eigen::Index j = 0; j < emb.points.cols(); ++j) emb.points(i, j) = coord(rng);
  }
  return emb;
}

CayleyHost<Int> integer_host() {
  CayleyHost<Int> h;
  h.name = "z";
  h.degree = 2;
  h.identity = 0;
  h.step = [](const Int& x, std::size_t s) { return s == 0 ? checked::add(x, 1) : checked::sub(x, 1); };
  h.distance = [](const Int& x, const Int& y) { return checked::abs(checked::sub(x, y)); };
  h.ball = [](const Int& x, Int r) {
    std::vector<Int> out;
    for (Int d = -r; d <= r; ++d) out.push_back(checked::add(x, d));
    return out;
  };
  h.describe = [](const Int& x) { return std::to_string(x); };
  return h;
}

CayleyHost<GridPoint> grid_host() {
  CayleyHost<GridPoint> h;
  h.name = "z2";
  h.degree = 4;
  h.step = [](const GridPoint& g, std::size_t s) {
    switch (s) {
      case 0:
        return GridPoint{checked::add(g.x, 1), g.y};
      case 1:
        return GridPoint{checked::sub(g.x, 1), g.y};
      case 2:
        return GridPoint{g.x, checked::add(g.y, 1)};
      default:
        return GridPoint{g.x, checked::sub(g.y, 1)};
    }
  };
  h.distance = [](const GridPoint& a, const GridPoint& b) {
    return checked::add(checked::abs(checked::sub(a.x, b.x)), checked::abs(checked::sub(a.y, b.y)));
  };
  h.ball = [](const GridPoint& c, Int r) {
    std::vector<GridPoint> out;
    for (Int dx = -r; dx <= r; ++dx) {
      const Int rest = r - checked::abs(dx);
      for (Int dy = -rest; dy <= rest; ++dy) out.push_back({c.x + dx, c.y + dy});
    }
    return out;
  };
  h.describe = [](const GridPoint& g) { return "(" + std::to_string(g.x) + "," + std::to_string(g.y) + ")"; };
  return h;
}

CayleyHost<GroupElement> lamplighter_host() {
  CayleyHost<GroupElement> h;
  h.name = "zwrz";
  h.degree = canonical_generators().size();
  h.step = [](const GroupElement& g, std::size_t s) { return step(g, s); };
  h.distance = [](const GroupElement& a, const GroupElement& b) { return distance(a, b).total; };
  auto cache = std::make_shared<std::map<Int, std::vector<GroupElement>>>();
  h.ball = [cache](const GroupElement& c, Int r) {
    auto it = cache->find(r);
    if (it == cache->end()) it = cache->emplace(r, ball_elements(ball(r))).first;
    std::vector<GroupElement> out;
    out.reserve(it->second.size());
    for (const auto& b : it->second) out.push_back(multiply(c, b));
    return out;
  };
  h.describe = [](const GroupElement& g) { return encode(g); };
  return h;
}

std::vector<GroupElement> truncated_lamplighter_box(Int radius, Int max_lamp) {
  if (radius < 0 || max_lamp < 0) throw ValidationError("box parameters must be nonnegative");
  const Int width = 2 * radius + 1;
  const Int base = 2 * max_lamp + 1;
  std::vector<GroupElement> out;
  std::vector<Int> digits(static_cast<std::size_t>(width), 0);
  Int configs = 1;
  for (Int i = 0; i < width; ++i) {
    if (configs > 10'000'000 / base) throw ResourceLimit("truncated box too large");
    configs *= base;
  }
  for (Int k = -radius; k <= radius; ++k) {
    for (Int code = 0; code < configs; ++code) {
      Int c = code;
      std::vector<LampConfig::Entry> entries;
      for (Int i = 0; i < width; ++i) {
        const Int v = c % base - max_lamp;
        c /= base;
        if (v != 0) entries.emplace_back(i - radius, v);
      }
      out.push_back({LampConfig::from_entries(std::move(entries)), k});
    }
  }
  return out;
}

double alpha_upper(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in (0, 1]");
  return std::min(1.0, 1.0 / (2.0 * beta));
}

Rational alpha_upper(Rational beta) {
  if (beta.den <= 0 || beta.num <= 0 || beta.num > beta.den) throw ValidationError("beta must lie in (0, 1]");
  // 1 / (2 num / den) = den / (2 num), capped at 1
  Int num = beta.den;
  Int den = checked::add(beta.num, beta.num);
  if (num >= den) return {1, 1};
  const Int g = std::gcd(num, den);
  return {num / g, den / g};
}

IteratedRow iterated_wreath_row(int k) {
  if (k < 1 || k > 60) throw ValidationError("iterated wreath depth must lie in [1, 60]");
  const Int pow2 = Int{1} << k;
  IteratedRow row;
  row.k = k;
  row.beta = {pow2 - 1, pow2};
  row.bound = alpha_upper(row.beta);
  return row;
}

BoundSides proposition_bound(double rho_value, double m, double delta, double p, Int t) {
  if (!(m > 0)) throw ValidationError("Markov type constant must be positive");
  if (!(delta > 0 && delta <= 1)) throw ValidationError("delta must lie in (0, 1]");
  if (!(p >= 1)) throw ValidationError("p must be >= 1");
  if (t < 1) throw ValidationError("t must be at least 1");
  return {rho_value, m * std::pow(delta, -1.0 / p) * std::pow(static_cast<double>(t), 1.0 / p)};
}

}  // namespace wreath
