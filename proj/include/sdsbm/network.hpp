#pragma once

// Typed-node block structure, edge sampling and dynamic network generation.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdsbm/error.hpp"
#include "sdsbm/parallel.hpp"
#include "sdsbm/rng.hpp"
#include "sdsbm/seasonal.hpp"

namespace sdsbm {

/// Unordered pair of node types, stored with a <= b.
struct BlockPair {
  int a = 0;
  int b = 0;

  auto operator<=>(const BlockPair&) const = default;
  bool same_type() const { return a == b; }
  std::string str() const { return "(" + std::to_string(a) + "," + std::to_string(b) + ")"; }
};

/// Node identity: type and index within that type. Serialized as "<type>:<index>".
struct NodeId {
  int type = 0;
  int index = 0;

  auto operator<=>(const NodeId&) const = default;
  std::string str() const { return std::to_string(type) + ":" + std::to_string(index); }
};

struct Edge {
  NodeId u;
  NodeId v;
  bool operator==(const Edge&) const = default;
};

/// All dyads present at one time step (t is 1-based).
struct Snapshot {
  int t = 1;
  std::vector<Edge> edges;
  bool operator==(const Snapshot&) const = default;
};

/// Number of dyads in a block: within a type na(na-1)/2, across types na*nb.
inline long possible_edges(long na, long nb, bool same_type) {
  detail::require(na >= 1 && nb >= 1, "node counts must be >= 1");
  if (same_type) {
    detail::require(na == nb, "same-type block needs equal node counts");
    return na * (na - 1) / 2;
  }
  return na * nb;
}

/// Every unordered type pair including self pairs, lexicographic.
inline std::vector<BlockPair> enumerate_block_pairs(int k) {
  detail::require(k >= 1, "number of types must be >= 1");
  std::vector<BlockPair> out;
  out.reserve(static_cast<std::size_t>(k) * (k + 1) / 2);
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) out.push_back({a, b});
  return out;
}

struct BlockSpec {
  BlockPair pair;
  long n = 1;
  SeasonalState init_state;
  NoiseParams noise;

  void validate() const {
    detail::require(pair.a >= 0 && pair.a <= pair.b, "block " + pair.str() + " must have 0 <= type_a <= type_b");
    detail::require(n >= 1, "block " + pair.str() + " has no possible edges (n = " + std::to_string(n) + ")");
    sdsbm::validate(init_state);
    noise.validate();
  }
};

/// Binomial(n, E) as n Bernoulli trials; consumes exactly n uniforms so that
/// counts and adjacency drawn from equal streams agree.
inline long sample_block_count(double E, long n, RngStream& rng) {
  long count = 0;
  for (long i = 0; i < n; ++i) count += rng.uniform() < E ? 1 : 0;
  return count;
}

/// Independent Bernoulli(E) draws over the block's dyads, as local index
/// pairs (i into type a, j into type b). Same-type blocks use i < j only.
/// Dyad order: i outer, j inner.
inline std::vector<std::pair<int, int>> sample_block_adjacency(double E, int na, int nb, bool same_type,
                                                               RngStream& rng) {
  possible_edges(na, nb, same_type);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < na; ++i) {
    for (int j = same_type ? i + 1 : 0; j < nb; ++j) {
      if (rng.uniform() < E) edges.emplace_back(i, j);
    }
  }
  return edges;
}

/// Parameters shared by all blocks of a generated network. Recorded verbatim
/// in the network file so a run can be reproduced.
struct GeneratorParams {
  double m0 = 0.5;
  std::vector<double> period_offsets;
  NoiseParams noise;
  std::optional<long> block_n;  // direct n override for every block
  bool adjacency = false;

  bool operator==(const GeneratorParams&) const = default;
};

struct NetworkConfig {
  int k = 3;
  std::vector<int> nodes_per_type;  // optional when gen.block_n is set
  int d = 8;
  int T = 80;
  std::uint64_t seed = 0;
  GeneratorParams gen;
  /// Explicit block list. Empty means all k(k+1)/2 pairs built from `gen`.
  std::vector<BlockSpec> blocks;
};

/// Observed count series for one block.
struct BlockSeries {
  BlockPair pair;
  long n = 1;
  std::vector<long> counts;  // counts[t-1] = w_t
  bool operator==(const BlockSeries&) const = default;
};

struct BlockTruth {
  BlockPair pair;
  std::vector<std::vector<double>> states;  // T x d, (bias, offsets...)
  std::vector<double> densities;            // T
  bool operator==(const BlockTruth&) const = default;
};

struct Truth {
  std::vector<BlockTruth> blocks;
  bool operator==(const Truth&) const = default;

  const BlockTruth& at(const BlockPair& p) const {
    for (const auto& b : blocks)
      if (b.pair == p) return b;
    throw ValidationError("no truth recorded for block " + p.str());
  }
};

struct NetworkMeta {
  int k = 1;
  int d = 2;
  int T = 1;
  std::uint64_t seed = 0;
  std::vector<int> nodes_per_type;
  GeneratorParams gen;
  bool operator==(const NetworkMeta&) const = default;
};

struct DynamicNetwork {
  NetworkMeta meta;
  std::vector<BlockSeries> blocks;
  std::optional<std::vector<Snapshot>> adjacency;
  std::optional<Truth> truth;

  bool operator==(const DynamicNetwork&) const = default;

  void validate() const {
    detail::require(meta.T >= 1, "network must have T >= 1");
    for (const auto& b : blocks) {
      detail::require(b.n >= 1, "block " + b.pair.str() + " has n < 1");
      detail::require(static_cast<int>(b.counts.size()) == meta.T,
                      "block " + b.pair.str() + " has " + std::to_string(b.counts.size()) + " counts, expected T = " +
                          std::to_string(meta.T));
      for (std::size_t t = 0; t < b.counts.size(); ++t) {
        if (b.counts[t] < 0 || b.counts[t] > b.n)
          throw ValidationError("block " + b.pair.str() + " count w_" + std::to_string(t + 1) + " = " +
                                std::to_string(b.counts[t]) + " outside [0, " + std::to_string(b.n) + "]");
      }
    }
  }
};

/// Blocks to generate: the explicit list if given, else every pair with the
/// shared generator parameters.
inline std::vector<BlockSpec> resolve_blocks(const NetworkConfig& cfg) {
  if (!cfg.blocks.empty()) return cfg.blocks;
  const SeasonalState init = init_state(cfg.gen.m0, cfg.gen.period_offsets);
  std::vector<BlockSpec> out;
  for (const BlockPair& p : enumerate_block_pairs(cfg.k)) {
    long n = 0;
    if (cfg.gen.block_n) {
      n = *cfg.gen.block_n;
    } else {
      detail::require(static_cast<int>(cfg.nodes_per_type.size()) == cfg.k,
                      "need nodes_per_type for all " + std::to_string(cfg.k) + " types or a block n override");
      n = possible_edges(cfg.nodes_per_type[p.a], cfg.nodes_per_type[p.b], p.same_type());
    }
    out.push_back({p, n, init, cfg.gen.noise});
  }
  return out;
}

inline void validate(const NetworkConfig& cfg) {
  detail::require(cfg.k >= 1, "k must be >= 1");
  detail::require(cfg.T >= 1, "T must be >= 1");
  detail::require(cfg.d >= 2, "period d must be >= 2");
  for (int c : cfg.nodes_per_type) detail::require(c >= 1, "every type needs at least one node");
  if (cfg.gen.adjacency)
    detail::require(static_cast<int>(cfg.nodes_per_type.size()) == cfg.k, "adjacency output needs nodes_per_type");
}

/// Sample a dynamic network with its ground truth. Each block draws from its
/// own stream keyed by (seed, type_a, type_b), so the result does not depend
/// on which other blocks are generated or on thread scheduling.
inline DynamicNetwork generate(const NetworkConfig& cfg) {
  validate(cfg);
  const std::vector<BlockSpec> specs = resolve_blocks(cfg);
  for (const auto& s : specs) {
    s.validate();
    detail::require(s.init_state.period() == cfg.d, "block " + s.pair.str() + " period differs from d");
    detail::require(s.pair.b < cfg.k, "block " + s.pair.str() + " references a type >= k");
    if (cfg.gen.adjacency) {
      const long expect = possible_edges(cfg.nodes_per_type[s.pair.a], cfg.nodes_per_type[s.pair.b], s.pair.same_type());
      detail::require(expect == s.n, "block " + s.pair.str() + " n = " + std::to_string(s.n) +
                                         " is inconsistent with node counts (" + std::to_string(expect) +
                                         "); adjacency output is not possible");
    }
  }

  const auto T = static_cast<std::size_t>(cfg.T);
  std::vector<BlockSeries> series(specs.size());
  std::vector<BlockTruth> truth(specs.size());
  // per block, per t: local dyads
  std::vector<std::vector<std::vector<std::pair<int, int>>>> local_edges(specs.size());

  parallel_for(specs.size(), [&](std::size_t i) {
    const BlockSpec& spec = specs[i];
    RngStream rng = RngStream::derive(cfg.seed, static_cast<std::uint64_t>(spec.pair.a),
                                      static_cast<std::uint64_t>(spec.pair.b));
    series[i] = {spec.pair, spec.n, std::vector<long>(T)};
    truth[i].pair = spec.pair;
    truth[i].states.reserve(T);
    truth[i].densities.reserve(T);
    if (cfg.gen.adjacency) local_edges[i].resize(T);

    SeasonalState state = spec.init_state;
    for (std::size_t t = 0; t < T; ++t) {
      state = step_state(state, spec.noise, rng);
      const double E = sample_density(process_value(state), spec.noise.r, rng);
      if (cfg.gen.adjacency) {
        const int na = cfg.nodes_per_type[spec.pair.a];
        const int nb = cfg.nodes_per_type[spec.pair.b];
        local_edges[i][t] = sample_block_adjacency(E, na, nb, spec.pair.same_type(), rng);
        series[i].counts[t] = static_cast<long>(local_edges[i][t].size());
      } else {
        series[i].counts[t] = sample_block_count(E, spec.n, rng);
      }
      truth[i].states.push_back(state.as_vector());
      truth[i].densities.push_back(E);
    }
  });

  DynamicNetwork net;
  net.meta = {cfg.k, cfg.d, cfg.T, cfg.seed, cfg.nodes_per_type, cfg.gen};
  net.blocks = std::move(series);
  net.truth = Truth{std::move(truth)};
  if (cfg.gen.adjacency) {
    std::vector<Snapshot> snaps(T);
    for (std::size_t t = 0; t < T; ++t) {
      snaps[t].t = static_cast<int>(t) + 1;
      for (std::size_t i = 0; i < specs.size(); ++i) {
        const BlockPair p = specs[i].pair;
        for (auto [u, v] : local_edges[i][t]) snaps[t].edges.push_back({{p.a, u}, {p.b, v}});
      }
    }
    net.adjacency = std::move(snaps);
  }
  return net;
}

/// Per-block edge counts recomputed from adjacency snapshots. Result rows
/// follow `pairs`; columns are t = 1..T. Edges whose type pair is not listed
/// are ignored.
inline std::vector<std::vector<long>> block_counts_from_adjacency(const std::vector<Snapshot>& snapshots,
                                                                  const std::vector<int>& nodes_per_type,
                                                                  const std::vector<BlockPair>& pairs, int T) {
  std::map<BlockPair, std::size_t> row;
  for (std::size_t i = 0; i < pairs.size(); ++i) row[pairs[i]] = i;
  std::vector<std::vector<long>> counts(pairs.size(), std::vector<long>(static_cast<std::size_t>(T), 0));

  auto check = [&](const NodeId& id) {
    const bool known = id.type >= 0 && id.type < static_cast<int>(nodes_per_type.size()) && id.index >= 0 &&
                       id.index < nodes_per_type[id.type];
    if (!known) throw ValidationError("unknown node id " + id.str());
  };
  for (const Snapshot& snap : snapshots) {
    detail::require(snap.t >= 1 && snap.t <= T, "snapshot time " + std::to_string(snap.t) + " outside 1..T");
    for (const Edge& e : snap.edges) {
      check(e.u);
      check(e.v);
      const BlockPair p{std::min(e.u.type, e.v.type), std::max(e.u.type, e.v.type)};
      if (auto it = row.find(p); it != row.end()) ++counts[it->second][snap.t - 1];
    }
  }
  return counts;
}

}  // namespace sdsbm
