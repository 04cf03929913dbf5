#pragma once

// JSON network documents:
//   {schema_version: 1,
//    meta: {k, d, T, seed, nodes_per_type, generator_params},
//    blocks: [{type_a, type_b, n, counts}],
//    adjacency?: [{t, edges: [["<type>:<index>", "<type>:<index>"], ...]}],
//    truth?: {blocks: [{type_a, type_b, states, densities}]}}
// Doubles are written in shortest round-trip form, so reading back is exact.

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sdsbm/error.hpp"
#include "sdsbm/network.hpp"

namespace sdsbm {

inline constexpr int kSchemaVersion = 1;

namespace io_detail {

using nlohmann::json;

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

inline void check_version(const json& doc, const std::string& what) {
  const int v = field<int>(doc, "schema_version", what);
  if (v != kSchemaVersion)
    throw ParseError(what + ": unsupported schema_version " + std::to_string(v) + " (expected " +
                     std::to_string(kSchemaVersion) + ")");
}

inline json parse_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based; translate to line/column for the message.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(what + ": malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "': file not found or unreadable");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ValidationError("write to '" + path + "' failed");
}

inline NodeId parse_node(const json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": node id must be a string '<type>:<index>'");
  const auto s = j.get<std::string>();
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument("no colon");
    std::size_t used_a = 0, used_b = 0;
    const std::string ta = s.substr(0, colon), ib = s.substr(colon + 1);
    NodeId id{std::stoi(ta, &used_a), std::stoi(ib, &used_b)};
    if (used_a != ta.size() || used_b != ib.size()) throw std::invalid_argument("trailing");
    return id;
  } catch (const std::exception&) {
    throw ParseError(where + ": bad node id '" + s + "'");
  }
}

}  // namespace io_detail

inline nlohmann::json to_json(const DynamicNetwork& net) {
  using nlohmann::json;
  json gen = {{"m0", net.meta.gen.m0},
              {"period_offsets", net.meta.gen.period_offsets},
              {"q_m", net.meta.gen.noise.q_m},
              {"q_s", net.meta.gen.noise.q_s},
              {"r", net.meta.gen.noise.r},
              {"adjacency", net.meta.gen.adjacency}};
  gen["block_n"] = net.meta.gen.block_n ? json(*net.meta.gen.block_n) : json(nullptr);

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["meta"] = {{"k", net.meta.k},
                 {"d", net.meta.d},
                 {"T", net.meta.T},
                 {"seed", net.meta.seed},
                 {"nodes_per_type", net.meta.nodes_per_type},
                 {"generator_params", gen}};
  json blocks = json::array();
  for (const auto& b : net.blocks)
    blocks.push_back({{"type_a", b.pair.a}, {"type_b", b.pair.b}, {"n", b.n}, {"counts", b.counts}});
  doc["blocks"] = std::move(blocks);

  if (net.adjacency) {
    json adj = json::array();
    for (const auto& snap : *net.adjacency) {
      json edges = json::array();
      for (const auto& e : snap.edges) edges.push_back({e.u.str(), e.v.str()});
      adj.push_back({{"t", snap.t}, {"edges", std::move(edges)}});
    }
    doc["adjacency"] = std::move(adj);
  }
  if (net.truth) {
    json tb = json::array();
    for (const auto& b : net.truth->blocks)
      tb.push_back({{"type_a", b.pair.a}, {"type_b", b.pair.b}, {"states", b.states}, {"densities", b.densities}});
    doc["truth"] = {{"blocks", std::move(tb)}};
  }
  return doc;
}

inline DynamicNetwork network_from_json(const nlohmann::json& doc) {
  using namespace io_detail;
  check_version(doc, "network");

  DynamicNetwork net;
  const json meta = field<json>(doc, "meta", "network");
  net.meta.k = field<int>(meta, "k", "meta");
  net.meta.d = field<int>(meta, "d", "meta");
  net.meta.T = field<int>(meta, "T", "meta");
  net.meta.seed = field<std::uint64_t>(meta, "seed", "meta");
  if (meta.contains("nodes_per_type")) net.meta.nodes_per_type = field<std::vector<int>>(meta, "nodes_per_type", "meta");
  if (meta.contains("generator_params")) {
    const json gen = field<json>(meta, "generator_params", "meta");
    const std::string w = "meta.generator_params";
    net.meta.gen.m0 = field<double>(gen, "m0", w);
    net.meta.gen.period_offsets = field<std::vector<double>>(gen, "period_offsets", w);
    net.meta.gen.noise = {field<double>(gen, "q_m", w), field<double>(gen, "q_s", w), field<double>(gen, "r", w)};
    net.meta.gen.adjacency = field<bool>(gen, "adjacency", w);
    if (gen.contains("block_n") && !gen["block_n"].is_null()) net.meta.gen.block_n = field<long>(gen, "block_n", w);
  }

  const json blocks = field<json>(doc, "blocks", "network");
  if (!blocks.is_array()) throw ParseError("network: 'blocks' must be an array");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    std::string where = "blocks[" + std::to_string(i) + "]";
    BlockSeries b;
    b.pair = {field<int>(blocks[i], "type_a", where), field<int>(blocks[i], "type_b", where)};
    where += " " + b.pair.str();
    b.n = field<long>(blocks[i], "n", where);
    b.counts = field<std::vector<long>>(blocks[i], "counts", where);
    net.blocks.push_back(std::move(b));
  }

  if (doc.contains("adjacency")) {
    const json& adj = doc["adjacency"];
    if (!adj.is_array()) throw ParseError("network: 'adjacency' must be an array");
    std::vector<Snapshot> snaps;
    for (std::size_t i = 0; i < adj.size(); ++i) {
      const std::string where = "adjacency[" + std::to_string(i) + "]";
      Snapshot s;
      s.t = field<int>(adj[i], "t", where);
      const json edges = field<json>(adj[i], "edges", where);
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const std::string ew = where + ".edges[" + std::to_string(e) + "]";
        if (!edges[e].is_array() || edges[e].size() != 2) throw ParseError(ew + ": edge must be a pair of node ids");
        s.edges.push_back({parse_node(edges[e][0], ew), parse_node(edges[e][1], ew)});
      }
      snaps.push_back(std::move(s));
    }
    net.adjacency = std::move(snaps);
  }

  if (doc.contains("truth")) {
    const json tb = field<json>(doc["truth"], "blocks", "truth");
    Truth truth;
    for (std::size_t i = 0; i < tb.size(); ++i) {
      std::string where = "truth.blocks[" + std::to_string(i) + "]";
      BlockTruth b;
      b.pair = {field<int>(tb[i], "type_a", where), field<int>(tb[i], "type_b", where)};
      where += " " + b.pair.str();
      b.states = field<std::vector<std::vector<double>>>(tb[i], "states", where);
      b.densities = field<std::vector<double>>(tb[i], "densities", where);
      if (static_cast<int>(b.states.size()) != net.meta.T || static_cast<int>(b.densities.size()) != net.meta.T)
        throw ParseError(where + ": truth series length differs from T");
      for (const auto& s : b.states)
        if (static_cast<int>(s.size()) != net.meta.d) throw ParseError(where + ": truth state has wrong dimension");
      truth.blocks.push_back(std::move(b));
    }
    net.truth = std::move(truth);
  }

  net.validate();
  return net;
}

inline std::string network_to_string(const DynamicNetwork& net) { return to_json(net).dump() + "\n"; }

inline DynamicNetwork network_from_string(const std::string& text) {
  return network_from_json(io_detail::parse_text(text, "network"));
}

inline void write_network(const DynamicNetwork& net, const std::string& path) {
  io_detail::write_file(path, network_to_string(net));
}

inline DynamicNetwork read_network(const std::string& path) {
  return network_from_json(io_detail::parse_text(io_detail::read_file(path), "network '" + path + "'"));
}

}  // namespace sdsbm
