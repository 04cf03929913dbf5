#pragma once

// Fit documents:
//   {schema_version: 1,
//    blocks: [{type_a, type_b, q_m, q_s, r, loglik_trace, converged, iters,
//              smoothed_means, density_estimates}
//             | {type_a, type_b, error, numerical_failure}]}

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdsbm/em.hpp"
#include "sdsbm/network_io.hpp"

namespace sdsbm {

/// Flattened fit as stored on disk.
struct StoredFit {
  BlockPair pair;
  double q_m = 0.0, q_s = 0.0, r = 0.0;
  std::vector<double> loglik_trace;
  bool converged = false;
  int iters = 0;
  std::vector<std::vector<double>> smoothed_means;
  std::vector<double> density_estimates;
  std::string error;
  bool numerical_failure = false;

  bool ok() const { return error.empty(); }
};

inline StoredFit to_stored(const BlockFit& f) {
  StoredFit s;
  s.pair = f.pair;
  if (!f.result) {
    s.error = f.error;
    s.numerical_failure = f.numerical_failure;
    return s;
  }
  const FitResult& r = *f.result;
  s.q_m = r.q_m;
  s.q_s = r.q_s;
  s.r = r.r;
  for (const auto& it : r.trace) s.loglik_trace.push_back(it.loglik);
  s.converged = r.converged;
  s.iters = r.iterations;
  for (const Vector& m : r.smoothed_means()) s.smoothed_means.emplace_back(m.data(), m.data() + m.size());
  s.density_estimates = r.density_estimates();
  return s;
}

inline nlohmann::json fits_to_json(const std::vector<BlockFit>& fits) {
  using nlohmann::json;
  json blocks = json::array();
  for (const BlockFit& f : fits) {
    const StoredFit s = to_stored(f);
    json b = {{"type_a", s.pair.a}, {"type_b", s.pair.b}};
    if (!s.ok()) {
      b["error"] = s.error;
      b["numerical_failure"] = s.numerical_failure;
    } else {
      b["q_m"] = s.q_m;
      b["q_s"] = s.q_s;
      b["r"] = s.r;
      b["loglik_trace"] = s.loglik_trace;
      b["converged"] = s.converged;
      b["iters"] = s.iters;
      b["smoothed_means"] = s.smoothed_means;
      b["density_estimates"] = s.density_estimates;
    }
    blocks.push_back(std::move(b));
  }
  return {{"schema_version", kSchemaVersion}, {"blocks", std::move(blocks)}};
}

inline std::vector<StoredFit> fits_from_json(const nlohmann::json& doc) {
  using namespace io_detail;
  check_version(doc, "fit");
  const json blocks = field<json>(doc, "blocks", "fit");
  std::vector<StoredFit> out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    std::string where = "blocks[" + std::to_string(i) + "]";
    StoredFit s;
    s.pair = {field<int>(blocks[i], "type_a", where), field<int>(blocks[i], "type_b", where)};
    if (blocks[i].contains("error")) {
      s.error = field<std::string>(blocks[i], "error", where);
      s.numerical_failure = blocks[i].value("numerical_failure", false);
    } else {
      s.q_m = field<double>(blocks[i], "q_m", where);
      s.q_s = field<double>(blocks[i], "q_s", where);
      s.r = field<double>(blocks[i], "r", where);
      s.loglik_trace = field<std::vector<double>>(blocks[i], "loglik_trace", where);
      s.converged = field<bool>(blocks[i], "converged", where);
      s.iters = field<int>(blocks[i], "iters", where);
      s.smoothed_means = field<std::vector<std::vector<double>>>(blocks[i], "smoothed_means", where);
      s.density_estimates = field<std::vector<double>>(blocks[i], "density_estimates", where);
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_fits(const std::vector<BlockFit>& fits, const std::string& path) {
  io_detail::write_file(path, fits_to_json(fits).dump() + "\n");
}

inline std::vector<StoredFit> read_fits(const std::string& path) {
  return fits_from_json(io_detail::parse_text(io_detail::read_file(path), "fit '" + path + "'"));
}

}  // namespace sdsbm
