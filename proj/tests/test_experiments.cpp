#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "sdsbm/experiments.hpp"

using namespace sdsbm;

namespace {

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

// All-zero density: counts are exactly 0 and carry no sampling noise.
NetworkConfig silent_config(std::uint64_t seed) {
  NetworkConfig cfg = reference_config(seed);
  cfg.gen.m0 = 0.0;
  cfg.gen.period_offsets.assign(8, 0.0);
  cfg.gen.noise = {0.0, 0.0, 0.0};
  return cfg;
}

ExperimentSpec small_spec(SweepKind kind, std::vector<double> values, std::size_t seeds) {
  ExperimentSpec spec;
  spec.kind = kind;
  spec.base = reference_config();
  spec.base.T = 24;
  spec.fit.max_iters = 15;
  spec.seeds = seed_range(100, seeds);
  spec.sweep_values = std::move(values);
  return spec;
}

}  // namespace

TEST(MseStates, Examples) {
  const std::vector<std::vector<double>> a{{0.5, 0.1}, {0.2, -0.3}};
  EXPECT_EQ(mse_states(a, a), 0.0);
  const std::vector<std::vector<double>> zeros(3, std::vector<double>(4, 0.0)), ones(3, std::vector<double>(4, 1.0));
  EXPECT_EQ(mse_states(zeros, ones), 1.0);
  EXPECT_EQ(mse_states({{1, 0}, {0, 1}}, {{0, 0}, {0, 0}}), 0.5);
}

TEST(MseStates, MismatchRejected) {
  EXPECT_THROW(mse_states({{1, 0}}, {{1, 0}, {0, 0}}), ValidationError);
  EXPECT_THROW(mse_states({{1, 0}}, {{1}}), ValidationError);
}

TEST(Recovery, CsvShape) {
  NetworkConfig cfg = reference_config(5);
  cfg.T = 20;
  FitConfig fit;
  fit.max_iters = 10;
  const auto res = run_recovery(cfg, {0, 1}, fit);
  std::ostringstream os;
  write_recovery_csv(res, os);
  const auto lines = lines_of(os.str());
  ASSERT_EQ(lines.size(), 21u);
  EXPECT_EQ(lines[0], "t,truth,observed,estimate,lo95,hi95");
  EXPECT_EQ(lines[1].substr(0, 2), "1,");
  for (const auto& row : res.rows) EXPECT_LE(row.lo95, row.hi95);
}

TEST(Recovery, MissingTruthRejected) {
  auto net = generate(reference_config(1));
  net.truth.reset();
  EXPECT_THROW(recovery_from_network(net, {0, 0}, FitConfig{}), ValidationError);
}

TEST(Recovery, UnknownBlockRejected) {
  NetworkConfig cfg = reference_config(1);
  cfg.T = 10;
  EXPECT_THROW(run_recovery(cfg, {0, 3}, FitConfig{}), ValidationError);
}

TEST(Recovery, CoverageOnReferenceConfig) {
  const auto res = run_recovery(reference_config(3), {0, 1}, FitConfig{});
  EXPECT_GE(res.coverage_after_first_period(8), 0.9);
}

TEST(Recovery, SilentBlockRecoveredExactly) {
  const auto res = run_recovery(silent_config(2), {1, 2}, FitConfig{});
  for (const auto& row : res.rows) {
    EXPECT_EQ(row.observed, 0.0);
    if (row.t > 3 * 8) EXPECT_NEAR(row.estimate, row.truth, 1e-6) << "t=" << row.t;
  }
}

TEST(Sweep, SingleMultipleRowCount) {
  const auto res = run_period_sweep(small_spec(SweepKind::Periods, {2}, 3));
  EXPECT_EQ(res.rows.size(), 3u * 6u + 6u);
  int avg = 0;
  for (const auto& r : res.rows) {
    avg += r.seed ? 0 : 1;
    EXPECT_TRUE(std::isfinite(r.mse));
    EXPECT_GE(r.mse, 0.0);
  }
  EXPECT_EQ(avg, 6);
}

TEST(Sweep, AverageRowIsSeedMean) {
  const auto res = run_noise_sweep(small_spec(SweepKind::Noise, {1e-3}, 2));
  ASSERT_EQ(res.rows.size(), 18u);
  for (std::size_t i = 0; i < res.rows.size(); i += 3) {
    EXPECT_EQ(res.rows[i].block, res.rows[i + 2].block);
    EXPECT_FALSE(res.rows[i + 2].seed.has_value());
    EXPECT_DOUBLE_EQ(res.rows[i + 2].mse, (res.rows[i].mse + res.rows[i + 1].mse) / 2.0);
    EXPECT_LT(*res.rows[i].seed, *res.rows[i + 1].seed);
  }
}

TEST(Sweep, CellConfig) {
  const auto per = small_spec(SweepKind::Periods, {3}, 1);
  EXPECT_EQ(sweep_cell_config(per, 3, 9).T, 24);
  EXPECT_EQ(sweep_cell_config(per, 3, 9).seed, 9u);
  const auto noi = small_spec(SweepKind::Noise, {0.02}, 1);
  EXPECT_EQ(sweep_cell_config(noi, 0.02, 1).gen.noise.r, 0.02);
  EXPECT_EQ(sweep_cell_config(noi, 0.02, 1).T, 24);
}

TEST(Sweep, CsvDeterministic) {
  const auto spec = small_spec(SweepKind::Noise, {5e-4, 5e-3}, 2);
  std::ostringstream a, b;
  write_sweep_csv(run_sweep(spec), a);
  write_sweep_csv(run_sweep(spec), b);
  EXPECT_EQ(a.str(), b.str());
  const auto lines = lines_of(a.str());
  EXPECT_EQ(lines[0], "block_a,block_b,sweep_value,seed,mse");
  EXPECT_EQ(lines.size(), 1u + 6u * 2u * 3u);
  EXPECT_NE(lines[3].find(",avg,"), std::string::npos) << lines[3];
}

TEST(Sweep, SpecValidation) {
  auto spec = small_spec(SweepKind::Periods, {3, 2}, 1);
  EXPECT_THROW(run_sweep(spec), ValidationError);
  spec.sweep_values = {2.5};
  EXPECT_THROW(run_sweep(spec), ValidationError);
  spec.sweep_values = {2};
  spec.seeds.clear();
  EXPECT_THROW(run_sweep(spec), ValidationError);
}

TEST(Sweep, SilentNetworkHasNegligibleMse) {
  ExperimentSpec spec = small_spec(SweepKind::Periods, {2, 3}, 1);
  spec.base = silent_config(0);
  spec.fit = FitConfig{};
  const auto res = run_sweep(spec);
  for (const auto& r : res.rows) EXPECT_LT(r.mse, 1e-10) << r.block.str() << " " << r.sweep_value;
}

TEST(Defaults, Grids) {
  EXPECT_EQ(default_period_multiples(), (std::vector<double>{2, 3, 4, 5, 6, 7, 8, 9, 10}));
  EXPECT_EQ(default_noise_grid(), (std::vector<double>{5e-4, 1e-3, 5e-3, 1e-2, 5e-2}));
  EXPECT_EQ(seed_range(4, 3), (std::vector<std::uint64_t>{4, 5, 6}));
  const auto cfg = reference_config();
  EXPECT_EQ(cfg.k, 3);
  EXPECT_EQ(cfg.d, 8);
  EXPECT_EQ(cfg.T, 80);
  EXPECT_EQ(*cfg.gen.block_n, 1000);
}

TEST(Trend, Helpers) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_NEAR(pearson(x, {2, 4, 6, 8}), 1.0, 1e-12);
  EXPECT_NEAR(pearson(x, {8, 6, 4, 2}), -1.0, 1e-12);
  EXPECT_NEAR(ls_slope(x, {1, 3, 5, 7}), 2.0, 1e-12);
  EXPECT_TRUE(strictly_increasing({1, 2, 3}));
  EXPECT_FALSE(strictly_increasing({1, 2, 2}));
  EXPECT_THROW(pearson({1}, {1}), ValidationError);
}

TEST(Trend, ChecksOnSyntheticResults) {
  SweepResult per{SweepKind::Periods, {2, 3, 4}, {}};
  for (int i = 0; i < 3; ++i) per.rows.push_back({{0, 0}, per.sweep_values[i], std::nullopt, 1.0 / (i + 1)});
  EXPECT_TRUE(check_period_trend(per)[0].pass);
  EXPECT_FALSE(check_period_trend(per, -0.999)[0].pass);

  SweepResult noi{SweepKind::Noise, {1e-3, 1e-2, 1e-1}, {}};
  for (double v : {0.1, 0.2, 0.15}) noi.rows.push_back({{0, 1}, 0.0, std::nullopt, v});
  const auto c = check_noise_trend(noi);
  EXPECT_FALSE(c[0].monotone);
  EXPECT_FALSE(c[0].pass);
}
