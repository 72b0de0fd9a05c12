// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "vrft/closed_loop.hpp"
#include "vrft/plant.hpp"
#include "vrft/regression.hpp"
#include "vrft/solvers.hpp"

using namespace vrft;

namespace {

constexpr int kSeeds = 5;
constexpr double kSigma = 0.05;
constexpr double kAlpha = 0.001;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const TransferFunction& td() {
  static const TransferFunction t = benchmark_reference_model();
  return t;
}

const Signal& step_reference() {
  static const Signal r = eval_reference(default_reference_amplitudes(), kDefaultReferenceDwell);
  return r;
}

Signal uniform_signal(std::size_t n, std::mt19937_64& gen, double amplitude) {
  std::uniform_real_distribution<double> d(-amplitude, amplitude);
  std::vector<double> v(n);
  for (double& x : v) x = d(gen);
  return Signal(std::move(v));
}

Dataset open_loop_data(int plant, std::uint64_t seed, double sigma) {
  InputSpec in;
  in.seed = seed;
  const Signal u = gen_input(in, td());
  return Dataset(u, simulate_plant(builtin_plant(plant), u, {sigma, seed + 1}));
}

LassoOptions design_options() {
  LassoOptions o;
  o.tol = 1e-4;
  o.stopping = StoppingRule::duality_gap;
  o.max_iter = 100000;
  return o;
}

ControllerParams lasso_design(const Dataset& data, const Dictionary& dict) {
  return lasso_cd(build_regression(data, td(), dict), kAlpha, design_options());
}

ClosedLoopResult evaluate(int plant, const ControllerParams& params) {
  Controller c = Controller::from_params(params);
  return simulate_closed_loop(builtin_plant(plant), c, step_reference(), {});
}

// Runs f for seeds 1..kSeeds concurrently, results in seed order.
template <class F>
auto per_seed(F f) {
  std::vector<std::future<decltype(f(std::uint64_t{1}))>> jobs;
  for (std::uint64_t s = 1; s <= kSeeds; ++s) jobs.push_back(std::async(std::launch::async, f, s));
  std::vector<decltype(f(std::uint64_t{1}))> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

double mean(const std::vector<std::size_t>& v) {
  double sum = 0.0;
  for (std::size_t x : v) sum += static_cast<double>(x);
  return sum / static_cast<double>(v.size());
}

Verdict excitation_gain() {
  const double gain = dc_gain(excitation_filter(td()));
  const double a = excitation_filter_gain(td());
  const bool ok = std::abs(gain - 1.0) <= 1e-12 && std::abs(a - 0.05) <= 1e-12;
  return {ok, fmt("dc_gain(F)-1=%.2e a=%.15g", gain - 1.0, a)};
}

Verdict virtual_reference_round_trip() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 gen(seed);
    const Signal r = uniform_signal(500, gen, 10.0);
    const Signal rbar = virtual_reference(td(), filter(td(), r));
    for (std::size_t t = 0; t < rbar.size(); ++t) worst = std::max(worst, std::abs(rbar[t] - r[t]));
  }
  return {worst <= 1e-10, fmt("max|rbar-r|=%.2e over 50 datasets", worst)};
}

Verdict ideal_exactness() {
  double worst = 0.0;
  bool stable = true;
  for (int plant : {1, 2}) {
    Controller c = ideal_controller(plant);
    const auto res = simulate_closed_loop(builtin_plant(plant), c, step_reference(), {});
    stable = stable && res.stable && res.y.size() == 600;
    for (std::size_t t = 0; t < res.y.size(); ++t) worst = std::max(worst, std::abs(res.y[t] - res.y_d[t]));
  }
  return {stable && worst <= 1e-9, fmt("max|y-y_d|=%.2e", worst)};
}

Verdict coefficient_recovery() {
  const auto p = build_regression(open_loop_data(1, 1, 0.0), td(), Dictionary::deadzone(20));
  const auto sol = ols_solve(p);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(20);
  expected[0] = 10.0;
  expected[2] = -7.2;
  expected[12] = 1.2;
  const double err = (sol.rho - expected).cwiseAbs().maxCoeff();
  return {err <= 1e-3, fmt("rho1=%.6f rho3=%.6f rho13=%.6f max err=%.2e", sol.rho[0], sol.rho[2], sol.rho[12], err)};
}

Verdict sparsity_plant1() {
  struct Counts {
    std::size_t dz20, dz400, poly400;
  };
  const auto counts = per_seed([](std::uint64_t s) {
    const Dataset d = open_loop_data(1, s, kSigma);
    return Counts{nonzero_count(lasso_design(d, Dictionary::deadzone(20))),
                  nonzero_count(lasso_design(d, Dictionary::deadzone(400, 200.0, 0.5))),
                  nonzero_count(lasso_design(d, Dictionary::polynomial_odd(400)))};
  });
  std::vector<std::size_t> a, b, c;
  for (const auto& k : counts) {
    a.push_back(k.dz20);
    b.push_back(k.dz400);
    c.push_back(k.poly400);
  }
  const bool ok = mean(a) >= 3 && mean(a) <= 8 && mean(b) >= 20 && mean(b) <= 100 && mean(c) >= 300;
  return {ok, fmt("deadzone m=20 mean %.1f [%s]; deadzone m=400 mean %.1f [%s]; polynomial m=400 mean %.1f [%s]",
                  mean(a), join(a).c_str(), mean(b), join(b).c_str(), mean(c), join(c).c_str())};
}

Verdict sparsity_plant2() {
  const auto counts = per_seed([](std::uint64_t s) {
    const Dataset d = open_loop_data(2, s, kSigma);
    return std::pair{nonzero_count(lasso_design(d, Dictionary::deadzone(20))),
                     nonzero_count(lasso_design(d, Dictionary::deadzone(400, 200.0, 0.5)))};
  });
  std::vector<std::size_t> a, b;
  for (const auto& [x, y] : counts) {
    a.push_back(x);
    b.push_back(y);
  }
  const bool ok = mean(b) >= 25 && mean(b) <= 110 && mean(a) >= 4 && mean(a) <= 14;
  return {ok, fmt("deadzone m=400 mean %.1f [%s]; deadzone m=20 mean %.1f [%s]", mean(b), join(b).c_str(), mean(a),
                  join(a).c_str())};
}

Verdict dictionary_ordering() {
  const auto costs = per_seed([](std::uint64_t s) {
    const Dataset d = open_loop_data(1, s, kSigma);
    const auto dz = evaluate(1, lasso_design(d, Dictionary::deadzone(20)));
    const auto poly = evaluate(1, lasso_design(d, Dictionary::polynomial_odd(20)));
    return std::pair{dz, poly};
  });
  double jdz = 0.0, jpoly = 0.0;
  bool stable = true;
  std::string per;
  for (const auto& [dz, poly] : costs) {
    stable = stable && dz.stable && poly.stable;
    jdz += dz.J / kSeeds;
    jpoly += poly.J / kSeeds;
    per += fmt(" %.3g/%.3g", dz.J, poly.J);
  }
  const double ratio = jdz / jpoly;
  return {stable && ratio <= 0.5, fmt("mean J deadzone %.4g, polynomial %.4g, ratio %.3f, all stable %s; per seed%s", jdz,
                                      jpoly, ratio, stable ? "yes" : "no", per.c_str())};
}

Verdict regularization_stabilizes() {
  const auto outcomes = per_seed([](std::uint64_t s) {
    const Dataset d = open_loop_data(2, s, kSigma);
    const auto p = build_regression(d, td(), Dictionary::deadzone(400, 200.0, 0.5));
    const auto ols = evaluate(2, ols_solve(p));
    const auto lasso = evaluate(2, lasso_cd(p, kAlpha, design_options()));
    return std::pair{ols, lasso};
  });
  int hits = 0;
  std::string per;
  for (const auto& [ols, lasso] : outcomes) {
    hits += (!ols.stable && lasso.stable) ? 1 : 0;
    per += fmt(" [ols %s J=%.3g, lasso %s J=%.3g]", ols.stable ? "stable" : "unstable", ols.J,
               lasso.stable ? "stable" : "unstable", lasso.J);
  }
  return {hits >= 4, fmt("%d of %d seeds with unstable OLS and stable LASSO;%s", hits, kSeeds, per.c_str())};
}

// Small problems drawn from a Gaussian design with a sparse truth.
RegressionProblem small_problem(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Eigen::MatrixXd phi(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) phi(i, j) = d(gen);
  Eigen::VectorXd truth(m);
  for (Eigen::Index j = 0; j < m; ++j) truth[j] = j % 2 == 0 ? d(gen) : 0.0;
  Eigen::VectorXd target = phi * truth;
  for (Eigen::Index i = 0; i < n; ++i) target[i] += 0.3 * d(gen);
  return RegressionProblem{std::move(phi), std::move(target), Eigen::VectorXd::Zero(n),
                           Dictionary::polynomial_odd(static_cast<std::size_t>(m))};
}

// Per-sample objective minimized over a step-h grid on the first two
// coordinates, with a third coordinate (if any) minimized exactly.
double grid_minimum(const RegressionProblem& p, double alpha, double box, double h) {
  const double n = static_cast<double>(p.rows());
  const Eigen::Index m = p.cols();
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  Eigen::Vector3d q = Eigen::Vector3d::Zero();
  g.topLeftCorner(m, m) = p.phi.transpose() * p.phi / n;
  q.head(m) = p.phi.transpose() * p.target / n;
  const double c = 0.5 * p.target.squaredNorm() / n;
  const int steps = static_cast<int>(std::lround(2 * box / h));
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= steps; ++a) {
    const double x = -box + a * h;
    for (int b = 0; b <= (m >= 2 ? steps : 0); ++b) {
      const double y = m >= 2 ? -box + b * h : 0.0;
      const double z = m == 3 ? soft_threshold(q[2] - g(2, 0) * x - g(2, 1) * y, alpha) / g(2, 2) : 0.0;
      const double quad = g(0, 0) * x * x + g(1, 1) * y * y + g(2, 2) * z * z +
                          2.0 * (g(0, 1) * x * y + g(0, 2) * x * z + g(1, 2) * y * z);
      const double f = c - (q[0] * x + q[1] * y + q[2] * z) + 0.5 * quad +
                       alpha * (std::abs(x) + std::abs(y) + std::abs(z));
      best = std::min(best, f);
    }
  }
  return best;
}

Verdict solver_soundness() {
  int monotone_fail = 0, kkt_fail = 0, grid_fail = 0, runs = 0, grids = 0;
  double worst_grid = 0.0;

  LassoOptions o;
  o.record_history = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const RegressionProblem problems[] = {
        small_problem(150, 10, seed), build_regression(open_loop_data(1, seed, kSigma), td(), Dictionary::deadzone(20)),
        build_regression(open_loop_data(2, seed, kSigma), td(), Dictionary::deadzone(400, 200.0, 0.5))};
    for (const auto& p : problems) {
      const auto l = lasso_cd(p, kAlpha, o);
      ++runs;
      const auto& h = l.diagnostics.objective_history;
      for (std::size_t k = 1; k < h.size(); ++k)
        if (h[k] > h[k - 1] + 1e-12 * (1.0 + std::abs(h[k - 1]))) ++monotone_fail;
      if (!l.diagnostics.converged) {
        ++kkt_fail;
        continue;
      }
      const double n = static_cast<double>(p.rows());
      const Eigen::VectorXd g = p.phi.transpose() * (p.target - p.phi * l.rho) / n;
      const double slack = 10 * o.tol * (p.phi.colwise().squaredNorm() / n).maxCoeff();
      for (Eigen::Index j = 0; j < p.cols(); ++j) {
        const bool ok = l.rho[j] != 0.0 ? std::abs(g[j] - kAlpha * (l.rho[j] > 0 ? 1.0 : -1.0)) <= slack
                                        : std::abs(g[j]) <= kAlpha + slack;
        if (!ok) ++kkt_fail;
      }
    }
  }

  for (Eigen::Index m = 1; m <= 3; ++m) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto p = small_problem(8 + 3 * static_cast<Eigen::Index>(seed), m, 100 * static_cast<std::uint64_t>(m) + seed);
      for (double alpha : {0.01, 0.2}) {
        const auto l = lasso_cd(p, alpha);
        const double box = std::max(2.0, l.rho.cwiseAbs().maxCoeff() + 0.5);
        const double gap = std::abs(l.diagnostics.objective - grid_minimum(p, alpha, box, 1e-3));
        worst_grid = std::max(worst_grid, gap);
        if (gap > 1e-4) ++grid_fail;
        ++grids;
      }
    }
  }
  const bool ok = monotone_fail == 0 && kkt_fail == 0 && grid_fail == 0;
  return {ok, fmt("%d solves: %d objective increases, %d KKT violations; %d grid oracles, worst gap %.2e", runs,
                  monotone_fail, kkt_fail, grids, worst_grid)};
}

Verdict performance_parity() {
  const auto costs = per_seed([](std::uint64_t s) {
    const Dataset d = open_loop_data(2, s, kSigma);
    const auto small = evaluate(2, lasso_design(d, Dictionary::deadzone(20)));
    const auto large = evaluate(2, lasso_design(d, Dictionary::deadzone(400, 200.0, 0.5)));
    return std::pair{small, large};
  });
  bool ok = true;
  std::string per;
  for (const auto& [small, large] : costs) {
    const double ratio = small.J / large.J;
    ok = ok && small.stable && large.stable && ratio >= 0.5 && ratio <= 2.0;
    per += fmt(" %.3f", ratio);
  }
  return {ok, "J(m=20)/J(m=400) per seed:" + per};
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    std::function<Verdict()> run;
    double time_limit;  // seconds
  };
  constexpr double kNoLimit = std::numeric_limits<double>::infinity();
  const std::vector<Criterion> criteria{
      {"excitation filter gain", excitation_gain, 1e-3},
      {"virtual reference round trip", virtual_reference_round_trip, 1.0},
      {"ideal controller exactness", ideal_exactness, 1.0},
      {"exact coefficient recovery", coefficient_recovery, 1.0},
      {"sparsity, plant 1", sparsity_plant1, 120.0},
      {"sparsity, plant 2", sparsity_plant2, 120.0},
      {"dictionary quality ordering", dictionary_ordering, kNoLimit},
      {"regularization as stabilizer", regularization_stabilizes, 120.0},
      {"lasso solver soundness", solver_soundness, 30.0},
      {"performance parity m=20 vs m=400", performance_parity, kNoLimit},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v = criteria[i].run();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > criteria[i].time_limit) {
      v.pass = false;
      v.detail += fmt("; over the %.3g s time limit", criteria[i].time_limit);
    }
    failed += v.pass ? 0 : 1;
    std::printf("criterion %2zu %s  %s (%.3f s): %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].name.c_str(), secs,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
