#pragma once
// Finite-superposition simulation.  The mixing measure is discretized into
// atoms (v_k, p_k); each atom drives an independent CAR(2) state advanced by
// the exact one-step propagator,
//
//   X_k(t+dt) = e^{A_k dt} X_k(t) + e * dL_k,   dL_k ~ increment of the
//                                               p_k-scaled Levy driver,
//
// and the output is X(t) = sum_k (1,0)' X_k(t) after burn-in.  Conditional on
// the atom grid the linear dynamics are exact; the only time-stepping error is
// the end-of-interval placement of the increment (O(dt)), and the only model
// error is the atomization of the mixing law, which compare() quantifies by
// re-running the analytics on the atomized measure.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "supcar/analytics.hpp"
#include "supcar/kernels.hpp"

namespace supcar {

struct SimConfig {
  double dt = 0.01;
  double horizon = 100.0;
  double burn_in = 0.0;
  int n_atoms = 16;   // per continuous factor; see discretize_mixing
  int n_paths = 1;
  std::uint64_t seed = 1;
  int n_threads = 1;  // scheduling only; never affects the output bytes
};

// Throws std::invalid_argument on nonpositive dt/horizon/n_atoms/n_paths,
// negative burn_in, or horizon/dt > 1e8.
void validate_config(const SimConfig& config);

struct PathSet {
  std::vector<double> times;                // i * dt, starting after burn-in
  std::vector<std::vector<double>> values;  // n_paths rows of times.size()
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t spec_fingerprint = 0;
  // Nonempty when burn_in is below the recommended 10 / (min atom decay rate).
  std::string warning;
};

// FNV-1a hash of a canonical text encoding of the model and the run
// configuration.  n_threads is excluded (identical paths regardless of
// scheduling); density-form measures hash their support/table, not the
// callable body.
std::uint64_t spec_fingerprint(const ProcessSpec& spec, const SimConfig& config);

// Atomization of the mixing law.  Discrete/joint specs pass through
// unchanged; a continuous factor becomes n_atoms cells of mass 1/n with the
// parameter at the cell's conditional median (quantile midpoints); product
// measures take the tensor grid (law1 outer, law2 inner), so at most
// n_atoms^2 atoms for types II/III.  Masses sum to 1 up to rounding.
std::vector<std::pair<ParamPoint, double>> discretize_mixing(
    const MixingSpec& mix, int n_atoms);

// e^{A dt} for the companion matrix of p; the exact state propagator used by
// simulate_paths (scaling-and-squaring matrix exponential).
Eigen::Matrix2d propagator(const Car2Params& p, double dt);

// Evolves every (path, atom) pair from the zero state through burn_in and
// horizon, each on its own RNG substream keyed by (seed, path, atom), and
// sums atoms in fixed order; identical (spec, config) gives bit-identical
// values for any n_threads.  Throws std::invalid_argument on density-form
// noise (not sampleable); re-runs the existence gate when the spec was built
// unchecked.
PathSet simulate_paths(const ProcessSpec& spec, const SimConfig& config);

// Per-path demeaned lag products averaged over time, with Quenouille's
// half-sample jackknife (2 r_full - mean of the half-window estimates)
// cancelling the O(1/T) small-sample bias of the autocorrelation; the
// per-path values are then averaged across paths and ci_half_width =
// 3 * sd / sqrt(n_paths) (0 when n_paths = 1).  Lag 0 stays exactly 1.
// The r_analytic column is left at 0 here; compare() fills it.  Throws
// std::invalid_argument for off-grid lags or horizon < 10 * max lag, and
// MathError("degenerate variance") when a path (or half-window) is constant.
AcfTable empirical_acf(const PathSet& paths, const std::vector<double>& taus);

struct ComparisonReport {
  AcfTable table;                  // tau, r_analytic, r_empirical, ci
  std::vector<double> r_atomized;  // acf of the atomized mixing, per lag
  double frac_within = 0.0;        // lags with |r_analytic - r_empirical| <= ci
  bool pass = false;               // frac_within >= 0.9
  std::uint64_t fingerprint = 0;
  std::uint64_t seed = 0;
  std::string warning;             // forwarded burn-in warning
};

// Analytic ACF of the exact spec, empirical ACF of simulated paths, and the
// atomization bias column r_atomized - r_analytic; a statistical miss sets
// pass = false but does not throw.
ComparisonReport compare(const ProcessSpec& spec, const SimConfig& config,
                         const std::vector<double>& taus);

}  // namespace supcar
