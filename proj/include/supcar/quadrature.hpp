#pragma once

// Adaptive Gauss-Kronrod 15(7) integration with a global worst-segment
// refinement loop, plus geometric panel series for infinite tails and dyadic
// shells toward integrable endpoint singularities.  The shell drivers carry
// the divergence detection used by the integrability condition checkers:
// an integral is declared divergent when partial sums blow past 1e12 or the
// shell sequence fails a ratio/power decay test.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <type_traits>
#include <vector>

namespace supcar::quad {

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  long max_evals = 4000000;
  int max_panels = 4000;  // series drivers: geometric/dyadic panel cap
};

template <class V>
struct BasicResult {
  V value{};
  double error = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool diverged = false;  // meaningful for one-signed integrands only
  long evals = 0;
};

using Result = BasicResult<double>;
using CResult = BasicResult<std::complex<double>>;

inline double norm_of(double x) { return std::fabs(x); }
inline double norm_of(const std::complex<double>& x) { return std::abs(x); }

namespace detail {

// QUADPACK dqk15 nodes/weights on [-1,1].
inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
struct PanelEval {
  using V = std::decay_t<decltype(std::declval<F&>()(0.0))>;
  V value{};
  double error = 0;
};

// One 15-point Kronrod panel with embedded 7-point Gauss error estimate.
template <class F>
PanelEval<F> gk15(F& f, double a, double b) {
  using V = typename PanelEval<F>::V;
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const V fc = f(c);
  V resg = fc * wg[3];
  V resk = fc * wgk[7];
  double resabs = norm_of(fc) * wgk[7];
  V fv[15];
  fv[7] = fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * xgk[j];
    const V f1 = f(c - dx);
    const V f2 = f(c + dx);
    fv[j] = f1;
    fv[14 - j] = f2;
    const V fsum = f1 + f2;
    resk = resk + fsum * wgk[j];
    resabs += wgk[j] * (norm_of(f1) + norm_of(f2));
    if (j % 2 == 1) resg = resg + fsum * wg[j / 2];  // j = 1,3,5
  }
  const V reskh = resk * 0.5;
  double resasc = wgk[7] * norm_of(fv[7] - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += wgk[j] * (norm_of(fv[j] - reskh) + norm_of(fv[14 - j] - reskh));
  PanelEval<F> out;
  out.value = resk * h;
  double err = norm_of((resk - resg) * h);
  const double resasc_h = resasc * std::fabs(h);
  if (resasc_h != 0.0 && err != 0.0)
    err = resasc_h * std::min(1.0, std::pow(200.0 * err / resasc_h, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  err = std::max(err, 50.0 * eps * resabs * std::fabs(h));
  out.error = err;
  return out;
}

struct Segment {
  double a, b, error;
  int index;  // into segment value store
  bool operator<(const Segment& o) const { return error < o.error; }
};

}  // namespace detail

// Globally adaptive integration on a finite interval.
template <class F>
auto integrate(F&& f, double a, double b, const Options& opt = {}) {
  using V = typename detail::PanelEval<std::decay_t<F>>::V;
  BasicResult<V> out;
  if (a == b) {
    out.converged = true;
    out.error = 0;
    return out;
  }
  auto& fn = f;
  auto first = detail::gk15(fn, a, b);
  long evals = 15;
  std::vector<V> values{first.value};
  std::priority_queue<detail::Segment> heap;
  heap.push({a, b, first.error, 0});
  V total = first.value;
  double total_err = first.error;
  const double min_width = std::fabs(b - a) * 0x1.0p-50;
  while (total_err > std::max(opt.abs_tol, opt.rel_tol * norm_of(total)) &&
         evals + 30 <= opt.max_evals && !heap.empty()) {
    detail::Segment worst = heap.top();
    if (worst.error <= 0 || std::fabs(worst.b - worst.a) <= min_width) break;
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gk15(fn, worst.a, mid);
    auto right = detail::gk15(fn, mid, worst.b);
    evals += 30;
    total = total - values[worst.index] + left.value + right.value;
    total_err += left.error + right.error - worst.error;
    values[worst.index] = left.value;
    heap.push({worst.a, mid, left.error, worst.index});
    values.push_back(right.value);
    heap.push({mid, worst.b, right.error, static_cast<int>(values.size()) - 1});
  }
  // Re-sum segment values pairwise-ish (vector order) to tame cancellation.
  V sum{};
  for (const V& v : values) sum = sum + v;
  out.value = sum;
  out.error = total_err;
  out.evals = evals;
  out.converged =
      total_err <= std::max(opt.abs_tol, opt.rel_tol * norm_of(sum)) * 1.0001;
  return out;
}

namespace detail {

// Shared driver for panel series: integrates f over panels produced by
// gen(k) -> {a_k, b_k}, watching the contribution sequence for divergence
// (partial sums past 1e12, or decay slower than summable) and terminating
// early by geometric-ratio tail extrapolation when the decay is clean.
// When the panel generator exhausts floating-point resolution (shells toward
// an endpoint whose ulp is coarser than the remaining mass), the analytic
// remainder is recovered by the same geometric extrapolation.
template <class F, class Gen>
auto panel_series(F& f, Gen gen, const Options& opt) {
  using V = typename PanelEval<std::decay_t<F>>::V;
  BasicResult<V> out;
  Options panel_opt = opt;
  panel_opt.abs_tol = opt.abs_tol / 16.0;
  panel_opt.rel_tol = opt.rel_tol / 4.0;
  V sum{};
  double err = 0;
  long evals = 0;
  std::vector<double> mags;
  V last_panel{};
  int small_streak = 0;
  bool exhausted = false;
  const int w = 6;

  // Returns the stable geometric ratio of the last window, or -1.
  auto window_ratio = [&]() -> double {
    const int k = static_cast<int>(mags.size()) - 1;
    if (k < w || mags[k] <= 0.0 || mags[k - w] <= 0.0) return -1.0;
    const double rho = std::pow(mags[k] / mags[k - w], 1.0 / w);
    if (rho >= 0.9995) return -1.0;
    for (int j = k - w + 1; j <= k; ++j)
      if (mags[j] > mags[j - 1] * (rho + 0.08) + 1e-300) return -1.0;
    return rho;
  };

  for (int k = 0; k < opt.max_panels; ++k) {
    auto [pa, pb] = gen(k);
    if (!(pb > pa) && !(pb < pa)) {  // empty: resolution exhausted
      exhausted = true;
      break;
    }
    auto r = integrate(f, pa, pb, panel_opt);
    evals += r.evals;
    sum = sum + r.value;
    err += r.error;
    last_panel = r.value;
    const double mag = norm_of(r.value);
    mags.push_back(mag);
    if (norm_of(sum) > 1e12) {
      out.diverged = true;
      break;
    }
    // Plain termination: panel contributions negligible twice in a row.
    small_streak = (mag < opt.abs_tol / 4.0) ? small_streak + 1 : 0;
    if (small_streak >= 2) {
      out.converged = true;
      break;
    }
    if (k >= 2 * w && mag > 0.0 && mags[k - w] > 0.0) {
      const double rho_raw = std::pow(mag / mags[k - w], 1.0 / w);
      if (rho_raw >= 0.999 && mag > opt.abs_tol) {
        // No geometric decay: distinguish k^{-q} tails by a power fit.
        const double q = std::log(mags[k - w] / mag) /
                         std::log(double(k + 1) / double(k + 1 - w));
        if (q <= 1.05) {
          out.diverged = true;
          break;
        }
      } else {
        const double rho = window_ratio();
        if (rho > 0.0) {
          const double tail = mag * rho / (1.0 - rho);
          if (tail * 0.1 < opt.abs_tol || mag < opt.abs_tol / 4.0) {
            sum = sum + last_panel * (rho / (1.0 - rho));
            err += tail * 0.1;
            out.converged = true;
            break;
          }
        }
      }
    }
    if (evals > opt.max_evals) break;
  }
  // Panels ran out of representable room: extrapolate the remainder.
  if (exhausted && !out.converged && !out.diverged) {
    const double rho = window_ratio();
    if (rho > 0.0) {
      const double tail = norm_of(last_panel) * rho / (1.0 - rho);
      sum = sum + last_panel * (rho / (1.0 - rho));
      err += tail * 0.1;
    }
    out.converged = true;
  }
  out.value = sum;
  out.error = err;
  out.evals = evals;
  if (out.diverged) out.converged = false;
  return out;
}

}  // namespace detail

// Integration over [a, +inf) by geometrically widening panels.
template <class F>
auto integrate_tail(F&& f, double a, const Options& opt = {}) {
  auto& fn = f;
  const double w0 = 1.0 + 0.25 * std::fabs(a);
  auto gen = [a, w0](int k) -> std::pair<double, double> {
    const double lo = a + w0 * (std::exp2(double(k)) - 1.0);
    const double hi = a + w0 * (std::exp2(double(k + 1)) - 1.0);
    if (lo > 1e300) return {0.0, 0.0};
    return {lo, std::min(hi, 1.7e308)};
  };
  return detail::panel_series(fn, gen, opt);
}

// Integration over (s, c] (or [c, s) if c < s) with dyadic shells shrinking
// toward the singular endpoint s.
template <class F>
auto integrate_singular(F&& f, double singular, double regular,
                        const Options& opt = {}) {
  auto& fn = f;
  const double span = regular - singular;
  // Stop refining once a shell would span fewer than ~64 representable
  // doubles; the accountable remainder is then extrapolated geometrically.
  const double min_width =
      64.0 * std::fabs(std::nextafter(singular, regular) - singular);
  auto gen = [singular, span, min_width](int k) -> std::pair<double, double> {
    const double hi = singular + span * std::exp2(-double(k));
    const double lo = singular + span * std::exp2(-double(k + 1));
    if (lo == singular || hi == lo) return {0.0, 0.0};
    if (std::fabs(hi - lo) < min_width) return {0.0, 0.0};
    return span > 0 ? std::make_pair(lo, hi) : std::make_pair(hi, lo);
  };
  auto res = detail::panel_series(fn, gen, opt);
  return res;
}

}  // namespace supcar::quad
