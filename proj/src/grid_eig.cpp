#include "crossplit/grid_eig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crossplit/errors.hpp"
#include "crossplit/parallel.hpp"

namespace crossplit {
namespace {

constexpr int kMaxRetries = 3;

struct Interval {
  double a, b;
  std::int64_t ca, cb;
};

double pivot_floor(const BandedSymmetric& a) {
  double scale = 2.0 * a.t;
  for (std::size_t i = 0; i < a.d1.size(); ++i)
    scale = std::max({scale, std::abs(a.d1[i]), std::abs(a.d2[i])});
  return std::numeric_limits<double>::min() * std::max(1.0, scale * scale);
}

// Counts for a batch of shifts; shifts flagged by a clamped pivot are nudged
// and recounted.  shifts[k] is updated to the shift actually counted.
void count_batch(const BandedSymmetric& a, std::vector<double>& shifts,
                 std::vector<std::int64_t>& counts) {
  const auto view = a.view();
  const auto& k = simd::kernels();
  counts.assign(shifts.size(), 0);
  std::vector<std::uint8_t> broke(shifts.size(), 0);
  k.inertia(view, shifts.data(), counts.data(), broke.data(), shifts.size());
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    for (int attempt = 1; broke[i]; ++attempt) {
      if (attempt > kMaxRetries)
        throw Error(ErrorCode::kFactorizationBreakdown, "pivot breakdown persists after retries");
      shifts[i] += 1e-14 * std::max(1.0, std::abs(shifts[i]));
      k.inertia(view, &shifts[i], &counts[i], &broke[i], 1);
    }
  }
}

}  // namespace

double BandedSymmetric::entry(std::size_t r, std::size_t col) const {
  if (r > col) std::swap(r, col);
  const std::size_t i = r / 2, j = col / 2;
  const std::size_t ci = r % 2, cj = col % 2;
  if (i == j) {
    if (ci == cj) return ci == 0 ? d1[i] : d2[i];
    return c[i];
  }
  if (j != i + 1) return 0.0;
  if (ci == cj) return -t;
  return ci == 0 ? up[i] : lo[i];
}

simd::BlockTridiagonalView BandedSymmetric::view() const {
  return {d1, d2, c, up, lo, t, pivot_floor(*this)};
}

BandedSymmetric assemble(const CrossingModel& m, double h, const Grid& g) {
  if (g.n < 100) throw Error(ErrorCode::kInvalidArgument, "grid needs n >= 100");
  if (!(h > 0.0) || !(g.x_half_width > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "h and X must be positive");
  const double dx = g.step();
  if (dx > h / 8.0) throw Error(ErrorCode::kGridTooCoarse, "grid step exceeds h/8");

  const auto n = static_cast<std::size_t>(g.n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = g.node(static_cast<std::int64_t>(i));

  BandedSymmetric a;
  a.grid = g;
  a.t = h * h / (dx * dx);
  a.d1.resize(n);
  a.d2.resize(n);
  a.c.resize(n);
  std::vector<double> r1(n);
  m.v1().eval_batch(x, a.d1);
  m.v2().eval_batch(x, a.d2);
  m.r0().eval_batch(x, a.c);
  m.r1().eval_batch(x, r1);
  for (std::size_t i = 0; i < n; ++i) {
    a.d1[i] += 2.0 * a.t;
    a.d2[i] += 2.0 * a.t;
    a.c[i] *= h;
  }
  // h^2 r1 D_c in the (1,2) block; its transpose is the (2,1) block.
  const double k = h * h / (2.0 * dx);
  a.up.resize(n - 1);
  a.lo.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    a.up[i] = k * r1[i];
    a.lo[i] = -k * r1[i + 1];
  }
  return a;
}

std::int64_t count_below(const BandedSymmetric& a, double sigma, double* used) {
  std::vector<double> s{sigma};
  std::vector<std::int64_t> c;
  count_batch(a, s, c);
  if (used) *used = s[0];
  return c[0];
}

std::vector<double> eigen_window(const BandedSymmetric& a, double lo, double hi, int workers) {
  if (!(lo < hi)) throw Error(ErrorCode::kInvalidArgument, "empty eigenvalue window");
  const double tol = 1e-12 * std::max(1.0, std::abs(hi));
  std::vector<double> ends{lo, hi};
  std::vector<std::int64_t> ends_count;
  count_batch(a, ends, ends_count);

  std::vector<Interval> active;
  if (ends_count[1] > ends_count[0]) active.push_back({ends[0], ends[1], ends_count[0], ends_count[1]});
  std::vector<double> out;
  while (!active.empty()) {
    std::vector<double> mids(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) mids[i] = 0.5 * (active[i].a + active[i].b);
    std::vector<std::int64_t> counts(mids.size());
    // Chunks of kShiftLanes shifts per task keep every vector lane busy.
    const std::size_t lanes = simd::kShiftLanes;
    const std::size_t chunks = (mids.size() + lanes - 1) / lanes;
    parallel_for(chunks, workers, [&](std::size_t ch) {
      const std::size_t b = ch * lanes;
      const std::size_t e = std::min(mids.size(), b + lanes);
      std::vector<double> s(mids.begin() + b, mids.begin() + e);
      std::vector<std::int64_t> c;
      count_batch(a, s, c);
      std::copy(s.begin(), s.end(), mids.begin() + b);
      std::copy(c.begin(), c.end(), counts.begin() + b);
    });
    std::vector<Interval> next;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const auto& iv = active[i];
      const Interval halves[2] = {{iv.a, mids[i], iv.ca, counts[i]},
                                  {mids[i], iv.b, counts[i], iv.cb}};
      for (const auto& hv : halves) {
        if (hv.cb <= hv.ca) continue;
        if (hv.b - hv.a <= tol) {
          for (std::int64_t k = hv.ca; k < hv.cb; ++k) out.push_back(0.5 * (hv.a + hv.b));
        } else {
          next.push_back(hv);
        }
      }
    }
    active = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

EigenReport converged_window(const CrossingModel& m, double h, double lo, double hi,
                             double target_err, const GridOptions& opt) {
  if (!(target_err > 0.0)) throw Error(ErrorCode::kInvalidArgument, "target error must be positive");
  const double x = opt.half_width > 0.0 ? opt.half_width : solver_half_width(m, h, hi);
  std::int64_t n = opt.n0 > 0 ? opt.n0
                              : std::max<std::int64_t>(100, static_cast<std::int64_t>(
                                                                std::ceil(16.0 * x / h)));
  EigenReport rep;
  rep.h = h;
  rep.x_half_width = x;

  std::vector<double> prev_raw, prev_extrap;
  bool have_raw = false, have_extrap = false;
  while (n <= opt.n_cap) {
    const auto a = assemble(m, h, Grid{x, n});
    auto raw = eigen_window(a, lo, hi, opt.workers);
    rep.levels.push_back(n);
    rep.n = n;
    if (have_raw && raw.size() == prev_raw.size()) {
      std::vector<double> extrap(raw.size());
      for (std::size_t i = 0; i < raw.size(); ++i)
        extrap[i] = raw[i] + (raw[i] - prev_raw[i]) / 3.0;
      rep.eigenvalues = extrap;
      rep.error_estimate.assign(raw.size(), 0.0);
      if (have_extrap && extrap.size() == prev_extrap.size()) {
        double worst = 0.0;
        for (std::size_t i = 0; i < extrap.size(); ++i) {
          rep.error_estimate[i] = std::abs(extrap[i] - prev_extrap[i]);
          worst = std::max(worst, rep.error_estimate[i]);
        }
        if (worst <= target_err) {
          rep.converged = true;
          return rep;
        }
      } else {
        // One extrapolation only: the raw difference bounds its error.
        for (std::size_t i = 0; i < raw.size(); ++i)
          rep.error_estimate[i] = std::abs(raw[i] - prev_raw[i]);
      }
      prev_extrap = std::move(extrap);
      have_extrap = true;
    } else {
      rep.eigenvalues = raw;
      rep.error_estimate.assign(raw.size(), std::numeric_limits<double>::infinity());
      have_extrap = false;
    }
    prev_raw = std::move(raw);
    have_raw = true;
    n = 2 * n + 1;
  }
  return rep;
}

}  // namespace crossplit
