#pragma once

// Slow reference implementations used as oracles by the unit and acceptance
// tests. They follow the textbook formulas directly and share no code with
// the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <vector>

namespace oracle {

using cld = std::complex<long double>;

inline std::vector<std::complex<double>> dft(const std::vector<double>& x) {
  const std::size_t m = x.size();
  std::vector<std::complex<double>> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    cld acc = 0;
    for (std::size_t n = 0; n < m; ++n) {
      // reduce k*n mod m first so the angle stays small and exact
      const long double ang =
          -2.0L * std::numbers::pi_v<long double> * static_cast<long double>((k * n) % m) /
          static_cast<long double>(m);
      acc += static_cast<long double>(x[n]) * cld(std::cos(ang), std::sin(ang));
    }
    out[k] = {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
  }
  return out;
}

inline std::vector<double> p2p(const std::vector<double>& x, std::size_t w) {
  std::vector<double> out;
  for (std::size_t i = 0; i + w <= x.size(); ++i) {
    double lo = x[i], hi = x[i];
    for (std::size_t j = i; j < i + w; ++j) {
      lo = std::min(lo, x[j]);
      hi = std::max(hi, x[j]);
    }
    out.push_back(hi - lo);
  }
  return out;
}

/// alpha2 * sum(sorted[a..b)) / (b - a)  or  / N when full_length.
inline double threshold(std::vector<double> v, double a0, double a1, double a2, bool full_length) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  const auto a = static_cast<std::size_t>(std::floor(a0 * static_cast<double>(n)));
  const auto b = static_cast<std::size_t>(std::floor(a1 * static_cast<double>(n)));
  long double s = 0;
  for (std::size_t i = a; i < b; ++i) s += v[i];
  const long double d = full_length ? static_cast<long double>(n) : static_cast<long double>(b - a);
  return static_cast<double>(a2 * s / d);
}

inline std::vector<double> window(int kind, std::size_t m) {
  // 0 rectangular, 1 hann, 2 hamming; periodic definitions
  std::vector<double> w(m, 1.0);
  for (std::size_t n = 0; n < m; ++n) {
    const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(m));
    if (kind == 1) w[n] = 0.5 - 0.5 * c;
    if (kind == 2) w[n] = 0.54 - 0.46 * c;
  }
  return w;
}

/// One-sided periodogram whose bins sum to the window-weighted mean square.
inline std::vector<double> periodogram(const std::vector<double>& frame, const std::vector<double>& w) {
  const std::size_t m = frame.size();
  std::vector<double> xw(m);
  long double sw2 = 0;
  for (std::size_t n = 0; n < m; ++n) {
    xw[n] = frame[n] * w[n];
    sw2 += static_cast<long double>(w[n]) * w[n];
  }
  const auto spec = dft(xw);
  std::vector<double> out(m / 2 + 1);
  for (std::size_t k = 0; k <= m / 2; ++k) {
    long double p = std::norm(std::complex<long double>(spec[k].real(), spec[k].imag())) /
                    (static_cast<long double>(m) * sw2);
    if (k != 0 && k != m / 2) p *= 2;
    out[k] = static_cast<double>(p);
  }
  return out;
}

inline std::vector<double> welch(const std::vector<double>& x, std::size_t m, int kind,
                                 double overlap) {
  const auto step = static_cast<std::size_t>(std::llround(static_cast<double>(m) * (1.0 - overlap)));
  const auto w = window(kind, m);
  std::vector<long double> acc(m / 2 + 1, 0.0L);
  std::size_t frames = 0;
  for (std::size_t s = 0; s + m <= x.size(); s += std::max<std::size_t>(step, 1)) {
    std::vector<double> f(x.begin() + static_cast<long>(s), x.begin() + static_cast<long>(s + m));
    const auto p = periodogram(f, w);
    for (std::size_t k = 0; k < p.size(); ++k) acc[k] += p[k];
    ++frames;
  }
  std::vector<double> out(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) out[k] = static_cast<double>(acc[k] / frames);
  return out;
}

struct Moments {
  double mean, rms, sd, crest, kurtosis, skewness, p2p;
};

inline Moments moments(const std::vector<double>& x) {
  const long double n = static_cast<long double>(x.size());
  long double s = 0, s2 = 0;
  for (double v : x) {
    s += v;
    s2 += static_cast<long double>(v) * v;
  }
  const long double mean = s / n;
  long double c2 = 0, c3 = 0, c4 = 0;
  for (double v : x) {
    const long double d = v - mean;
    c2 += d * d;
  }
  const long double sd = std::sqrt(c2 / (n - 1));
  for (double v : x) {
    const long double z = (v - mean) / sd;
    c3 += z * z * z;
    c4 += z * z * z * z;
  }
  double peak = 0;
  for (double v : x) peak = std::max(peak, std::fabs(v));
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const long double rms = std::sqrt(s2 / n);
  return {static_cast<double>(mean), static_cast<double>(rms), static_cast<double>(sd),
          static_cast<double>(peak / rms), static_cast<double>(c4 / n),
          static_cast<double>(c3 / n), *hi - *lo};
}

/// (centre of the fullest equal-width bin, population SD inside it).
inline std::pair<double, double> mode(const std::vector<double>& x, std::size_t bins) {
  const double lo = *std::min_element(x.begin(), x.end());
  const double hi = *std::max_element(x.begin(), x.end());
  if (!(hi > lo)) return {lo, 0.0};
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::vector<double>> members(bins);
  for (double v : x) {
    std::size_t b = bins - 1;
    for (std::size_t k = 1; k < bins; ++k) {
      if ((v - lo) / width < static_cast<double>(k)) {
        b = k - 1;
        break;
      }
    }
    members[b].push_back(v);
  }
  std::size_t best = 0;
  for (std::size_t b = 1; b < bins; ++b)
    if (members[b].size() > members[best].size()) best = b;
  long double m = 0;
  for (double v : members[best]) m += v;
  m /= static_cast<long double>(members[best].size());
  long double ss = 0;
  for (double v : members[best]) ss += (v - m) * (v - m);
  return {lo + (static_cast<double>(best) + 0.5) * width,
          static_cast<double>(std::sqrt(ss / static_cast<long double>(members[best].size())))};
}

struct Spectral {
  double center, dominant, energy, entropy, periodic, aperiodic, rel_aperiodic;
};

inline Spectral spectral(const std::vector<double>& a, double bin_hz, double spindle_hz,
                         double tooth_hz, std::size_t harmonics, double tol_hz) {
  long double total = 0, weighted = 0, sq = 0, periodic = 0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = static_cast<double>(i) * bin_hz;
    total += a[i];
    weighted += static_cast<long double>(f) * a[i];
    sq += static_cast<long double>(a[i]) * a[i];
    if (a[i] > a[arg]) arg = i;
    bool in_band = false;
    for (std::size_t m = 1; m <= harmonics && !in_band; ++m) {
      if (std::fabs(f - static_cast<double>(m) * spindle_hz) <= tol_hz) in_band = true;
      if (std::fabs(f - static_cast<double>(m) * tooth_hz) <= tol_hz) in_band = true;
    }
    if (in_band) periodic += a[i];
  }
  long double h = 0;
  for (double v : a)
    if (v > 0) {
      const long double p = v / total;
      h -= p * std::log2(p);
    }
  return {static_cast<double>(weighted / total), static_cast<double>(arg) * bin_hz,
          static_cast<double>(sq / static_cast<long double>(a.size())), static_cast<double>(h),
          static_cast<double>(periodic), static_cast<double>(total - periodic),
          static_cast<double>((total - periodic) / total)};
}

inline double autocorr(const std::vector<double>& x, std::size_t lag) {
  long double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<long double>(x.size());
  long double num = 0, den = 0;
  for (std::size_t i = 0; i + lag < x.size(); ++i) num += (x[i] - mean) * (x[i + lag] - mean);
  for (double v : x) den += (v - mean) * (v - mean);
  return static_cast<double>(num / den);
}

/// Higuchi (1988) with 1-based offsets m = 1..k.
inline double higuchi(const std::vector<double>& x, std::size_t kmax) {
  const std::size_t n = x.size();
  std::vector<double> xs, ys;
  for (std::size_t k = 1; k <= kmax; ++k) {
    long double lk = 0;
    for (std::size_t m = 1; m <= k; ++m) {
      const std::size_t top = (n - m) / k;
      long double len = 0;
      for (std::size_t i = 1; i <= top; ++i)
        len += std::fabs(x[m - 1 + i * k] - x[m - 1 + (i - 1) * k]);
      lk += len * static_cast<long double>(n - 1) / (static_cast<long double>(top) * k) / k;
    }
    lk /= k;
    xs.push_back(std::log(1.0 / static_cast<double>(k)));
    ys.push_back(static_cast<double>(std::log(lk)));
  }
  // slope via the normal equations
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const long double c = static_cast<long double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += static_cast<long double>(xs[i]) * xs[i];
    sxy += static_cast<long double>(xs[i]) * ys[i];
  }
  return static_cast<double>((c * sxy - sx * sy) / (c * sxx - sx * sx));
}

inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

/// Exact optimum of the soft-margin SVM dual
///   max sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij,  0 <= a <= C,  sum a_i y_i = 0
/// by enumerating which multipliers sit at 0, at C or strictly inside, and
/// solving the stationarity system of each face. Only for n <= ~8.
inline double svm_dual_bruteforce(const std::vector<std::vector<double>>& k,
                                  const std::vector<int>& y, double c) {
  const std::size_t n = y.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) combos *= 3;
  double best = -1e300;
  std::vector<int> state(n);
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t r = code;
    std::vector<std::size_t> free;
    std::vector<double> a(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      state[i] = static_cast<int>(r % 3);
      r /= 3;
      if (state[i] == 1) a[i] = c;
      if (state[i] == 2) free.push_back(i);
    }
    const std::size_t f = free.size();
    if (f > 0) {
      // unknowns: a_F and b.  rows: (Q a)_i + y_i b = 1 for i in F, sum y a = 0
      const std::size_t m = f + 1;
      std::vector<std::vector<long double>> g(m, std::vector<long double>(m + 1, 0.0L));
      for (std::size_t p = 0; p < f; ++p) {
        const std::size_t i = free[p];
        long double rhs = 1.0L;
        for (std::size_t j = 0; j < n; ++j)
          if (state[j] == 1) rhs -= static_cast<long double>(y[i] * y[j]) * k[i][j] * c;
        for (std::size_t q = 0; q < f; ++q)
          g[p][q] = static_cast<long double>(y[i] * y[free[q]]) * k[i][free[q]];
        g[p][f] = y[i];
        g[p][m] = rhs;
      }
      long double eq = 0.0L;
      for (std::size_t j = 0; j < n; ++j)
        if (state[j] == 1) eq -= y[j] * c;
      for (std::size_t q = 0; q < f; ++q) g[f][q] = y[free[q]];
      g[f][m] = eq;
      bool singular = false;
      for (std::size_t col = 0; col < m && !singular; ++col) {
        std::size_t piv = col;
        for (std::size_t row = col + 1; row < m; ++row)
          if (std::fabs(g[row][col]) > std::fabs(g[piv][col])) piv = row;
        if (std::fabs(g[piv][col]) < 1e-14L) {
          singular = true;
          break;
        }
        std::swap(g[piv], g[col]);
        for (std::size_t row = 0; row < m; ++row) {
          if (row == col) continue;
          const long double fac = g[row][col] / g[col][col];
          for (std::size_t t = col; t <= m; ++t) g[row][t] -= fac * g[col][t];
        }
      }
      if (singular) continue;
      bool inside = true;
      for (std::size_t q = 0; q < f; ++q) {
        const double v = static_cast<double>(g[q][m] / g[q][q]);
        if (!(v > 0.0 && v < c)) inside = false;
        a[free[q]] = v;
      }
      if (!inside) continue;
    } else {
      double eq = 0;
      for (std::size_t j = 0; j < n; ++j) eq += y[j] * a[j];
      if (std::fabs(eq) > 1e-12) continue;
    }
    long double w = 0;
    for (std::size_t i = 0; i < n; ++i) {
      w += a[i];
      for (std::size_t j = 0; j < n; ++j) w -= 0.5L * a[i] * a[j] * y[i] * y[j] * k[i][j];
    }
    best = std::max(best, static_cast<double>(w));
  }
  return best;
}

inline double rel_err(double got, double want) {
  const double scale = std::max(std::fabs(want), 1e-300);
  return std::fabs(got - want) / scale;
}

}  // namespace oracle
