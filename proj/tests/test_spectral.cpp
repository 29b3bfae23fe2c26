#include <cmath>
#include <cstring>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "tcm/error.hpp"
#include "tcm/spectral.hpp"

using namespace tcm;

namespace {

double max_abs_diff(const std::vector<Complex>& a, const std::vector<std::complex<double>>& b) {
  double d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

double band_power(const PowerSpectrum& p, double lo, double hi) {
  double s = 0;
  for (std::size_t i = 0; i < p.n_bins(); ++i)
    if (p.frequency(i) >= lo && p.frequency(i) <= hi) s += p.bins[i];
  return s;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("fft worked examples") {
    std::vector<double> impulse(8, 0.0);
    impulse[0] = 1.0;
    for (const auto& v : fft_real(impulse)) CHECK(std::abs(v - Complex(1, 0)) < 1e-15);

    const std::vector<double> dc(8, 1.0);
    const auto d = fft_real(dc);
    CHECK(std::abs(d[0] - Complex(8, 0)) < 1e-12);
    for (std::size_t k = 1; k < d.size(); ++k) CHECK(std::abs(d[k]) < 1e-12);

    std::vector<double> c(8);
    for (std::size_t n = 0; n < 8; ++n) c[n] = std::cos(2 * std::numbers::pi * n / 8.0);
    const auto s = fft_real(c);
    REQUIRE(s.size() == 5);
    CHECK(std::abs(s[1] - Complex(4, 0)) < 1e-12);
    for (std::size_t k : {0u, 2u, 3u, 4u}) CHECK(std::abs(s[k]) < 1e-12);

    CHECK_THROWS_AS(fft_real(std::vector<double>(6, 0.0)), LengthError);
    CHECK_THROWS_AS(fft_real(std::vector<double>{}), LengthError);
  }

  TEST_CASE("fft matches the naive DFT") {
    Rng rng(3);
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t m = std::size_t{1} << (2 + rng.below(6));  // 4..128
      auto x = testing::gaussian(m, 50 + trial);
      const auto got = fft_real(x);
      const auto want = oracle::dft(x);
      CHECK(max_abs_diff(got, want) < 1e-9);
      // Parseval on the full spectrum
      double et = 0, ef = 0;
      for (double v : x) et += v * v;
      for (const auto& v : want) ef += std::norm(v);
      double half = 0;
      for (std::size_t k = 0; k <= m / 2; ++k)
        half += (k == 0 || k == m / 2 ? 1.0 : 2.0) * std::norm(got[k]);
      CHECK(half / static_cast<double>(m) == doctest::Approx(et).epsilon(1e-9));
      CHECK(ef / static_cast<double>(m) == doctest::Approx(et).epsilon(1e-9));
    }
  }

  TEST_CASE("inverse fft round trip") {
    for (std::size_t m : {2u, 16u, 1024u}) {
      auto x = testing::gaussian(m, m);
      const auto back = ifft_real(fft_real(x), m);
      for (std::size_t i = 0; i < m; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("window coefficients") {
    const auto h = window_coefficients(WindowFunction::Hann, 8);
    CHECK(h[0] == 0.0);
    CHECK(h[4] == doctest::Approx(1.0));
    CHECK(h[2] == doctest::Approx(0.5));
    const auto w = oracle::window(2, 64);
    const auto g = window_coefficients(WindowFunction::Hamming, 64);
    for (std::size_t i = 0; i < 64; ++i) CHECK(g[i] == doctest::Approx(w[i]).epsilon(1e-15));
  }

  TEST_CASE("window config validation") {
    WindowConfig c;
    CHECK_NOTHROW(c.validate());
    c.frame_len = 1000;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.hop = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.welch_overlap = 1.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.welch_subframes = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    CHECK(c.subframe_step() == 512);
    CHECK(c.block_len() == 1024 + 3 * 512);
  }

  TEST_CASE("welch: unit tone at a bin centre") {
    WindowConfig c;
    const double dt = kDefaultSampleInterval;
    const double bin = 1.0 / (c.frame_len * dt);
    const auto x = testing::tone(8192, 100 * bin, dt);
    const auto p = welch_psd(x, dt, c);
    CHECK(p.total_power() == doctest::Approx(0.5).epsilon(0.01));
    const auto arg = std::max_element(p.bins.begin(), p.bins.end()) - p.bins.begin();
    CHECK(arg == 100);
    CHECK(p.bin_hz == doctest::Approx(bin));
  }

  TEST_CASE("welch: zero signal, scaling and two equal tones") {
    WindowConfig c;
    const double dt = kDefaultSampleInterval;
    const auto z = welch_psd(std::vector<double>(4096, 0.0), dt, c);
    for (double v : z.bins) CHECK(v == 0.0);

    auto x = testing::gaussian(6000, 17);
    const auto p = welch_psd(x, dt, c);
    for (auto& v : x) v *= 3.0;
    const auto q = welch_psd(x, dt, c);
    for (std::size_t i = 0; i < p.n_bins(); ++i)
      CHECK(q.bins[i] == doctest::Approx(9.0 * p.bins[i]).epsilon(1e-12));

    const double bin = 1.0 / (c.frame_len * dt);
    auto a = testing::tone(8192, 80 * bin, dt);
    const auto b = testing::tone(8192, 300 * bin, dt);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    const auto two = welch_psd(a, dt, c);
    const double ea = band_power(two, 77 * bin, 83 * bin);
    const double eb = band_power(two, 297 * bin, 303 * bin);
    CHECK(ea / eb == doctest::Approx(1.0).epsilon(0.01));
  }

  TEST_CASE("welch matches the naive periodogram average") {
    Rng rng(9);
    const int kinds[] = {0, 1, 2};
    const WindowFunction fns[] = {WindowFunction::Rectangular, WindowFunction::Hann,
                                  WindowFunction::Hamming};
    for (int trial = 0; trial < 12; ++trial) {
      WindowConfig c;
      c.frame_len = std::size_t{1} << (4 + rng.below(4));
      c.welch_overlap = trial % 2 ? 0.5 : 0.25;
      const int w = static_cast<int>(rng.below(3));
      c.window_fn = fns[w];
      c.hop = c.frame_len;
      const std::size_t n = c.frame_len * (2 + rng.below(6)) + rng.below(c.frame_len);
      const auto x = testing::gaussian(n, 900 + trial);
      const auto got = welch_psd(x, 1e-3, c);
      const auto want = oracle::welch(x, c.frame_len, kinds[w], c.welch_overlap);
      REQUIRE(got.n_bins() == want.size());
      for (std::size_t k = 0; k < want.size(); ++k)
        CHECK(oracle::rel_err(got.bins[k], want[k]) < 1e-9);
    }
  }

  TEST_CASE("welch averaging reduces variance") {
    // CV of one bin over trials: K sub-frames (non-overlapping) cut it by sqrt(K)
    const std::size_t m = 256;
    auto cv = [&](std::size_t k) {
      WindowConfig c;
      c.frame_len = m;
      c.hop = m;
      c.welch_overlap = 0.0;
      std::vector<double> v;
      for (int t = 0; t < 200; ++t) {
        const auto x = testing::gaussian(m * k, 5000 + t * 31 + k);
        v.push_back(welch_psd(x, 1e-3, c).bins[m / 4]);
      }
      double mu = 0, s2 = 0;
      for (double e : v) mu += e;
      mu /= static_cast<double>(v.size());
      for (double e : v) s2 += (e - mu) * (e - mu);
      return std::sqrt(s2 / static_cast<double>(v.size() - 1)) / mu;
    };
    const double ratio = cv(8) / cv(1);
    CHECK(ratio == doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(0.3));
  }

  TEST_CASE("welch errors") {
    WindowConfig c;
    CHECK_THROWS_AS(welch_psd(std::vector<double>(1000, 0.0), 1e-3, c), LengthError);
    CHECK_THROWS_AS(welch_psd(std::vector<double>(2000, 0.0), 0.0, c), ParameterError);
    std::vector<double> bad(2000, 0.0);
    bad[5] = std::nan("");
    CHECK_THROWS_AS(welch_psd(bad, 1e-3, c), DataError);
  }

  TEST_CASE("stft of a stationary tone has identical columns") {
    WindowConfig c;
    const double dt = kDefaultSampleInterval;
    const double bin = 1.0 / (c.frame_len * dt);
    // period of exactly 1024/64 = 16 samples, so every hop sees the same phase
    const auto x = testing::tone(20000, 64 * bin, dt);
    const auto s = stft(x, dt, c);
    REQUIRE(s.n_columns() == (20000 - c.block_len()) / c.hop + 1);
    for (const auto& col : s.columns)
      for (std::size_t k = 0; k < col.n_bins(); ++k)
        CHECK(std::fabs(col.bins[k] - s.columns[0].bins[k]) <= 1e-9 * s.columns[0].bins[64] + 1e-20);
    CHECK(s.column_interval == doctest::Approx(c.hop * dt));
  }

  TEST_CASE("stft of a chirp has a non-decreasing peak") {
    WindowConfig c;
    c.frame_len = 256;
    c.hop = 256;
    const double dt = 1e-4;
    const std::size_t n = 40000;
    std::vector<double> x(n);
    double phase = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = 200.0 + 3800.0 * static_cast<double>(i) / n;
      phase += 2 * std::numbers::pi * f * dt;
      x[i] = std::sin(phase);
    }
    const auto s = stft(x, dt, c);
    std::size_t last = 0;
    for (const auto& col : s.columns) {
      const auto arg = static_cast<std::size_t>(std::max_element(col.bins.begin(), col.bins.end()) -
                                                col.bins.begin());
      CHECK(arg >= last);
      last = arg;
    }
  }

  TEST_CASE("stft axes do not depend on content") {
    WindowConfig c;
    const auto a = stft(testing::gaussian(6000, 1), 1e-4, c);
    const auto b = stft(testing::tone(6000, 300, 1e-4), 1e-4, c);
    CHECK(a.n_columns() == b.n_columns());
    CHECK(a.n_bins() == b.n_bins());
    CHECK(a.bin_hz == b.bin_hz);
    CHECK_THROWS_AS(stft(std::vector<double>(c.block_len() - 1, 0.0), 1e-4, c), LengthError);
  }

  TEST_CASE("stft tensor export round trip") {
    const auto dir = testing::scratch_dir("stft");
    Spectrogram s;
    s.bin_hz = 2.5;
    s.column_interval = 0.1;
    for (int c = 0; c < 4; ++c) {
      PowerSpectrum p;
      p.bin_hz = 2.5;
      p.bins = {1.0 * c, 2.0 * c + 1, 3.5};
      s.columns.push_back(p);
    }
    export_stft_tensor(s, dir / "x.f32");
    // freq-major: value (f = 1, c = 2) sits at 1 * 4 + 2
    const auto raw = testing::slurp(dir / "x.f32");
    REQUIRE(raw.size() == 12 * 4);
    float v;
    std::memcpy(&v, raw.data() + 4 * 6, 4);
    CHECK(v == 5.0f);
    const auto r = read_stft_tensor(dir / "x.f32");
    REQUIRE(r.n_columns() == 4);
    REQUIRE(r.n_bins() == 3);
    CHECK(r.columns[3].bins[1] == 7.0);
    CHECK(r.bin_hz == 2.5);

    std::ofstream(dir / "x.f32.json") << R"({"dims":[3,5],"bin_hz":1,"column_interval":1})";
    CHECK_THROWS_AS(read_stft_tensor(dir / "x.f32"), FormatError);
    CHECK_THROWS_AS(export_stft_tensor(Spectrogram{}, dir / "e.f32"), ParameterError);
  }
}
