#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "tcm/error.hpp"
#include "tcm/features.hpp"

using namespace tcm;

namespace {

PowerSpectrum flat_psd(std::size_t n, double bin_hz) {
  PowerSpectrum p;
  p.bins.assign(n, 1.0);
  p.bin_hz = bin_hz;
  return p;
}

ProcessFrequencies default_pf(double bin_hz) {
  return ProcessFrequencies::from_process(11540.0, 4, bin_hz);
}

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("names follow the canonical order") {
    CHECK(feature_names().size() == 18);
    CHECK(feature_name(Feature::Mean) == "mean");
    CHECK(feature_name(Feature::RelAperiodicEnergy) == "rel_aperiodic_energy");
    CHECK(feature_name(Feature::HiguchiFd) == "higuchi_fd");
  }

  TEST_CASE("process frequencies") {
    const auto pf = ProcessFrequencies::from_process(11540.0, 4, 15.0);
    CHECK(pf.spindle_hz == doctest::Approx(192.3333).epsilon(1e-5));
    CHECK(pf.tooth_pass_hz == doctest::Approx(769.3333).epsilon(1e-5));
    CHECK(pf.tolerance_hz == doctest::Approx(22.5));
    CHECK_THROWS_AS(ProcessFrequencies::from_process(0.0, 4, 15.0), ParameterError);
    CHECK_THROWS_AS(ProcessFrequencies::from_process(100.0, 0, 15.0), ParameterError);
  }

  TEST_CASE("time features worked examples") {
    auto a = time_features(std::vector<double>{1, 2, 3});
    CHECK(a.mean == doctest::Approx(2.0));
    CHECK(a.sd == doctest::Approx(1.0));
    CHECK(a.p2p == doctest::Approx(2.0));
    auto b = time_features(std::vector<double>{3, 4});
    CHECK(b.rms == doctest::Approx(std::sqrt(12.5)));

    std::vector<double> s(6400);
    for (std::size_t i = 0; i < s.size(); ++i)
      s[i] = std::sin(2 * std::numbers::pi * static_cast<double>(i) / 64.0);
    auto t = time_features(s);
    CHECK(t.crest_factor == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
    CHECK(std::fabs(t.skewness) < 1e-9);
    // population kurtosis of a sine is 1.5; the N-1 SD shrinks it by (N-1)^2/N^2
    CHECK(t.kurtosis == doctest::Approx(1.5).epsilon(1e-2));
    CHECK(t.flags == 0);
  }

  TEST_CASE("time features flag undefined values") {
    const auto z = time_features(std::vector<double>(16, 0.0));
    CHECK((z.flags & flag_of(Feature::CrestFactor)) != 0);
    CHECK(z.crest_factor == 0.0);
    const auto c = time_features(std::vector<double>(16, 2.0));
    CHECK((c.flags & flag_of(Feature::Kurtosis)) != 0);
    CHECK((c.flags & flag_of(Feature::Skewness)) != 0);
    CHECK((c.flags & flag_of(Feature::CrestFactor)) == 0);
    CHECK(c.kurtosis == 0.0);
    CHECK_THROWS_AS(time_features(std::vector<double>{1.0}), LengthError);
  }

  TEST_CASE("mode features worked examples") {
    const auto m = mode_features(std::vector<double>{1, 1, 1, 9}, 4);
    CHECK(m.stat_mode == doctest::Approx(2.0));  // centre of [1, 3)
    CHECK(m.stat_mode_sd == 0.0);
    const auto c = mode_features(std::vector<double>(8, 4.5), 4);
    CHECK(c.stat_mode == 4.5);
    CHECK(c.stat_mode_sd == 0.0);
    // two equal clusters at the ends of the range
    const auto t = mode_features(std::vector<double>{0, 0.1, 0.2, 9.8, 9.9, 10}, 5);
    CHECK(t.stat_mode == doctest::Approx(1.0));
    CHECK(t.stat_mode_sd == doctest::Approx(std::sqrt(0.02 / 3.0)));
  }

  TEST_CASE("freq features: single tone and uniform spectrum") {
    PowerSpectrum p;
    p.bin_hz = 10.0;
    p.bins.assign(513, 0.0);
    p.bins[77] = 2.0;  // 770 Hz, inside the first tooth-pass band
    auto pf = default_pf(p.bin_hz);
    auto f = freq_features(p, pf);
    CHECK(f.center_freq == doctest::Approx(770.0));
    CHECK(f.dominant_freq == doctest::Approx(770.0));
    CHECK(f.spectral_entropy == doctest::Approx(0.0));
    CHECK(f.rel_aperiodic_energy == doctest::Approx(0.0));

    const auto u = freq_features(flat_psd(300, 10.0), pf);
    CHECK(u.spectral_entropy == doctest::Approx(std::log2(300.0)).epsilon(1e-12));
    CHECK(u.dominant_freq == 0.0);  // ties go to the lowest bin

    PowerSpectrum z;
    z.bin_hz = 10.0;
    z.bins.assign(100, 0.0);
    const auto zf = freq_features(z, pf);
    CHECK((zf.flags & flag_of(Feature::SpectralEntropy)) != 0);
    CHECK((zf.flags & flag_of(Feature::RelAperiodicEnergy)) != 0);
    CHECK(zf.center_freq == 0.0);
  }

  TEST_CASE("freq features: in-band plus out-of-band tone") {
    const double dt = kDefaultSampleInterval;
    WindowConfig wc;
    const double bin = 1.0 / (wc.frame_len * dt);
    auto pf = default_pf(bin);
    // nearest bin to 2 x tooth-pass, and a tone well between harmonics
    const double in_band = std::round(2 * pf.tooth_pass_hz / bin) * bin;
    const double out_band = std::round(5500.0 / bin) * bin;
    auto x = testing::tone(8192, in_band, dt);
    const auto y = testing::tone(8192, out_band, dt);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
    const auto f = freq_features(welch_psd(x, dt, wc), pf);
    CHECK(f.rel_aperiodic_energy == doctest::Approx(0.5).epsilon(0.04));
    CHECK(f.periodic_energy + f.aperiodic_energy == doctest::Approx(welch_psd(x, dt, wc).total_power()));
  }

  TEST_CASE("harmonic band mask") {
    PowerSpectrum p = flat_psd(513, 15.0);
    ProcessFrequencies pf;
    pf.spindle_hz = 100.0;
    pf.tooth_pass_hz = 400.0;
    pf.n_harmonics = 3;
    pf.tolerance_hz = 15.0;
    const auto mask = harmonic_band_mask(p, pf);
    for (std::size_t i = 0; i < p.n_bins(); ++i) {
      const double f = p.frequency(i);
      bool want = false;
      for (int m = 1; m <= 3; ++m)
        want |= std::fabs(f - 100.0 * m) <= 15.0 || std::fabs(f - 400.0 * m) <= 15.0;
      CHECK(mask[i] == want);
    }
  }

  TEST_CASE("autocorrelation") {
    std::vector<double> sq(4000);
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (i / 10) % 2 ? 1.0 : -1.0;
    CHECK(autocorr(sq, 20) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(autocorr(sq, 10) == doctest::Approx(-1.0).epsilon(0.01));
    const auto g = testing::gaussian(4096, 31);
    CHECK(autocorr(g, 0) == doctest::Approx(1.0));
    for (int s = 0; s < 20; ++s) {
      const auto w = testing::gaussian(8192, 400 + s);
      CHECK(std::fabs(autocorr(w, 7)) < 4.5 / std::sqrt(8192.0));
    }
    bool flagged = false;
    CHECK(autocorr(std::vector<double>(64, 3.0), 3, &flagged) == 0.0);
    CHECK(flagged);
    CHECK_THROWS_AS(autocorr(std::vector<double>(8, 1.0), 8), ParameterError);
  }

  TEST_CASE("higuchi fractal dimension") {
    std::vector<double> ramp(4096);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i) / 4095.0;
    CHECK(higuchi_fd(ramp, 16) == doctest::Approx(1.0).epsilon(0.05));
    for (int s = 0; s < 50; ++s) {
      const auto w = testing::gaussian(4096, 700 + s);
      const double fd = higuchi_fd(w, 16);
      CHECK(fd == doctest::Approx(2.0).epsilon(0.075));
      CHECK(fd == doctest::Approx(oracle::higuchi(w, 16)).epsilon(1e-9));
    }
    const auto sine = testing::tone(4096, 50.0, 1e-4);
    const double fs = higuchi_fd(sine, 16);
    CHECK(fs >= 1.0);
    CHECK(fs <= 1.3);
    bool flagged = false;
    CHECK(higuchi_fd(std::vector<double>(256, 1.0), 16, &flagged) == 1.0);
    CHECK(flagged);
    CHECK_THROWS_AS(higuchi_fd(std::vector<double>(40, 1.0), 16), LengthError);
  }

  TEST_CASE("window config") {
    FeatureWindowConfig c;
    CHECK_NOTHROW(c.validate());
    const auto pf = default_pf(15.0);
    const auto r = c.resolved(1.0 / kDefaultSampleInterval, pf);
    CHECK(r.autocorr_lag == 20);  // 15384.6 Hz / 769.3 Hz
    c.higuchi_kmax = 1;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.autocorr_lag = c.window_len;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.hop = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
  }

  TEST_CASE("extract window counts and times") {
    FeatureWindowConfig c;
    c.window_len = 2048;
    c.hop = 1024;
    WindowConfig wc;
    const double dt = kDefaultSampleInterval;
    const auto pf = default_pf(1.0 / (wc.frame_len * dt));
    CHECK(extract(testing::gaussian(2048, 1), dt, c, wc, pf).size() == 1);
    const auto two = extract(testing::gaussian(3072, 1), dt, c, wc, pf, "cy", 1.5);
    REQUIRE(two.size() == 2);
    CHECK(two[1].t_start_s == doctest::Approx(1.5 + 1024 * dt));
    CHECK(two[0].cycle_id == "cy");
    CHECK_THROWS_AS(extract(testing::gaussian(2047, 1), dt, c, wc, pf), LengthError);
    c.window_len = 512;
    c.mode_bins = 64;
    CHECK_THROWS_AS(extract(testing::gaussian(4096, 1), dt, c, wc, pf), ParameterError);
  }

  TEST_CASE("every feature matches the naive oracle") {
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
      FeatureWindowConfig c;
      c.window_len = 512 + rng.below(1024);
      c.mode_bins = 8 + rng.below(60);
      c.autocorr_lag = 1 + rng.below(40);
      c.higuchi_kmax = 4 + rng.below(13);
      WindowConfig wc;
      wc.frame_len = 128;
      wc.hop = 128;
      const double dt = kDefaultSampleInterval;
      const double bin = 1.0 / (wc.frame_len * dt);
      const auto pf = default_pf(bin);
      auto x = testing::gaussian(c.window_len, 2000 + trial);
      const auto t = testing::tone(c.window_len, pf.tooth_pass_hz, dt, 2.0, rng.uniform() * 6);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += t[i] + 0.3;

      const auto fv = compute_features(x, dt, c, wc, pf);
      const auto m = oracle::moments(x);
      CHECK(oracle::rel_err(fv[Feature::Mean], m.mean) < 1e-9);
      CHECK(oracle::rel_err(fv[Feature::Rms], m.rms) < 1e-9);
      CHECK(oracle::rel_err(fv[Feature::Sd], m.sd) < 1e-9);
      CHECK(oracle::rel_err(fv[Feature::CrestFactor], m.crest) < 1e-9);
      CHECK(oracle::rel_err(fv[Feature::Kurtosis], m.kurtosis) < 1e-9);
      CHECK(std::fabs(fv[Feature::Skewness] - m.skewness) < 1e-9);
      CHECK(oracle::rel_err(fv[Feature::P2P], m.p2p) < 1e-12);
      const auto [mode, mode_sd] = oracle::mode(x, c.mode_bins);
      CHECK(oracle::rel_err(fv[Feature::StatMode], mode) < 1e-9);
      CHECK(std::fabs(fv[Feature::StatModeSd] - mode_sd) < 1e-9);

      const auto psd = oracle::welch(x, wc.frame_len, 1, wc.welch_overlap);
      const auto s = oracle::spectral(psd, bin, pf.spindle_hz, pf.tooth_pass_hz, pf.n_harmonics,
                                      pf.tolerance_hz);
      CHECK(oracle::rel_err(fv[Feature::CenterFreq], s.center) < 1e-9);
      CHECK(fv[Feature::DominantFreq] == doctest::Approx(s.dominant));
      CHECK(oracle::rel_err(fv[Feature::PsdEnergy], s.energy) < 1e-9);
      CHECK(oracle::rel_err(fv[Feature::SpectralEntropy], s.entropy) < 1e-9);
      CHECK(oracle::rel_err(fv[Feature::PeriodicEnergy], s.periodic) < 1e-9);
      CHECK(oracle::rel_err(fv[Feature::AperiodicEnergy], s.aperiodic) < 1e-9);
      CHECK(oracle::rel_err(fv[Feature::RelAperiodicEnergy], s.rel_aperiodic) < 1e-9);
      CHECK(std::fabs(fv[Feature::Autocorr] - oracle::autocorr(x, c.autocorr_lag)) < 1e-9);
      CHECK(oracle::rel_err(fv[Feature::HiguchiFd], oracle::higuchi(x, c.higuchi_kmax)) < 1e-6);
    }
  }

  TEST_CASE("invariants: shift and scale behaviour, ranges") {
    FeatureWindowConfig c;
    c.window_len = 2048;
    c.autocorr_lag = 20;
    WindowConfig wc;
    const double dt = kDefaultSampleInterval;
    const auto pf = default_pf(1.0 / (wc.frame_len * dt));
    const auto x = testing::gaussian(2048, 55);
    const auto base = compute_features(x, dt, c, wc, pf);
    const double a = 3.7, off = 1.25;
    std::vector<double> y(x);
    for (auto& v : y) v = a * v + off;
    const auto fy = compute_features(y, dt, c, wc, pf);
    CHECK(fy[Feature::Mean] == doctest::Approx(a * base[Feature::Mean] + off));
    CHECK(fy[Feature::Sd] == doctest::Approx(a * base[Feature::Sd]));
    CHECK(fy[Feature::P2P] == doctest::Approx(a * base[Feature::P2P]));
    CHECK(fy[Feature::Kurtosis] == doctest::Approx(base[Feature::Kurtosis]));
    CHECK(fy[Feature::Skewness] == doctest::Approx(base[Feature::Skewness]));
    CHECK(fy[Feature::Autocorr] == doctest::Approx(base[Feature::Autocorr]));
    CHECK(fy[Feature::HiguchiFd] == doctest::Approx(base[Feature::HiguchiFd]));
    CHECK(fy[Feature::StatMode] == doctest::Approx(a * base[Feature::StatMode] + off));
    CHECK(fy[Feature::StatModeSd] == doctest::Approx(a * base[Feature::StatModeSd]));
    CHECK(base[Feature::Rms] <= std::sqrt(base[Feature::Mean] * base[Feature::Mean] +
                                          base[Feature::Sd] * base[Feature::Sd]) + 1e-12);
    CHECK(base[Feature::SpectralEntropy] >= 0.0);
    CHECK(base[Feature::SpectralEntropy] <= std::log2(static_cast<double>(wc.frame_len / 2 + 1)) + 1e-12);
    CHECK(base[Feature::RelAperiodicEnergy] >= 0.0);
    CHECK(base[Feature::RelAperiodicEnergy] <= 1.0);
    CHECK(std::fabs(base[Feature::Autocorr]) <= 1.0);
  }
}
