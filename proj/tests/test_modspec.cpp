// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "ndtpf/error.hpp"
#include "ndtpf/modspec.hpp"
#include "ndtpf/rng.hpp"
#include "oracles.hpp"

using namespace ndtpf;

namespace {

MeanRemovedContour centered(std::vector<double> v) {
  MeanRemovedContour m;
  m.voicing.assign(v.size(), true);
  m.centered = std::move(v);
  return m;
}

F0Contour random_contour(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double x = rng.uniform(50.0, 75.0);
  for (auto& y : v) {
    x += 0.3 * rng.normal();
    y = x;
  }
  return F0Contour(v);
}

}  // namespace

TEST_CASE("segment count") {
  const StftConfig cfg;
  CHECK(cfg.bins() == 49);
  for (int offset : {0, 1, 47})
    for (std::size_t len : {1u, 2u, 48u, 96u, 97u, 500u}) {
      const std::size_t head = 48 + static_cast<std::size_t>(offset);
      CHECK(segment_count(len, cfg, offset) == (head + len - 1 + 47) / 48);
    }
  CHECK_THROWS_AS(segment_count(0, cfg, 0), InvalidArgument);
  CHECK_THROWS_AS(segment_count(10, cfg, 48), InvalidArgument);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((StftConfig{96, 40}.validate()), InvalidArgument);
  CHECK_THROWS_AS((StftConfig{2, 1}.validate()), InvalidArgument);
  CHECK_NOTHROW((StftConfig{4, 2}.validate()));
}

TEST_CASE("zero input has a zero spectrum and floor log power") {
  const StftConfig cfg;
  const auto m = centered(std::vector<double>(96, 0.0));
  const auto frames = stft(m, cfg, 0);
  for (const auto& z : frames.data) CHECK(z == std::complex<double>(0.0, 0.0));
  const auto ms = extract_ms(m, cfg, 0);
  for (double lp : ms.log_power.data)
    CHECK(lp == doctest::Approx(std::log(1e-12)).epsilon(1e-15));
  for (double ph : ms.phase.data) CHECK(ph == 0.0);
  CHECK(std::log(1e-12) == doctest::Approx(-27.631021).epsilon(1e-7));
}

TEST_CASE("mean removal zeroes a constant contour's spectrum") {
  const auto m = remove_mean(F0Contour(std::vector<double>(150, 64.0)));
  const auto frames = stft(m, StftConfig{}, 5);
  for (const auto& z : frames.data) CHECK(std::abs(z) < 1e-10);
}

TEST_CASE("stft matches a direct DFT of windowed segments") {
  const StftConfig cfg;
  const std::size_t n = 96;
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t)
    x[t] = std::cos(2.0 * std::numbers::pi * 2.0 * static_cast<double>(t) / n);
  const auto frames = stft(centered(x), cfg, 0);
  // Head padding is 48, so segment 1 covers the signal exactly.
  const auto w = oracle::periodic_hann(n);
  std::vector<double> seg(n);
  for (std::size_t t = 0; t < n; ++t) seg[t] = w[t] * x[t];
  const auto ref = oracle::dft(seg);
  const double peak = std::abs(ref[2]);
  for (std::size_t k = 0; k < ref.size(); ++k)
    CHECK(std::abs(frames(1, k) - ref[k]) < 1e-10 * peak);
  CHECK(std::abs(frames(1, 2)) == doctest::Approx(n / 4.0).epsilon(1e-12));
  CHECK(std::abs(frames(1, 1)) == doctest::Approx(n / 8.0).epsilon(1e-12));
  CHECK(std::abs(frames(1, 3)) == doctest::Approx(n / 8.0).epsilon(1e-12));
  for (std::size_t k = 0; k < ref.size(); ++k)
    if (k < 1 || k > 3) CHECK(std::abs(frames(1, k)) <= 1e-10 * peak);

  Rng rng(8);
  std::vector<double> r(300);
  for (auto& v : r) v = rng.normal();
  const int offset = 17;
  const auto rf = stft(centered(r), cfg, offset);
  std::vector<double> padded(48 + offset, 0.0);
  padded.insert(padded.end(), r.begin(), r.end());
  padded.resize(rf.rows * 48 + 48, 0.0);
  for (std::size_t s = 0; s < rf.rows; ++s) {
    for (std::size_t t = 0; t < n; ++t) seg[t] = w[t] * padded[s * 48 + t];
    const auto sref = oracle::dft(seg);
    for (std::size_t k = 0; k < sref.size(); ++k)
      REQUIRE(std::abs(rf(s, k) - sref[k]) < 1e-9);
  }
}

TEST_CASE("log power and phase are definitional") {
  Rng rng(21);
  const auto c = random_contour(rng, 400);
  const auto m = remove_mean(c);
  const StftConfig cfg;
  const auto frames = stft(m, cfg, 3);
  const auto ms = extract_ms(m, cfg, 3);
  CHECK(ms.offset == 3);
  CHECK(ms.source_length == 400);
  CHECK(ms.source_mean == m.mean);
  for (std::size_t i = 0; i < frames.data.size(); ++i) {
    const double p = std::norm(frames.data[i]);
    const double back = std::exp(ms.log_power.data[i]) - kPowerFloor;
    CHECK(std::abs(back - p) <= 1e-9 * std::max(p, 1e-3));
    CHECK(ms.phase.data[i] > -std::numbers::pi);
    CHECK(ms.phase.data[i] <= std::numbers::pi);
  }
}

TEST_CASE("unit magnitude maps to log power near zero") {
  CHECK(std::log(1.0 + kPowerFloor) == doctest::Approx(1e-12).epsilon(1e-6));
}

TEST_CASE("windowed energy equals spectral energy per segment") {
  Rng rng(4);
  const StftConfig cfg;
  std::vector<double> x(250);
  for (auto& v : x) v = rng.normal();
  const auto frames = stft(centered(x), cfg, 9);
  const auto w = oracle::periodic_hann(96);
  std::vector<double> padded(48 + 9, 0.0);
  padded.insert(padded.end(), x.begin(), x.end());
  padded.resize(frames.rows * 48 + 48, 0.0);
  for (std::size_t s = 0; s < frames.rows; ++s) {
    double time_energy = 0.0;
    for (std::size_t t = 0; t < 96; ++t) {
      const double v = w[t] * padded[s * 48 + t];
      time_energy += v * v;
    }
    double freq = std::norm(frames(s, 0)) + std::norm(frames(s, 48));
    for (std::size_t k = 1; k < 48; ++k) freq += 2.0 * std::norm(frames(s, k));
    CHECK(freq / 96.0 == doctest::Approx(time_energy).epsilon(1e-9));
  }
}

TEST_CASE("reconstruction is exact") {
  Rng rng(77);
  const StftConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    const auto len = static_cast<std::size_t>(rng.uniform_int(192, 1500));
    const auto c = random_contour(rng, len);
    const int offset = static_cast<int>(rng.uniform_int(0, 47));
    const auto back = reconstruct(extract_ms(remove_mean(c), cfg, offset));
    REQUIRE(back.size() == len);
    for (std::size_t t = 0; t < len; ++t) REQUIRE(std::abs(back[t] - c[t]) < 1e-9);
  }
  for (std::size_t len : {1u, 2u, 5u, 47u, 48u, 95u}) {
    const auto c = random_contour(rng, len);
    const auto back = reconstruct(extract_ms(remove_mean(c), cfg, 0));
    for (std::size_t t = 0; t < len; ++t) CHECK(std::abs(back[t] - c[t]) < 1e-9);
  }
}

TEST_CASE("floor log power reconstructs the mean") {
  Rng rng(2);
  auto ms = extract_ms(remove_mean(random_contour(rng, 300)), StftConfig{}, 0);
  for (auto& lp : ms.log_power.data) lp = std::log(kPowerFloor);
  for (auto& ph : ms.phase.data) ph = rng.uniform(-3.0, 3.0);
  const auto c = reconstruct(ms);
  for (std::size_t t = 0; t < c.size(); ++t)
    CHECK(c[t] == doctest::Approx(ms.source_mean).epsilon(1e-14));
}

TEST_CASE("raising bin-1 power changes the contour and its re-analysis") {
  Rng rng(9);
  const StftConfig cfg;
  const auto c = random_contour(rng, 600);
  const auto ms = extract_ms(remove_mean(c), cfg, 0);
  auto mod = ms;
  for (std::size_t s = 0; s < mod.segments(); ++s) mod.log_power(s, 1) += 2.0;
  const auto out = reconstruct(mod);
  double diff = 0.0;
  for (std::size_t t = 0; t < c.size(); ++t)
    diff = std::max(diff, std::abs(out[t] - c[t]));
  CHECK(diff > 1e-3);
  const auto re = extract_ms(remove_mean(out), cfg, 0);
  std::size_t raised = 0, interior = 0;
  for (std::size_t s = 2; s + 2 < ms.segments(); ++s) {
    ++interior;
    if (re.log_power(s, 1) > ms.log_power(s, 1)) ++raised;
  }
  CHECK(raised * 10 >= interior * 9);
}

TEST_CASE("reconstruct rejects inconsistent shapes") {
  Rng rng(1);
  auto ms = extract_ms(remove_mean(random_contour(rng, 200)), StftConfig{}, 0);
  auto bad = ms;
  bad.phase.rows -= 1;
  bad.phase.data.resize(bad.phase.rows * bad.phase.cols);
  CHECK_THROWS_AS(reconstruct(bad), InvalidArgument);
  bad = ms;
  bad.source_length = 1000;
  CHECK_THROWS_AS(reconstruct(bad), InvalidArgument);
}

TEST_CASE("augment offsets") {
  Rng rng(6);
  const auto m = remove_mean(random_contour(rng, 300));
  const auto all = augment_offsets(m, StftConfig{});
  REQUIRE(all.size() == 48);
  for (int k = 0; k < 48; ++k) CHECK(all[static_cast<std::size_t>(k)].offset == k);

  const auto small = augment_offsets(centered({1.0, -2.0, 0.5, 0.5}), StftConfig{4, 2});
  REQUIRE(small.size() == 2);
  CHECK(small[0].log_power.data != small[1].log_power.data);

  for (int hop : {2, 3, 5, 8}) {
    Rng r(static_cast<std::uint64_t>(hop));
    const auto a =
        augment_offsets(remove_mean(random_contour(r, 100)), StftConfig{2 * hop, hop});
    CHECK(a.size() == static_cast<std::size_t>(hop));
  }
}

TEST_CASE("hop-periodic input gives offset-invariant even bins") {
  const StftConfig cfg;
  Rng rng(12);
  std::vector<double> period(48);
  for (auto& v : period) v = rng.normal();
  std::vector<double> x;
  for (int rep = 0; rep < 12; ++rep) x.insert(x.end(), period.begin(), period.end());
  const auto all = augment_offsets(remove_mean(F0Contour(x)), cfg);
  double worst = 0.0;
  for (const auto& ms : all)
    for (std::size_t s = 3; s + 3 < ms.segments() && s + 3 < all[0].segments(); ++s)
      for (std::size_t k = 0; k < ms.bins(); k += 2)
        worst = std::max(worst, std::abs(ms.log_power(s, k) - all[0].log_power(s, k)));
  CHECK(worst < 1e-9);
}

TEST_CASE("normalizer") {
  const MsNormalizer n({0}, {-10.0}, {0.0});
  CHECK(n.apply(0, -10.0) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(n.apply(0, 0.0) == doctest::Approx(0.99).epsilon(1e-15));
  CHECK(n.apply(0, -5.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(n.apply(0, -20.0) == doctest::Approx(-0.97).epsilon(1e-14));
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-40.0, 20.0);
    REQUIRE(std::abs(n.invert(0, n.apply(0, v)) - v) < 1e-9);
  }
  CHECK_THROWS_AS(MsNormalizer({0}, {1.0}, {1.0}), InvalidArgument);
}

TEST_CASE("fitted normalizer maps the corpus extremes exactly") {
  Rng rng(15);
  std::vector<ModulationSpectrum> corpus;
  for (int i = 0; i < 5; ++i)
    corpus.push_back(extract_ms(remove_mean(random_contour(rng, 300)), StftConfig{}, i));
  const auto n = fit_normalizer(corpus, {1, 2});
  REQUIRE(n.size() == 2);
  for (std::size_t slot = 0; slot < 2; ++slot) {
    double lo = 1e300, hi = -1e300;
    for (const auto& ms : corpus)
      for (std::size_t s = 0; s < ms.segments(); ++s) {
        const double v = n.apply(slot, ms.log_power(s, n.bins()[slot]));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    CHECK(lo == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(hi == doctest::Approx(0.99).epsilon(1e-12));
  }
  const auto every = fit_normalizer(corpus);
  CHECK(every.size() == 49);

  std::vector<ModulationSpectrum> flat{
      extract_ms(centered(std::vector<double>(100, 0.0)), StftConfig{}, 0)};
  CHECK_THROWS_WITH_AS(fit_normalizer(flat, {1}), doctest::Contains("bin 1"),
                       InvalidArgument);
  CHECK_THROWS_AS(fit_normalizer(std::vector<ModulationSpectrum>{}),
                  InvalidArgument);
}

TEST_CASE("ms text round trip") {
  Rng rng(31);
  const auto ms = extract_ms(remove_mean(random_contour(rng, 210)), StftConfig{}, 7);
  std::stringstream ss;
  write_ms(ss, ms);
  write_ms(ss, ms);
  std::string header;
  std::getline(std::istringstream(ss.str()), header);
  CHECK(header.rfind("#MS v1 T'=" + std::to_string(ms.segments()) +
                         " M=48 window=96 hop=48 offset=7 mean=",
                     0) == 0);
  CHECK(header.find(" srclen=210") != std::string::npos);
  ModulationSpectrum a, b, c;
  REQUIRE(read_ms(ss, a));
  REQUIRE(read_ms(ss, b));
  CHECK_FALSE(read_ms(ss, c));
  CHECK(a.log_power.data == ms.log_power.data);
  CHECK(a.phase.data == ms.phase.data);
  CHECK(a.source_mean == ms.source_mean);
  CHECK(b.offset == 7);
}

TEST_CASE("ms parser rejects malformed records") {
  Rng rng(32);
  const auto ms = extract_ms(remove_mean(random_contour(rng, 150)), StftConfig{}, 0);
  std::stringstream ss;
  write_ms(ss, ms);
  const std::string good = ss.str();
  ModulationSpectrum out;
  {
    std::istringstream in(good.substr(0, good.size() / 2));
    CHECK_THROWS_AS(read_ms(in, out), FormatError);
  }
  {
    std::istringstream in("#MS v2" + good.substr(6));
    CHECK_THROWS_AS(read_ms(in, out), FormatError);
  }
  {
    std::string bad = good;
    bad.replace(bad.find(" M=48"), 5, " M=47");
    std::istringstream in(bad);
    CHECK_THROWS_AS(read_ms(in, out), FormatError);
  }
}
