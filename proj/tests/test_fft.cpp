#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "simmst/fft.hpp"
#include "simmst/rng.hpp"
#include "simmst/tensor.hpp"
#include "testutil.hpp"

using namespace simmst;
using testutil::max_abs_diff;
using testutil::rand_tensor;

namespace {

// Brute-force DFT, the independent route every transform is compared with.
std::vector<std::complex<double>> dft_oracle(const std::vector<double>& x) {
  size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> s(0.0, 0.0);
    for (size_t t = 0; t < n; ++t)
      s += x[t] * std::polar(1.0, -2.0 * M_PI * double(k) * double(t) / double(n));
    out[k] = s;
  }
  return out;
}

const std::vector<int64_t> kLengths = {1, 2, 3, 4, 5, 7, 8, 9, 12, 15, 16, 48};

}  // namespace

TEST_CASE("real_fft matches the brute-force DFT") {
  Rng rng(21);
  for (int64_t n : kLengths) {
    Tensor x = rand_tensor(rng, {n}, -2.0, 2.0);
    Spectrum s = real_fft(x);
    auto want = dft_oracle(x.values());
    int64_t bins = n / 2 + 1;
    REQUIRE(s.re.shape() == Shape{bins});
    REQUIRE(s.im.shape() == Shape{bins});
    for (int64_t k = 0; k < bins; ++k) {
      CHECK(s.re.values()[k] == doctest::Approx(want[k].real()).epsilon(1e-10));
      CHECK(std::fabs(s.im.values()[k] - want[k].imag()) < 1e-10);
    }
  }
}

TEST_CASE("real_fft known transforms") {
  // Constant signal: all energy in bin 0.
  int64_t n = 8;
  Tensor c = Tensor::full({n}, 3.0);
  Spectrum sc = real_fft(c);
  CHECK(sc.re.values()[0] == doctest::Approx(24.0).epsilon(1e-12));
  for (int64_t k = 1; k <= n / 2; ++k) {
    CHECK(std::fabs(sc.re.values()[k]) < 1e-12);
    CHECK(std::fabs(sc.im.values()[k]) < 1e-12);
  }

  // Impulse: flat spectrum.
  std::vector<double> imp(n, 0.0);
  imp[0] = 1.0;
  Spectrum si = real_fft(Tensor({n}, imp));
  for (int64_t k = 0; k <= n / 2; ++k) {
    CHECK(si.re.values()[k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(si.im.values()[k]) < 1e-12);
  }

  // cos concentrates in its own bin with weight n/2; sin lands in -im.
  std::vector<double> cosv(n), sinv(n);
  for (int64_t t = 0; t < n; ++t) {
    cosv[t] = std::cos(2.0 * M_PI * 2.0 * t / n);
    sinv[t] = std::sin(2.0 * M_PI * 2.0 * t / n);
  }
  Spectrum scos = real_fft(Tensor({n}, cosv));
  Spectrum ssin = real_fft(Tensor({n}, sinv));
  for (int64_t k = 0; k <= n / 2; ++k) {
    double want_re = (k == 2) ? n / 2.0 : 0.0;
    double want_im = (k == 2) ? -n / 2.0 : 0.0;
    CHECK(std::fabs(scos.re.values()[k] - want_re) < 1e-12);
    CHECK(std::fabs(scos.im.values()[k]) < 1e-12);
    CHECK(std::fabs(ssin.re.values()[k]) < 1e-12);
    CHECK(std::fabs(ssin.im.values()[k] - want_im) < 1e-12);
  }
}

TEST_CASE("Parseval identity") {
  Rng rng(33);
  for (int64_t n : kLengths) {
    Tensor x = rand_tensor(rng, {n}, -1.0, 1.0);
    Spectrum s = real_fft(x);
    double time_energy = 0.0;
    for (double v : x.values()) time_energy += v * v;
    double freq_energy = 0.0;
    int64_t bins = n / 2 + 1;
    for (int64_t k = 0; k < bins; ++k) {
      double p = s.re.values()[k] * s.re.values()[k] +
                 s.im.values()[k] * s.im.values()[k];
      bool edge = (k == 0) || (n % 2 == 0 && k == n / 2);
      freq_energy += edge ? p : 2.0 * p;
    }
    freq_energy /= static_cast<double>(n);
    CHECK(freq_energy == doctest::Approx(time_energy).epsilon(1e-10));
  }
}

TEST_CASE("round trip inverse_real_fft(real_fft(x)) == x") {
  Rng rng(55);
  for (int64_t n : kLengths) {
    Tensor x = rand_tensor(rng, {n}, -3.0, 3.0);
    Tensor back = inverse_real_fft(real_fft(x), n);
    REQUIRE(back.shape() == x.shape());
    CHECK(max_abs_diff(back.values(), x.values()) < 1e-9);
  }
  // Multi-row input: transform applies to the last axis independently.
  Tensor m = rand_tensor(rng, {3, 2, 12});
  Tensor mb = inverse_real_fft(real_fft(m), 12);
  CHECK(max_abs_diff(mb.values(), m.values()) < 1e-9);
}

TEST_CASE("inverse_real_fft ignores the dead imaginary parts") {
  Rng rng(77);
  for (int64_t n : std::vector<int64_t>{4, 8, 5}) {
    Tensor x = rand_tensor(rng, {n});
    Spectrum s = real_fft(x);
    Tensor y0 = inverse_real_fft(s, n);
    auto imv = s.im.values();
    imv[0] = 123.0;
    if (n % 2 == 0) imv[n / 2] = -77.0;
    Spectrum poked{s.re, Tensor(s.im.shape(), imv)};
    Tensor y1 = inverse_real_fft(poked, n);
    CHECK(max_abs_diff(y0.values(), y1.values()) == 0.0);
  }
}

TEST_CASE("spectrum shape contracts") {
  Tensor x({8}, std::vector<double>(8, 1.0));
  Spectrum s = real_fft(x);
  CHECK_THROWS_AS(inverse_real_fft(s, 12), DimensionError);
  CHECK_THROWS_AS(inverse_real_fft(s, 0), DimensionError);
  Spectrum bad{s.re, Tensor({3})};
  CHECK_THROWS_AS(inverse_real_fft(bad, 8), DimensionError);
}

TEST_CASE("length-1 and length-2 edge transforms") {
  Tensor one({1}, {4.0});
  Spectrum s1 = real_fft(one);
  CHECK(s1.re.values()[0] == 4.0);
  CHECK(s1.im.values()[0] == 0.0);
  CHECK(inverse_real_fft(s1, 1).values()[0] == doctest::Approx(4.0));

  Tensor two({2}, {1.0, 5.0});
  Spectrum s2 = real_fft(two);
  CHECK(s2.re.values()[0] == doctest::Approx(6.0));
  CHECK(s2.re.values()[1] == doctest::Approx(-4.0));
  Tensor b2 = inverse_real_fft(s2, 2);
  CHECK(max_abs_diff(b2.values(), two.values()) < 1e-12);
}
