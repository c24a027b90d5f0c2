#include "simmst/fft.hpp"

#include <cmath>

namespace simmst {

void fft_complex(std::vector<std::complex<double>>& a) {
  size_t n = a.size();
  if (n <= 1) return;
  if (n % 2 != 0) {
    // Odd length: direct DFT. Reached only at the bottom of the radix-2
    // recursion (or immediately for odd inputs).
    std::vector<std::complex<double>> out(n);
    for (size_t k = 0; k < n; ++k) {
      std::complex<double> s(0.0, 0.0);
      for (size_t t = 0; t < n; ++t)
        s += a[t] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k * t) /
                                        static_cast<double>(n));
      out[k] = s;
    }
    a = std::move(out);
    return;
  }
  std::vector<std::complex<double>> even(n / 2), odd(n / 2);
  for (size_t i = 0; i < n / 2; ++i) {
    even[i] = a[2 * i];
    odd[i] = a[2 * i + 1];
  }
  fft_complex(even);
  fft_complex(odd);
  for (size_t k = 0; k < n / 2; ++k) {
    std::complex<double> tw =
        std::polar(1.0, -2.0 * M_PI * static_cast<double>(k) /
                            static_cast<double>(n)) *
        odd[k];
    a[k] = even[k] + tw;
    a[k + n / 2] = even[k] - tw;
  }
}

namespace {

std::vector<double>& ensure_grad(detail::TensorState& st) {
  if (st.grad.empty()) st.grad.assign(st.values.size(), 0.0);
  return st.grad;
}

}  // namespace

Spectrum real_fft(const Tensor& x) {
  if (!x.defined()) throw ContractError("real_fft: undefined tensor");
  int64_t n = x.dim(-1);
  int64_t rows = x.numel() / n;
  int64_t bins = n / 2 + 1;
  Shape out_shape = x.shape();
  out_shape.back() = bins;
  Tensor re(out_shape), im(out_shape);
  const auto& xv = x.values();
  auto& rv = re.values_mut();
  auto& iv = im.values_mut();
  std::vector<std::complex<double>> buf(n);
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t t = 0; t < n; ++t) buf[t] = {xv[r * n + t], 0.0};
    fft_complex(buf);
    for (int64_t k = 0; k < bins; ++k) {
      rv[r * bins + k] = buf[k].real();
      iv[r * bins + k] = buf[k].imag();
    }
  }
  Tape* tp = Tape::active();
  if (tp) {
    int64_t nx = tp->node_of(x);
    if (nx >= 0) {
      auto xs = x.state();
      // Two nodes, one per output half; each accumulates its own adjoint.
      // d x_t = sum_k dRe_k cos(2 pi k t / n) - sum_k dIm_k sin(2 pi k t / n)
      auto rs = re.state();
      tp->record(re, "real_fft.re", {nx}, [xs, rs, rows, n, bins]() {
        const auto& gy = rs->grad;
        auto& gx = ensure_grad(*xs);
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t t = 0; t < n; ++t) {
            double s = 0.0;
            for (int64_t k = 0; k < bins; ++k)
              s += gy[r * bins + k] *
                   std::cos(2.0 * M_PI * static_cast<double>(k * t) /
                            static_cast<double>(n));
            gx[r * n + t] += s;
          }
      });
      auto is = im.state();
      tp->record(im, "real_fft.im", {nx}, [xs, is, rows, n, bins]() {
        const auto& gy = is->grad;
        auto& gx = ensure_grad(*xs);
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t t = 0; t < n; ++t) {
            double s = 0.0;
            for (int64_t k = 0; k < bins; ++k)
              s += gy[r * bins + k] *
                   std::sin(2.0 * M_PI * static_cast<double>(k * t) /
                            static_cast<double>(n));
            gx[r * n + t] -= s;
          }
      });
    }
  }
  return {re, im};
}

Tensor inverse_real_fft(const Spectrum& s, int64_t n) {
  if (!s.re.defined() || !s.im.defined())
    throw ContractError("inverse_real_fft: undefined spectrum");
  if (n < 1) throw DimensionError("inverse_real_fft needs n >= 1");
  if (s.re.shape() != s.im.shape())
    throw DimensionError("spectrum halves differ: " +
                         shape_to_string(s.re.shape()) + " vs " +
                         shape_to_string(s.im.shape()));
  int64_t bins = n / 2 + 1;
  if (s.re.dim(-1) != bins)
    throw DimensionError("spectrum has " + std::to_string(s.re.dim(-1)) +
                         " bins, expected " + std::to_string(bins) +
                         " for length " + std::to_string(n));
  int64_t rows = s.re.numel() / bins;
  Shape out_shape = s.re.shape();
  out_shape.back() = n;
  Tensor out(out_shape);
  const auto& rv = s.re.values();
  const auto& iv = s.im.values();
  auto& ov = out.values_mut();
  std::vector<std::complex<double>> buf(n);
  bool even = (n % 2 == 0);
  for (int64_t r = 0; r < rows; ++r) {
    // Hermitian extension; im of bin 0 (and Nyquist for even n) is dropped.
    buf[0] = {rv[r * bins], 0.0};
    for (int64_t k = 1; k < bins; ++k) {
      double a = rv[r * bins + k];
      double b = (even && k == n / 2) ? 0.0 : iv[r * bins + k];
      buf[k] = {a, b};
      if (k != n - k) buf[n - k] = {a, -b};
    }
    // ifft(X) = conj(fft(conj(X))) / n; the imaginary residue of a Hermitian
    // spectrum is rounding noise and is discarded.
    for (auto& c : buf) c = std::conj(c);
    fft_complex(buf);
    for (int64_t t = 0; t < n; ++t)
      ov[r * n + t] = buf[t].real() / static_cast<double>(n);
  }
  Tape* tp = Tape::active();
  if (tp) {
    int64_t nr = tp->node_of(s.re), ni = tp->node_of(s.im);
    if (nr >= 0 || ni >= 0) {
      auto res = s.re.state(), ims = s.im.state(), os = out.state();
      bool wr = nr >= 0, wi = ni >= 0;
      tp->record(out, "inverse_real_fft", {nr, ni},
                 [res, ims, os, wr, wi, rows, n, bins, even]() {
                   const auto& gy = os->grad;
                   double* gr = wr ? ensure_grad(*res).data() : nullptr;
                   double* gi = wi ? ensure_grad(*ims).data() : nullptr;
                   double inv_n = 1.0 / static_cast<double>(n);
                   for (int64_t r = 0; r < rows; ++r)
                     for (int64_t k = 0; k < bins; ++k) {
                       bool edge = (k == 0) || (even && k == n / 2);
                       double cr = 0.0, ci = 0.0;
                       for (int64_t t = 0; t < n; ++t) {
                         double ang = 2.0 * M_PI * static_cast<double>(k * t) /
                                      static_cast<double>(n);
                         double g = gy[r * n + t];
                         cr += g * std::cos(ang);
                         ci += g * std::sin(ang);
                       }
                       double w = edge ? inv_n : 2.0 * inv_n;
                       if (gr) gr[r * bins + k] += w * cr;
                       if (gi && !edge) gi[r * bins + k] -= w * ci;
                     }
                 });
    }
  }
  return out;
}

}  // namespace simmst
