#pragma once

// Dense double-precision inner loops used by the network substrate.
//
// Every primitive has a portable scalar reference in `kernels::scalar` and, on
// x86-64 builds, an AVX2+FMA variant in `kernels::avx2`. The free functions in
// `kernels` forward to whichever table was selected at startup (best available
// ISA, overridable with LYAPNAV_KERNELS=scalar|avx2 or select_backend()).
//
// Equivalence contract between variants:
//  - axpy, lerp, adam_update: bit-identical (no FMA contraction, same op order).
//  - dot: reassociated reduction; agrees with scalar within a few ulps of sum|a*b|.

#include <cstddef>
#include <span>
#include <string_view>

namespace lyapnav::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend backend) noexcept;

/// Compiled in and supported by the running CPU.
bool backend_available(Backend backend) noexcept;

Backend active_backend() noexcept;

/// Throws UsageError if the backend is unavailable. Not thread-safe against
/// concurrent kernel calls; call once before training starts.
void select_backend(Backend backend);

/// Bias-corrected Adam coefficients for one step.
struct AdamCoefficients {
  double learning_rate;
  double beta1;
  double beta2;
  double epsilon;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*lerp)(double tau, const double* source, double* target, std::size_t n);
  void (*adam_update)(const AdamCoefficients& c, const double* grad, double* m, double* v,
                      double* param, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void lerp(double tau, const double* source, double* target, std::size_t n);
void adam_update(const AdamCoefficients& c, const double* grad, double* m, double* v,
                 double* param, std::size_t n);
}  // namespace scalar

#if defined(LYAPNAV_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void lerp(double tau, const double* source, double* target, std::size_t n);
void adam_update(const AdamCoefficients& c, const double* grad, double* m, double* v,
                 double* param, std::size_t n);
}  // namespace avx2
#endif

const KernelTable& table() noexcept;
const KernelTable& table_for(Backend backend);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return table().dot(a.data(), b.data(), a.size());
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  table().axpy(alpha, x.data(), y.data(), x.size());
}

/// target = (1 - tau) * target + tau * source
inline void lerp(double tau, std::span<const double> source, std::span<double> target) {
  table().lerp(tau, source.data(), target.data(), source.size());
}

inline void adam_update(const AdamCoefficients& c, std::span<const double> grad,
                        std::span<double> m, std::span<double> v, std::span<double> param) {
  table().adam_update(c, grad.data(), m.data(), v.data(), param.data(), grad.size());
}

}  // namespace lyapnav::kernels
