#include <atomic>
#include <cstdlib>
#include <string>

#include "lyapnav/error.hpp"
#include "lyapnav/kernels.hpp"

namespace lyapnav::kernels {
namespace {

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpy, &scalar::lerp,
                                   &scalar::adam_update};
#if defined(LYAPNAV_HAVE_AVX2)
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpy, &avx2::lerp, &avx2::adam_update};
#endif

bool cpu_has_avx2() noexcept {
#if defined(LYAPNAV_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() noexcept {
  if (const char* forced = std::getenv("LYAPNAV_KERNELS")) {
    const std::string name(forced);
    if (name == "scalar") return Backend::scalar;
    if (name == "avx2" && cpu_has_avx2()) return Backend::avx2;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() noexcept {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

}  // namespace

std::string_view backend_name(Backend backend) noexcept {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend backend) noexcept {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return cpu_has_avx2();
  }
  return false;
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void select_backend(Backend backend) {
  if (!backend_available(backend)) {
    throw UsageError("kernel backend '" + std::string(backend_name(backend)) +
                     "' is not available on this build or CPU");
  }
  current().store(backend, std::memory_order_relaxed);
}

const KernelTable& table_for(Backend backend) {
  if (!backend_available(backend)) {
    throw UsageError("kernel backend '" + std::string(backend_name(backend)) +
                     "' is not available on this build or CPU");
  }
#if defined(LYAPNAV_HAVE_AVX2)
  if (backend == Backend::avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

const KernelTable& table() noexcept {
#if defined(LYAPNAV_HAVE_AVX2)
  if (active_backend() == Backend::avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

}  // namespace lyapnav::kernels
