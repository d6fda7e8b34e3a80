#include <cstdlib>
#include <string>

#include "captive/error.hpp"
#include "captive/kernels.hpp"

namespace captive::kernels {

#ifdef CAPTIVE_HAVE_AVX2
extern const KernelTable kAvx2Table;
#endif

const char* to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable* avx2_table() noexcept {
#if defined(CAPTIVE_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& select(std::string_view name) {
  if (name == "scalar") return scalar_table();
  if (name == "avx2") {
    if (const KernelTable* t = avx2_table()) return *t;
    throw ConfigError("AVX2 kernels requested but not available on this build or CPU");
  }
  throw ConfigError("unknown kernel set '" + std::string(name) + "' (expected scalar or avx2)");
}

const KernelTable& active() noexcept {
  static const KernelTable& table = [] () -> const KernelTable& {
    if (const char* env = std::getenv("CAPTIVE_SIMD"); env != nullptr && *env != '\0') {
      const std::string_view name(env);
      if (name == "scalar") return scalar_table();
      if (name == "avx2" && avx2_table() != nullptr) return *avx2_table();
    }
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
  }();
  return table;
}

}  // namespace captive::kernels
