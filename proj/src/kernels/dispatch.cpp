#include <cstdlib>
#include <string_view>

#include "rfpme/kernels.hpp"

namespace rfpme::kernels {

#if defined(RFPME_HAVE_AVX2)
namespace avx2 {
const KernelTable& table() noexcept;
}
#endif
#if defined(RFPME_HAVE_NEON)
namespace neon {
const KernelTable& table() noexcept;
}
#endif

const KernelTable* avx2_table() noexcept {
#if defined(RFPME_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2::table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() noexcept {
#if defined(RFPME_HAVE_NEON)
  return &neon::table();
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& select() noexcept {
  const char* env = std::getenv("RFPME_KERNELS");
  const std::string_view wanted = env ? env : "auto";
  if (wanted == "scalar") return scalar_table();
  if (wanted == "avx2" || wanted == "auto")
    if (const auto* t = avx2_table()) return *t;
  if (wanted == "neon" || wanted == "auto")
    if (const auto* t = neon_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

}  // namespace rfpme::kernels
