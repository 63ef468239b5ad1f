#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cdgcn/kernels.hpp"

namespace cdgcn::kernels {

#if defined(CDGCN_HAVE_AVX2)
const Ops* avx2_table();  // defined in kernels_avx2.cpp
#endif

namespace {

bool cpu_has_avx2_fma() {
#if defined(CDGCN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* resolve(std::string_view name) {
  if (name == "scalar") return &scalar_ops();
  if (name == "avx2") {
    const Ops* t = avx2_ops();
    if (!t) throw std::invalid_argument("kernel backend 'avx2' not available on this machine");
    return t;
  }
  if (name == "auto") {
    if (const Ops* t = avx2_ops()) return t;
    return &scalar_ops();
  }
  throw std::invalid_argument("unknown kernel backend '" + std::string(name) +
                              "' (expected auto, scalar or avx2)");
}

const Ops* initial_backend() {
  const char* env = std::getenv("CDGCN_KERNELS");
  return resolve(env && *env ? env : "auto");
}

const Ops*& active_slot() {
  static const Ops* active = initial_backend();
  return active;
}

}  // namespace

const Ops* avx2_ops() {
#if defined(CDGCN_HAVE_AVX2)
  return cpu_has_avx2_fma() ? avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Ops& ops() { return *active_slot(); }

void select_backend(std::string_view name) { active_slot() = resolve(name); }

std::string_view backend_name() { return ops().name; }

}  // namespace cdgcn::kernels
