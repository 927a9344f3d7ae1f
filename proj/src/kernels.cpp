#include "dembed/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "dembed/error.hpp"

namespace dembed::kernels {
namespace {

const KernelTable* detect() {
  if (const char* env = std::getenv("DEMBED_ISA"); env != nullptr && std::string(env) == "scalar") {
    return &detail::scalar_table;
  }
  return supported(Isa::Avx2) ? &table(Isa::Avx2) : &detail::scalar_table;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{detect()};
  return ptr;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) {
    throw Error(ErrorKind::InvalidArgument, "instruction set not supported: " + std::string(to_string(isa)));
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::Avx2) return detail::avx2_table;
#endif
  return detail::scalar_table;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) { current().store(&table(isa), std::memory_order_release); }

}  // namespace dembed::kernels
