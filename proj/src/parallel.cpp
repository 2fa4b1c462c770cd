#include "sramm/parallel.hpp"

#include <cstdlib>

namespace sramm {

unsigned default_threads() {
  if (const char* env = std::getenv("SRAMM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

}  // namespace sramm
