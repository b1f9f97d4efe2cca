#include "gengrad/parallel.hpp"

#include <cstdlib>
#include <string>

namespace gengrad {

std::size_t worker_count() {
  std::size_t n = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("GENGRAD_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) n = static_cast<std::size_t>(v);
    } catch (...) {
      // unparsable values fall back to the default
    }
  }
  return n == 0 ? 1 : n;
}

}  // namespace gengrad
