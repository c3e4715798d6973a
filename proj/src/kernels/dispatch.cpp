#include <cstdlib>
#include <string_view>

#include "adiab/kernels.hpp"

namespace adiab::kernels {

const Table& active() {
  static const Table& chosen = [] () -> const Table& {
    const char* env = std::getenv("ADIAB_KERNELS");
    if (env && std::string_view(env) == "scalar") return scalar_table();
    if (const Table* t = avx2_table()) return *t;
    return scalar_table();
  }();
  return chosen;
}

}  // namespace adiab::kernels
