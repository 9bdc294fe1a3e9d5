#include <algorithm>
#include <cmath>
#include <string>

#include "cogsl/error.hpp"
#include "cogsl/kernels.hpp"

#define COGSL_PARALLEL_FOR

namespace cogsl::kernels::serial {
#include "kernels_impl.inc"
}  // namespace cogsl::kernels::serial
