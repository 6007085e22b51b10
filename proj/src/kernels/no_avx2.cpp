#include "kvt/kernels.hpp"

namespace kvt::kernels::detail {
const Table* avx2_table() noexcept { return nullptr; }
}  // namespace kvt::kernels::detail
