#pragma once

#include <cstdint>

namespace stheat {

// Global operation counter used as the linear-complexity certificate.
inline thread_local std::uint64_t g_op_count = 0;

inline void count_ops(std::uint64_t n = 1) { g_op_count += n; }
inline std::uint64_t op_count() { return g_op_count; }
inline void reset_op_count() { g_op_count = 0; }

}  // namespace stheat
