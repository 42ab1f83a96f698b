#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace armcs {

/// Serial is the reference path; Parallel distributes indices over OpenMP
/// threads. Both produce identical results because every index writes only
/// its own output slot.
enum class Execution { Serial, Parallel };

/// Calls body(i) for i in [0, count). If any call throws, the exception from
/// the lowest failing index is rethrown after the loop, in either mode.
template <typename Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  if (exec == Execution::Serial) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace armcs
