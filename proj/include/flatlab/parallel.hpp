#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace flatlab {

// Execution lane for the data-parallel kernels.  Every parallel kernel has a
// serial twin used as the reference in tests; both fill per-item output slots
// so results are bit-identical regardless of lane or thread count.
enum class Exec { Serial, OpenMP };

// Exceptions may not unwind out of an OpenMP region; the first one thrown is
// captured and rethrown after the loop.
template <typename F>
void for_each_index(std::size_t n, Exec exec, F&& body) {
    if (exec == Exec::OpenMP) {
        std::exception_ptr error;
        std::mutex error_mutex;
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }
}

}  // namespace flatlab
