#include "rnnq/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace rnnq {

int configure_threads() {
    if (const char* env = std::getenv("RNNQ_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap > 0 && cap < omp_get_max_threads()) omp_set_num_threads(cap);
        } catch (const std::exception&) {
            // unparsable values leave the OpenMP default in place
        }
    }
    return worker_count();
}

int worker_count() {
    return omp_get_max_threads();
}

}  // namespace rnnq
