#pragma once

namespace rnnq {

/// Caps OpenMP workers at RNNQ_THREADS when that variable holds a positive
/// integer. Returns the worker count in effect.
int configure_threads();

/// Worker count OpenMP will use for the next parallel region.
int worker_count();

}  // namespace rnnq
