#pragma once

namespace dcolor {

/// Worker count used by internally parallel loops. Initialised from the
/// DCOLOR_THREADS environment variable (0 or unset = hardware concurrency).
int thread_count();

/// Overrides the worker count; 0 restores the automatic choice.
void set_thread_count(int threads);

}  // namespace dcolor
