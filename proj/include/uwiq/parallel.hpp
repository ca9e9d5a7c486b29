#pragma once

namespace uwiq::par {

// Execution mode for the compute kernels. Every OpenMP kernel has a serial
// reference twin; both produce bit-identical output for any thread count,
// so the mode is a pure performance knob.
enum class Mode { serial, openmp };

Mode mode() noexcept;
void set_mode(Mode m) noexcept;

// Thread count for OpenMP kernels. 0 keeps the runtime default.
void set_threads(int n) noexcept;
int threads() noexcept;

bool openmp_available() noexcept;

}  // namespace uwiq::par
