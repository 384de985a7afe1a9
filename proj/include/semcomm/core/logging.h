#pragma once

#include <spdlog/spdlog.h>

namespace semcomm {

// Reads SEMCOMM_LOG_LEVEL (trace, debug, info, warn, error, off) once and
// applies it to the default logger. Defaults to warn.
void init_logging();

}  // namespace semcomm
