#include "semcomm/core/logging.h"

#include <cstdlib>
#include <spdlog/sinks/stdout_color_sinks.h>

namespace semcomm {

void init_logging()
{
    static bool done = false;
    if (done) return;
    done = true;
    auto logger = spdlog::stderr_color_mt("semcomm");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("SEMCOMM_LOG_LEVEL")) {
        spdlog::set_level(spdlog::level::from_str(level));
    }
}

}  // namespace semcomm
