#include "rebound/log.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace rebound {

namespace {

std::mutex sink_mutex;

WarningSink& current_sink() {
    static WarningSink sink = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
    return sink;
}

} // namespace

WarningSink set_warning_sink(WarningSink sink) {
    std::lock_guard lock(sink_mutex);
    auto previous = std::move(current_sink());
    current_sink() = std::move(sink);
    return previous;
}

void warn(std::string_view message) {
    std::lock_guard lock(sink_mutex);
    if (current_sink()) current_sink()(message);
}

} // namespace rebound
