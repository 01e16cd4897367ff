#include "dms/diagnostics.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace dms {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink() {
  static WarningSink s;
  return s;
}

std::atomic<unsigned> thread_cap{1};

}  // namespace

void set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex());
  sink() = std::move(s);
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) {
    sink()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

void set_max_threads(unsigned n) { thread_cap = n == 0 ? 1 : n; }

unsigned max_threads() { return thread_cap; }

}  // namespace dms
