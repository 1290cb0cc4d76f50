#include "semshift/error.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace semshift {
namespace {

std::mutex g_warning_mutex;
WarningHandler g_warning_handler;

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(g_warning_mutex);
  return std::exchange(g_warning_handler, std::move(handler));
}

void warn(std::string_view message) {
  WarningHandler handler;
  {
    std::lock_guard<std::mutex> lock(g_warning_mutex);
    handler = g_warning_handler;
  }
  if (handler) {
    handler(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace semshift
