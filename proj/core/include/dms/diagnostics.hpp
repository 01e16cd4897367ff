#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dms {

/// A numerical procedure could not deliver its contract (nonconvergence,
/// insufficient margin, bracket without sign change, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Warnings go to stderr unless a sink is installed.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

/// Upper bound on worker threads used by the parallel helpers (default 1).
void set_max_threads(unsigned n);
unsigned max_threads();

}  // namespace dms
