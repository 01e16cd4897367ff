#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dms/energy.hpp"
#include "dms/minimizer.hpp"
#include "dms/profile.hpp"
#include "dms/propagate.hpp"

namespace dms::cli {

/// Parse or validation error; line is 0 when the error is not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

// One run is described by a flat "key = value" file. '#' starts a comment.
// Lists separate items by commas; an item with two numbers is a pair:
//
//   d_av     = 1
//   lambda   = 4
//   period   = 2
//   segments = 1 1, 1 -1        # length value
//   terms    = 0.25 4           # coefficient exponent
//   atoms    = 0 0.5, 1 0.5     # node weight
//   lambdas  = 0.5, 1, 2, 4
//
// See known_keys() for the full key set.
struct RunConfig {
  std::string source;  ///< file name used in messages

  Problem problem;
  std::optional<PiecewiseProfile> profile;
  SolveConfig solve;

  std::vector<double> lambdas;                     ///< sweep, threshold grids
  std::optional<std::pair<double, double>> bracket;  ///< threshold bisection
  double rel_width = 1e-3;

  PropagationConfig propagation;
  std::vector<double> epsilons{0.2, 0.1, 0.05};

  int trials = 20;

  /// Raw values by key, as written.
  std::map<std::string, std::string> values;
};

/// Keys accepted by parse_config, with a one-line description.
const std::vector<std::pair<std::string, std::string>>& known_keys();

RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

}  // namespace dms::cli
