#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "automap/core/types.hpp"

namespace automap::movie {

/// Controller-1 inputs, one ButtonSet per frame.
struct InputMovie {
  std::vector<ButtonSet> frames;
  /// Header fields (title, source, hash, ...). Ordered so writing is stable.
  std::map<std::string, std::string> metadata;
  /// Non-fatal findings, e.g. ignored second-controller input.
  std::vector<std::string> warnings;

  /// Input for frame t; frames past the end hold no buttons.
  ButtonSet at(FrameIndex t) const {
    return t >= 0 && static_cast<std::size_t>(t) < frames.size() ? frames[static_cast<std::size_t>(t)] : ButtonSet{};
  }
};

/// Raised for FM2 features this reader deliberately does not handle.
class UnsupportedFeature : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Native line format: optional `key: value` header lines, then one line per
/// frame of 8 columns `ABsSUDLR` (letter = pressed, `.` = released).
/// `#` comment lines and blank lines are ignored anywhere.
InputMovie parse_native(std::string_view text);
std::string write_native(const InputMovie& movie);

/// Subset of the FM2 movie format: header lines plus `|cmd|RLDUTSBA|...|` frame
/// lines. Only controller 1 is read.
InputMovie parse_fm2(std::string_view text);

/// Reads a movie file, choosing FM2 for a `.fm2` extension and native otherwise.
InputMovie load_movie(const std::string& path);

/// Single frame in native column order, e.g. `A.....L.`.
std::string to_native_columns(ButtonSet buttons);

}  // namespace automap::movie
