#pragma once

#include <string>
#include <string_view>

#include "automap/core/types.hpp"

namespace automap {

/// The sub-rectangle of the screen that scrolls; everything outside it is ignored.
struct ScrollWindow {
  int x = 0;
  int y = 0;
  int w = kScreenWidth;
  int h = kScreenHeight;

  bool valid() const { return w > 0 && h > 0 && x >= 0 && y >= 0 && x + w <= kScreenWidth && y + h <= kScreenHeight; }
  friend bool operator==(const ScrollWindow&, const ScrollWindow&) = default;
};

/// Parses `x,y,w,h`. Throws `Error` if malformed or not inside 256x240.
ScrollWindow parse_window(std::string_view text);
std::string to_string(const ScrollWindow& w);

}  // namespace automap
