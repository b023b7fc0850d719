#include "automap/core/window.hpp"

#include <array>
#include <charconv>

namespace automap {

ScrollWindow parse_window(std::string_view text) {
  std::array<int, 4> v{};
  std::size_t field = 0;
  std::size_t pos = 0;
  bool ok = true;
  while (ok) {
    const std::size_t comma = text.find(',', pos);
    const std::string_view part = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (field == v.size()) {
      ok = false;
      break;
    }
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v[field]);
    ok = !part.empty() && ec == std::errc{} && ptr == part.data() + part.size();
    ++field;
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (!ok || field != v.size()) throw Error("scroll window must be x,y,w,h; got '" + std::string(text) + "'");
  ScrollWindow w{v[0], v[1], v[2], v[3]};
  if (!w.valid()) throw Error("scroll window " + to_string(w) + " is not inside the 256x240 screen");
  return w;
}

std::string to_string(const ScrollWindow& w) {
  return std::to_string(w.x) + "," + std::to_string(w.y) + "," + std::to_string(w.w) + "," + std::to_string(w.h);
}

}  // namespace automap
