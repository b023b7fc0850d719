#include "automap/movie/movie_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace automap::movie {

namespace {

// Native column order and the letter each column uses.
constexpr std::array<std::pair<char, Button>, 8> kNativeColumns{{
    {'A', Button::A},
    {'B', Button::B},
    {'s', Button::Select},
    {'S', Button::Start},
    {'U', Button::Up},
    {'D', Button::Down},
    {'L', Button::Left},
    {'R', Button::Right},
}};

// FM2 controller field order.
constexpr std::array<Button, 8> kFm2Columns{Button::Right, Button::Left, Button::Down, Button::Up,
                                            Button::Start, Button::Select, Button::B, Button::A};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename F>
void for_each_line(std::string_view text, F&& fn) {
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    ++number;
    fn(line, number);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
}

}  // namespace

std::string to_native_columns(ButtonSet buttons) {
  std::string s(8, '.');
  for (std::size_t i = 0; i < kNativeColumns.size(); ++i) {
    if (buttons.test(kNativeColumns[i].second)) s[i] = kNativeColumns[i].first;
  }
  return s;
}

InputMovie parse_native(std::string_view text) {
  InputMovie movie;
  for_each_line(text, [&](std::string_view raw, int line_no) {
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') return;

    const auto colon = line.find(':');
    if (movie.frames.empty() && colon != std::string_view::npos) {
      const std::string key{trim(line.substr(0, colon))};
      if (key.empty()) throw ParseError("empty header key", line_no, 1);
      movie.metadata[key] = std::string(trim(line.substr(colon + 1)));
      return;
    }

    if (line.size() != 8) {
      throw ParseError("expected 8 input columns, found " + std::to_string(line.size()), line_no);
    }
    ButtonSet buttons;
    for (std::size_t i = 0; i < 8; ++i) {
      const char c = line[i];
      if (c == kNativeColumns[i].first) {
        buttons.set(kNativeColumns[i].second);
      } else if (c != '.') {
        throw ParseError(std::string("unexpected character '") + c + "' in column " + std::to_string(i + 1) +
                             " (expected '" + kNativeColumns[i].first + "' or '.')",
                         line_no, static_cast<int>(i) + 1);
      }
    }
    movie.frames.push_back(buttons);
  });
  if (movie.frames.empty()) throw ParseError("movie has no frames", 1);
  return movie;
}

std::string write_native(const InputMovie& movie) {
  std::ostringstream out;
  for (const auto& [key, value] : movie.metadata) out << key << ": " << value << '\n';
  for (ButtonSet b : movie.frames) out << to_native_columns(b) << '\n';
  return out.str();
}

InputMovie parse_fm2(std::string_view text) {
  InputMovie movie;
  bool second_pad_warned = false;
  for_each_line(text, [&](std::string_view raw, int line_no) {
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) return;

    if (line.front() != '|') {
      const std::string_view t = trim(line);
      const auto space = t.find(' ');
      std::string key{t.substr(0, space)};
      std::string value{space == std::string_view::npos ? std::string_view{} : trim(t.substr(space + 1))};
      if (key == "savestate") throw UnsupportedFeature("savestate-anchored movies are not supported", line_no);
      movie.metadata[std::move(key)] = std::move(value);
      return;
    }

    // |commands|port0|port1|port2|
    std::vector<std::string_view> fields;
    std::size_t pos = 1;
    while (pos <= line.size()) {
      const std::size_t bar = line.find('|', pos);
      if (bar == std::string_view::npos) break;
      fields.push_back(line.substr(pos, bar - pos));
      pos = bar + 1;
    }
    if (fields.size() < 2) throw ParseError("frame line needs a command field and a controller field", line_no);

    int command = 0;
    const std::string_view cmd = trim(fields[0]);
    auto [ptr, ec] = std::from_chars(cmd.data(), cmd.data() + cmd.size(), command);
    if (ec != std::errc{} || ptr != cmd.data() + cmd.size()) {
      throw ParseError("malformed command field '" + std::string(cmd) + "'", line_no, 2);
    }
    if (command != 0) {
      // A reset on the very first frame is how most movies begin; anything else
      // changes machine state in ways a pure input list cannot express.
      const bool initial_reset = movie.frames.empty() && (command & ~0x3) == 0;
      if (!initial_reset) {
        throw UnsupportedFeature("command " + std::to_string(command) + " at frame " +
                                     std::to_string(movie.frames.size()) + " is not supported",
                                 line_no, 2);
      }
    }

    const std::string_view pad = fields[1];
    if (pad.size() != 8) throw ParseError("controller field must have 8 columns", line_no, 4);
    ButtonSet buttons;
    for (std::size_t i = 0; i < 8; ++i) {
      if (pad[i] != '.' && pad[i] != ' ') buttons.set(kFm2Columns[i]);
    }
    movie.frames.push_back(buttons);

    if (fields.size() >= 3 && !second_pad_warned) {
      const std::string_view pad2 = fields[2];
      for (char c : pad2) {
        if (c != '.' && c != ' ') {
          movie.warnings.push_back("line " + std::to_string(line_no) +
                                   ": second controller input present and ignored");
          second_pad_warned = true;
          break;
        }
      }
    }
  });
  if (movie.frames.empty()) throw ParseError("movie has no frames", 1);
  return movie;
}

InputMovie load_movie(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open movie '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const bool fm2 = path.size() >= 4 && path.compare(path.size() - 4, 4, ".fm2") == 0;
  return fm2 ? parse_fm2(buf.str()) : parse_native(buf.str());
}

}  // namespace automap::movie
