#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace automap {

using FrameIndex = std::int64_t;

inline constexpr int kScreenWidth = 256;
inline constexpr int kScreenHeight = 240;
inline constexpr int kTilePx = 8;
inline constexpr int kNametableCols = 32;
inline constexpr int kNametableRows = 30;
inline constexpr int kVirtualCols = 64;
inline constexpr int kVirtualRows = 60;
inline constexpr int kVirtualWidthPx = kVirtualCols * kTilePx;   // 512
inline constexpr int kVirtualHeightPx = kVirtualRows * kTilePx;  // 480
inline constexpr std::size_t kMaxSprites = 64;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text input that does not follow its grammar. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::string what, int line, int column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    std::string s = "line " + std::to_string(line);
    if (column > 0) s += ", column " + std::to_string(column);
    return s + ": " + what;
  }
  int line_;
  int column_;
};

// ---------------------------------------------------------------------------
// Buttons

enum class Button : std::uint8_t {
  A = 0,
  B = 1,
  Select = 2,
  Start = 3,
  Up = 4,
  Down = 5,
  Left = 6,
  Right = 7,
};

/// Controller state for one frame. Bit i is `Button(i)`, which is the order the
/// console shifts the pad out in, so the octet is also the hardware encoding.
class ButtonSet {
 public:
  constexpr ButtonSet() = default;
  constexpr explicit ButtonSet(std::uint8_t bits) : bits_(bits) {}
  constexpr ButtonSet(std::initializer_list<Button> buttons) {
    for (Button b : buttons) set(b);
  }

  constexpr bool test(Button b) const { return (bits_ >> static_cast<int>(b)) & 1u; }
  constexpr void set(Button b, bool on = true) {
    const auto mask = static_cast<std::uint8_t>(1u << static_cast<int>(b));
    bits_ = on ? static_cast<std::uint8_t>(bits_ | mask) : static_cast<std::uint8_t>(bits_ & ~mask);
  }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }

  friend constexpr bool operator==(ButtonSet, ButtonSet) = default;

 private:
  std::uint8_t bits_ = 0;
};

// ---------------------------------------------------------------------------
// Tiles and patterns

/// Identity of a renderable 8x8 tile.
struct TileKey {
  std::uint8_t pattern = 0;
  std::uint8_t palette = 0;  // 0-7
  std::uint16_t bank = 0;
  std::uint32_t aux = 0;

  friend constexpr auto operator<=>(const TileKey&, const TileKey&) = default;
};

/// `p:pal:bank` or `p:pal:bank:aux` when aux is non-zero.
std::string to_string(const TileKey& key);
/// Accepts the forms produced by `to_string`. Throws `Error` on malformed text.
TileKey parse_tile_key(std::string_view text);

struct TileKeyHash {
  std::size_t operator()(const TileKey& k) const noexcept {
    std::uint64_t h = (std::uint64_t{k.pattern}) | (std::uint64_t{k.palette} << 8) |
                      (std::uint64_t{k.bank} << 16) | (std::uint64_t{k.aux} << 32);
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend constexpr bool operator==(Rgb, Rgb) = default;
};

/// 8-bit luma with 0.299/0.587/0.114 weights in Q15 fixed point, rounded.
/// Registration kernels work on this quantized form so every ISA variant
/// produces bit-identical costs.
inline constexpr std::uint32_t kLumaWeightR = 9798;
inline constexpr std::uint32_t kLumaWeightG = 19235;
inline constexpr std::uint32_t kLumaWeightB = 3735;

constexpr std::uint8_t luma8(Rgb c) {
  return static_cast<std::uint8_t>((kLumaWeightR * c.r + kLumaWeightG * c.g + kLumaWeightB * c.b + 16384u) >> 15);
}

/// One 8x8 patch, row-major, with its luma precomputed.
struct Patch {
  std::array<Rgb, 64> rgb{};
  std::array<std::uint8_t, 64> luma{};

  static Patch from_rgb(const std::array<Rgb, 64>& px);
  friend bool operator==(const Patch& a, const Patch& b) { return a.rgb == b.rgb; }
};

/// Maps tile keys to their patches. Shared between observations; never mutated
/// after it has been handed out.
class PatternSheet {
 public:
  void set(const TileKey& key, const Patch& patch) { patches_[key] = patch; }
  const Patch* find(const TileKey& key) const {
    auto it = patches_.find(key);
    return it == patches_.end() ? nullptr : &it->second;
  }
  std::size_t size() const { return patches_.size(); }
  const std::unordered_map<TileKey, Patch, TileKeyHash>& entries() const { return patches_; }

 private:
  std::unordered_map<TileKey, Patch, TileKeyHash> patches_;
};

/// Patch for keys missing from a sheet.
const Patch& placeholder_patch();

// ---------------------------------------------------------------------------
// Framebuffer

class Framebuffer {
 public:
  Framebuffer() : Framebuffer(kScreenWidth, kScreenHeight) {}
  Framebuffer(int width, int height)
      : width_(width), height_(height), pixels_(static_cast<std::size_t>(width) * height) {}

  int width() const { return width_; }
  int height() const { return height_; }
  Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  const Rgb& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<Rgb> row(int y) { return {pixels_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)}; }
  std::span<const Rgb> row(int y) const {
    return {pixels_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<const Rgb> pixels() const { return pixels_; }

  friend bool operator==(const Framebuffer&, const Framebuffer&) = default;

 private:
  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

// ---------------------------------------------------------------------------
// Nametables

enum class Mirroring { Horizontal, Vertical, FourScreen, SingleScreen };

std::string_view to_string(Mirroring m);
Mirroring parse_mirroring(std::string_view text);

/// Four 32x30 grids laid out 2x2 into the 64x60 virtual tilemap. Reads resolve
/// through the mirroring mode, so mirrored quadrants are identical by construction.
class NametableView {
 public:
  using Grid = std::array<TileKey, kNametableCols * kNametableRows>;

  NametableView() = default;
  explicit NametableView(Mirroring m) : mirroring_(m) {}

  Mirroring mirroring() const { return mirroring_; }
  void set_mirroring(Mirroring m) { mirroring_ = m; }

  /// Physical grid backing virtual quadrant q (0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right).
  static int physical_grid(Mirroring m, int quadrant);

  Grid& grid(int physical) { return grids_[physical]; }
  const Grid& grid(int physical) const { return grids_[physical]; }

  /// Virtual tilemap cell; coordinates wrap.
  const TileKey& cell(int col, int row) const {
    col = ((col % kVirtualCols) + kVirtualCols) % kVirtualCols;
    row = ((row % kVirtualRows) + kVirtualRows) % kVirtualRows;
    const int q = (row / kNametableRows) * 2 + (col / kNametableCols);
    return grids_[physical_grid(mirroring_, q)][(row % kNametableRows) * kNametableCols + (col % kNametableCols)];
  }
  void set_cell(int col, int row, const TileKey& key) {
    col = ((col % kVirtualCols) + kVirtualCols) % kVirtualCols;
    row = ((row % kVirtualRows) + kVirtualRows) % kVirtualRows;
    const int q = (row / kNametableRows) * 2 + (col / kNametableCols);
    grids_[physical_grid(mirroring_, q)][(row % kNametableRows) * kNametableCols + (col % kNametableCols)] = key;
  }

  friend bool operator==(const NametableView&, const NametableView&) = default;

 private:
  Mirroring mirroring_ = Mirroring::FourScreen;
  std::array<Grid, 4> grids_{};
};

// ---------------------------------------------------------------------------
// Sprites and observations

struct SpriteEntry {
  int x = 0;
  int y = 0;
  TileKey tile;
  bool flip_h = false;
  bool flip_v = false;
  bool priority = false;
  bool visible = true;

  friend bool operator==(const SpriteEntry&, const SpriteEntry&) = default;
};

/// Hardware scroll position of the screen's top-left in the virtual tilemap.
struct ScrollRegister {
  int x = 0;  // [0, 512)
  int y = 0;  // [0, 480)
  friend constexpr bool operator==(ScrollRegister, ScrollRegister) = default;
};

struct FrameObservation {
  FrameIndex frame_index = 0;
  Framebuffer framebuffer;
  NametableView nametables;
  std::vector<SpriteEntry> sprites;
  std::shared_ptr<const PatternSheet> patterns;
  /// Scroll register the console reports. Consumers other than tests must not
  /// rely on it; the pipeline recovers scrolling from pixels.
  ScrollRegister reported_scroll;
};

enum class TransitionKind { Scroll, Teleport };

std::string_view to_string(TransitionKind kind);
TransitionKind parse_transition_kind(std::string_view text);

/// Opaque machine snapshot tagged with the frame it was taken at.
struct SaveState {
  std::vector<std::uint8_t> bytes;
  FrameIndex frame_index = 0;
  friend bool operator==(const SaveState&, const SaveState&) = default;
};

/// A console that can be stepped frame by frame under button input and
/// introspected. Implementations must be deterministic: replaying the same
/// inputs from the same state yields identical observations.
struct ScrollWindow;

class Console {
 public:
  virtual ~Console() = default;

  /// Advances exactly one frame without producing an observation.
  virtual void advance(ButtonSet input) = 0;
  /// Observation of the most recently produced frame.
  virtual FrameObservation observe() const = 0;
  /// Renders only the framebuffer of the most recent frame.
  virtual Framebuffer render() const = 0;
  /// Quantized luma of `window` in the most recent frame, row-major, `w * h`
  /// bytes. Equals the luma of `render()` cut to the window.
  virtual void render_window_luma(const ScrollWindow& window, std::vector<std::uint8_t>& out) const;
  /// Whether `render_window_luma` would produce exactly `expected`. Cores may
  /// stop rendering at the first difference.
  virtual bool window_luma_matches(const ScrollWindow& window, std::span<const std::uint8_t> expected) const;
  /// Index the next `advance` will produce.
  virtual FrameIndex next_frame() const = 0;

  virtual SaveState save_state() const = 0;
  /// Throws `Error` when the state was produced by an incompatible core.
  virtual void load_state(const SaveState& state) = 0;

  virtual std::unique_ptr<Console> clone() const = 0;

  FrameObservation step(ButtonSet input) {
    advance(input);
    return observe();
  }
};

}  // namespace automap

template <>
struct std::hash<automap::TileKey> : automap::TileKeyHash {};
