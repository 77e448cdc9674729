#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vsl/errors.hpp"
#include "vsl/rng.hpp"

namespace vsl {

enum class TaskKind { Luminance, Color, Length, Orientation, RotatedT };

inline constexpr std::array<TaskKind, 5> kAllTasks = {
    TaskKind::Luminance, TaskKind::Color, TaskKind::Length, TaskKind::Orientation,
    TaskKind::RotatedT};

/// The one configuration-search task; the rest are single-feature searches.
constexpr bool is_complex(TaskKind t) noexcept { return t == TaskKind::RotatedT; }

inline std::string_view to_string(TaskKind t) noexcept {
  switch (t) {
    case TaskKind::Luminance: return "luminance";
    case TaskKind::Color: return "color";
    case TaskKind::Length: return "length";
    case TaskKind::Orientation: return "orientation";
    case TaskKind::RotatedT: return "rotated_t";
  }
  return "?";
}

inline TaskKind parse_task(std::string_view s) {
  for (TaskKind t : kAllTasks)
    if (to_string(t) == s) return t;
  throw ValidationError("unknown task '" + std::string(s) +
                        "' (expected luminance|color|length|orientation|rotated_t)");
}

inline constexpr std::array<int, 4> kSetSizes = {1, 2, 4, 8};
inline constexpr int kMinDifficulty = 1;
inline constexpr int kMaxDifficulty = 3;

constexpr bool is_valid_set_size(int n) noexcept { return n == 1 || n == 2 || n == 4 || n == 8; }
constexpr bool is_valid_difficulty(int d) noexcept {
  return d >= kMinDifficulty && d <= kMaxDifficulty;
}

// Display geometry.
inline constexpr int kImageSize = 227;
inline constexpr int kChannels = 3;
inline constexpr int kEdgeMargin = 30;
inline constexpr int kMinCenterSpacing = 48;
inline constexpr int kMaxPlacementAttempts = 10'000;  // per item, consecutive
inline constexpr int kMaxLayoutRestarts = 100;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend constexpr bool operator==(Rgb, Rgb) = default;
};

inline constexpr Rgb kBackground{0, 0, 0};
inline constexpr Rgb kItemGray{192, 192, 192};

enum class ItemShape { Square, Bar, TFigure };

struct Point {
  int x = 0;
  int y = 0;
  friend constexpr bool operator==(Point, Point) = default;
};

/// One display item. Only the fields relevant to `shape` are meaningful:
/// squares use `edge`, bars use `length`/`width`/`orientation_deg`,
/// T-figures use `length`/`width`/`t_rotation_deg`.
struct ItemSpec {
  ItemShape shape = ItemShape::Square;
  Point center;
  int edge = 0;
  int length = 0;
  int width = 0;
  double orientation_deg = 0.0;  // clockwise tilt from vertical
  int t_rotation_deg = 0;        // 0, 90, 180 or 270
  Rgb color = kItemGray;
  bool is_target = false;

  friend bool operator==(const ItemSpec&, const ItemSpec&) = default;
};

struct DisplaySpec {
  TaskKind task = TaskKind::Luminance;
  int difficulty = 1;
  int set_size = 1;
  bool target_present = false;
  std::vector<ItemSpec> items;
  std::uint64_t seed = 0;

  friend bool operator==(const DisplaySpec&, const DisplaySpec&) = default;
};

/// Target/distractor appearance for one (task, difficulty) cell.
struct FeatureLevel {
  Rgb distractor_color;
  Rgb target_color;
  int distractor_length;
  int target_length;
  double target_tilt_deg;
  double t_scale;
};

// Square edge, bar width and length, T bar width and length (unscaled).
inline constexpr int kSquareEdge = 20;
inline constexpr int kBarWidth = 5;
inline constexpr int kBarLength = 31;
inline constexpr int kTBarWidth = 5;
inline constexpr int kTBarLength = 25;

// clang-format off
/// Difficulty table, indexed [task][level - 1]. Level k uses the k-th value of
/// each manipulated dimension.
inline constexpr std::array<std::array<FeatureLevel, 3>, 5> kDifficultyTable = {{
    // Luminance: gray squares, target brighter.
    {{{{64, 64, 64}, {96, 96, 96},   kBarLength, kBarLength, 0.0, 1.0},
      {{64, 64, 64}, {128, 128, 128}, kBarLength, kBarLength, 0.0, 1.0},
      {{64, 64, 64}, {192, 192, 192}, kBarLength, kBarLength, 0.0, 1.0}}},
    // Color: yellow squares, target shifted toward red.
    {{{{160, 160, 0}, {160, 112, 0}, kBarLength, kBarLength, 0.0, 1.0},
      {{160, 160, 0}, {160, 64, 0},  kBarLength, kBarLength, 0.0, 1.0},
      {{160, 160, 0}, {160, 0, 0},   kBarLength, kBarLength, 0.0, 1.0}}},
    // Length: vertical bars, target longer.
    {{{kItemGray, kItemGray, kBarLength, 37, 0.0, 1.0},
      {kItemGray, kItemGray, kBarLength, 45, 0.0, 1.0},
      {kItemGray, kItemGray, kBarLength, 55, 0.0, 1.0}}},
    // Orientation: vertical distractors, tilted target.
    {{{kItemGray, kItemGray, kBarLength, kBarLength, 10.0, 1.0},
      {kItemGray, kItemGray, kBarLength, kBarLength, 20.0, 1.0},
      {kItemGray, kItemGray, kBarLength, kBarLength, 40.0, 1.0}}},
    // Rotated T: upright target among 90/180/270 distractors, figure scaled.
    {{{kItemGray, kItemGray, kTBarLength, kTBarLength, 0.0, 1.0},
      {kItemGray, kItemGray, kTBarLength, kTBarLength, 0.0, 0.75},
      {kItemGray, kItemGray, kTBarLength, kTBarLength, 0.0, 0.6}}},
}};
// clang-format on

inline const FeatureLevel& feature_level(TaskKind task, int difficulty) {
  if (!is_valid_difficulty(difficulty))
    throw ValidationError("difficulty must be in 1..3, got " + std::to_string(difficulty));
  return kDifficultyTable[static_cast<std::size_t>(task)][static_cast<std::size_t>(difficulty - 1)];
}

/// Pixel-space bounding box, inclusive on both ends.
struct Bounds {
  int x0, y0, x1, y1;
};

namespace detail {

// Half-open test on a pixel-center offset: the footprint of an extent `size`
// centered at an integer coordinate covers exactly `size` pixels.
constexpr bool inside_extent(double offset, double size) noexcept {
  return offset >= -0.5 * size && offset < 0.5 * size;
}

inline bool covers_bar(double u, double v, double length, double width) noexcept {
  return inside_extent(u, width) && inside_extent(v, length);
}

// Upright T: crossbar across the top, stem down the middle; both bars share
// the same width and length.
inline bool covers_upright_t(double u, double v, int length, int width) noexcept {
  const double half = 0.5 * length;
  const bool crossbar = inside_extent(u, length) && v >= -half && v < -half + width;
  const bool stem = inside_extent(u, width) && inside_extent(v, length);
  return crossbar || stem;
}

}  // namespace detail

/// True when the pixel at (px, py) belongs to the item's footprint.
inline bool covers(const ItemSpec& item, int px, int py) noexcept {
  const double dx = px + 0.5 - item.center.x;
  const double dy = py + 0.5 - item.center.y;
  switch (item.shape) {
    case ItemShape::Square:
      return detail::inside_extent(dx, item.edge) && detail::inside_extent(dy, item.edge);
    case ItemShape::Bar: {
      if (item.orientation_deg == 0.0) return detail::covers_bar(dx, dy, item.length, item.width);
      // Rotate the pixel offset back into the bar's frame.
      const double rad = item.orientation_deg * 3.14159265358979323846 / 180.0;
      const double c = std::cos(rad), s = std::sin(rad);
      const double u = c * dx + s * dy;
      const double v = -s * dx + c * dy;
      return detail::covers_bar(u, v, item.length, item.width);
    }
    case ItemShape::TFigure: {
      // Quarter turns are exact on the half-integer offset lattice.
      double u = dx, v = dy;
      switch (item.t_rotation_deg) {
        case 90: u = dy; v = -dx; break;
        case 180: u = -dx; v = -dy; break;
        case 270: u = -dy; v = dx; break;
        default: break;
      }
      return detail::covers_upright_t(u, v, item.length, item.width);
    }
  }
  return false;
}

/// Tight pixel bounding box of the item's footprint.
inline Bounds item_bounds(const ItemSpec& item) {
  // Scan a window generously larger than any item extent.
  const int reach = std::max({item.edge, item.length, item.width}) + 2;
  Bounds b{item.center.x + reach, item.center.y + reach, item.center.x - reach,
           item.center.y - reach};
  bool any = false;
  for (int py = item.center.y - reach; py <= item.center.y + reach; ++py) {
    for (int px = item.center.x - reach; px <= item.center.x + reach; ++px) {
      if (!covers(item, px, py)) continue;
      any = true;
      b.x0 = std::min(b.x0, px);
      b.y0 = std::min(b.y0, py);
      b.x1 = std::max(b.x1, px);
      b.y1 = std::max(b.y1, py);
    }
  }
  if (!any) return {item.center.x, item.center.y, item.center.x - 1, item.center.y - 1};
  return b;
}

/// Items must sit fully inside the image minus the edge margin.
inline bool within_margins(const Bounds& b) noexcept {
  constexpr int lo = kEdgeMargin;
  constexpr int hi = kImageSize - 1 - kEdgeMargin;
  return b.x0 >= lo && b.y0 >= lo && b.x1 <= hi && b.y1 <= hi;
}

inline double center_distance(Point a, Point b) noexcept {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

/// Appearance of a target or distractor for the given task cell; the center
/// is left at the origin. `rng` is drawn from only for rotated-T distractors.
inline ItemSpec make_item(TaskKind task, int difficulty, bool is_target, Xoshiro256& rng) {
  const FeatureLevel& lv = feature_level(task, difficulty);
  ItemSpec it;
  it.is_target = is_target;
  switch (task) {
    case TaskKind::Luminance:
    case TaskKind::Color:
      it.shape = ItemShape::Square;
      it.edge = kSquareEdge;
      it.color = is_target ? lv.target_color : lv.distractor_color;
      break;
    case TaskKind::Length:
      it.shape = ItemShape::Bar;
      it.width = kBarWidth;
      it.length = is_target ? lv.target_length : lv.distractor_length;
      it.color = lv.distractor_color;
      break;
    case TaskKind::Orientation:
      it.shape = ItemShape::Bar;
      it.width = kBarWidth;
      it.length = kBarLength;
      it.orientation_deg = is_target ? lv.target_tilt_deg : 0.0;
      it.color = lv.distractor_color;
      break;
    case TaskKind::RotatedT:
      it.shape = ItemShape::TFigure;
      it.width = static_cast<int>(std::lround(kTBarWidth * lv.t_scale));
      it.length = static_cast<int>(std::lround(kTBarLength * lv.t_scale));
      it.t_rotation_deg = is_target ? 0 : 90 * static_cast<int>(rng.uniform_int(1, 3));
      it.color = lv.distractor_color;
      break;
  }
  return it;
}

/// Lays out one display by rejection sampling of item centers. The target,
/// when present, is the first item placed; its list position is randomized.
///
/// A candidate center that breaks the margin or spacing rule is redrawn. An
/// item that fails kMaxPlacementAttempts times in a row means the partial
/// layout is jammed (random sequential placement of 8 items does this for
/// roughly 1 seed in 600); the layout is then restarted from scratch, up to
/// kMaxLayoutRestarts times, on the same random stream.
inline DisplaySpec plan_display(TaskKind task, int difficulty, int set_size, bool target_present,
                                std::uint64_t seed) {
  if (!is_valid_set_size(set_size))
    throw ValidationError("set size must be 1, 2, 4 or 8, got " + std::to_string(set_size));
  (void)feature_level(task, difficulty);

  Xoshiro256 rng(seed);
  DisplaySpec spec{task, difficulty, set_size, target_present, {}, seed};
  spec.items.reserve(static_cast<std::size_t>(set_size));

  auto place_item = [&](ItemSpec& item) {
    const Bounds extent = item_bounds(item);  // relative to a (0, 0) center
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      item.center = {static_cast<int>(rng.uniform_int(kEdgeMargin, kImageSize - 1 - kEdgeMargin)),
                     static_cast<int>(rng.uniform_int(kEdgeMargin, kImageSize - 1 - kEdgeMargin))};
      const Bounds b{extent.x0 + item.center.x, extent.y0 + item.center.y, extent.x1 + item.center.x,
                     extent.y1 + item.center.y};
      if (!within_margins(b)) continue;
      bool spaced = true;
      for (const ItemSpec& other : spec.items) {
        if (center_distance(item.center, other.center) < kMinCenterSpacing) {
          spaced = false;
          break;
        }
      }
      if (spaced) return true;
    }
    return false;
  };

  for (int layout = 0; layout < kMaxLayoutRestarts; ++layout) {
    spec.items.clear();
    bool jammed = false;
    for (int i = 0; i < set_size && !jammed; ++i) {
      ItemSpec item = make_item(task, difficulty, target_present && i == 0, rng);
      if (place_item(item)) spec.items.push_back(item);
      else jammed = true;
    }
    if (jammed) continue;
    if (target_present && set_size > 1) {
      const auto slot = static_cast<std::size_t>(rng.uniform_int(0, set_size - 1));
      std::swap(spec.items[0], spec.items[slot]);
    }
    return spec;
  }
  throw PlacementError("could not place " + std::to_string(set_size) + " items: every one of " +
                       std::to_string(kMaxLayoutRestarts) + " layouts jammed after " +
                       std::to_string(kMaxPlacementAttempts) + " attempts for one item (seed " +
                       std::to_string(seed) + ")");
}

/// 8-bit RGB raster, row-major, channels interleaved.
struct Image {
  int width = kImageSize;
  int height = kImageSize;
  std::vector<std::uint8_t> pixels =
      std::vector<std::uint8_t>(static_cast<std::size_t>(kImageSize * kImageSize * kChannels), 0);

  Rgb at(int x, int y) const {
    const auto i = static_cast<std::size_t>((y * width + x) * kChannels);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const auto i = static_cast<std::size_t>((y * width + x) * kChannels);
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
  }
  friend bool operator==(const Image&, const Image&) = default;
};

/// Hard-edged rasterization of every item over the dark background.
inline Image render_display(const DisplaySpec& spec) {
  Image img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) img.set(x, y, kBackground);
  for (const ItemSpec& item : spec.items) {
    const Bounds b = item_bounds(item);
    for (int y = std::max(b.y0, 0); y <= std::min(b.y1, img.height - 1); ++y)
      for (int x = std::max(b.x0, 0); x <= std::min(b.x1, img.width - 1); ++x)
        if (covers(item, x, y)) img.set(x, y, item.color);
  }
  return img;
}

}  // namespace vsl
