#pragma once

#include <span>
#include <string>
#include <vector>

#include "layoutpref/layout.hpp"

namespace layoutpref {

inline constexpr std::string_view kImageMarker = "<image>";
/// Image slot holding the canvas itself.
inline constexpr std::string_view kCanvasSlot = "canvas";

struct SerializedPrompt {
  std::string text;
  /// One entry per `<image>` marker, in order: the canvas, then every
  /// non-text, non-background element.
  std::vector<std::string> image_slots;
};

/// Verbalizes the layout request. Background elements are folded into the
/// canvas image; elements listed in `known` get a trailing `Position:` line
/// with literal token names. Throws Error(kInvalidArgument) for an empty list.
SerializedPrompt build_prompt(const Canvas& canvas, std::span<const Element> elements,
                              const KnownPositions& known = {});

}  // namespace layoutpref
