#include "layoutpref/prompt.hpp"

#include <fmt/format.h>

#include "layoutpref/error.hpp"

namespace layoutpref {
namespace {

// Keeps the block structure unambiguous for multi-line texts.
std::string escape_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

SerializedPrompt build_prompt(const Canvas& canvas, std::span<const Element> elements,
                              const KnownPositions& known) {
  if (elements.empty()) throw Error(ErrorCode::kInvalidArgument, "prompt needs at least one element");

  SerializedPrompt out;
  out.text = fmt::format(
      "Consider the image {} with height and width of {} and {}. The following elements need to "
      "be placed on the image to obtain an aesthetic poster layout.\n",
      kImageMarker, canvas.height, canvas.width);
  out.image_slots.emplace_back(kCanvasSlot);

  int number = 0;
  for (const auto& e : elements) {
    if (!is_predicted(e)) continue;
    out.text += fmt::format("\nElement {}:\n", ++number);
    if (e.kind == ElementKind::kText) {
      out.text += fmt::format("Text: {}\n", escape_text(e.text.value_or("")));
    } else {
      out.text += fmt::format("Image: {}\n", kImageMarker);
      out.image_slots.push_back(e.id);
    }
    out.text += fmt::format("Category: {}\n", to_string(e.kind));
    if (auto it = known.find(e.id); it != known.end()) {
      const auto& t = it->second;
      out.text += fmt::format("Position: pos_{} pos_{} pos_{} pos_{}\n", t[0], t[1], t[2], t[3]);
    }
  }
  return out;
}

}  // namespace layoutpref
