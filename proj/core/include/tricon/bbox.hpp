#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "tricon/types.hpp"

namespace tricon {

/// Extracts the single bracketed quadruple "[x1, y1, x2, y2]" from `text`,
/// ignoring surrounding prose. Coordinates must be normalized to [0,1] with
/// x1 <= x2 and y1 <= y2; pixel-space boxes are rejected.
/// Throws Error{NoBox} when no quadruple is present and Error{InvalidBox}
/// when it violates ordering/range or more than one quadruple is present.
BoundingBox parse_bbox(std::string_view text);

/// parse_bbox without the exception; nullopt on any failure.
std::optional<BoundingBox> try_parse_bbox(std::string_view text) noexcept;

/// "[x1, y1, x2, y2]" with shortest round-trip decimal formatting.
std::string format_bbox(const BoundingBox& box);

bool is_valid(const BoundingBox& box) noexcept;

}  // namespace tricon
