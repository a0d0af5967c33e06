#pragma once

#include <stdexcept>
#include <string>

#include "actsynth/pipeline.hpp"

namespace actsynth {

/// Top-down SVG of one keyframe: floor, walls, labeled footprints, character
/// glyphs (body arrow, head tick) and the walks that end at this keyframe.
/// Throws std::out_of_range when the activity has no keyframe `keyframe`.
std::string export_topdown(const RunResult& result, int keyframe);

/// Debug view of the selected cameras: position, horizontal frustum, and a
/// line to each surviving mark.
std::string export_views_svg(const Scene& scene, const ViewPlan& plan);

}  // namespace actsynth
