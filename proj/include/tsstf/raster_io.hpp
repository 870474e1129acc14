#pragma once

#include <string>

#include "tsstf/image.hpp"

namespace tsstf {

/// Rasters travel as a two-file pair: a raw little-endian float32 file in
/// band-major order plus a JSON sidecar carrying the shape. The sidecar path
/// is the data path with its extension replaced by ".json".
std::string sidecarPath(const std::string& dataPath);

/// Writes img to dataPath (f32le) and its sidecar. Values are narrowed to
/// float32 with round-to-nearest.
void writeRaster(const MultiBandImage& img, const std::string& dataPath);

/// Reads a raster pair. Throws std::runtime_error when the sidecar is
/// malformed, the raw length disagrees with the declared shape, or any
/// value is non-finite.
MultiBandImage readRaster(const std::string& dataPath);

}  // namespace tsstf
