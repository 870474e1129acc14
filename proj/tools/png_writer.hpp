#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Minimal RGB8 PNG writer (stored deflate blocks, no compression library).
void writePngRgb8(const std::string& path, std::size_t width, std::size_t height,
                  const std::vector<std::uint8_t>& rgb);
