#include "tsstf/raster_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace tsstf {

namespace {

void putFloatLe(std::string& buf, float v) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    buf.push_back(static_cast<char>(u & 0xff));
    buf.push_back(static_cast<char>((u >> 8) & 0xff));
    buf.push_back(static_cast<char>((u >> 16) & 0xff));
    buf.push_back(static_cast<char>((u >> 24) & 0xff));
}

float getFloatLe(const unsigned char* p) {
    const std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                            (static_cast<std::uint32_t>(p[1]) << 8) |
                            (static_cast<std::uint32_t>(p[2]) << 16) |
                            (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(u);
}

}  // namespace

std::string sidecarPath(const std::string& dataPath) {
    std::filesystem::path p(dataPath);
    p.replace_extension(".json");
    return p.string();
}

void writeRaster(const MultiBandImage& img, const std::string& dataPath) {
    std::string buf;
    buf.reserve(img.size() * 4);
    for (double v : img.values) putFloatLe(buf, static_cast<float>(v));

    std::ofstream data(dataPath, std::ios::binary | std::ios::trunc);
    if (!data) throw std::runtime_error("writeRaster: cannot open " + dataPath);
    data.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!data) throw std::runtime_error("writeRaster: short write to " + dataPath);
    data.close();

    nlohmann::json meta = {
        {"width", img.width},
        {"height", img.height},
        {"bands", img.bands},
        {"dtype", "f32le"},
        {"layout", "band-major"},
    };
    std::ofstream side(sidecarPath(dataPath), std::ios::trunc);
    if (!side) throw std::runtime_error("writeRaster: cannot open " + sidecarPath(dataPath));
    side << meta.dump(2) << "\n";
}

MultiBandImage readRaster(const std::string& dataPath) {
    std::ifstream side(sidecarPath(dataPath));
    if (!side) throw std::runtime_error("readRaster: missing sidecar " + sidecarPath(dataPath));
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("readRaster: bad sidecar " + sidecarPath(dataPath) + ": " + e.what());
    }
    if (meta.value("dtype", "") != "f32le")
        throw std::runtime_error("readRaster: unsupported dtype in " + sidecarPath(dataPath));
    if (meta.value("layout", "") != "band-major")
        throw std::runtime_error("readRaster: unsupported layout in " + sidecarPath(dataPath));
    const std::size_t w = meta.at("width").get<std::size_t>();
    const std::size_t h = meta.at("height").get<std::size_t>();
    const std::size_t b = meta.at("bands").get<std::size_t>();
    if (w == 0 || h == 0 || b == 0)
        throw std::runtime_error("readRaster: degenerate shape in " + sidecarPath(dataPath));

    std::ifstream data(dataPath, std::ios::binary);
    if (!data) throw std::runtime_error("readRaster: cannot open " + dataPath);
    std::string raw((std::istreambuf_iterator<char>(data)), std::istreambuf_iterator<char>());
    const std::size_t expected = w * h * b * 4;
    if (raw.size() != expected)
        throw std::runtime_error("readRaster: " + dataPath + " has " + std::to_string(raw.size()) +
                                 " bytes, expected " + std::to_string(expected));

    MultiBandImage img(w, h, b);
    const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = static_cast<double>(getFloatLe(p + 4 * i));
        if (!std::isfinite(v))
            throw std::runtime_error("readRaster: non-finite value in " + dataPath);
        img.values[i] = v;
    }
    return img;
}

}  // namespace tsstf
