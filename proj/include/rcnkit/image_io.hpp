#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcnkit/maps.hpp"

namespace rcnkit {

// PNG, via libpng. Gray and RGB rasters at 8 bits; 16-bit grayscale for
// probability maps. Other color layouts are converted on load.
ImageU8 load_png(const std::string& path);
void save_png(const std::string& path, const ImageU8& image);

void save_png16(const std::string& path, const ContourPrediction& pred);
ContourPrediction load_png16(const std::string& path);

// Label maps on disk are 8-bit PNG with values {0, 255}.
void save_label_png(const std::string& path, const LabelMap& label);
LabelMap load_label_png(const std::string& path);

// 16-bit binary PGM (P5, maxval 65535, big-endian samples). Values are
// quantized as round(v * 65535); file round-trips are bit-exact.
void save_pgm16(const std::string& path, const ContourPrediction& pred);
ContourPrediction load_pgm16(const std::string& path);

// Dispatches on extension: .pgm or .png (16-bit grayscale).
void save_prediction(const std::string& path, const ContourPrediction& pred);
ContourPrediction load_prediction(const std::string& path);

}  // namespace rcnkit
