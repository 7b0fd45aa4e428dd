#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace otm {

// In-memory grayscale image. Row 0 is the top of the image as stored in the
// file; pixel(a, b) = row b, column a.
struct PgmImage {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::vector<std::uint16_t> pixels;  // row-major, height*width entries

    std::uint16_t pixel(int a, int b) const { return pixels[static_cast<std::size_t>(b) * width + a]; }
};

// Reads a P2 (ASCII) or P5 (binary) PGM file. Multi-byte P5 samples are
// big-endian per the netpbm convention. Throws IngestionError with a byte or
// token position on malformed input.
PgmImage read_pgm(const std::string& path);

// Writes a 16-bit binary PGM (P5, maxval 65535, big-endian samples).
void write_pgm16(const std::string& path, const PgmImage& image);

}  // namespace otm
