#include "otmorph/pgm.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "otmorph/errors.hpp"

namespace otm {

namespace {

[[noreturn]] void fail(const std::string& path, std::istream& in, const std::string& what) {
    std::ostringstream msg;
    msg << path << ": " << what;
    const auto pos = in.tellg();
    if (pos >= 0) msg << " (near byte " << pos << ")";
    throw IngestionError(msg.str());
}

// Skips whitespace and '#' comments (which run to end of line), then reads one
// unsigned decimal token of the header.
int read_header_int(const std::string& path, std::istream& in, const char* name) {
    for (;;) {
        const int c = in.peek();
        if (c == EOF) fail(path, in, std::string("unexpected end of file before ") + name);
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        break;
    }
    long long value = 0;
    if (!(in >> value) || value < 0) fail(path, in, std::string("malformed ") + name);
    return static_cast<int>(value);
}

}  // namespace

PgmImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError(path + ": cannot open file");

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5')) {
        throw IngestionError(path + ": not a P2/P5 PGM file");
    }
    const bool binary = magic[1] == '5';

    PgmImage img;
    img.width = read_header_int(path, in, "width");
    img.height = read_header_int(path, in, "height");
    img.maxval = read_header_int(path, in, "maxval");
    if (img.width < 1 || img.height < 1) fail(path, in, "non-positive image dimensions");
    if (img.maxval < 1 || img.maxval > 65535) fail(path, in, "maxval out of range [1,65535]");

    const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
    img.pixels.resize(count);

    if (binary) {
        // Exactly one whitespace byte separates the header from the raster.
        const int sep = in.get();
        if (sep == EOF || !std::isspace(sep)) fail(path, in, "missing raster separator");
        const bool wide = img.maxval > 255;
        std::vector<unsigned char> raw(count * (wide ? 2 : 1));
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
            std::ostringstream msg;
            msg << path << ": truncated raster, expected " << raw.size() << " bytes, got "
                << in.gcount();
            throw IngestionError(msg.str());
        }
        for (std::size_t n = 0; n < count; ++n) {
            img.pixels[n] = wide ? static_cast<std::uint16_t>((raw[2 * n] << 8) | raw[2 * n + 1])
                                 : raw[n];
        }
    } else {
        for (std::size_t n = 0; n < count; ++n) {
            long long value = 0;
            if (!(in >> value)) {
                std::ostringstream msg;
                msg << path << ": truncated raster, expected " << count << " samples, got " << n;
                throw IngestionError(msg.str());
            }
            if (value < 0 || value > img.maxval) fail(path, in, "sample out of range");
            img.pixels[n] = static_cast<std::uint16_t>(value);
        }
    }

    for (std::size_t n = 0; n < count; ++n) {
        if (img.pixels[n] > img.maxval) fail(path, in, "sample exceeds maxval");
    }
    return img;
}

void write_pgm16(const std::string& path, const PgmImage& image) {
    if (image.width < 1 || image.height < 1 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
        throw ExportError(path + ": inconsistent image shape");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ExportError(path + ": cannot open file for writing");
    out << "P5\n" << image.width << " " << image.height << "\n65535\n";
    std::vector<unsigned char> raw(image.pixels.size() * 2);
    for (std::size_t n = 0; n < image.pixels.size(); ++n) {
        raw[2 * n] = static_cast<unsigned char>(image.pixels[n] >> 8);
        raw[2 * n + 1] = static_cast<unsigned char>(image.pixels[n] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw ExportError(path + ": write failed");
}

}  // namespace otm
