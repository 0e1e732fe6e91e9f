#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

#include "scatret/image.hpp"

namespace scatret {

namespace detail {

inline int pgm_next_token(std::istream& in, std::string& token) {
    token.clear();
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    return c;
}

inline ImageGrid load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("file not found: " + path.string());
    std::string tok;
    pgm_next_token(in, tok);
    if (tok != "P5")
        throw std::runtime_error("unsupported format (expected binary P5 PGM): " + path.string());
    auto read_int = [&](const char* what) {
        pgm_next_token(in, tok);
        try {
            return std::stol(tok);
        } catch (const std::exception&) {
            throw std::runtime_error(std::string("malformed PGM header (") + what + "): " + path.string());
        }
    };
    const long width = read_int("width");
    const long height = read_int("height");
    const long maxval = read_int("maxval");
    if (width <= 0 || height <= 0)
        throw std::runtime_error("zero-dimension image: " + path.string());
    if (maxval <= 0 || maxval > 255)
        throw std::runtime_error("unsupported format (PGM maxval must be 1..255): " + path.string());

    std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw std::runtime_error("unreadable file (truncated PGM data): " + path.string());

    ImageGrid grid(static_cast<int>(width), static_cast<int>(height));
    const double scale = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < raw.size(); ++i) grid.samples[i] = raw[i] * scale;
    return grid;
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

inline ImageGrid load_png(const std::filesystem::path& path) {
    PngReader rd;
    rd.fp = std::fopen(path.string().c_str(), "rb");
    if (!rd.fp)
        throw std::runtime_error("file not found: " + path.string());
    rd.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!rd.png) throw std::runtime_error("PNG reader allocation failed");
    rd.info = png_create_info_struct(rd.png);
    if (!rd.info) throw std::runtime_error("PNG reader allocation failed");
    if (setjmp(png_jmpbuf(rd.png)))
        throw std::runtime_error("unreadable file (corrupt PNG): " + path.string());

    png_init_io(rd.png, rd.fp);
    png_read_info(rd.png, rd.info);

    const png_uint_32 width = png_get_image_width(rd.png, rd.info);
    const png_uint_32 height = png_get_image_height(rd.png, rd.info);
    const int bit_depth = png_get_bit_depth(rd.png, rd.info);
    const int color_type = png_get_color_type(rd.png, rd.info);
    if (width == 0 || height == 0)
        throw std::runtime_error("zero-dimension image: " + path.string());
    if (bit_depth > 8)
        throw std::runtime_error("unsupported format (only 8-bit PNG supported): " + path.string());

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(rd.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(rd.png);
    if (png_get_valid(rd.png, rd.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(rd.png);
    png_set_strip_alpha(rd.png);
    png_set_interlace_handling(rd.png);
    png_read_update_info(rd.png, rd.info);

    const int channels = png_get_channels(rd.png, rd.info);
    if (channels != 1 && channels != 3)
        throw std::runtime_error("unsupported format (PNG channel layout): " + path.string());

    const std::size_t row_bytes = png_get_rowbytes(rd.png, rd.info);
    std::vector<std::uint8_t> data(row_bytes * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = data.data() + r * row_bytes;
    png_read_image(rd.png, rows.data());
    png_read_end(rd.png, nullptr);

    ImageGrid grid(static_cast<int>(width), static_cast<int>(height));
    for (png_uint_32 r = 0; r < height; ++r) {
        const std::uint8_t* row = rows[r];
        for (png_uint_32 c = 0; c < width; ++c) {
            double v;
            if (channels == 1) {
                v = row[c] / 255.0;
            } else {
                // ITU-R BT.601 luma
                v = (0.299 * row[3 * c] + 0.587 * row[3 * c + 1] + 0.114 * row[3 * c + 2]) / 255.0;
            }
            grid.at(static_cast<int>(r), static_cast<int>(c)) = v;
        }
    }
    return grid;
}

}  // namespace detail

/// Loads an 8-bit PGM (binary P5) or PNG file as luminance in [0, 1].
/// Multi-channel PNGs are converted with the BT.601 luma weights.
inline ImageGrid load_grayscale(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe)
        throw std::runtime_error("file not found: " + path.string());
    unsigned char sig[8] = {};
    probe.read(reinterpret_cast<char*>(sig), 8);
    probe.close();
    if (sig[0] == 'P' && sig[1] == '5') return detail::load_pgm(path);
    if (png_sig_cmp(sig, 0, 8) == 0) return detail::load_png(path);
    throw std::runtime_error("unsupported format: " + path.string());
}

/// Writes a binary P5 PGM, clamping samples to [0, 1] and quantizing to
/// 8 bits. Used for synthetic dataset generation.
inline void save_pgm(const std::filesystem::path& path, const ImageGrid& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path.string());
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    std::vector<std::uint8_t> raw(image.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        double v = std::min(1.0, std::max(0.0, image.samples[i]));
        raw[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

}  // namespace scatret
