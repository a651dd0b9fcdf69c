#include "spermmorph/png_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <sstream>

#include "spermmorph/error.hpp"

namespace spermmorph {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors through longjmp. The functions that call setjmp below
// hold only trivially destructible locals; all owning storage lives in callers.
struct ReadState {
    png_structp png = nullptr;
    png_infop info = nullptr;
    char message[256] = {};
};

void on_png_error(png_structp png, png_const_charp msg) {
    auto* state = static_cast<ReadState*>(png_get_error_ptr(png));
    std::snprintf(state->message, sizeof state->message, "%s", msg);
    png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// Returns false on libpng failure; message is in state.
bool read_header(ReadState* state, std::FILE* fp, png_uint_32* w, png_uint_32* h, int* depth,
                 int* color) {
    if (setjmp(png_jmpbuf(state->png))) return false;
    png_init_io(state->png, fp);
    png_read_info(state->png, state->info);
    *w = png_get_image_width(state->png, state->info);
    *h = png_get_image_height(state->png, state->info);
    *depth = png_get_bit_depth(state->png, state->info);
    *color = png_get_color_type(state->png, state->info);
    return true;
}

bool read_rows(ReadState* state, png_bytepp rows) {
    if (setjmp(png_jmpbuf(state->png))) return false;
    png_read_image(state->png, rows);
    png_read_end(state->png, nullptr);
    return true;
}

struct WriteState {
    png_structp png = nullptr;
    png_infop info = nullptr;
    char message[256] = {};
};

void on_png_write_error(png_structp png, png_const_charp msg) {
    auto* state = static_cast<WriteState*>(png_get_error_ptr(png));
    std::snprintf(state->message, sizeof state->message, "%s", msg);
    png_longjmp(png, 1);
}

bool write_all(WriteState* state, png_uint_32 w, png_uint_32 h, int depth, png_bytepp rows) {
    if (setjmp(png_jmpbuf(state->png))) return false;
    png_set_IHDR(state->png, state->info, w, h, depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(state->png, state->info);
    png_write_image(state->png, rows);
    png_write_end(state->png, nullptr);
    return true;
}

void append_bytes(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + len);
}

void flush_noop(png_structp) {}

std::vector<std::uint8_t> pack_rows(const GrayPng& png, std::vector<png_bytep>& rows) {
    const std::size_t bpp = png.bit_depth == 16 ? 2 : 1;
    const std::size_t stride = static_cast<std::size_t>(png.width) * bpp;
    std::vector<std::uint8_t> bytes(stride * static_cast<std::size_t>(png.height));
    for (std::size_t i = 0; i < png.samples.size(); ++i) {
        if (bpp == 2) {
            bytes[2 * i] = static_cast<std::uint8_t>(png.samples[i] >> 8);
            bytes[2 * i + 1] = static_cast<std::uint8_t>(png.samples[i] & 0xff);
        } else {
            bytes[i] = static_cast<std::uint8_t>(png.samples[i]);
        }
    }
    rows.resize(static_cast<std::size_t>(png.height));
    for (std::size_t y = 0; y < rows.size(); ++y) rows[y] = bytes.data() + y * stride;
    return bytes;
}

void validate_for_write(const GrayPng& png) {
    if (png.bit_depth != 8 && png.bit_depth != 16) throw InvalidArgument("bit depth must be 8 or 16");
    if (png.width <= 0 || png.height <= 0) throw InvalidArgument("cannot write an empty PNG");
    if (png.samples.size() != static_cast<std::size_t>(png.width) * static_cast<std::size_t>(png.height)) {
        throw InvalidArgument("PNG sample count does not match dimensions");
    }
}

}  // namespace

GrayPng read_gray_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path.string());
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw IoError("not a PNG file: " + path.string());
    }
    ReadState state;
    state.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, on_png_error, on_png_warning);
    if (!state.png) throw IoError("libpng initialization failed");
    state.info = png_create_info_struct(state.png);
    struct Guard {
        ReadState* s;
        ~Guard() { png_destroy_read_struct(&s->png, &s->info, nullptr); }
    } guard{&state};
    png_set_sig_bytes(state.png, 8);

    png_uint_32 w = 0;
    png_uint_32 h = 0;
    int depth = 0;
    int color = 0;
    if (!read_header(&state, fp.get(), &w, &h, &depth, &color)) {
        throw IoError(path.string() + ": " + state.message);
    }
    if (color != PNG_COLOR_TYPE_GRAY) {
        throw IoError(path.string() + ": expected a single-channel grayscale PNG");
    }
    if (depth != 8 && depth != 16) {
        throw IoError(path.string() + ": unsupported bit depth " + std::to_string(depth));
    }
    if (w == 0 || h == 0) throw IoError(path.string() + ": zero-sized image");

    const std::size_t bpp = depth == 16 ? 2 : 1;
    const std::size_t stride = static_cast<std::size_t>(w) * bpp;
    std::vector<std::uint8_t> bytes(stride * h);
    std::vector<png_bytep> rows(h);
    for (std::size_t y = 0; y < h; ++y) rows[y] = bytes.data() + y * stride;
    if (!read_rows(&state, rows.data())) throw IoError(path.string() + ": " + state.message);

    GrayPng out;
    out.width = static_cast<int>(w);
    out.height = static_cast<int>(h);
    out.bit_depth = depth;
    out.samples.resize(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.samples[i] = bpp == 2 ? static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1])
                                  : bytes[i];
    }
    return out;
}

void write_gray_png(const std::filesystem::path& path, const GrayPng& png) {
    validate_for_write(png);
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoError("cannot write " + path.string());
    WriteState state;
    state.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state, on_png_write_error,
                                        on_png_warning);
    if (!state.png) throw IoError("libpng initialization failed");
    state.info = png_create_info_struct(state.png);
    struct Guard {
        WriteState* s;
        ~Guard() { png_destroy_write_struct(&s->png, &s->info); }
    } guard{&state};
    png_init_io(state.png, fp.get());
    std::vector<png_bytep> rows;
    auto bytes = pack_rows(png, rows);
    if (!write_all(&state, static_cast<png_uint_32>(png.width), static_cast<png_uint_32>(png.height),
                   png.bit_depth, rows.data())) {
        throw IoError(path.string() + ": " + state.message);
    }
}

std::vector<std::uint8_t> encode_gray_png(const GrayPng& png) {
    validate_for_write(png);
    std::vector<std::uint8_t> out;
    WriteState state;
    state.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state, on_png_write_error,
                                        on_png_warning);
    if (!state.png) throw IoError("libpng initialization failed");
    state.info = png_create_info_struct(state.png);
    struct Guard {
        WriteState* s;
        ~Guard() { png_destroy_write_struct(&s->png, &s->info); }
    } guard{&state};
    png_set_write_fn(state.png, &out, append_bytes, flush_noop);
    std::vector<png_bytep> rows;
    auto bytes = pack_rows(png, rows);
    if (!write_all(&state, static_cast<png_uint_32>(png.width), static_cast<png_uint_32>(png.height),
                   png.bit_depth, rows.data())) {
        throw IoError(std::string("PNG encoding failed: ") + state.message);
    }
    return out;
}

ScalarImage load_image(const std::filesystem::path& path) {
    const GrayPng png = read_gray_png(path);
    const double max = png.bit_depth == 16 ? 65535.0 : 255.0;
    std::vector<double> values(png.samples.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = png.samples[i] / max;
    return ScalarImage(png.width, png.height, std::move(values));
}

void save_image(const std::filesystem::path& path, const ScalarImage& img, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("bit depth must be 8 or 16");
    const double max = bit_depth == 16 ? 65535.0 : 255.0;
    GrayPng png{img.width(), img.height(), bit_depth, {}};
    png.samples.reserve(img.values().size());
    for (double v : img.values()) png.samples.push_back(static_cast<std::uint16_t>(std::lround(v * max)));
    write_gray_png(path, png);
}

InstancePartMask load_mask(const std::filesystem::path& part_path,
                           const std::filesystem::path& instance_path) {
    const GrayPng parts = read_gray_png(part_path);
    const GrayPng ids = read_gray_png(instance_path);
    if (parts.bit_depth != 8) throw IoError(part_path.string() + ": part file must be 8-bit");
    if (ids.bit_depth != 16) throw IoError(instance_path.string() + ": instance file must be 16-bit");
    if (parts.width != ids.width || parts.height != ids.height) {
        std::ostringstream msg;
        msg << "mask dimension mismatch: " << part_path.string() << " is " << parts.width << "x"
            << parts.height << ", " << instance_path.string() << " is " << ids.width << "x"
            << ids.height;
        throw IoError(msg.str());
    }
    std::vector<PartLabel> labels(parts.samples.size());
    std::vector<InstanceId> instances(ids.samples.begin(), ids.samples.end());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto label = part_from_code(parts.samples[i]);
        if (!label) {
            std::ostringstream msg;
            msg << part_path.string() << ": invalid part code " << parts.samples[i] << " at pixel ("
                << i % static_cast<std::size_t>(parts.width) << ", "
                << i / static_cast<std::size_t>(parts.width) << ")";
            throw IoError(msg.str());
        }
        labels[i] = *label;
    }
    try {
        return InstancePartMask(parts.width, parts.height, std::move(labels), std::move(instances));
    } catch (const InvalidArgument& e) {
        throw IoError(part_path.string() + ": " + e.what());
    }
}

void save_mask(const std::filesystem::path& part_path, const std::filesystem::path& instance_path,
               const InstancePartMask& mask) {
    GrayPng parts{mask.width(), mask.height(), 8, {}};
    GrayPng ids{mask.width(), mask.height(), 16, {}};
    for (PartLabel p : mask.parts()) parts.samples.push_back(static_cast<std::uint16_t>(p));
    ids.samples.assign(mask.instances().begin(), mask.instances().end());
    write_gray_png(part_path, parts);
    write_gray_png(instance_path, ids);
}

std::string part_code_table() {
    std::string out = "code,part\n";
    for (int c = 0; c < kPartLabelCount; ++c) {
        out += std::to_string(c) + "," + std::string(part_name(static_cast<PartLabel>(c))) + "\n";
    }
    return out;
}

}  // namespace spermmorph
