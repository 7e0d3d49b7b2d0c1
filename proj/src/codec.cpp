#include "xprobe/codec.hpp"

#include <png.h>
#include <unistd.h>

#include <atomic>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <jpeglib.h>
#include <openssl/evp.h>

namespace xprobe {
namespace fs = std::filesystem;

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = img.width();
    image.height = img.height();
    image.format = PNG_FORMAT_RGB;
    image.flags = PNG_IMAGE_FLAG_FAST;  // generation is encode-bound otherwise
    png_alloc_size_t size = 0;
    const auto stride = static_cast<png_int_32>(img.width() * 3);
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.bytes().data(), stride, nullptr))
        throw std::runtime_error(std::string("png encode failed: ") + image.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.bytes().data(), stride, nullptr))
        throw std::runtime_error(std::string("png encode failed: ") + image.message);
    out.resize(size);
    return out;
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw std::runtime_error(std::string("png decode failed: ") + image.message);
    image.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, data.data(), 0, nullptr)) {
        png_image_free(&image);
        throw std::runtime_error(std::string("png decode failed: ") + image.message);
    }
    return ImageBuffer(image.width, image.height, std::move(data));
}

namespace {

struct JpegError {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegError*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

// The setjmp frames below hold only trivially destructible locals.
bool jpeg_encode_raw(const std::uint8_t* rgb, unsigned w, unsigned h, int quality, unsigned char** out,
                     unsigned long* out_size, char* message) {
    jpeg_compress_struct cinfo;
    JpegError err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        std::memcpy(message, err.message, JMSG_LENGTH_MAX);
        jpeg_destroy_compress(&cinfo);
        return false;
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, out, out_size);
    cinfo.image_width = w;
    cinfo.image_height = h;
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    cinfo.dct_method = JDCT_ISLOW;
    cinfo.optimize_coding = FALSE;
    cinfo.comp_info[0].h_samp_factor = 2;  // 4:2:0
    cinfo.comp_info[0].v_samp_factor = 2;
    cinfo.comp_info[1].h_samp_factor = cinfo.comp_info[1].v_samp_factor = 1;
    cinfo.comp_info[2].h_samp_factor = cinfo.comp_info[2].v_samp_factor = 1;
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(rgb + std::size_t{cinfo.next_scanline} * w * 3);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    return true;
}

bool jpeg_decode_raw(const std::uint8_t* data, std::size_t size, std::uint8_t** pixels, unsigned* w, unsigned* h,
                     char* message) {
    jpeg_decompress_struct cinfo;
    JpegError err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    *pixels = nullptr;
    if (setjmp(err.jump)) {
        std::memcpy(message, err.message, JMSG_LENGTH_MAX);
        jpeg_destroy_decompress(&cinfo);
        std::free(*pixels);
        *pixels = nullptr;
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    cinfo.dct_method = JDCT_ISLOW;
    jpeg_start_decompress(&cinfo);
    *w = cinfo.output_width;
    *h = cinfo.output_height;
    *pixels = static_cast<std::uint8_t*>(std::malloc(std::size_t{*w} * *h * 3));
    if (!*pixels) {
        jpeg_destroy_decompress(&cinfo);
        std::strcpy(message, "out of memory");
        return false;
    }
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = *pixels + std::size_t{cinfo.output_scanline} * *w * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

}  // namespace

std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality) {
    if (quality < 1 || quality > 100) throw std::invalid_argument("jpeg quality must be in [1, 100]");
    unsigned char* buf = nullptr;
    unsigned long size = 0;
    char message[JMSG_LENGTH_MAX] = {};
    if (!jpeg_encode_raw(img.bytes().data(), img.width(), img.height(), quality, &buf, &size, message)) {
        std::free(buf);
        throw std::runtime_error(std::string("jpeg encode failed: ") + message);
    }
    std::vector<std::uint8_t> out(buf, buf + size);
    std::free(buf);
    return out;
}

ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes) {
    std::uint8_t* pixels = nullptr;
    unsigned w = 0, h = 0;
    char message[JMSG_LENGTH_MAX] = {};
    if (!jpeg_decode_raw(bytes.data(), bytes.size(), &pixels, &w, &h, message))
        throw std::runtime_error(std::string("jpeg decode failed: ") + message);
    std::vector<std::uint8_t> data(pixels, pixels + std::size_t{w} * h * 3);
    std::free(pixels);
    return ImageBuffer(w, h, std::move(data));
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ImageBuffer read_image(const fs::path& path) {
    const auto bytes = read_file(path);
    static constexpr std::uint8_t kPng[] = {0x89, 'P', 'N', 'G'};
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kPng, 4) == 0) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8) return decode_jpeg(bytes);
    throw std::runtime_error(path.string() + ": not a PNG or JPEG file");
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
    static std::atomic<unsigned long> counter{0};
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_text_atomic(const fs::path& path, std::string_view text) {
    write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void write_png(const ImageBuffer& img, const fs::path& path) { write_file_atomic(path, encode_png(img)); }

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 15]);
    }
    return out;
}

std::string sha256_hex(std::string_view text) {
    return sha256_hex(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace xprobe
