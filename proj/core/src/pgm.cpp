#include <cctype>
#include <fstream>
#include <string>

#include "vprsnn/error.hpp"
#include "vprsnn/signal.hpp"

namespace vprsnn {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in)
{
    std::string token;
    int c = 0;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!token.empty()) {
                break;
            }
            continue;
        }
        token.push_back(static_cast<char>(c));
    }
    return token;
}

int parse_header_int(std::istream& in, const std::filesystem::path& path, const char* what)
{
    auto tok = next_token(in);
    try {
        std::size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size() || v <= 0) {
            throw std::invalid_argument(tok);
        }
        return v;
    } catch (const std::exception&) {
        throw ValidationError(path.string() + ": bad PGM " + what + " '" + tok + "'");
    }
}

}  // namespace

ImageGray read_pgm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open image " + path.string());
    }
    if (next_token(in) != "P5") {
        throw ValidationError(path.string() + ": not a binary PGM (P5) file");
    }
    const int w = parse_header_int(in, path, "width");
    const int h = parse_header_int(in, path, "height");
    const int maxval = parse_header_int(in, path, "maxval");
    if (maxval > 255) {
        throw ValidationError(path.string() + ": only 8-bit PGM is supported");
    }
    ImageGray img(w, h);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
        throw IoError(path.string() + ": truncated pixel data");
    }
    if (maxval != 255) {
        for (auto& p : img.data) {
            p = to_pixel(static_cast<double>(p) * 255.0 / maxval);
        }
    }
    return img;
}

void write_pgm(const std::filesystem::path& path, const ImageGray& img)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write image " + path.string());
    }
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

}  // namespace vprsnn
