#include "skyrmion/artifacts.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <openssl/evp.h>

#include "skyrmion/colormap.hpp"

namespace skyrmion {

namespace {

class Sha256 {
  public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw std::runtime_error("SHA-256 initialization failed");
        }
    }
    void update(const char* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw std::runtime_error("SHA-256 update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw std::runtime_error("SHA-256 final failed");
        std::string out;
        for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
        return out;
    }

  private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error(fmt::format("cannot read '{}' for checksumming", path.string()));
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (is) {
        is.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(is.gcount()));
    }
    return h.hex();
}

std::string sha256_string(const std::string& data) {
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex();
}

void write_manifest(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& entries) {
    namespace fs = std::filesystem;
    const fs::path manifest = dir / "manifest.txt";
    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (fs::equivalent(entry.path(), manifest)) continue;
        files.push_back(fs::relative(entry.path(), dir).generic_string());
    }
    std::sort(files.begin(), files.end());
    const fs::path tmp = dir / "manifest.txt.partial";
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
        for (const auto& [k, v] : entries) fmt::print(os, "{}={}\n", k, v);
        for (const auto& f : files) fmt::print(os, "file.{}={}\n", f, sha256_file(dir / f));
        if (!os) throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
    }
    fs::rename(tmp, manifest);
}

void write_heatmap_svg(std::ostream& os, const std::vector<Vec2>& grid, const std::vector<double>& values, int resolution,
                       const std::string& title) {
    const auto res = static_cast<std::size_t>(resolution);
    if (grid.size() != res * res || values.size() != grid.size()) {
        throw std::invalid_argument("heatmap grid does not match the resolution");
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double span = *hi_it - lo;
    constexpr int kCell = 6;
    constexpr int kMargin = 40;
    const int side = resolution * kCell;
    const int width = side + 2 * kMargin + 60;
    const int height = side + 2 * kMargin;
    fmt::print(os, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", width,
               height, width, height);
    fmt::print(os, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    fmt::print(os, "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n", kMargin,
               xml_escape(title));
    for (std::size_t iy = 0; iy < res; ++iy) {
        for (std::size_t ix = 0; ix < res; ++ix) {
            const double v = values[iy * res + ix];
            const Rgb c = colormap(span > 0.0 ? (v - lo) / span : 0.0);
            // qy grows upward.
            const auto x = kMargin + static_cast<int>(ix) * kCell;
            const auto y = kMargin + static_cast<int>(res - 1 - iy) * kCell;
            fmt::print(os, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#{:02x}{:02x}{:02x}\"/>\n", x, y,
                       kCell, kCell, c.r, c.g, c.b);
        }
    }
    // Color bar.
    const int bar_x = kMargin + side + 20;
    for (int k = 0; k < 64; ++k) {
        const Rgb c = colormap(k / 63.0);
        const int y = kMargin + side - (k + 1) * side / 64;
        fmt::print(os, "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"{}\" fill=\"#{:02x}{:02x}{:02x}\"/>\n", bar_x, y,
                   side / 64 + 1, c.r, c.g, c.b);
    }
    fmt::print(os, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{:.3g}</text>\n", bar_x,
               kMargin - 4, *hi_it);
    fmt::print(os, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{:.3g}</text>\n", bar_x,
               kMargin + side + 12, lo);
    fmt::print(os,
               "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">qx [{:.3f}, {:.3f}], qy [{:.3f}, "
               "{:.3f}]</text>\n",
               kMargin, kMargin + side + 24, grid.front().x, grid.back().x, grid.front().y, grid.back().y);
    fmt::print(os, "</svg>\n");
}

}  // namespace skyrmion
