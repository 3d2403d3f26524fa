#include "stcw/ppm.hpp"

#include <filesystem>
#include <fstream>

namespace stcw {

void write_ppm(const std::string& path, std::size_t height, std::size_t width,
               const std::vector<unsigned char>& rgb) {
    if (rgb.size() != height * width * 3) throw ValidationError("ppm: pixel buffer size mismatch");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError(path + ": cannot open for writing");
    out << "P6\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (!out) throw ValidationError(path + ": write failed");
}

std::vector<std::string> dump_kernel_ppms(const std::string& dir, const std::string& layer,
                                          const Tensor<float>& w) {
    if (w.rank() != 5) throw ValidationError("dump-kernels: layer weight must be (O,C,kT,kH,kW)");
    const std::size_t o_ch = w.dim(0), c_ch = w.dim(1), kt = w.dim(2), kh = w.dim(3), kw = w.dim(4);
    std::filesystem::create_directories(dir);

    std::vector<std::string> written;
    for (std::size_t o = 0; o < o_ch; ++o) {
        float lo = w[w.at5(o, 0, 0, 0, 0)], hi = lo;
        for (std::size_t i = 0; i < c_ch * kt * kh * kw; ++i) {
            float v = w[o * c_ch * kt * kh * kw + i];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        auto norm = [&](float v) -> float { return hi > lo ? (v - lo) / (hi - lo) : 0.5f; };

        for (std::size_t t = 0; t < kt; ++t) {
            std::vector<unsigned char> rgb(kh * kw * 3);
            for (std::size_t y = 0; y < kh; ++y)
                for (std::size_t x = 0; x < kw; ++x) {
                    unsigned char px[3];
                    if (c_ch == 3) {
                        for (std::size_t c = 0; c < 3; ++c)
                            px[c] = static_cast<unsigned char>(
                                std::lround(255.0f * norm(w[w.at5(o, c, t, y, x)])));
                    } else {
                        float mean = 0.0f;
                        for (std::size_t c = 0; c < c_ch; ++c) mean += w[w.at5(o, c, t, y, x)];
                        mean /= static_cast<float>(c_ch);
                        unsigned char g =
                            static_cast<unsigned char>(std::lround(255.0f * norm(mean)));
                        px[0] = px[1] = px[2] = g;
                    }
                    for (std::size_t c = 0; c < 3; ++c) rgb[(y * kw + x) * 3 + c] = px[c];
                }
            std::string name = layer + "_o" + std::to_string(o) + "_t" + std::to_string(t) + ".ppm";
            write_ppm((std::filesystem::path(dir) / name).string(), kh, kw, rgb);
            written.push_back(name);
        }
    }
    return written;
}

}  // namespace stcw
