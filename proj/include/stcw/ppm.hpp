#pragma once

#include <string>
#include <vector>

#include "stcw/tensor.hpp"

namespace stcw {

// Binary PPM (P6), maxval 255.
void write_ppm(const std::string& path, std::size_t height, std::size_t width,
               const std::vector<unsigned char>& rgb);

// One image per (output channel, temporal slice) of a (O,C,kT,kH,kW) kernel,
// named "<layer>_o<c>_t<t>.ppm" under dir.  Values are min-max normalized per
// output-channel kernel (across C,kT,kH,kW); a constant kernel maps to 0.5.
// 3-channel kernels render as RGB, anything else as the channel mean in gray.
// Returns the written file names.
std::vector<std::string> dump_kernel_ppms(const std::string& dir, const std::string& layer,
                                          const Tensor<float>& w3d);

}  // namespace stcw
