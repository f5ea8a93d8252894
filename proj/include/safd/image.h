// Copyright 2026 The SAFD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>

#include "safd/tensor.h"

namespace safd {

// Grayscale images are 1 x h x w float tensors with values in [0, 1].
using Image = Tensor<float>;

// Rounds half up; never returns less than 1.
int ScaledDim(int dim, double factor);

// Bilinear resampling with half-pixel centers: a continuous image point p
// maps to p * factor, so box coordinates unmap by dividing by the factor.
Image ResizeBilinear(const Image& img, double factor);

// The window [x0, x0 + w) x [y0, y0 + h) of ResizeBilinear(img, factor),
// computed without materializing the full resized image.
Image ResizeWindow(const Image& img, double factor, int x0, int y0, int w, int h);

// Aspect-preserving resize so the long side equals long_side. Returns the
// input unchanged when it already has that long side.
Image ResizeToLongSide(const Image& img, int long_side, double* factor_out = nullptr);

// 8-bit binary PGM (P5). PPM (P6) input is converted to luma.
Image ReadImage(const std::filesystem::path& path);
void WritePgm(const Image& img, const std::filesystem::path& path);

// Min-max scaled dump of one channel of a c x h x w tensor.
void WriteChannelPgm(const Tensor<float>& t, int channel,
                     const std::filesystem::path& path);

// Rounds every pixel to the nearest multiple of 1/255, as PGM storage does.
void QuantizeTo8Bit(Image& img);

}  // namespace safd
