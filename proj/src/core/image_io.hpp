// Copyright 2026 The SADN Light Field Codec Authors. All Rights Reserved.
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

#ifndef SADN_CORE_IMAGE_IO_HPP_
#define SADN_CORE_IMAGE_IO_HPP_

#include <optional>
#include <string>

#include "lightfield.hpp"

namespace sadn {

// 8-bit PNG, binary PPM (P6) or PGM (P5), chosen by extension. Samples are
// mapped to [0, 1] by v / 255 on read and round(v * 255) on write. Alpha is
// dropped.
Image ReadImage(const std::string& path);
void WriteImage(const std::string& path, const Image& image);

// Quantizes to the 8-bit grid the file formats can hold.
Image QuantizeTo8Bit(const Image& image);

// Sidecar "<image>.meta" with lines A=<n> and C=<n>.
std::string SidecarPath(const std::string& image_path);

// A from the argument if given, else from the sidecar. Fails if neither.
LensletImage ReadLenslet(const std::string& path,
                         std::optional<int> angular = std::nullopt);
void WriteLenslet(const std::string& path, const LensletImage& li);

// Directory of view_{u:02}_{v:02}.png files.
void WriteSaiDirectory(const std::string& dir, const SAIStack& stack);
SAIStack ReadSaiDirectory(const std::string& dir);

}  // namespace sadn

#endif  // SADN_CORE_IMAGE_IO_HPP_
