// Copyright 2026 The insa-codec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INSA_VIDEO_HPP_
#define INSA_VIDEO_HPP_

#include <string>
#include <vector>

#include "insa/tensor.hpp"

namespace insa {

// RGB frames as (1, 3, H, W) tensors with values in [0, 1].
struct VideoClip {
  std::vector<Tensor> frames;
  int width = 0;
  int height = 0;
  double fps = 30.0;

  std::size_t size() const { return frames.size(); }
};

// 8-bit Y4M. Accepts 4:2:0 (C420, C420jpeg, C420paldv, C420mpeg2, or no
// colorspace tag) and 4:4:4 (C444). YUV is read as BT.709 full range;
// chroma is upsampled by sample replication.
VideoClip read_y4m(const std::string& path);
// Writes 4:4:4 BT.709 full range.
void write_y4m(const std::string& path, const VideoClip& clip);

// Binary PPM (P6, maxval 255 or 65535).
Tensor read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Tensor& frame);

// Little-endian PFM ("PF"), stored bottom-to-top as the format requires.
// Lossless for float frames.
Tensor read_pfm(const std::string& path);
void write_pfm(const std::string& path, const Tensor& frame);

// All *.ppm or all *.pfm files of a directory in lexicographic order.
VideoClip read_frame_dir(const std::string& dir);
// Writes frame_0000.<ext> ... where ext is "ppm" or "pfm".
void write_frame_dir(const std::string& dir, const std::vector<Tensor>& frames, const std::string& ext = "ppm");

// Dispatches on the path: directories hold PPM or PFM frames, files must be Y4M.
VideoClip read_video(const std::string& path);

// Keeps every `step`-th frame starting at 0 and at most `max_frames`
// frames (0 = no limit).
VideoClip subsample(const VideoClip& clip, int step, int max_frames = 0);

// Reflect-pads right and bottom up to the next multiple of `multiple`.
Tensor pad_to_multiple(const Tensor& frame, int multiple);
Tensor crop(const Tensor& frame, int width, int height);

}  // namespace insa

#endif  // INSA_VIDEO_HPP_
