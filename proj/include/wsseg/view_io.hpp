#ifndef WSSEG_VIEW_IO_HPP
#define WSSEG_VIEW_IO_HPP

#include <string>
#include <vector>

#include "wsseg/camera.hpp"

namespace wsseg {

// A manifest is a JSON array of
//   {"intrinsics": 3x3, "rotation": 3x3, "translation": [3], "width": W,
//    "height": H, "payload_path": "view_000.lf01", "payload_kind": "logits"}
// where matrices are row-major nested arrays and payload paths are resolved
// against the manifest's directory. "payload_kind" is optional ("logits"
// or "embeddings", default "logits").
std::vector<CameraView> read_view_manifest(const std::string& path);

// Writes one LF01 payload per view next to the manifest.
void write_view_manifest(const std::vector<CameraView>& views, const std::string& path);

}  // namespace wsseg

#endif  // WSSEG_VIEW_IO_HPP
