#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rayalign/pointmap.hpp"

namespace rayalign {

// CAMT binary tensor: magic "CAMT" | u16 version (LE) | u8 dtype (0 =
// float32) | u8 rank | rank x u32 dims (LE) | row-major float32 payload.
// Values must be finite.

struct CamtTensor {
    std::vector<uint32_t> dims;
    std::vector<float> data;

    size_t element_count() const;
};

void write_camt(const std::filesystem::path& path, const CamtTensor& tensor);
CamtTensor read_camt(const std::filesystem::path& path);

// Field adapters. Maps serialize as (height, width), ray fields and point
// clouds as (height, width, 3) / (n, 3); invalid pixels ride along as 0.
CamtTensor tensor_from_radial(const RadialMap& map);
RadialMap radial_from_tensor(const CamtTensor& tensor);
CamtTensor tensor_from_conf(const ConfidenceMap& map);
ConfidenceMap conf_from_tensor(const CamtTensor& tensor);
CamtTensor tensor_from_rays(const RayField& field);
CamtTensor tensor_from_points(const std::vector<Vec3>& points);
CamtTensor tensor_from_scalars(const std::vector<double>& values);

}  // namespace rayalign
