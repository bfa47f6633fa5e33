#include "rayalign/camt.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace rayalign {

static_assert(std::endian::native == std::endian::little,
              "CAMT serialization assumes a little-endian host");

namespace {
constexpr char kMagic[4] = {'C', 'A', 'M', 'T'};
constexpr uint16_t kVersion = 1;
constexpr uint8_t kDtypeF32 = 0;
}  // namespace

size_t CamtTensor::element_count() const {
    size_t n = 1;
    for (uint32_t d : dims) n *= d;
    return dims.empty() ? 0 : n;
}

void write_camt(const std::filesystem::path& path, const CamtTensor& tensor) {
    if (tensor.data.size() != tensor.element_count()) {
        throw FormatError("write_camt: payload size does not match dims");
    }
    for (float v : tensor.data) {
        if (!std::isfinite(v)) throw FormatError("write_camt: non-finite value");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("write_camt: cannot open " + path.string());
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kVersion), 2);
    out.put(char(kDtypeF32));
    out.put(char(tensor.dims.size()));
    out.write(reinterpret_cast<const char*>(tensor.dims.data()),
              std::streamsize(tensor.dims.size() * 4));
    out.write(reinterpret_cast<const char*>(tensor.data.data()),
              std::streamsize(tensor.data.size() * 4));
    if (!out) throw FormatError("write_camt: write failed for " + path.string());
}

CamtTensor read_camt(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("read_camt: cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("read_camt: bad magic in " + path.string());
    }
    uint16_t version = 0;
    in.read(reinterpret_cast<char*>(&version), 2);
    if (version != kVersion) throw FormatError("read_camt: unsupported version");
    const int dtype = in.get();
    if (dtype != kDtypeF32) throw FormatError("read_camt: unsupported dtype");
    const int rank = in.get();
    if (rank < 1 || rank > 8) throw FormatError("read_camt: unsupported rank");

    CamtTensor tensor;
    tensor.dims.resize(rank);
    in.read(reinterpret_cast<char*>(tensor.dims.data()), rank * 4);
    if (!in) throw FormatError("read_camt: truncated header");
    tensor.data.resize(tensor.element_count());
    in.read(reinterpret_cast<char*>(tensor.data.data()),
            std::streamsize(tensor.data.size() * 4));
    if (!in) throw FormatError("read_camt: truncated payload in " + path.string());
    in.peek();
    if (!in.eof()) throw FormatError("read_camt: trailing bytes in " + path.string());
    for (float v : tensor.data) {
        if (!std::isfinite(v)) throw FormatError("read_camt: non-finite value");
    }
    return tensor;
}

CamtTensor tensor_from_radial(const RadialMap& map) {
    CamtTensor t;
    t.dims = {uint32_t(map.height), uint32_t(map.width)};
    t.data.assign(map.r.begin(), map.r.end());
    return t;
}

RadialMap radial_from_tensor(const CamtTensor& tensor) {
    if (tensor.dims.size() != 2) throw FormatError("radial_from_tensor: expected rank 2");
    RadialMap map(int(tensor.dims[1]), int(tensor.dims[0]));
    for (size_t i = 0; i < tensor.data.size(); ++i) map.r[i] = tensor.data[i];
    return map;
}

CamtTensor tensor_from_conf(const ConfidenceMap& map) {
    CamtTensor t;
    t.dims = {uint32_t(map.height), uint32_t(map.width)};
    t.data.assign(map.sigma.begin(), map.sigma.end());
    return t;
}

ConfidenceMap conf_from_tensor(const CamtTensor& tensor) {
    if (tensor.dims.size() != 2) throw FormatError("conf_from_tensor: expected rank 2");
    ConfidenceMap map(int(tensor.dims[1]), int(tensor.dims[0]), 0.0);
    for (size_t i = 0; i < tensor.data.size(); ++i) map.sigma[i] = tensor.data[i];
    return map;
}

CamtTensor tensor_from_rays(const RayField& field) {
    CamtTensor t;
    t.dims = {uint32_t(field.height), uint32_t(field.width), 3};
    t.data.reserve(field.size() * 3);
    for (const Vec3& d : field.dirs) {
        t.data.push_back(float(d.x()));
        t.data.push_back(float(d.y()));
        t.data.push_back(float(d.z()));
    }
    return t;
}

CamtTensor tensor_from_points(const std::vector<Vec3>& points) {
    CamtTensor t;
    t.dims = {uint32_t(points.size()), 3};
    t.data.reserve(points.size() * 3);
    for (const Vec3& p : points) {
        t.data.push_back(float(p.x()));
        t.data.push_back(float(p.y()));
        t.data.push_back(float(p.z()));
    }
    return t;
}

CamtTensor tensor_from_scalars(const std::vector<double>& values) {
    CamtTensor t;
    t.dims = {uint32_t(values.size())};
    t.data.assign(values.begin(), values.end());
    return t;
}

}  // namespace rayalign
