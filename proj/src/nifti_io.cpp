#include "wmh/nifti_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace wmh {

namespace {

void swap_bytes(void* p, std::size_t size) {
    auto* b = static_cast<unsigned char*>(p);
    std::reverse(b, b + size);
}

template <typename T>
void swap_value(T& v) {
    swap_bytes(&v, sizeof(T));
}

void swap_header(NiftiHeader& h) {
    swap_value(h.sizeof_hdr);
    swap_value(h.extents);
    swap_value(h.session_error);
    for (auto& d : h.dim) swap_value(d);
    swap_value(h.intent_p1);
    swap_value(h.intent_p2);
    swap_value(h.intent_p3);
    swap_value(h.intent_code);
    swap_value(h.datatype);
    swap_value(h.bitpix);
    swap_value(h.slice_start);
    for (auto& p : h.pixdim) swap_value(p);
    swap_value(h.vox_offset);
    swap_value(h.scl_slope);
    swap_value(h.scl_inter);
    swap_value(h.slice_end);
    swap_value(h.cal_max);
    swap_value(h.cal_min);
    swap_value(h.slice_duration);
    swap_value(h.toffset);
    swap_value(h.glmax);
    swap_value(h.glmin);
    swap_value(h.qform_code);
    swap_value(h.sform_code);
    swap_value(h.quatern_b);
    swap_value(h.quatern_c);
    swap_value(h.quatern_d);
    swap_value(h.qoffset_x);
    swap_value(h.qoffset_y);
    swap_value(h.qoffset_z);
    for (auto& v : h.srow_x) swap_value(v);
    for (auto& v : h.srow_y) swap_value(v);
    for (auto& v : h.srow_z) swap_value(v);
}

bool is_gzip(const std::vector<unsigned char>& bytes) {
    return bytes.size() >= 2 && bytes[0] == 0x1F && bytes[1] == 0x8B;
}

std::vector<unsigned char> read_raw_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw NiftiError("cannot open file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

std::vector<unsigned char> gunzip(const std::vector<unsigned char>& in) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) throw NiftiError("inflateInit failed");
    std::vector<unsigned char> out;
    out.reserve(in.size() * 4);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    unsigned char buf[1 << 16];
    int ret = Z_OK;
    do {
        zs.next_out = buf;
        zs.avail_out = sizeof(buf);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw NiftiError("gzip stream corrupt");
        }
        out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    } while (ret != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (ret != Z_STREAM_END) throw NiftiError("gzip stream truncated");
    return out;
}

std::vector<unsigned char> gzip_compress(const unsigned char* data, std::size_t n) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK)
        throw NiftiError("deflateInit failed");
    std::vector<unsigned char> out;
    zs.next_in = const_cast<Bytef*>(data);
    zs.avail_in = static_cast<uInt>(n);
    unsigned char buf[1 << 16];
    int ret;
    do {
        zs.next_out = buf;
        zs.avail_out = sizeof(buf);
        ret = deflate(&zs, Z_FINISH);
        out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    } while (ret != Z_STREAM_END);
    deflateEnd(&zs);
    return out;
}

struct ParsedHeader {
    NiftiHeader h;
    bool swapped = false;
};

ParsedHeader parse_header(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < sizeof(NiftiHeader)) throw NiftiError("file shorter than 348-byte header");
    ParsedHeader p;
    std::memcpy(&p.h, bytes.data(), sizeof(NiftiHeader));
    if (p.h.sizeof_hdr != 348) {
        swap_header(p.h);
        p.swapped = true;
        if (p.h.sizeof_hdr != 348) throw NiftiError("sizeof_hdr is not 348 in either byte order");
    }
    if (std::memcmp(p.h.magic, "ni1", 4) == 0)
        throw NiftiError("two-file (hdr/img) NIfTI is not supported");
    if (std::memcmp(p.h.magic, "n+1", 4) != 0) throw NiftiError("bad magic, not a NIfTI-1 file");
    if (p.h.dim[0] < 1 || p.h.dim[0] > 7) throw NiftiError("dim[0] out of range 1..7");
    if (p.h.dim[0] < 3) throw NiftiError("volume must have at least 3 spatial dimensions");
    for (int i = 4; i <= p.h.dim[0]; ++i)
        if (p.h.dim[i] > 1) throw NiftiError("more than 3 nontrivial dimensions");
    for (int i = 1; i <= 3; ++i) {
        if (p.h.dim[i] <= 0) throw NiftiError("non-positive spatial dimension");
        if (!(p.h.pixdim[i] > 0.0f)) throw NiftiError("non-positive pixdim");
    }
    return p;
}

Geometry geometry_from_header(const NiftiHeader& h) {
    Geometry g;
    g.dims = {h.dim[1], h.dim[2], h.dim[3]};
    g.spacing = {h.pixdim[1], h.pixdim[2], h.pixdim[3]};
    if (h.sform_code > 0) {
        for (int c = 0; c < 4; ++c) {
            g.affine[0 * 4 + c] = h.srow_x[c];
            g.affine[1 * 4 + c] = h.srow_y[c];
            g.affine[2 * 4 + c] = h.srow_z[c];
        }
    } else if (h.qform_code > 0) {
        // Quaternion to rotation per the NIfTI-1 standard.
        double b = h.quatern_b, c = h.quatern_c, d = h.quatern_d;
        double a = 1.0 - (b * b + c * c + d * d);
        a = a < 1e-7 ? 0.0 : std::sqrt(a);
        double qfac = h.pixdim[0] < 0.0f ? -1.0 : 1.0;
        double R[3][3] = {
            {a * a + b * b - c * c - d * d, 2 * b * c - 2 * a * d, 2 * b * d + 2 * a * c},
            {2 * b * c + 2 * a * d, a * a + c * c - b * b - d * d, 2 * c * d - 2 * a * b},
            {2 * b * d - 2 * a * c, 2 * c * d + 2 * a * b, a * a + d * d - c * c - b * b}};
        double off[3] = {h.qoffset_x, h.qoffset_y, h.qoffset_z};
        for (int r = 0; r < 3; ++r) {
            g.affine[4 * r + 0] = R[r][0] * g.spacing[0];
            g.affine[4 * r + 1] = R[r][1] * g.spacing[1];
            g.affine[4 * r + 2] = R[r][2] * g.spacing[2] * qfac;
            g.affine[4 * r + 3] = off[r];
        }
    } else {
        g.affine = {g.spacing[0], 0, 0, 0,
                    0, g.spacing[1], 0, 0,
                    0, 0, g.spacing[2], 0,
                    0, 0, 0, 1};
    }
    g.validate();
    return g;
}

template <typename T>
void decode_payload(const unsigned char* src, std::size_t n, bool swapped,
                    double slope, double inter, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
        T v;
        std::memcpy(&v, src + i * sizeof(T), sizeof(T));
        if (swapped) swap_value(v);
        out[i] = static_cast<double>(v) * slope + inter;
    }
}

}  // namespace

Volume3D read_nifti(const std::string& path) {
    std::vector<unsigned char> bytes = read_raw_file(path);
    if (is_gzip(bytes)) bytes = gunzip(bytes);
    ParsedHeader p = parse_header(bytes);
    const NiftiHeader& h = p.h;

    std::size_t bpp;
    switch (h.datatype) {
        case NIFTI_UINT8: bpp = 1; break;
        case NIFTI_INT16: bpp = 2; break;
        case NIFTI_INT32: bpp = 4; break;
        case NIFTI_FLOAT32: bpp = 4; break;
        case NIFTI_FLOAT64: bpp = 8; break;
        default: throw NiftiError("unsupported datatype code " + std::to_string(h.datatype));
    }
    if (h.bitpix != static_cast<std::int16_t>(bpp * 8))
        throw NiftiError("bitpix inconsistent with datatype");

    Geometry g = geometry_from_header(h);
    std::size_t n = g.voxel_count();
    if (!(h.vox_offset >= 348.0f) || !(h.vox_offset <= 1e9f))
        throw NiftiError("vox_offset out of range");
    std::size_t offset = static_cast<std::size_t>(h.vox_offset);
    if (bytes.size() < offset + n * bpp) throw NiftiError("truncated voxel payload");

    double slope = (h.scl_slope == 0.0f) ? 1.0 : static_cast<double>(h.scl_slope);
    double inter = (h.scl_slope == 0.0f) ? 0.0 : static_cast<double>(h.scl_inter);

    Volume3D vol(g);
    const unsigned char* src = bytes.data() + offset;
    switch (h.datatype) {
        case NIFTI_UINT8: decode_payload<std::uint8_t>(src, n, false, slope, inter, vol.data); break;
        case NIFTI_INT16: decode_payload<std::int16_t>(src, n, p.swapped, slope, inter, vol.data); break;
        case NIFTI_INT32: decode_payload<std::int32_t>(src, n, p.swapped, slope, inter, vol.data); break;
        case NIFTI_FLOAT32: decode_payload<float>(src, n, p.swapped, slope, inter, vol.data); break;
        case NIFTI_FLOAT64: decode_payload<double>(src, n, p.swapped, slope, inter, vol.data); break;
    }
    return vol;
}

BinaryMask3D read_nifti_mask(const std::string& path) {
    Volume3D v = read_nifti(path);
    BinaryMask3D m(v.geom);
    for (std::size_t i = 0; i < v.data.size(); ++i) m.data[i] = v.data[i] != 0.0 ? 1 : 0;
    return m;
}

namespace {

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw NiftiError("cannot open for writing: " + path);
    if (gz) {
        auto compressed = gzip_compress(bytes.data(), bytes.size());
        f.write(reinterpret_cast<const char*>(compressed.data()),
                static_cast<std::streamsize>(compressed.size()));
    } else {
        f.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
    }
    if (!f) throw NiftiError("write failed: " + path);
}

std::vector<unsigned char> encode(const Geometry& g, const std::vector<double>& data,
                                  NiftiOutputType dtype) {
    NiftiHeader h{};
    h.sizeof_hdr = 348;
    h.regular = 'r';
    h.dim[0] = 3;
    h.dim[1] = static_cast<std::int16_t>(g.dims[0]);
    h.dim[2] = static_cast<std::int16_t>(g.dims[1]);
    h.dim[3] = static_cast<std::int16_t>(g.dims[2]);
    for (int i = 4; i < 8; ++i) h.dim[i] = 1;
    h.pixdim[0] = 1.0f;
    for (int i = 1; i <= 3; ++i) h.pixdim[i] = static_cast<float>(g.spacing[i - 1]);
    for (int i = 4; i < 8; ++i) h.pixdim[i] = 0.0f;
    h.vox_offset = 352.0f;
    h.scl_slope = 1.0f;
    h.scl_inter = 0.0f;
    h.xyzt_units = 2;  // NIFTI_UNITS_MM
    h.sform_code = 1;  // NIFTI_XFORM_SCANNER_ANAT
    h.qform_code = 0;
    for (int c = 0; c < 4; ++c) {
        h.srow_x[c] = static_cast<float>(g.affine[0 * 4 + c]);
        h.srow_y[c] = static_cast<float>(g.affine[1 * 4 + c]);
        h.srow_z[c] = static_cast<float>(g.affine[2 * 4 + c]);
    }
    std::memcpy(h.magic, "n+1", 4);

    std::size_t n = data.size();
    std::size_t bpp;
    if (dtype == NiftiOutputType::Uint8) {
        h.datatype = NIFTI_UINT8;
        h.bitpix = 8;
        bpp = 1;
    } else {
        h.datatype = NIFTI_FLOAT32;
        h.bitpix = 32;
        bpp = 4;
    }

    std::vector<unsigned char> bytes(352 + n * bpp, 0);
    std::memcpy(bytes.data(), &h, sizeof(h));  // bytes 348..351 stay zero (no extensions)
    unsigned char* dst = bytes.data() + 352;
    if (dtype == NiftiOutputType::Uint8) {
        for (std::size_t i = 0; i < n; ++i)
            dst[i] = static_cast<std::uint8_t>(std::clamp(data[i], 0.0, 255.0));
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            float v = static_cast<float>(data[i]);
            std::memcpy(dst + i * 4, &v, 4);
        }
    }
    return bytes;
}

}  // namespace

void write_nifti(const Volume3D& vol, const std::string& path, NiftiOutputType dtype) {
    write_bytes(path, encode(vol.geom, vol.data, dtype));
}

void write_nifti(const BinaryMask3D& mask, const std::string& path) {
    std::vector<double> data(mask.data.size());
    for (std::size_t i = 0; i < mask.data.size(); ++i) data[i] = mask.data[i] ? 1.0 : 0.0;
    write_bytes(path, encode(mask.geom, data, NiftiOutputType::Uint8));
}

}  // namespace wmh
