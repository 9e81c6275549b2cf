#ifndef WMH_NIFTI_IO_HPP
#define WMH_NIFTI_IO_HPP

#include <cstdint>
#include <string>

#include "wmh/volume.hpp"

namespace wmh {

class NiftiError : public VolumeError {
public:
    explicit NiftiError(const std::string& msg) : VolumeError("nifti: " + msg) {}
};

/// NIfTI-1 header, exact 348-byte binary layout.
#pragma pack(push, 1)
struct NiftiHeader {
    std::int32_t sizeof_hdr;     // must be 348
    char data_type[10];
    char db_name[18];
    std::int32_t extents;
    std::int16_t session_error;
    char regular;
    char dim_info;
    std::int16_t dim[8];
    float intent_p1;
    float intent_p2;
    float intent_p3;
    std::int16_t intent_code;
    std::int16_t datatype;
    std::int16_t bitpix;
    std::int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    std::int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max;
    float cal_min;
    float slice_duration;
    float toffset;
    std::int32_t glmax;
    std::int32_t glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code;
    std::int16_t sform_code;
    float quatern_b;
    float quatern_c;
    float quatern_d;
    float qoffset_x;
    float qoffset_y;
    float qoffset_z;
    float srow_x[4];
    float srow_y[4];
    float srow_z[4];
    char intent_name[16];
    char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(NiftiHeader) == 348, "NIfTI-1 header must be 348 bytes");

// Datatype codes from the NIfTI-1 standard.
enum NiftiDatatype : std::int16_t {
    NIFTI_UINT8 = 2,
    NIFTI_INT16 = 4,
    NIFTI_INT32 = 8,
    NIFTI_FLOAT32 = 16,
    NIFTI_FLOAT64 = 64,
};

enum class NiftiOutputType { Uint8, Float32 };

/// Read a single-file NIfTI-1 volume, transparently decompressing gzip
/// (detected by the 0x1F8B magic). Voxels are scaled by scl_slope/scl_inter
/// when scl_slope != 0; endianness is auto-detected via sizeof_hdr.
Volume3D read_nifti(const std::string& path);

/// Read as a binary mask (any nonzero voxel is true).
BinaryMask3D read_nifti_mask(const std::string& path);

/// Write a single-file "n+1" NIfTI-1 volume with vox_offset 352 and the
/// affine stored as the sform. Gzip-compresses when the path ends in ".gz".
void write_nifti(const Volume3D& vol, const std::string& path,
                 NiftiOutputType dtype = NiftiOutputType::Float32);
void write_nifti(const BinaryMask3D& mask, const std::string& path);

}  // namespace wmh

#endif
