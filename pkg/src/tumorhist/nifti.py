"""Minimal NIfTI-1 single-file (``.nii`` / ``.nii.gz``) reader and mask writer.

Only what a skull-stripped structural scan needs: one 3D volume, a handful of
scalar datatypes, optional intensity scaling and enough orientation
information to tell which grid axis runs left-right, anterior-posterior and
superior-inferior.
"""

from __future__ import annotations

import gzip
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (BadMagicError, InvalidArgumentError, NiftiParseError,
                     NotThreeDimensionalError, UnsupportedDatatypeError)
from .volume import DEFAULT_AXIS_ROLES, BinaryMask3, Volume3

HEADER_SIZE = 348
# Byte offsets of the fields used here.
OFF_DIM = 40
OFF_DATATYPE = 70
OFF_BITPIX = 72
OFF_PIXDIM = 76
OFF_VOX_OFFSET = 108
OFF_SCL_SLOPE = 112
OFF_SCL_INTER = 116
OFF_CAL_MAX = 124
OFF_QFORM_CODE = 252
OFF_SFORM_CODE = 254
OFF_QUATERN = 256
OFF_QOFFSET = 268
OFF_SROW = 280
OFF_MAGIC = 344

# NIfTI datatype code -> numpy dtype (byte order applied at read time).
DATATYPES = {
    2: np.uint8,      # read-back of masks written by this module
    4: np.int16,
    16: np.float32,
    64: np.float64,
    512: np.uint16,
}

WORLD_ROLES = ("LR", "AP", "SI")


@dataclass(eq=False)
class NiftiHeader:
    raw: bytes
    endian: str
    dims: tuple[int, int, int]
    datatype: int
    pixdim: tuple[float, float, float]
    vox_offset: int
    scl_slope: float
    scl_inter: float
    affine: np.ndarray | None
    axis_roles: tuple[str, str, str]


def _open(path):
    path = os.fspath(path)
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _quaternion_affine(b, c, d, pixdim, qfac, offset) -> np.ndarray:
    a2 = 1.0 - (b * b + c * c + d * d)
    a = np.sqrt(a2) if a2 > 1e-7 else 0.0
    r = np.array([
        [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b],
    ])
    scale = np.array([pixdim[0], pixdim[1], pixdim[2] * qfac])
    out = np.eye(4)
    out[:3, :3] = r * scale
    out[:3, 3] = offset
    return out


def _roles_from_affine(affine: np.ndarray | None):
    """World axis each voxel axis points along most strongly (x=LR, y=AP, z=SI)."""
    if affine is None:
        return DEFAULT_AXIS_ROLES
    m = np.abs(affine[:3, :3])
    picks = tuple(int(np.argmax(m[:, k])) for k in range(3))
    if len(set(picks)) != 3:
        return DEFAULT_AXIS_ROLES
    return tuple(WORLD_ROLES[p] for p in picks)


def parse_header(raw: bytes) -> NiftiHeader:
    if len(raw) < HEADER_SIZE:
        raise NiftiParseError(f"file too short for a NIfTI-1 header ({len(raw)} bytes)", len(raw))
    for endian in ("<", ">"):
        if struct.unpack_from(endian + "i", raw, 0)[0] == HEADER_SIZE:
            break
    else:
        raise NiftiParseError("sizeof_hdr is not 348 in either byte order", 0)

    magic = raw[OFF_MAGIC:OFF_MAGIC + 4]
    if magic == b"ni1\x00":
        raise BadMagicError("two-file NIfTI (ni1) is not supported", OFF_MAGIC)
    if magic != b"n+1\x00":
        raise BadMagicError(f"bad magic {magic!r}", OFF_MAGIC)

    dim = struct.unpack_from(endian + "8h", raw, OFF_DIM)
    ndim = dim[0]
    if ndim == 4 and dim[4] == 1:
        pass
    elif ndim != 3:
        raise NotThreeDimensionalError(f"expected a 3D volume, dim = {list(dim[:ndim + 1])}",
                                       OFF_DIM)
    if min(dim[1:4]) < 1:
        raise NiftiParseError(f"non-positive spatial dims {dim[1:4]}", OFF_DIM + 2)

    datatype = struct.unpack_from(endian + "h", raw, OFF_DATATYPE)[0]
    if datatype not in DATATYPES:
        raise UnsupportedDatatypeError(f"datatype code {datatype} not supported", OFF_DATATYPE)

    pixdim = struct.unpack_from(endian + "8f", raw, OFF_PIXDIM)
    vox_offset = struct.unpack_from(endian + "f", raw, OFF_VOX_OFFSET)[0]
    if vox_offset < HEADER_SIZE or vox_offset != int(vox_offset):
        raise NiftiParseError(f"invalid vox_offset {vox_offset}", OFF_VOX_OFFSET)
    slope, inter = struct.unpack_from(endian + "2f", raw, OFF_SCL_SLOPE)
    qform_code, sform_code = struct.unpack_from(endian + "2h", raw, OFF_QFORM_CODE)

    affine = None
    if sform_code > 0:
        affine = np.eye(4)
        affine[:3, :] = np.array(struct.unpack_from(endian + "12f", raw, OFF_SROW)).reshape(3, 4)
    elif qform_code > 0:
        b, c, d = struct.unpack_from(endian + "3f", raw, OFF_QUATERN)
        offset = struct.unpack_from(endian + "3f", raw, OFF_QOFFSET)
        qfac = -1.0 if pixdim[0] < 0 else 1.0
        affine = _quaternion_affine(b, c, d, pixdim[1:4], qfac, offset)

    return NiftiHeader(raw[:HEADER_SIZE], endian, tuple(int(v) for v in dim[1:4]), datatype,
                       tuple(float(v) for v in pixdim[1:4]), int(vox_offset),
                       float(slope), float(inter), affine, _roles_from_affine(affine))


def read_nifti(path, axis_roles=None):
    """Return ``(Volume3, NiftiHeader)``.

    ``axis_roles`` overrides the orientation derived from the header.
    Stored values are scaled by ``scl_slope``/``scl_inter`` when the slope is
    nonzero.
    """
    with _open(path) as fh:
        blob = fh.read()
    hdr = parse_header(blob)
    dtype = np.dtype(DATATYPES[hdr.datatype]).newbyteorder(hdr.endian)
    count = int(np.prod(hdr.dims))
    need = hdr.vox_offset + count * dtype.itemsize
    if len(blob) < need:
        raise NiftiParseError(f"image data truncated: need {need} bytes, have {len(blob)}",
                              len(blob))
    flat = np.frombuffer(blob, dtype=dtype, count=count, offset=hdr.vox_offset)
    data = flat.reshape(hdr.dims, order="F")
    if hdr.scl_slope != 0 and np.isfinite(hdr.scl_slope) and \
            (hdr.scl_slope != 1 or hdr.scl_inter != 0):
        data = data.astype(np.float64) * hdr.scl_slope + hdr.scl_inter
    else:
        data = data.astype(dtype.newbyteorder("="))
    roles = tuple(axis_roles) if axis_roles is not None else hdr.axis_roles
    return Volume3(np.ascontiguousarray(data), roles), hdr


def _put(buf: bytearray, endian: str, fmt: str, offset: int, *values) -> None:
    struct.pack_into(endian + fmt, buf, offset, *values)


def write_nifti_mask(path, mask: BinaryMask3, source: NiftiHeader) -> None:
    """Write a 0/1 uint8 volume, copying geometry from ``source``.

    A path ending in ``.gz`` is gzip-compressed.
    """
    if tuple(mask.dims) != tuple(source.dims):
        raise InvalidArgumentError(f"mask dims {mask.dims} do not match header dims {source.dims}")
    e = source.endian
    hdr = bytearray(source.raw)
    _put(hdr, e, "8h", OFF_DIM, 3, *source.dims, 1, 1, 1, 1)
    _put(hdr, e, "h", OFF_DATATYPE, 2)
    _put(hdr, e, "h", OFF_BITPIX, 8)
    _put(hdr, e, "f", OFF_VOX_OFFSET, 352.0)
    _put(hdr, e, "2f", OFF_SCL_SLOPE, 1.0, 0.0)
    _put(hdr, e, "2f", OFF_CAL_MAX, 1.0, 0.0)
    hdr[OFF_MAGIC:OFF_MAGIC + 4] = b"n+1\x00"
    payload = bytes(hdr) + b"\x00" * 4 + np.asarray(mask.data, dtype=np.uint8).tobytes(order="F")
    _write_payload(path, payload)


def minimal_header(dims, datatype: int = 16, pixdim=(1.0, 1.0, 1.0), endian: str = "<") -> NiftiHeader:
    """A fresh header with identity sform, for volumes that never came from disk."""
    if datatype not in DATATYPES:
        raise UnsupportedDatatypeError(f"datatype code {datatype} not supported", OFF_DATATYPE)
    buf = bytearray(HEADER_SIZE)
    _put(buf, endian, "i", 0, HEADER_SIZE)
    _put(buf, endian, "8h", OFF_DIM, 3, *dims, 1, 1, 1, 1)
    _put(buf, endian, "h", OFF_DATATYPE, datatype)
    _put(buf, endian, "h", OFF_BITPIX, np.dtype(DATATYPES[datatype]).itemsize * 8)
    _put(buf, endian, "8f", OFF_PIXDIM, 1.0, *pixdim, 1.0, 1.0, 1.0, 1.0)
    _put(buf, endian, "f", OFF_VOX_OFFSET, 352.0)
    _put(buf, endian, "2f", OFF_SCL_SLOPE, 1.0, 0.0)
    _put(buf, endian, "h", OFF_SFORM_CODE, 1)
    srow = np.zeros((3, 4))
    srow[:, :3] = np.diag(pixdim)
    _put(buf, endian, "12f", OFF_SROW, *srow.ravel())
    buf[OFF_MAGIC:OFF_MAGIC + 4] = b"n+1\x00"
    return parse_header(bytes(buf))


def write_nifti(path, vol: Volume3, datatype: int = 16, header: NiftiHeader | None = None) -> None:
    """Write a gray volume (phantoms, test fixtures)."""
    hdr = header or minimal_header(vol.dims, datatype)
    e = hdr.endian
    buf = bytearray(hdr.raw)
    _put(buf, e, "8h", OFF_DIM, 3, *vol.dims, 1, 1, 1, 1)
    _put(buf, e, "h", OFF_DATATYPE, datatype)
    _put(buf, e, "h", OFF_BITPIX, np.dtype(DATATYPES[datatype]).itemsize * 8)
    _put(buf, e, "f", OFF_VOX_OFFSET, 352.0)
    _put(buf, e, "2f", OFF_SCL_SLOPE, 1.0, 0.0)
    dtype = np.dtype(DATATYPES[datatype]).newbyteorder(e)
    payload = bytes(buf) + b"\x00" * 4 + np.asarray(vol.data).astype(dtype).tobytes(order="F")
    _write_payload(path, payload)


def _write_payload(path, payload: bytes) -> None:
    path = os.fspath(path)
    if path.endswith(".gz"):
        # mtime pinned to 0 so identical content gives identical files.
        with open(path, "wb") as raw, gzip.GzipFile(filename="", fileobj=raw, mode="wb", mtime=0) as fh:
            fh.write(payload)
    else:
        with open(path, "wb") as fh:
            fh.write(payload)
