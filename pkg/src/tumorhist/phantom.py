"""Seeded synthetic Flair-like brains with a bright ellipsoidal tumor.

Random numbers come from numpy's Philox4x32 counter-based generator
(``np.random.Generator(np.random.Philox(seed))``), so a spec and seed pin the
volume bit for bit on any platform numpy supports.

The healthy brain is a smooth random texture made exactly mirror-symmetric
about the LR midplane, plus an independent (unmirrored) texture scaled by
``noise_amplitude`` that plays the role of natural asymmetry. The tumor has a
bright core fading toward its rim, so its gray range overlaps healthy tissue
the way whole-tumor labels (edema included) do in real scans.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage, special

from .errors import InvalidArgumentError
from .volume import BinaryMask3, Volume3

Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class PhantomSpec:
    """Geometry and intensities, all in voxels of the ``(LR, AP, SI)`` grid.

    Centers are offsets from the grid center, so ``tumor_center[0] < 0``
    puts the tumor in the left (low-index) half. ``tumor_semi_axes=None``
    gives a tumor-free brain.
    """

    dims: tuple[int, int, int] = (96, 112, 72)
    brain_semi_axes: Vec3 = (40.0, 48.0, 30.0)
    base_band: tuple[float, float] = (60.0, 140.0)
    noise_amplitude: float = 6.0
    tumor_center: Vec3 = (-16.0, 6.0, 4.0)
    tumor_semi_axes: Vec3 | None = (10.0, 12.0, 9.0)
    tumor_band: tuple[float, float] = (150.0, 260.0)
    texture_sigma: float = 2.0
    # Optional bright healthy pair at (+x, y, z) and (-x, y, z): symmetric
    # about the midplane, so it cancels in asymmetry maps but not in plain
    # histograms.
    decoy_center: Vec3 = (10.0, 6.0, 4.0)
    decoy_semi_axes: Vec3 | None = None
    decoy_band: tuple[float, float] = (140.0, 190.0)
    seed: int = 0

    def __post_init__(self):
        if len(self.dims) != 3 or min(self.dims) < 4:
            raise InvalidArgumentError("dims must be three lengths >= 4")
        if any(2 * a > d for a, d in zip(self.brain_semi_axes, self.dims)):
            raise InvalidArgumentError("brain ellipsoid does not fit in the grid")
        if not 0 < self.base_band[0] < self.base_band[1]:
            raise InvalidArgumentError("base_band must be increasing and positive")
        if self.noise_amplitude < 0:
            raise InvalidArgumentError("noise_amplitude must be non-negative")
        if self.tumor_semi_axes is None:
            return
        if not self.tumor_band[0] < self.tumor_band[1]:
            raise InvalidArgumentError("tumor_band must be increasing")
        if sum(self.tumor_band) <= sum(self.base_band):
            raise InvalidArgumentError("tumor band midpoint must exceed the base band midpoint")
        if not _ellipsoid_inside(self.tumor_center, self.tumor_semi_axes, self.brain_semi_axes):
            raise InvalidArgumentError("tumor ellipsoid leaves the brain ellipsoid")
        if np.prod(self.tumor_semi_axes) > 0.15 * np.prod(self.brain_semi_axes):
            raise InvalidArgumentError("tumor exceeds 15% of the brain volume")


def _ellipsoid_inside(center, axes, outer, samples: int = 24) -> bool:
    """Sample the inner ellipsoid's surface against the outer one."""
    theta = np.linspace(0, np.pi, samples)
    phi = np.linspace(0, 2 * np.pi, 2 * samples)
    t, p = np.meshgrid(theta, phi)
    pts = np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)])
    pts = pts * np.asarray(axes)[:, None, None] + np.asarray(center)[:, None, None]
    r = sum((pts[k] / outer[k]) ** 2 for k in range(3))
    return bool(r.max() < 1.0)


def _radius2(dims, center, axes) -> np.ndarray:
    """Normalized squared ellipsoid radius on the grid (``<= 1`` inside)."""
    grids = np.meshgrid(*[np.arange(n, dtype=np.float64) for n in dims], indexing="ij")
    mid = [(n - 1) / 2.0 for n in dims]
    return sum(((g - m - c) / a) ** 2 for g, m, c, a in zip(grids, mid, center, axes))


def _texture(rng: np.random.Generator, dims, sigma: float) -> np.ndarray:
    """Low-passed white noise scaled to zero mean, unit standard deviation."""
    t = ndimage.gaussian_filter(rng.standard_normal(dims), sigma, mode="wrap")
    return (t - t.mean()) / t.std()


def generate_phantom(spec: PhantomSpec):
    """Return ``(volume, truth_mask)`` for ``spec``."""
    rng = np.random.Generator(np.random.Philox(spec.seed))
    dims = tuple(spec.dims)

    brain = _radius2(dims, (0.0, 0.0, 0.0), spec.brain_semi_axes) <= 1.0
    base = _texture(rng, dims, spec.texture_sigma)
    base = 0.5 * (base + base[::-1])
    lo, hi = spec.base_band
    # Gaussian CDF of the texture: healthy tissue fills the band evenly.
    u = special.ndtr(base / base.std())
    vol = lo + (hi - lo) * u
    if spec.decoy_semi_axes is not None:
        x, y, z = spec.decoy_center
        pair = ((_radius2(dims, (x, y, z), spec.decoy_semi_axes) <= 1.0)
                | (_radius2(dims, (-x, y, z), spec.decoy_semi_axes) <= 1.0))
        d_lo, d_hi = spec.decoy_band
        vol = np.where(pair & brain, d_lo + (d_hi - d_lo) * u, vol)
    if spec.noise_amplitude > 0:
        vol = vol + spec.noise_amplitude * _texture(rng, dims, spec.texture_sigma)

    truth = np.zeros(dims, dtype=bool)
    if spec.tumor_semi_axes is not None:
        r2 = _radius2(dims, spec.tumor_center, spec.tumor_semi_axes)
        truth = r2 <= 1.0
        tex = _texture(rng, dims, spec.texture_sigma)
        shape = 0.65 * (1.0 - r2) + 0.35 * np.clip(0.5 + tex / 6.0, 0.0, 1.0)
        t_lo, t_hi = spec.tumor_band
        vol = np.where(truth, t_lo + (t_hi - t_lo) * shape, vol)

    vol = np.where(brain, np.maximum(vol, 1.0), 0.0)
    return Volume3(vol), BinaryMask3(truth & brain)


def mirror_volume(vol: Volume3) -> Volume3:
    """Reverse the LR axis."""
    return vol.with_data(np.flip(vol.data, axis=vol.axis("LR")).copy())


def ellipsoid_volume(axes) -> float:
    return 4.0 / 3.0 * np.pi * float(np.prod(axes))


def symmetric_spec(seed: int, dims=(64, 72, 48)) -> PhantomSpec:
    """Tumor-free, noise-free phantom: exactly LR mirror-symmetric."""
    return PhantomSpec(dims=dims, brain_semi_axes=(26.0, 30.0, 20.0), noise_amplitude=0.0,
                       tumor_semi_axes=None, seed=seed)


_SUITE_DIMS = (96, 112, 72)


def standard_suite(n: int = 50, seed: int = 2024, dims=(96, 112, 72),
                   base_hi=(110.0, 140.0), noise=(2.0, 6.0), tumor_lo=(120.0, 170.0),
                   tumor_axes=(10.0, 18.0), lr_axis=(8.0, 12.0), decoys: bool = True,
                   decoy_width: float = 3.5, decoy_gap: float = 6.0) -> list[PhantomSpec]:
    """The fixed family of tumor phantoms used for end-to-end checks.

    Tumor size, position, contrast and healthy tissue brightness vary per
    case; case ``k`` has seed ``seed + k``. Tumors sit off the midline with
    room on their medial side for a bilateral decoy pair that shares the
    tumor's axial and coronal footprint, so only a sagittal crop can cut it
    away. The tumor's LR semi-axis is drawn from ``lr_axis``.

    Lengths (tumor axes, decoy width and gap) are given for the default
    96x112x72 grid and scale with the smallest ratio of ``dims`` to it.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    scale = min(d / ref for d, ref in zip(dims, _SUITE_DIMS))
    tumor_axes = tuple(scale * v for v in tumor_axes)
    lr_axis = tuple(scale * v for v in lr_axis)
    decoy_width, decoy_gap = scale * decoy_width, scale * decoy_gap
    brain_axes = (dims[0] * 0.42, dims[1] * 0.43, dims[2] * 0.42)
    medial = 2.0 * decoy_width + decoy_gap + 1.0 if decoys else 2.0
    specs = []
    attempts = 0
    while len(specs) < n:
        attempts += 1
        if attempts > 1000 * n:
            raise InvalidArgumentError(f"cannot place tumors in a {dims} phantom")
        axes = (float(rng.uniform(*lr_axis)),
                *(float(v) for v in rng.uniform(*tumor_axes, size=2)))
        side = -1.0 if rng.random() < 0.5 else 1.0
        lo, hi_c = axes[0] + medial, brain_axes[0] - axes[0]
        if lo >= hi_c:
            continue
        center = (side * rng.uniform(lo, hi_c),
                  rng.uniform(-0.5, 0.5) * brain_axes[1],
                  rng.uniform(-0.5, 0.5) * brain_axes[2])
        if not _ellipsoid_inside(center, axes, brain_axes):
            continue
        hi = rng.uniform(*base_hi)
        t_lo = rng.uniform(*tumor_lo)
        t_hi = t_lo + rng.uniform(90.0, 130.0)
        extra = {}
        if decoys:
            # Midway between the midplane and the tumor's medial edge.
            x = 0.5 * (abs(center[0]) - axes[0] - decoy_gap)
            x = max(x, decoy_width + 1.0)
            extra = dict(decoy_center=(x, center[1], center[2]),
                         decoy_semi_axes=(decoy_width, 0.6 * axes[1], 0.6 * axes[2]),
                         decoy_band=(t_lo, t_lo + 0.6 * (t_hi - t_lo)))
        spec = PhantomSpec(dims=dims, brain_semi_axes=brain_axes,
                           base_band=(60.0, hi),
                           noise_amplitude=float(rng.uniform(*noise)),
                           tumor_center=center, tumor_semi_axes=axes,
                           tumor_band=(t_lo, t_hi), seed=seed + len(specs), **extra)
        specs.append(spec)
    return specs
