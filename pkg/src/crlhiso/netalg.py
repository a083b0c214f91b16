"""Two-port and four-port network algebra.

ABCD (chain) matrices, their conversion to scattering parameters under a
given reference impedance, and the block interconnection of four-ports whose
ports are split into a left pair and a right pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResonantJunctionError, SingularConversionError

#: Interconnections whose inner 2x2 solve is worse conditioned than this are
#: treated as resonant.
JUNCTION_COND_LIMIT = 1e12


@dataclass(frozen=True)
class AbcdMatrix:
    """Chain matrix [[a, b], [c, d]]; b in ohms, c in siemens."""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def identity(cls) -> "AbcdMatrix":
        return cls(1.0 + 0j, 0j, 0j, 1.0 + 0j)

    @classmethod
    def from_array(cls, m) -> "AbcdMatrix":
        m = np.asarray(m, dtype=complex)
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    def __matmul__(self, other: "AbcdMatrix") -> "AbcdMatrix":
        return AbcdMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)


@dataclass(frozen=True)
class TwoPortScattering:
    s11: complex
    s12: complex
    s21: complex
    s22: complex
    z_ref: tuple[complex, complex] = (50.0, 50.0)
    frequency_hz: float | None = None

    def to_array(self) -> np.ndarray:
        return np.array([[self.s11, self.s12], [self.s21, self.s22]], dtype=complex)


PORT_LABELS = ("L1", "L2", "R1", "R2")


@dataclass(frozen=True)
class FourPortScattering:
    """Four-port split into a left port pair and a right port pair.

    ``ll`` maps left incident waves to left outgoing waves, ``rl`` maps left
    incident waves to right outgoing waves, and so on. Block order in the full
    4x4 matrix is (L1, L2, R1, R2).
    """

    ll: np.ndarray
    lr: np.ndarray
    rl: np.ndarray
    rr: np.ndarray
    labels: tuple[str, ...] = PORT_LABELS
    frequency_hz: float | None = None

    def __post_init__(self):
        for name in ("ll", "lr", "rl", "rr"):
            block = np.array(getattr(self, name), dtype=complex)
            if block.shape != (2, 2):
                raise ValueError(f"block {name} must be 2x2, got {block.shape}")
            block.setflags(write=False)
            object.__setattr__(self, name, block)

    @classmethod
    def from_matrix(cls, s, labels=PORT_LABELS, frequency_hz=None) -> "FourPortScattering":
        s = np.asarray(s, dtype=complex)
        if s.shape != (4, 4):
            raise ValueError(f"expected 4x4 matrix, got {s.shape}")
        return cls(s[:2, :2], s[:2, 2:], s[2:, :2], s[2:, 2:], labels, frequency_hz)

    @classmethod
    def through(cls, frequency_hz=None) -> "FourPortScattering":
        z = np.zeros((2, 2), dtype=complex)
        i = np.eye(2, dtype=complex)
        return cls(z, i, i, z, frequency_hz=frequency_hz)

    def to_matrix(self) -> np.ndarray:
        return np.block([[self.ll, self.lr], [self.rl, self.rr]])


def abcd_to_s(m: AbcdMatrix, zc: complex, frequency_hz: float | None = None) -> TwoPortScattering:
    """Scattering parameters of a two-port terminated in ``zc`` at both ends."""
    zc = complex(zc)
    if zc.real <= 0:
        raise ValueError(f"reference impedance must have positive real part, got {zc}")
    bz = m.b / zc
    cz = m.c * zc
    e = m.a + bz + cz + m.d
    if e == 0 or not np.isfinite(e):
        raise SingularConversionError(frequency_hz, f"E = {e}")
    return TwoPortScattering(
        s11=(m.a + bz - cz - m.d) / e,
        s12=2 * m.det / e,
        s21=2 / e,
        s22=(-m.a + bz - cz + m.d) / e,
        z_ref=(zc, zc),
        frequency_hz=frequency_hz,
    )


def abcd_pow(m: AbcdMatrix, n: int) -> AbcdMatrix:
    """``m`` multiplied by itself ``n`` times (identity for ``n == 0``)."""
    if int(n) != n or n < 0:
        raise ValueError(f"cell count must be a non-negative integer, got {n}")
    out = AbcdMatrix.identity()
    for _ in range(int(n)):
        out = out @ m
    return out


def _checked_inverse(m, frequency_hz, stage):
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > JUNCTION_COND_LIMIT:
        raise ResonantJunctionError(cond, frequency_hz, stage)
    return np.linalg.inv(m)


def interconnect(
    left: FourPortScattering, right: FourPortScattering, stage: str | None = None
) -> FourPortScattering:
    """Join the right port pair of ``left`` to the left port pair of ``right``.

    Multiple reflections between the joined faces are summed exactly.
    """
    if (
        left.frequency_hz is not None
        and right.frequency_hz is not None
        and not np.isclose(left.frequency_hz, right.frequency_hz, rtol=1e-12, atol=0.0)
    ):
        raise ValueError("cannot interconnect networks evaluated at different frequencies")
    freq = left.frequency_hz if left.frequency_hz is not None else right.frequency_hz
    eye = np.eye(2, dtype=complex)
    inv_lr = _checked_inverse(eye - right.ll @ left.rr, freq, stage)
    inv_rl = _checked_inverse(eye - left.rr @ right.ll, freq, stage)
    return FourPortScattering(
        ll=left.ll + left.lr @ inv_lr @ right.ll @ left.rl,
        lr=left.lr @ inv_lr @ right.lr,
        rl=right.rl @ inv_rl @ left.rl,
        rr=right.rr + right.rl @ inv_rl @ left.rr @ right.lr,
        labels=left.labels,
        frequency_hz=freq,
    )
