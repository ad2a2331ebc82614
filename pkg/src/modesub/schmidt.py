"""Schmidt decomposition of the transfer kernel via its signal-side Gram operator.

The Gram function G(Omega_s, Omega_s') integrates L* L over the converted
variables.  Its eigenvalues are the squared Schmidt coefficients and its
eigenfunctions the subtraction modes; the decomposition is carried out on
the symmetrically weighted matrix so the spectrum matches the continuum
operator.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace as dc_replace
from typing import Sequence

import numpy as np

from .dispersion import CrystalPreset
from .kernel import GateSpec, GridConfig, KernelGrid, SignalBeamSpec, build_kernel
from .modes import HermiteGaussSpec, QuadGrid

# eigenvalues below this fraction of the leading one are numerical noise
NOISE_FLOOR = 1e-12
# relative gap under which neighboring eigenvalues count as degenerate
DEGENERACY_GAP = 1e-9


class DecompositionError(RuntimeError):
    """Eigensolver failure, with conditioning diagnostics in the message."""


@dataclass(frozen=True)
class SchmidtResult:
    """Spectrum and subtraction modes of one kernel decomposition.

    ``lambdas_sq`` is normalized to unit sum; the physical (raw) squared
    coefficients are ``lambdas_sq * norm_sq``.  Modes are rows, sampled on
    ``omega_s`` and orthonormal under its quadrature weights.
    """

    lambdas_sq: np.ndarray
    modes: np.ndarray
    schmidt_number: float
    norm_sq: float
    omega_s: QuadGrid
    degenerate: np.ndarray

    @property
    def lambdas_sq_raw(self) -> np.ndarray:
        return self.lambdas_sq * self.norm_sq

    def n_effective(self, cumulative: float = 1.0 - 1e-6) -> int:
        """Number of leading modes holding the given cumulative weight."""
        filled = np.cumsum(self.lambdas_sq)
        return int(np.searchsorted(filled, cumulative) + 1)


def gram_matrix(kernel: KernelGrid) -> np.ndarray:
    """Hermitian positive-semidefinite G(Omega_s_i, Omega_s_j).

    Converted-variable quadrature weights are folded in; the signal-axis
    weights are not (they enter symmetrically at decomposition time).
    """
    n_s = kernel.omega_s.size
    flat = kernel.values.reshape(-1, n_s)
    weighted = flat * np.sqrt(kernel.converted_weights())[:, None]
    gram = weighted.conj().T @ weighted
    return 0.5 * (gram + gram.conj().T)


def _fix_phase(modes: np.ndarray) -> np.ndarray:
    """Rotate each mode so its largest-|.|  component is real positive."""
    fixed = modes.copy()
    for m in range(fixed.shape[0]):
        idx = int(np.argmax(np.abs(fixed[m])))
        pivot = fixed[m, idx]
        if pivot != 0:
            fixed[m] *= np.conj(pivot) / abs(pivot)
    return fixed


def decompose(kernel: KernelGrid) -> SchmidtResult:
    """Eigendecomposition of the weighted Gram matrix.

    Weighting is symmetric, W^(1/2) G W^(1/2) with W the signal-axis
    quadrature weights; eigenvectors are de-weighted back to function
    samples.  Eigenvalues are clipped at zero, sorted descending, and
    entries below the noise floor are dropped from the returned spectrum.
    """
    gram = gram_matrix(kernel)
    sqrt_w = np.sqrt(kernel.omega_s.weights)
    weighted = sqrt_w[:, None] * gram * sqrt_w[None, :]
    try:
        evals, evecs = np.linalg.eigh(weighted)
    except np.linalg.LinAlgError as exc:
        scale = float(np.abs(weighted).max())
        raise DecompositionError(
            f"eigensolver failed on a {weighted.shape[0]}x{weighted.shape[0]} "
            f"Gram matrix (max |entry| {scale:.3e})") from exc

    evals = np.clip(evals[::-1], 0.0, None)
    evecs = evecs[:, ::-1]
    keep = evals > NOISE_FLOOR * (evals[0] if evals[0] > 0 else 1.0)
    keep[0] = True
    evals_kept = evals[keep]
    modes = _fix_phase((evecs[:, keep] / sqrt_w[:, None]).T.astype(complex))
    if np.allclose(modes.imag, 0.0, atol=1e-10 * float(np.abs(modes).max())):
        modes = np.ascontiguousarray(modes.real)

    total = float(evals.sum())
    lambdas = evals_kept / total
    schmidt_number = 1.0 / float(np.sum(lambdas**2))

    gaps = np.abs(np.diff(evals_kept))
    scale = np.maximum(evals_kept[:-1], evals_kept[0] * NOISE_FLOOR)
    deg = np.zeros(evals_kept.size, dtype=bool)
    close = gaps < DEGENERACY_GAP * scale
    deg[:-1] |= close
    deg[1:] |= close

    return SchmidtResult(lambdas_sq=lambdas, modes=modes,
                         schmidt_number=schmidt_number,
                         norm_sq=float(total), omega_s=kernel.omega_s,
                         degenerate=deg)


@dataclass(frozen=True)
class ScanPoint:
    """One operating point of a Schmidt-number scan."""

    length_um: float
    waist_um: float
    phi_rad: float
    gate_order: int = 0


@dataclass(frozen=True)
class ScanRow:
    point: ScanPoint
    schmidt_number: float | None
    lambda1_frac: float | None
    status: str = "ok"


def _scan_one(preset: CrystalPreset, gate: GateSpec, signal: SignalBeamSpec,
              config: GridConfig, point: ScanPoint) -> ScanRow:
    try:
        pset = dc_replace(preset, length_um=point.length_um, phi=point.phi_rad)
        gspec = HermiteGaussSpec(order=point.gate_order, scale=gate.tau_g,
                                 center=gate.spectral.center)
        g = dc_replace(gate, spectral=gspec)
        s = dc_replace(signal, waist_s_um=point.waist_um)
        result = decompose(build_kernel(pset, g, s, config))
        return ScanRow(point, result.schmidt_number, float(result.lambdas_sq[0]))
    except Exception as exc:  # failures recorded per point, scan continues
        return ScanRow(point, None, None, status=f"error: {exc}")


def schmidt_number_scan(preset: CrystalPreset, gate: GateSpec, signal: SignalBeamSpec,
                        points: Sequence[ScanPoint],
                        config: GridConfig | None = None,
                        n_threads: int = 1) -> list[ScanRow]:
    """Decompose the kernel at each point; output order follows input order.

    Points are independent pure evaluations, so they parallelize over a
    thread pool (the heavy lifting is in BLAS/LAPACK which releases the
    GIL).  Per-point failures are recorded in-row.
    """
    config = config or GridConfig()
    if n_threads <= 1 or len(points) <= 1:
        return [_scan_one(preset, gate, signal, config, p) for p in points]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        futures = [pool.submit(_scan_one, preset, gate, signal, config, p)
                   for p in points]
        return [f.result() for f in futures]
