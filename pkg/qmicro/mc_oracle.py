"""Monte Carlo ground truth from uniformly random pure states.

A uniformly distributed unit vector in C^(n+1) has squared amplitudes
``p_k`` that are flat-Dirichlet on the simplex, so every estimate here needs
only ``p``. They are drawn as normalized standard exponentials. Sampling runs
in fixed-size chunks, each with its own substream spawned from the seed, so
results do not depend on how chunks are spread over worker threads.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.stats import chi2, norm
from tqdm import tqdm

from qmicro.config import get_settings
from qmicro.dos import DensityOfStates, density_of_states
from qmicro.errors import InsufficientStatisticsError, InvalidArgumentError
from qmicro.logging_utils import get_logger
from qmicro.spectrum import Spectrum
from qmicro.thermo import accessible_range

logger = get_logger(__name__)

GENERATOR = "PCG64"


@dataclass(frozen=True)
class SampleBatch:
    """
    Squared amplitudes of uniformly random pure states.

    Attributes:
        n_plus_1 (int): Hilbert space dimension.
        count (int): Number of samples.
        seed (int): Root seed.
        simplex_points (np.ndarray): ``count x n_plus_1`` array, rows on the
            probability simplex.
    """

    n_plus_1: int
    count: int
    seed: int
    simplex_points: np.ndarray = field(repr=False)


def _chunk_sizes(count: int, chunk: int) -> List[int]:
    full, rest = divmod(count, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _draw(seed_seq: np.random.SeedSequence, n_plus_1: int, size: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    x = rng.standard_exponential((size, n_plus_1))
    return x / x.sum(axis=1, keepdims=True)


def _draw_with_phases(
    seed_seq: np.random.SeedSequence, n_plus_1: int, size: int
) -> Tuple[np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    x = rng.standard_exponential((size, n_plus_1))
    phases = rng.uniform(-np.pi, np.pi, size=(size, n_plus_1))
    return x / x.sum(axis=1, keepdims=True), phases


def _stream(
    n_plus_1: int,
    count: int,
    seed: Optional[int],
    workers: Optional[int] = None,
    chunk: Optional[int] = None,
    draw=_draw,
    desc: str = "sampling",
) -> Iterator:
    """Yield sample chunks in a fixed order, whatever the worker count."""
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    workers = workers or settings.oracle_workers
    sizes = _chunk_sizes(count, chunk or settings.oracle_chunk)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    progress = tqdm(
        total=count,
        desc=desc,
        unit="state",
        disable=count < 10**5 or not logger.isEnabledFor(logging.INFO),
    )
    with progress:
        if workers == 1:
            for ss, size in zip(seeds, sizes):
                yield draw(ss, n_plus_1, size)
                progress.update(size)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                jobs = pool.map(lambda job: draw(job[0], n_plus_1, job[1]), zip(seeds, sizes))
                for size, part in zip(sizes, jobs):
                    yield part
                    progress.update(size)


def sample_pure_states(
    n_plus_1: int, count: int, seed: Optional[int] = None, workers: Optional[int] = None
) -> SampleBatch:
    """
    Draw squared amplitudes of uniformly random pure states.

    Args:
        n_plus_1 (int): Dimension, at least 2.
        count (int): Number of samples, at least 1.
        seed (int, optional): Root seed; defaults to the configured seed.
        workers (int, optional): Sampling threads.

    Returns:
        SampleBatch: Flat-Dirichlet rows; identical for identical
        ``(seed, count)``.

    Raises:
        InvalidArgumentError: For ``n_plus_1 < 2`` or ``count < 1``.
    """
    if n_plus_1 < 2:
        raise InvalidArgumentError(f"dimension must be >= 2, got {n_plus_1}")
    if count < 1:
        raise InvalidArgumentError(f"sample count must be >= 1, got {count}")
    seed = get_settings().seed if seed is None else seed
    points = np.vstack(list(_stream(n_plus_1, count, seed, workers)))
    return SampleBatch(n_plus_1, count, seed, points)


def _expanded_energies(s: Spectrum) -> np.ndarray:
    return np.array([float(e) for e in s.expanded()])


def pooled_chi_square(
    observed: np.ndarray, expected: np.ndarray, min_expected: float = 5.0
) -> Tuple[float, int]:
    """
    Pearson statistic after merging adjacent bins with small expectation.

    Bins are merged left to right until each group expects at least
    ``min_expected`` counts; a short tail joins the last group.

    Returns:
        tuple: ``(statistic, degrees_of_freedom)``.
    """
    groups_o, groups_e = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            groups_o.append(acc_o)
            groups_e.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if groups_e:
            groups_o[-1] += acc_o
            groups_e[-1] += acc_e
        else:
            groups_o.append(acc_o)
            groups_e.append(acc_e)
    if len(groups_e) < len(observed):
        logger.warning("pooled %d bins into %d for the chi-square test", len(observed), len(groups_e))
    o, e = np.array(groups_o), np.array(groups_e)
    return float(np.sum((o - e) ** 2 / e)), max(len(e) - 1, 1)


@dataclass(frozen=True)
class DosHistogram:
    """Histogram of ``H(psi)`` against the analytic expectation."""

    edges: np.ndarray = field(repr=False)
    observed: np.ndarray = field(repr=False)
    expected: np.ndarray = field(repr=False)
    chi2: float
    dof: int
    p_value: float
    seed: int
    count: int
    generator: str = GENERATOR

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "bin_left": self.edges[:-1],
                "bin_right": self.edges[1:],
                "observed": self.observed,
                "expected": self.expected,
            }
        )

    def metadata(self) -> Dict:
        return {
            "seed": self.seed,
            "count": self.count,
            "generator": self.generator,
            "bins": int(len(self.observed)),
            "chi2": self.chi2,
            "dof": self.dof,
            "p_value": self.p_value,
        }


def empirical_dos(
    s: Spectrum,
    count: Optional[int] = None,
    bins: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> DosHistogram:
    """
    Histogram ``H(psi) = sum_k p_k E_k`` and test it against Omega.

    Args:
        s (Spectrum): Spectrum with at least two distinct levels.
        count (int, optional): Samples, at least 10**4.
        bins (int, optional): Equal-width bins over ``[E_min, E_max]``, at
            least 10.
        seed (int, optional): Root seed.
        workers (int, optional): Sampling threads.

    Returns:
        DosHistogram: Observed and expected counts with the chi-square test.

    Raises:
        InvalidArgumentError: For too few samples or bins.
    """
    settings = get_settings()
    count = int(count or settings.oracle_samples)
    bins = int(bins or settings.oracle_bins)
    seed = settings.seed if seed is None else seed
    if bins < 10:
        raise InvalidArgumentError(f"need at least 10 bins, got {bins}")
    if count < 10**4:
        raise InvalidArgumentError(f"need at least 10^4 samples, got {count}")

    d = density_of_states(s).to_float()
    energies = _expanded_energies(s)
    edges = np.linspace(float(d.e_min), float(d.e_max), bins + 1)
    observed = np.zeros(bins, dtype=np.int64)
    for points in _stream(s.n_plus_1, count, seed, workers, desc="empirical dos"):
        observed += np.histogram(points @ energies, bins=edges)[0]

    mass = np.array(
        [d.shape.integrate_moment(a, b, 0) for a, b in zip(edges[:-1], edges[1:])]
    )
    expected = count * mass
    stat, dof = pooled_chi_square(observed, expected)
    p_value = float(chi2.sf(stat, dof))
    logger.info("empirical dos: chi2=%.3f dof=%d p=%.4g", stat, dof, p_value)
    return DosHistogram(edges, observed, expected, stat, dof, p_value, seed, count)


@dataclass(frozen=True)
class MicrocanonicalEstimate:
    """
    Window-conditioned estimates at a target energy.

    Attributes:
        energy (float): Target energy.
        window (float): Full window width.
        kept (int): Samples inside the window.
        weights (np.ndarray): Conditional means of ``p_k``.
        standard_errors (np.ndarray): Their standard errors.
        dH (float): Square root of the mean quantum variance
            ``sum p_k E_k^2 - H^2`` of the retained states.
        dH_standard_error (float): Delta-method standard error of ``dH``.
        statistical_spread (float): Standard deviation of ``H`` inside the
            window, which the exact state does not have.
    """

    energy: float
    window: float
    kept: int
    weights: np.ndarray
    standard_errors: np.ndarray
    dH: float
    dH_standard_error: float
    statistical_spread: float

    def to_dict(self) -> Dict:
        return {
            "energy": self.energy,
            "window": self.window,
            "kept": self.kept,
            "weights": self.weights.tolist(),
            "standard_errors": self.standard_errors.tolist(),
            "dH": self.dH,
            "dH_standard_error": self.dH_standard_error,
            "statistical_spread": self.statistical_spread,
        }


def empirical_microcanonical(
    s: Spectrum,
    E: float,
    window: Optional[float] = None,
    count: Optional[int] = None,
    seed: Optional[int] = None,
    min_samples: Optional[int] = None,
    workers: Optional[int] = None,
) -> MicrocanonicalEstimate:
    """
    Estimate the microcanonical weights and Delta H by hard-window conditioning.

    Samples with ``|H(psi) - E| <= window / 2`` are kept.

    Raises:
        InvalidArgumentError: For a non-positive window or sample count.
        InsufficientStatisticsError: If fewer than ``min_samples`` survive.
    """
    settings = get_settings()
    window = float(window or settings.oracle_window)
    count = int(count or settings.oracle_samples)
    min_samples = int(min_samples or settings.min_window_samples)
    if window <= 0:
        raise InvalidArgumentError(f"window must be positive, got {window}")
    if count < 1:
        raise InvalidArgumentError(f"sample count must be >= 1, got {count}")

    E = float(E)
    energies = _expanded_energies(s)
    n1 = s.n_plus_1
    kept = 0
    sum_p, sum_p2 = np.zeros(n1), np.zeros(n1)
    sum_q = sum_q2 = sum_h = sum_h2 = 0.0
    for points in _stream(n1, count, seed, workers, desc="microcanonical"):
        h = points @ energies
        sel = points[np.abs(h - E) <= 0.5 * window]
        if not len(sel):
            continue
        hs = sel @ energies
        q = sel @ (energies**2) - hs**2
        kept += len(sel)
        sum_p += sel.sum(axis=0)
        sum_p2 += (sel**2).sum(axis=0)
        sum_q += float(q.sum())
        sum_q2 += float((q**2).sum())
        sum_h += float(hs.sum())
        sum_h2 += float((hs**2).sum())

    if kept < min_samples:
        raise InsufficientStatisticsError(kept, min_samples)
    weights = sum_p / kept
    var_p = np.maximum(sum_p2 / kept - weights**2, 0.0)
    se = np.sqrt(var_p / max(kept - 1, 1))
    mean_q = sum_q / kept
    var_q = max(sum_q2 / kept - mean_q**2, 0.0)
    dH = math.sqrt(max(mean_q, 0.0))
    dH_se = math.sqrt(var_q / max(kept - 1, 1)) / (2 * dH) if dH > 0 else 0.0
    spread = math.sqrt(max(sum_h2 / kept - (sum_h / kept) ** 2, 0.0))
    logger.debug("window at E=%.6g kept %d of %d samples", E, kept, count)
    return MicrocanonicalEstimate(E, window, kept, weights, se, dH, dH_se, spread)


@dataclass(frozen=True)
class CoherenceEstimate:
    """Off-diagonal moments ``<psi_j^* psi_k>`` inside an energy window."""

    kept: int
    max_abs: float
    max_z: float
    matrix: np.ndarray = field(repr=False)


def empirical_coherences(
    s: Spectrum,
    E: float,
    window: Optional[float] = None,
    count: Optional[int] = None,
    seed: Optional[int] = None,
    min_samples: Optional[int] = None,
) -> CoherenceEstimate:
    """
    Estimate the off-diagonal part of the microcanonical density matrix.

    Amplitudes get independent uniform phases, which is exact for the
    unitarily invariant measure. All off-diagonal means should vanish;
    ``max_z`` is the largest one in units of its standard error.

    Raises:
        InsufficientStatisticsError: If fewer than ``min_samples`` survive.
    """
    settings = get_settings()
    window = float(window or settings.oracle_window)
    count = int(count or settings.oracle_samples)
    min_samples = int(min_samples or settings.min_window_samples)
    E = float(E)
    energies = _expanded_energies(s)
    n1 = s.n_plus_1
    kept = 0
    acc = np.zeros((n1, n1), dtype=complex)
    acc_pp = np.zeros((n1, n1))
    for points, phases in _stream(
        n1, count, seed, draw=_draw_with_phases, desc="coherences"
    ):
        mask = np.abs(points @ energies - E) <= 0.5 * window
        p = points[mask]
        amp = np.sqrt(p) * np.exp(1j * phases[mask])
        kept += len(p)
        acc += amp.conj().T @ amp
        acc_pp += p.T @ p
    if kept < min_samples:
        raise InsufficientStatisticsError(kept, min_samples)
    rho = acc / kept
    off = ~np.eye(n1, dtype=bool)
    se = np.sqrt(acc_pp / kept / kept)
    max_abs = float(np.max(np.abs(rho[off])))
    max_z = float(np.max(np.abs(rho[off]) / se[off]))
    return CoherenceEstimate(kept, max_abs, max_z, rho)


def weight_agreement(
    analytic: List[float], estimate: MicrocanonicalEstimate, alpha: Optional[float] = None
) -> Dict:
    """
    Compare analytic weights with an oracle estimate.

    Each weight is a z-test; the threshold is Bonferroni-corrected over the
    weights so the whole comparison has level ``alpha``.

    Returns:
        dict: ``max_z``, ``threshold`` and ``passed``.
    """
    alpha = alpha or get_settings().oracle_alpha
    w = np.array([float(x) for x in analytic])
    se = np.maximum(estimate.standard_errors, 1e-300)
    z = np.abs(estimate.weights - w) / se
    threshold = float(norm.isf(alpha / (2 * len(w))))
    max_z = float(np.max(z))
    return {"max_z": max_z, "threshold": threshold, "passed": max_z <= threshold}


def _log_omega(d: DensityOfStates, E: float) -> float:
    value = float(d.shape.evaluate(E))
    return math.log(value) if value > 0 else -math.inf


def grid_search_equilibrium(
    d1: DensityOfStates,
    E1: float,
    d2: DensityOfStates,
    E2: float,
    points: int = 2001,
    rounds: int = 6,
) -> float:
    """
    Entropy-maximizing transfer by brute force.

    Scans ``ln Omega1(E1 + eps) + ln Omega2(E2 - eps)`` on a uniform grid
    over the feasible interval, then zooms in around the best point. Uses
    only values of Omega, no derivatives.

    Returns:
        float: Best ``eps`` found.
    """
    r1, r2 = accessible_range(d1), accessible_range(d2)
    f1, f2 = d1.to_float(), d2.to_float()
    E1, E2 = float(E1), float(E2)
    lo = max(float(r1.e_min) - E1, E2 - float(r2.e_star))
    hi = min(float(r1.e_star) - E1, E2 - float(r2.e_min))
    if lo > hi:
        raise InvalidArgumentError("no energy exchange keeps both systems accessible")
    a, b = lo, hi
    best = lo
    for _ in range(rounds):
        grid = np.linspace(a, b, points)
        total = [_log_omega(f1, E1 + e) + _log_omega(f2, E2 - e) for e in grid]
        i = int(np.argmax(total))
        best = float(grid[i])
        step = (b - a) / (points - 1)
        a, b = max(lo, best - 2 * step), min(hi, best + 2 * step)
    return best
