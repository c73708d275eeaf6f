"""Array signal synthesis for a DS-SS system under structured interference.

Everything upstream of the beamformer lives here: ULA steering vectors,
31-chip Gold codes, the SOI pulse train, four interferer families (BPSK
white, tones, periodical noise, multiple-access multipath), AWGN, and the
per-symbol blocked data matrices X(k).

Randomness discipline: interferer *realization* parameters (tone phases,
periodical-noise segments) derive from the scenario seed alone, so one
realization is shared by every point of a sweep. Per-symbol randomness
(data bits, white chips, receiver noise) derives from counter-based Philox
streams keyed by (seed, tag, mc_stream, batch), making synthesis a pure
function of the scenario and independent of how work is partitioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BATCH = 4096  # symbols per synthesis batch; fixed so streams never depend on partitioning

# stream tags (entropy-pool components, must stay distinct)
_TAG_REALIZATION = 101
_TAG_SOI_BITS = 102
_TAG_MAI_BITS = 103
_TAG_WHITE = 104
_TAG_NOISE = 105


# -----------------------
# Geometry and steering
# -----------------------

@dataclass(frozen=True)
class ArrayGeometry:
    element_count: int
    spacing: float = 0.5  # in wavelengths

    def __post_init__(self):
        if self.element_count < 2:
            raise ValueError(f"need at least 2 elements, got {self.element_count}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")

    @property
    def L(self) -> int:
        return self.element_count


def steering(doa_deg: float, geometry: ArrayGeometry) -> np.ndarray:
    """ULA steering vector a(theta); unit-modulus entries so ||a||^2 = L.

    a[l] = exp(j*2*pi*spacing*l*sin(theta)). Endfire (+-90 deg) is rejected:
    the array loses angular resolution there and the model breaks down.
    """
    if not abs(doa_deg) < 90.0:
        raise ValueError(f"DOA must satisfy |doa| < 90 deg, got {doa_deg}")
    l_idx = np.arange(geometry.element_count)
    phase = 2.0 * math.pi * geometry.spacing * math.sin(math.radians(doa_deg))
    return np.exp(1j * phase * l_idx)


# -----------------------
# Gold codes (31 chips)
# -----------------------

def _m_sequence(recurrence_lags: tuple, degree: int = 5) -> np.ndarray:
    """Binary m-sequence from a Fibonacci LFSR, all-ones initial fill."""
    period = 2 ** degree - 1
    bits = [1] * degree
    for n in range(degree, period):
        bits.append(int(np.bitwise_xor.reduce([bits[n - lag] for lag in recurrence_lags])))
    return np.array(bits[:period], dtype=np.int64)


# preferred pair of degree-5 feedback polynomials: x^5+x^2+1 and x^5+x^4+x^3+x^2+1
_M1 = _m_sequence((3, 5))
_M2 = _m_sequence((1, 2, 3, 5))


def gold31(pair_index: int) -> np.ndarray:
    """31-chip +-1 Gold code number pair_index from the degree-5 preferred pair.

    Indices 0..30 are m1 xor (m2 cyclically shifted by the index); 31 and 32
    are the two m-sequences themselves. Distinct indices give distinct codes
    and every distinct pair has periodic cross-correlation in {-1, -9, 7}.
    """
    if not 0 <= pair_index < 33:
        raise ValueError(f"pair_index must be in [0, 33), got {pair_index}")
    if pair_index < 31:
        bits = np.bitwise_xor(_M1, np.roll(_M2, -pair_index))
    elif pair_index == 31:
        bits = _M1
    else:
        bits = _M2
    return (1 - 2 * bits).astype(np.float64)


# -----------------------
# Specs
# -----------------------

@dataclass(frozen=True)
class SoiSpec:
    """The spread-spectrum signal of interest.

    power is linear and normally set through SNR = N * P0 / sigma^2. bits
    may be pinned for reproducible waveform-level tests; when None the
    synthesizer draws i.i.d. +-1 data from the scenario seed.
    """
    processing_gain: int
    code: np.ndarray
    doa_deg: float = 0.0
    delay: int = 0
    power: float = 1.0
    bits: np.ndarray | None = None

    def __post_init__(self):
        code = np.asarray(self.code, dtype=np.float64)
        if code.shape != (self.processing_gain,):
            raise ValueError(f"code length {code.shape} != N={self.processing_gain}")
        if not np.all(np.abs(code) == 1.0):
            raise ValueError("code chips must be +-1")
        object.__setattr__(self, "code", code)
        if self.delay < 0:
            raise ValueError("delay must be >= 0")
        if not self.power >= 0:
            raise ValueError("power must be >= 0")
        if self.bits is not None:
            bits = np.asarray(self.bits, dtype=np.float64)
            if not np.all(np.abs(bits) == 1.0):
                raise ValueError("bits must be +-1")
            object.__setattr__(self, "bits", bits)


KINDS = ("bpsk_white", "tone", "periodical_noise", "mai_multipath")


@dataclass(frozen=True)
class InterfererSpec:
    """One interference source.

    kind selects the family; power is linear *per steering direction* (each
    multipath ray carries power * gain^2). Tone frequency is in cycles/chip
    (offset_Hz / chip_rate). MAI rays share one random +-1 data stream
    spread by another user's Gold code.
    """
    kind: str
    doa_deg: float = 0.0
    power: float = 1.0
    normalized_offset: float = 0.0          # tone only
    user_code: int = 1                      # mai only: gold31 index
    path_delays: tuple = ()                 # mai only: chips
    path_doas: tuple = ()                   # mai only: degrees
    path_gains: tuple | None = None         # mai only: amplitude per ray (default all 1)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown interferer kind {self.kind!r}")
        if not self.power > 0:
            raise ValueError("power must be > 0")
        if self.kind == "mai_multipath":
            if len(self.path_delays) == 0 or len(self.path_delays) != len(self.path_doas):
                raise ValueError("mai_multipath needs matching path_delays and path_doas")
            gains = self.path_gains
            if gains is None:
                gains = tuple(1.0 for _ in self.path_delays)
            if len(gains) != len(self.path_delays) or any(g <= 0 for g in gains):
                raise ValueError("path_gains must be positive, one per ray")
            object.__setattr__(self, "path_gains", tuple(float(g) for g in gains))


@dataclass(frozen=True)
class Scenario:
    geometry: ArrayGeometry
    soi: SoiSpec
    interferers: tuple
    noise_var: float = 1.0
    symbols: int = 1000
    seed: int = 0
    mc_stream: int = 0  # distinguishes Monte Carlo streams across sweep points

    def __post_init__(self):
        object.__setattr__(self, "interferers", tuple(self.interferers))
        if self.symbols < 1:
            raise ValueError("symbols must be >= 1")
        if not self.noise_var > 0:
            raise ValueError("noise_var must be > 0")
        n = self.soi.processing_gain
        for sp in self.interferers:
            if sp.kind == "mai_multipath" and any(not 0 <= d < n for d in sp.path_delays):
                raise ValueError(f"MAI path delays must lie in [0, {n})")


@dataclass(frozen=True)
class BlockData:
    """Per-symbol array data: blocks[k] is the L x N matrix X(k)."""
    blocks: np.ndarray

    def __post_init__(self):
        if self.blocks.ndim != 3:
            raise ValueError("blocks must be (K, L, N)")

    @property
    def symbols(self) -> int:
        return self.blocks.shape[0]


# -----------------------
# Realized directional paths
# -----------------------

@dataclass(frozen=True)
class RealizedPath:
    """One steering direction of one interferer with its realization drawn.

    family "periodic": the block-k row is waveform * block_phase^k.
    family "mai": the block-k row is b(k)*head + b(k-1)*tail where b is the
    +-1 stream identified by stream_index.
    family "white": i.i.d. +-1 chips from stream_index.
    """
    family: str
    doa_deg: float
    power: float
    stream_index: int
    waveform: np.ndarray | None = None
    block_phase: complex = 1.0 + 0.0j
    head: np.ndarray | None = None
    tail: np.ndarray | None = None


def _realization_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence([seed, _TAG_REALIZATION, index])))


def realize_paths(scenario: Scenario) -> list:
    """Expand interferers into directional paths with realizations drawn.

    Depends on the scenario seed only (not mc_stream), so every point of an
    SNR sweep sees the same tone phases and noise segments.
    """
    n = scenario.soi.processing_gain
    n0 = scenario.soi.delay
    paths = []
    for idx, sp in enumerate(scenario.interferers):
        rng = _realization_rng(scenario.seed, idx)
        if sp.kind == "bpsk_white":
            paths.append(RealizedPath("white", sp.doa_deg, sp.power, idx))
        elif sp.kind == "tone":
            phi0 = rng.uniform(0.0, 2.0 * math.pi)
            samp = np.arange(n) + n0
            wave = np.exp(1j * (phi0 + 2.0 * math.pi * sp.normalized_offset * samp))
            rho = complex(np.exp(1j * 2.0 * math.pi * sp.normalized_offset * n))
            paths.append(RealizedPath("periodic", sp.doa_deg, sp.power, idx,
                                      waveform=wave, block_phase=rho))
        elif sp.kind == "periodical_noise":
            seg = rng.normal(size=n) + 1j * rng.normal(size=n)
            seg *= math.sqrt(n) / math.sqrt(float(np.sum(np.abs(seg) ** 2)))  # exact unit power
            wave = seg[(np.arange(n) + n0) % n]
            paths.append(RealizedPath("periodic", sp.doa_deg, sp.power, idx, waveform=wave))
        else:  # mai_multipath
            code = gold31(sp.user_code)
            if n != code.shape[0]:
                raise ValueError("mai_multipath requires N = 31 (Gold code length)")
            for d, doa, g in zip(sp.path_delays, sp.path_doas, sp.path_gains):
                eff = (d - n0) % n
                head = np.zeros(n)
                tail = np.zeros(n)
                head[eff:] = code[:n - eff]
                tail[:eff] = code[n - eff:]
                paths.append(RealizedPath("mai", doa, sp.power * g * g, idx,
                                          head=head, tail=tail))
    return paths


def steering_matrix(paths, geometry: ArrayGeometry) -> np.ndarray:
    """L x D matrix whose columns are the path steering vectors."""
    if not paths:
        return np.zeros((geometry.element_count, 0), dtype=np.complex128)
    return np.stack([steering(p.doa_deg, geometry) for p in paths], axis=1)


# -----------------------
# Flat sequence views (waveform-level tests)
# -----------------------

def soi_sequence(spec: SoiSpec, sample_range) -> np.ndarray:
    """Baseband SOI samples s0(n) = sum_k b0(k) c0(n - k*N - n0), unscaled.

    Power scaling by sqrt(P0) happens at mixing time in synth_blocks. The
    requested range must stay within the pinned bit horizon.
    """
    if spec.bits is None:
        raise ValueError("soi_sequence requires pinned bits on the spec")
    idx = np.asarray(list(sample_range), dtype=np.int64)
    out = np.zeros(idx.shape, dtype=np.complex128)
    rel = idx - spec.delay
    k = rel // spec.processing_gain
    chip = rel % spec.processing_gain
    ok = (rel >= 0) & (k < len(spec.bits))
    if np.any(rel >= 0) and np.any(k[rel >= 0] >= len(spec.bits)):
        raise ValueError("sample_range exceeds the pinned bit horizon")
    out[ok] = np.asarray(spec.bits)[k[ok]] * spec.code[chip[ok]]
    return out


def interferer_sequence(spec: InterfererSpec, sample_range, rng: np.random.Generator) -> np.ndarray:
    """Unit-power interferer samples, one row per directional path.

    For MAI every ray shares the data stream; rows differ only in delay.
    """
    idx = np.asarray(list(sample_range), dtype=np.int64)
    if np.any(idx < 0):
        raise ValueError("sample_range must be non-negative")
    if spec.kind == "bpsk_white":
        # draw from 0 so the stream is a pure function of (rng, prefix)
        hi = int(idx.max()) + 1 if idx.size else 0
        chips = 1.0 - 2.0 * rng.integers(0, 2, size=hi)
        return chips[idx][None, :].astype(np.complex128)
    if spec.kind == "tone":
        phi0 = rng.uniform(0.0, 2.0 * math.pi)
        return np.exp(1j * (phi0 + 2.0 * math.pi * spec.normalized_offset * idx))[None, :]
    if spec.kind == "periodical_noise":
        n = 31
        seg = rng.normal(size=n) + 1j * rng.normal(size=n)
        seg *= math.sqrt(n) / math.sqrt(float(np.sum(np.abs(seg) ** 2)))
        return seg[idx % n][None, :]
    # mai_multipath
    code = gold31(spec.user_code)
    n = code.shape[0]
    k_hi = int(idx.max()) // n + 1 if idx.size else 1
    bits = 1.0 - 2.0 * rng.integers(0, 2, size=k_hi + 1)  # bits[0] is symbol -1
    rows = []
    for d in spec.path_delays:
        rel = idx - d
        k = rel // n
        chip = rel % n
        row = np.where(k >= -1, bits[k + 1] * code[chip], 0.0)
        rows.append(row)
    return np.asarray(rows, dtype=np.complex128)


# -----------------------
# Block synthesis
# -----------------------

def _bit_stream(seed: int, tag: int, mc_stream: int, index: int, count: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence([seed, tag, mc_stream, index])))
    return 1.0 - 2.0 * rng.integers(0, 2, size=count)


def soi_bits(scenario: Scenario) -> np.ndarray:
    """The +-1 SOI data stream for this scenario (pinned bits win)."""
    if scenario.soi.bits is not None:
        bits = np.asarray(scenario.soi.bits, dtype=np.float64)
        if len(bits) < scenario.symbols:
            raise ValueError("pinned bits shorter than scenario.symbols")
        return bits[:scenario.symbols]
    return _bit_stream(scenario.seed, _TAG_SOI_BITS, scenario.mc_stream, 0, scenario.symbols)


def _mai_bit_streams(scenario: Scenario, paths) -> dict:
    """One +-1 stream of length K+1 per MAI interferer index (entry 0 = b(-1))."""
    streams = {}
    for p in paths:
        if p.family == "mai" and p.stream_index not in streams:
            streams[p.stream_index] = _bit_stream(
                scenario.seed, _TAG_MAI_BITS, scenario.mc_stream,
                p.stream_index, scenario.symbols + 1)
    return streams


def iter_blocks(scenario: Scenario, include=("soi", "interference", "noise"),
                batch: int = BATCH):
    """Yield (k0, X) with X of shape (B, L, N): blocks k0 .. k0+B-1.

    include selects which additive components are synthesized; the random
    streams consumed by each component are unaffected by the selection, so
    soi-only plus rest-only reproduces the full synthesis to rounding.

    White-chip and AWGN streams are keyed per batch, so the output is a pure
    function of (scenario, batch). Every production path uses the default
    batch, which is what makes sweeps independent of worker count; override
    it only where the exact draw does not matter.
    """
    unknown = set(include) - {"soi", "interference", "noise"}
    if unknown:
        raise ValueError(f"unknown components {sorted(unknown)}")
    geo = scenario.geometry
    big_l, n = geo.element_count, scenario.soi.processing_gain
    k_total = scenario.symbols
    paths = realize_paths(scenario)
    want_soi = "soi" in include
    want_int = "interference" in include and paths
    want_noise = "noise" in include

    if want_soi:
        bits0 = soi_bits(scenario)
        a0 = steering(scenario.soi.doa_deg, geo)
        soi_outer = math.sqrt(scenario.soi.power) * np.outer(a0, scenario.soi.code)
    if want_int:
        steer = steering_matrix(paths, geo)
        mai_bits = _mai_bit_streams(scenario, paths)

    for bi, k0 in enumerate(range(0, k_total, batch)):
        nb = min(batch, k_total - k0)
        x = np.zeros((nb, big_l, n), dtype=np.complex128)
        if want_soi:
            x += bits0[k0:k0 + nb, None, None] * soi_outer[None, :, :]
        if want_int:
            for pi, p in enumerate(paths):
                amp = math.sqrt(p.power)
                if p.family == "white":
                    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(
                        [scenario.seed, _TAG_WHITE, scenario.mc_stream, p.stream_index, bi])))
                    s = 1.0 - 2.0 * rng.integers(0, 2, size=(nb, n))
                elif p.family == "periodic":
                    rho_k = p.block_phase ** np.arange(k0, k0 + nb)
                    s = rho_k[:, None] * p.waveform[None, :]
                else:  # mai
                    b = mai_bits[p.stream_index]
                    cur = b[k0 + 1:k0 + nb + 1]
                    prev = b[k0:k0 + nb]
                    s = cur[:, None] * p.head[None, :] + prev[:, None] * p.tail[None, :]
                x += amp * steer[None, :, pi, None] * s[:, None, :]
        if want_noise:
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(
                [scenario.seed, _TAG_NOISE, scenario.mc_stream, bi])))
            sd = math.sqrt(scenario.noise_var / 2.0)
            x += sd * (rng.normal(size=(nb, big_l, n)) + 1j * rng.normal(size=(nb, big_l, n)))
        yield k0, x


def synth_blocks(scenario: Scenario, include=("soi", "interference", "noise")) -> BlockData:
    """Materialize all K blocks; see iter_blocks for the streaming form."""
    parts = [x for _, x in iter_blocks(scenario, include=include)]
    if not parts:
        raise ValueError("empty scenario")
    return BlockData(np.concatenate(parts, axis=0))
