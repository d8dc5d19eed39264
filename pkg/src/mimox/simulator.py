"""Finite-SNR rates under a projection (zero-forcing) receiver, and DoF slopes.

Each receiver discards the span of the interference it cannot subtract,
then jointly decodes its desired streams in what remains. Rates are
reported in bits per channel use, so extended plans are divided by ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .alignment import BeamformingPlan, construct_zero_forcing_plan, plan_channels, randomize_aligned_directions
from .cognitive import CognitivePlan, effective_transmit
from .numerics import RANK_TOL, ChannelSet, child_seed, orthogonal_complement, range_basis, singular_values

MESSAGES = ("11", "12", "21", "22")
DEFAULT_SWEEP_DB = (40.0, 50.0, 60.0)
MISALIGN_TAG = 0x6D69

AnyPlan = Union[BeamformingPlan, CognitivePlan]


@dataclass(frozen=True)
class SnrSweep:
    points_db: tuple[float, ...] = DEFAULT_SWEEP_DB

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points_db)
        if len(pts) < 2:
            raise ValueError("an SNR sweep needs at least two points")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("SNR points must be strictly increasing")
        if not all(np.isfinite(pts)):
            raise ValueError("SNR points must be finite")
        object.__setattr__(self, "points_db", pts)

    @property
    def powers(self) -> np.ndarray:
        return 10.0 ** (np.asarray(self.points_db) / 10.0)


@dataclass(frozen=True)
class MessageRates:
    r11: float
    r12: float
    r21: float
    r22: float

    @property
    def total(self) -> float:
        return self.r11 + self.r12 + self.r21 + self.r22

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.r11, self.r12, self.r21, self.r22)


@dataclass(frozen=True)
class RateCurve:
    snr_db: tuple[float, ...]
    rates: tuple[MessageRates, ...]

    @property
    def sum_rates(self) -> tuple[float, ...]:
        return tuple(r.total for r in self.rates)

    def rows(self) -> list[tuple[float, ...]]:
        return [(s, r.total, *r.as_tuple()) for s, r in zip(self.snr_db, self.rates)]


@dataclass(frozen=True)
class SlopeEstimate:
    total_dof: float
    per_message_dof: tuple[float, float, float, float]
    fit_residual: float
    curve: RateCurve | None = None


def _base(plan: AnyPlan) -> BeamformingPlan:
    return plan.plan if isinstance(plan, CognitivePlan) else plan


def _transmit_blocks(plan: AnyPlan, rho: float) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Power-scaled per-transmitter blocks for each message.

    Without shared payloads each transmitter spends ``rho`` evenly over its
    unit-norm streams. A payload sent from both transmitters gets a single
    scale on both (so mirrored copies still cancel), sized to its stream
    share at the tighter transmitter; each transmitter's remaining budget
    then goes evenly to its other streams.
    """
    blocks = {m: effective_transmit(plan, m) for m in MESSAGES}
    energy = {m: tuple(float(np.linalg.norm(b) ** 2) for b in blocks[m]) for m in MESSAGES}
    linked = [m for m in MESSAGES if min(energy[m]) > 0]
    streams = [sum(blocks[m][t].shape[1] for m in MESSAGES if energy[m][t] > 0) for t in (0, 1)]
    scale = {}
    spent = [0.0, 0.0]
    for m in linked:
        width = blocks[m][0].shape[1]
        scale[m] = min(rho * width / streams[t] / energy[m][t] for t in (0, 1))
        for t in (0, 1):
            spent[t] += scale[m] * energy[m][t]
    for t in (0, 1):
        rest = [m for m in MESSAGES if m not in linked and energy[m][t] > 0]
        load = sum(energy[m][t] for m in rest)
        for m in rest:
            scale[m] = max(rho - spent[t], 0.0) / load
    return {m: tuple(np.sqrt(scale.get(m, 0.0)) * b for b in blocks[m]) for m in MESSAGES}


def _logdet2(a: np.ndarray) -> float:
    sign, value = np.linalg.slogdet(a)
    if sign.real <= 0:
        raise ArithmeticError("covariance lost positive definiteness")
    return float(value / np.log(2.0))


def _stream_weights(g: np.ndarray, tol: float) -> np.ndarray:
    """Per-stream rate proxy ``log2(1 + |g_k off the other streams|^2)``."""
    n = g.shape[1]
    out = np.zeros(n)
    scale = singular_values(g)[0] if g.size else 0.0
    for k in range(n):
        col = g[:, k]
        rest = np.delete(g, k, axis=1)
        if rest.shape[1]:
            q = range_basis(rest, tol, floor=scale)
            col = col - q @ (q.conj().T @ col)
        gain = np.linalg.norm(col)
        if gain > tol * scale:
            out[k] = np.log2(1.0 + gain ** 2)
    return out


def _receiver_rates(channels: ChannelSet, plan: AnyPlan, blocks, i: int, tol: float) -> dict[str, float]:
    images = {m: channels.h(i, 1) @ a1 + channels.h(i, 2) @ a2 for m, (a1, a2) in blocks.items()}
    known = set()
    if isinstance(plan, CognitivePlan):
        known = {msg for r, msg in plan.subtraction_rules if r == i}
    desired = [m for m in MESSAGES if m[0] == str(i)]
    interfering = [m for m in MESSAGES if m[0] != str(i) and m not in known]
    n = channels.h(i, 1).shape[0]
    j = np.hstack([np.zeros((n, 0), dtype=complex)] + [images[m] for m in interfering])
    d = np.hstack([np.zeros((n, 0), dtype=complex)] + [images[m] for m in desired])
    everything = np.hstack([j, d])
    floor = singular_values(everything)[0] if everything.size else 0.0
    basis = range_basis(j, tol, floor=floor)
    comp = orthogonal_complement(basis, n)
    g = comp.conj().T @ d
    r = comp.conj().T @ j
    noise = np.eye(comp.shape[1]) + r @ r.conj().T
    rates = {m: 0.0 for m in desired}
    if g.shape[1] == 0 or comp.shape[1] == 0:
        return rates
    total = max(_logdet2(noise + g @ g.conj().T) - _logdet2(noise), 0.0)
    weights = _stream_weights(g, tol)
    if weights.sum() <= 0:
        weights = np.ones_like(weights)
    weights = weights / weights.sum()
    start = 0
    for m in desired:
        width = images[m].shape[1]
        rates[m] = total * float(weights[start:start + width].sum())
        start += width
    return rates


def zf_sum_rate(channels: ChannelSet, plan: AnyPlan, rho: float, tol: float = RANK_TOL) -> MessageRates:
    """Per-message rates in bits per channel use at per-transmitter power ``rho``."""
    if rho < 0 or not np.isfinite(rho):
        raise ValueError("power must be finite and nonnegative")
    base = _base(plan)
    channels = plan_channels(channels, base)
    blocks = _transmit_blocks(plan, rho)
    rates = {}
    for i in (1, 2):
        rates.update(_receiver_rates(channels, plan, blocks, i, tol))
    k = base.extension_factor
    return MessageRates(*(rates[m] / k for m in MESSAGES))


def rate_curve(channels: ChannelSet, plan: AnyPlan, sweep: SnrSweep, tol: float = RANK_TOL) -> RateCurve:
    rates = tuple(zf_sum_rate(channels, plan, rho, tol) for rho in sweep.powers)
    return RateCurve(sweep.points_db, rates)


def _slopes(curve: RateCurve) -> SlopeEstimate:
    x = np.log2(10.0 ** (np.asarray(curve.snr_db) / 10.0))
    y = np.array([r.as_tuple() for r in curve.rates])
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    per = tuple(float(c) for c in coef[0])
    total_fit = design @ coef.sum(axis=1)
    resid = float(np.sqrt(np.mean((y.sum(axis=1) - total_fit) ** 2)))
    return SlopeEstimate(float(sum(per)), per, resid, curve)


def estimate_dof(channels: ChannelSet, plan: AnyPlan, sweep: SnrSweep | Sequence[float] = SnrSweep(),
                 tol: float = RANK_TOL) -> SlopeEstimate:
    """Least-squares slope of rate against ``log2(rho)``, per channel use."""
    if not isinstance(sweep, SnrSweep):
        sweep = SnrSweep(tuple(sweep))
    return _slopes(rate_curve(channels, plan, sweep, tol))


def misalignment_baseline(channels: ChannelSet, d, seed=0, sweep: SnrSweep | Sequence[float] = SnrSweep(),
                          tol: float = RANK_TOL) -> SlopeEstimate:
    """Slope after replacing every aligned direction with an isotropic one."""
    plan = construct_zero_forcing_plan(channels, d, seed, tol)
    scrambled = randomize_aligned_directions(plan, child_seed(seed, MISALIGN_TAG))
    return estimate_dof(channels, scrambled, sweep, tol)
