"""Message-sharing (cognitive) schemes and the degraded-noise covariance.

All constructions assume ``M`` antennas at every node. Plans carry the
ordinary per-message beamformers plus two extra ingredients:

* linked payloads, where a shared message is also sent by the other
  transmitter (for instance ``X12 = -X11``), and
* subtraction rules, where a receiver that already knows a message removes
  its contribution before decoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .alignment import BeamformingPlan, ReceiverAlignment
from .errors import DegenerateChannelError, PreconditionError
from .numerics import (
    RANK_TOL,
    ChannelSet,
    _rng,
    complex_gaussian,
    eig,
    extend,
    null_space,
    numerical_rank,
    orthogonal_complement,
    range_basis,
    random_orthonormal_extension,
    singular_values,
    unit_columns,
)
from .region import DofTuple

MESSAGES = ("11", "12", "21", "22")
RECIPIENTS = ("tx1", "tx2", "rx1", "rx2")
CERT_TOL = 1e-6
RESIDUAL_TOL = 1e-8
MAX_ATTEMPTS = 16
PAIRING_CANDIDATES = 32


@dataclass(frozen=True)
class SharingPattern:
    """Which messages are known, ahead of time, at which extra nodes.

    ``channel`` is ``"x"`` for the four-message X channel or
    ``"interference"`` when only ``W11`` and ``W22`` exist.
    """

    shared: frozenset = frozenset()
    channel: str = "x"

    def __post_init__(self):
        shared = frozenset((str(m), str(r)) for m, r in self.shared)
        if self.channel not in ("x", "interference"):
            raise ValueError(f"unknown channel type {self.channel!r}")
        for message, recipient in shared:
            if message not in MESSAGES:
                raise ValueError(f"unknown message {message!r}")
            if recipient not in RECIPIENTS:
                raise ValueError(f"unknown recipient {recipient!r}")
            if recipient in (f"tx{message[1]}", f"rx{message[0]}"):
                raise ValueError(f"W{message} cannot be shared with its own {recipient}")
            if self.channel == "interference" and message not in ("11", "22"):
                raise ValueError("the interference channel only carries W11 and W22")
        object.__setattr__(self, "shared", shared)

    @classmethod
    def of(cls, *pairs: tuple[str, str], channel: str = "x") -> "SharingPattern":
        return cls(frozenset(pairs), channel)

    def shared_messages(self) -> set[str]:
        return {m for m, _ in self.shared}

    def knows(self, node: str, message: str) -> bool:
        return (message, node) in self.shared


@dataclass(frozen=True, eq=False)
class LinkedPayload:
    """``mirror`` re-sends the payload of ``source`` from the other transmitter.

    ``directions`` has one column per ``source`` stream; the mirrored signal is
    ``sign * directions @ x_source``.
    """

    source: str
    mirror: str
    directions: np.ndarray
    sign: complex = -1.0

    @property
    def transmitter(self) -> int:
        return int(self.mirror[1])


@dataclass(frozen=True, eq=False)
class CognitivePlan:
    plan: BeamformingPlan
    pattern: SharingPattern
    linked_payloads: tuple[LinkedPayload, ...] = ()
    # (receiver, message it cancels)
    subtraction_rules: tuple[tuple[int, str], ...] = ()
    certificates: dict = field(default_factory=dict)
    # receive combiner used by receiver 1 (informational; the simulator's
    # projection receiver finds the same interference-free subspace)
    combiner: np.ndarray | None = field(default=None, repr=False)

    @property
    def channels(self) -> ChannelSet:
        return self.plan.channels

    @property
    def extension_factor(self) -> int:
        return self.plan.extension_factor

    @property
    def counts(self) -> DofTuple:
        return self.plan.counts

    def streams_per_use(self) -> Fraction:
        return self.counts.total / self.extension_factor


def _equal_m(channels: ChannelSet) -> int:
    if channels.extension_factor != 1:
        raise PreconditionError("expects unextended base channels")
    m = channels.h11.shape[0]
    for h in channels.matrices().values():
        if h.shape != (m, m):
            raise PreconditionError("cognitive schemes require M antennas at every node")
    return m


def _require_invertible(channels: ChannelSet, tol: float) -> None:
    for link, h in channels.matrices().items():
        if numerical_rank(h, tol) < h.shape[0]:
            raise DegenerateChannelError(f"channel matrix h{link} is singular")


def _sv_ratio(a: np.ndarray) -> float:
    s = singular_values(a)
    return float(s[-1] / s[0]) if s.size and s[0] > 0 else 0.0


def _empty(rows: int) -> np.ndarray:
    return np.zeros((rows, 0), dtype=complex)


def rotation_block(m: int) -> np.ndarray:
    """Identity with rows cyclically shifted: row ``j`` holds its 1 in column ``j-1``."""
    return np.roll(np.eye(m), 1, axis=0)


def _random_derangement(m: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        perm = rng.permutation(m)
        if np.all(perm != np.arange(m)):
            return perm


def _pairing_blocks(m: int, rng: np.random.Generator, count: int):
    """Lower blocks of ``V21_F``: the rotated identity first, then scaled derangements."""
    yield rotation_block(m)
    for _ in range(count - 1):
        perm = _random_derangement(m, rng)
        block = np.zeros((m, m), dtype=complex)
        block[perm, np.arange(m)] = np.exp(rng.normal(scale=0.5, size=m))
        yield block


def _projected_min_sv(desired: np.ndarray, interference: np.ndarray, tol: float) -> float:
    comp = orthogonal_complement(range_basis(interference, tol), desired.shape[0])
    return float(singular_values(comp.conj().T @ desired)[-1])


def _w11_candidates(target: np.ndarray | None, m: int, rng: np.random.Generator):
    """Directions for ``W11``: an aimed choice if available, then isotropic draws."""
    if target is not None:
        yield unit_columns(target)
    for _ in range(MAX_ATTEMPTS):
        yield unit_columns(complex_gaussian(rng, (2 * m, m)))


def cognitive_tx_plan(channels: ChannelSet, seed=0, tol: float = RANK_TOL) -> CognitivePlan:
    """``3M`` streams over two channel uses with ``W11`` also known at transmitter 2.

    Transmitter 2 re-sends ``W11`` through ``inv(H22) H21 V11`` with a minus
    sign, which cancels ``W11`` at receiver 2 exactly. ``W21`` and ``W22``
    align at receiver 1. In eigen-coordinates of ``F`` each ``W21`` column
    pairs eigenvector ``j`` in slot one with eigenvector ``sigma(j)`` in slot
    two; ``W21``/``W22`` stay separable at receiver 2 whenever the paired
    eigenvalues differ. The cyclic pairing is tried first; other pairings and
    slot-two scalings are kept only if they condition the receivers better.
    """
    m = _equal_m(channels)
    if m < 2:
        raise PreconditionError("cognitive-transmitter scheme needs M > 1 (paired eigenvalues of F must differ)")
    _require_invertible(channels, tol)
    h11, h12, h21, h22 = (channels.h(*ij) for ij in ((1, 1), (1, 2), (2, 1), (2, 2)))
    f = np.linalg.solve(h11, h12 @ np.linalg.solve(h22, h21))
    values, vectors = eig(f)
    for i in range(m):
        for b in values[i + 1:]:
            a = values[i]
            if abs(a - b) <= CERT_TOL * max(abs(a), abs(b)):
                raise PreconditionError("F must have M distinct eigenvalues (repeated eigenvalues at tolerance)")
    ext = extend(channels, 2)
    e_bar = np.kron(np.eye(2), vectors)
    lam_bar = np.tile(values, 2)
    f_bar = np.kron(np.eye(2), f)
    w11_image = ext.h11 @ (np.eye(2 * m) - f_bar)
    aimable = np.linalg.cond(w11_image) < 1e10
    rng = _rng(seed)
    best = None
    for lower in _pairing_blocks(m, rng, PAIRING_CANDIDATES):
        v21_f = np.vstack([np.eye(m), lower])
        cond2 = np.hstack([v21_f, v21_f / lam_bar[:, None]])
        if _sv_ratio(cond2) <= CERT_TOL:
            continue
        v21 = unit_columns(e_bar @ v21_f)
        v22 = unit_columns(np.linalg.solve(ext.h12, ext.h11 @ v21))
        rx2_sv = singular_values(np.hstack([ext.h21 @ v21, ext.h22 @ v22]))[-1]
        interference = ext.h11 @ v21
        target = None
        if aimable:
            comp = orthogonal_complement(range_basis(interference, tol), 2 * m)
            target = np.linalg.solve(w11_image, comp)
        for v11 in _w11_candidates(target, m, rng):
            cond1 = np.hstack([(np.eye(2 * m) - f_bar) @ v11, v21])
            if _sv_ratio(cond1) <= CERT_TOL:
                continue
            mirror = np.linalg.solve(ext.h22, ext.h21 @ v11)
            load = max(2 * m, m + np.linalg.norm(mirror) ** 2)
            rx1_sv = _projected_min_sv(w11_image @ v11, interference, tol)
            score = min(rx1_sv, rx2_sv) / np.sqrt(load)
            if best is None or score > best[0]:
                best = (score, v11, v21, v22, mirror, cond1, cond2)
            if target is not None:
                break  # the aimed choice is optimal for this pairing
    if best is None:
        raise DegenerateChannelError("no well-conditioned directions satisfy both rank conditions")
    _, v11, v21, v22, mirror, cond1, cond2 = best
    rx2_leak = ext.h21 @ v11 - ext.h22 @ mirror
    aligned = ReceiverAlignment(0, 0, 2 * m, m, tuple((c, c) for c in range(m)))
    plan = BeamformingPlan(
        v11=v11, v12=_empty(2 * m), v21=v21, v22=v22,
        counts=DofTuple(m, 0, m, m), rx1=aligned, rx2=ReceiverAlignment(0, 0, 0, 0),
        channels=ext, scheme="cognitive-tx",
    )
    certs = {
        "rank_condition_rx1": numerical_rank(cond1, CERT_TOL),
        "rank_condition_rx2": numerical_rank(cond2, CERT_TOL),
        "min_sv_ratio_rx1": _sv_ratio(cond1),
        "min_sv_ratio_rx2": _sv_ratio(cond2),
        "rx2_w11_residual": float(np.linalg.norm(rx2_leak, axis=0).max()),
    }
    return CognitivePlan(
        plan=plan,
        pattern=SharingPattern.of(("11", "tx2")),
        linked_payloads=(LinkedPayload("11", "12", mirror, -1.0),),
        certificates=certs,
    )


def cognitive_rx_plan(channels: ChannelSet, seed=0, tol: float = RANK_TOL) -> CognitivePlan:
    """``3M`` streams over two channel uses with ``W11`` known at receiver 2.

    Receiver 1 reads an ``M``-dimensional combination ``U = [I, T]`` of its
    ``2M`` extended outputs, ``T`` a random mixing block. ``W21`` and ``W22``
    are sent inside the null spaces of ``U H11`` and ``U H12``, so receiver 1
    sees no interference in those ``M`` dimensions. ``W11`` is decoded there,
    and receiver 2 subtracts it before decoding the other two messages
    across its ``2M`` dimensions. Several mixing blocks are drawn and the
    best-conditioned one kept.
    """
    m = _equal_m(channels)
    if m < 2:
        raise PreconditionError("cognitive-receiver scheme needs M > 1")
    ext = extend(channels, 2)
    rng = _rng(seed)
    best = None
    for _ in range(MAX_ATTEMPTS):
        combiner = np.hstack([np.eye(m), complex_gaussian(rng, (m, m))])
        a11 = combiner @ ext.h11
        a12 = combiner @ ext.h12
        if numerical_rank(a11, tol) < m or numerical_rank(a12, tol) < m:
            continue
        v21 = null_space(a11, tol)
        v22 = null_space(a12, tol)
        if v21.shape[1] != m or v22.shape[1] != m:
            continue
        rx2 = np.hstack([ext.h21 @ v21, ext.h22 @ v22])
        # W11 aimed at the interference-free combination; isotropic fallback
        target = None
        if np.linalg.cond(ext.h11) < 1e10:
            target = np.linalg.solve(ext.h11, combiner.conj().T)
        keep = range_basis(combiner.conj().T)
        for v11 in _w11_candidates(target, m, rng):
            if _sv_ratio(a11 @ v11) <= CERT_TOL:
                continue
            score = min(singular_values(keep.conj().T @ ext.h11 @ v11)[-1], singular_values(rx2)[-1])
            if best is None or score > best[0]:
                best = (score, combiner, v11, v21, v22)
            break
    if best is None:
        raise DegenerateChannelError("combined receive rows at receiver 1 are rank deficient")
    _, combiner, v11, v21, v22 = best
    a11, a12 = combiner @ ext.h11, combiner @ ext.h12
    rx2 = np.hstack([ext.h21 @ v21, ext.h22 @ v22])
    scale = np.linalg.norm(combiner, 2) * max(np.linalg.norm(ext.h11, 2), np.linalg.norm(ext.h12, 2))
    leak = max(np.linalg.norm(a11 @ v21, axis=0).max(), np.linalg.norm(a12 @ v22, axis=0).max())
    plan = BeamformingPlan(
        v11=v11, v12=_empty(2 * m), v21=v21, v22=v22,
        counts=DofTuple(m, 0, m, m), rx1=ReceiverAlignment(0, 0, 0, 0),
        rx2=ReceiverAlignment(0, 0, 0, 0), channels=ext, scheme="cognitive-rx",
    )
    certs = {
        "rx1_combined_interference": float(leak / scale),
        "rx1_desired_rank": numerical_rank(a11 @ v11, CERT_TOL),
        "rx2_rank": numerical_rank(rx2, CERT_TOL),
        "min_sv_ratio_rx1": _sv_ratio(a11 @ v11),
        "min_sv_ratio_rx2": _sv_ratio(rx2),
    }
    return CognitivePlan(
        plan=plan,
        pattern=SharingPattern.of(("11", "rx2")),
        subtraction_rules=((2, "11"),),
        certificates=certs,
        combiner=combiner,
    )


INTERFERENCE_CASES = ("both_tx", "both_rx", "tx_and_rx")


def _joint_zero_forcing(h_a: np.ndarray, h_b: np.ndarray, m: int, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Split ``M`` unit directions in the null space of ``[h_a h_b]`` into per-transmitter parts."""
    joint = null_space(np.hstack([h_a, h_b]), tol)
    if joint.shape[1] != m:
        raise DegenerateChannelError("stacked 2M-antenna channel lost rank")
    return joint[:m], joint[m:]


def cognitive_interference_plan(channels: ChannelSet, case: str, seed=0, tol: float = RANK_TOL) -> CognitivePlan:
    """``2M`` streams on the interference channel when both users are cognitive.

    ``both_tx``: each message is known at both transmitters and is sent
    jointly from all ``2M`` antennas inside the null space of the unintended
    receiver. ``both_rx``: plain transmission, each receiver subtracts the
    other user's message. ``tx_and_rx``: ``W11`` is jointly zero-forced at
    receiver 2, and receiver 1 subtracts ``W22``.
    """
    if case not in INTERFERENCE_CASES:
        raise ValueError(f"case must be one of {INTERFERENCE_CASES}, got {case!r}")
    m = _equal_m(channels)
    rng = _rng(seed)
    links: list[LinkedPayload] = []
    rules: list[tuple[int, str]] = []
    if case == "both_tx":
        v11, mirror11 = _joint_zero_forcing(channels.h21, channels.h22, m, tol)
        mirror22, v22 = _joint_zero_forcing(channels.h11, channels.h12, m, tol)
        links = [LinkedPayload("11", "12", mirror11, 1.0), LinkedPayload("22", "21", mirror22, 1.0)]
        pattern = SharingPattern.of(("11", "tx2"), ("22", "tx1"), channel="interference")
    elif case == "both_rx":
        v11 = random_orthonormal_extension(_empty(m), m, rng)
        v22 = random_orthonormal_extension(_empty(m), m, rng)
        rules = [(1, "22"), (2, "11")]
        pattern = SharingPattern.of(("11", "rx2"), ("22", "rx1"), channel="interference")
    else:
        v11, mirror11 = _joint_zero_forcing(channels.h21, channels.h22, m, tol)
        v22 = random_orthonormal_extension(_empty(m), m, rng)
        links = [LinkedPayload("11", "12", mirror11, 1.0)]
        rules = [(1, "22")]
        pattern = SharingPattern.of(("11", "tx2"), ("22", "rx1"), channel="interference")
    none = ReceiverAlignment(0, 0, 0, 0)
    plan = BeamformingPlan(
        v11=v11, v12=_empty(m), v21=_empty(m), v22=v22,
        counts=DofTuple(m, 0, 0, m), rx1=none, rx2=none,
        channels=channels, scheme=f"cognitive-ic-{case}",
    )
    cog = CognitivePlan(plan=plan, pattern=pattern, linked_payloads=tuple(links), subtraction_rules=tuple(rules))
    cog.certificates.update(_interference_certificates(cog))
    return cog


def effective_transmit(plan: CognitivePlan | BeamformingPlan, message: str) -> tuple[np.ndarray, np.ndarray]:
    """Per-transmitter direction blocks ``(A1, A2)`` carrying ``message``."""
    base = plan.plan if isinstance(plan, CognitivePlan) else plan
    v = base.v(message)
    d = v.shape[1]
    rows = (base.v11.shape[0], base.v12.shape[0])
    parts = [np.zeros((rows[0], d), dtype=complex), np.zeros((rows[1], d), dtype=complex)]
    parts[int(message[1]) - 1] = parts[int(message[1]) - 1] + v
    if isinstance(plan, CognitivePlan):
        for link in plan.linked_payloads:
            if link.source == message:
                t = link.transmitter - 1
                parts[t] = parts[t] + link.sign * link.directions
    return parts[0], parts[1]


def received_images(channels: ChannelSet, plan, receiver: int) -> dict[str, np.ndarray]:
    """``H_i1 A1 + H_i2 A2`` for every message at ``receiver`` (no power scaling)."""
    out = {}
    for message in MESSAGES:
        a1, a2 = effective_transmit(plan, message)
        out[message] = channels.h(receiver, 1) @ a1 + channels.h(receiver, 2) @ a2
    return out


def _interference_certificates(cog: CognitivePlan) -> dict:
    channels = cog.channels
    certs = {}
    for i in (1, 2):
        images = received_images(channels, cog, i)
        known = {msg for r, msg in cog.subtraction_rules if r == i}
        desired = [images[msg] for msg in (f"{i}1", f"{i}2")]
        others = [images[msg] for msg in MESSAGES if msg[0] != str(i) and msg not in known]
        scale = max(np.linalg.norm(channels.h(i, 1), 2), np.linalg.norm(channels.h(i, 2), 2))
        leak = max((np.linalg.norm(o, axis=0).max() for o in others if o.shape[1]), default=0.0)
        certs[f"rx{i}_residual"] = float(leak / scale)
        certs[f"rx{i}_desired_rank"] = numerical_rank(np.hstack(desired), CERT_TOL)
    certs["total"] = certs["rx1_desired_rank"] + certs["rx2_desired_rank"]
    return certs


def modified_noise_covariance(h12: np.ndarray, h22: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Noise covariance that keeps receiver 1 no noisier than receiver 2.

    ``K = I - P + alpha * H12 H12^H`` with ``P`` the projector onto the range of
    ``H12`` and ``alpha = min(1/sigma_max(H12)^2, 1/sigma_max(H22)^2)``.
    """
    h12 = np.atleast_2d(np.asarray(h12, dtype=complex))
    h22 = np.atleast_2d(np.asarray(h22, dtype=complex))
    n1, m2 = h12.shape
    if h22.shape[1] != m2:
        raise ValueError("h12 and h22 must share the transmitter-2 column count")
    if n1 < m2:
        raise PreconditionError(f"needs N1 >= M2, got N1={n1}, M2={m2}")
    if numerical_rank(h12, tol) < m2:
        raise PreconditionError("h12 must have full column rank")
    gram = h12.conj().T @ h12
    proj = h12 @ np.linalg.solve(gram, h12.conj().T)
    alpha = min(1.0 / singular_values(h12)[0] ** 2, 1.0 / singular_values(h22)[0] ** 2)
    k = np.eye(n1) - proj + alpha * (h12 @ h12.conj().T)
    return (k + k.conj().T) / 2


@dataclass(frozen=True)
class DofValue:
    """Total DoF for a sharing scenario; ``lower < upper`` means only bounds are known."""

    lower: Fraction
    upper: Fraction

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def value(self) -> Fraction:
        if not self.exact:
            raise ValueError(f"only bounds are known: [{self.lower}, {self.upper}]")
        return self.lower


def dof_value(pattern: SharingPattern, m: int) -> DofValue:
    """Total DoF of the equal-antenna channel under a sharing pattern.

    Single-antenna X channels with fixed coefficients return bounds, since
    no scheme beating one DoF is known there.
    """
    if int(m) != m or m < 1:
        raise ValueError("M must be a positive integer")
    m = Fraction(int(m))
    shared = pattern.shared_messages()
    if pattern.channel == "interference":
        both = {"11", "22"} <= shared
        total = 2 * m if both else m
        return DofValue(total, total)
    if not shared:
        exact = Fraction(4, 3) * m
        if m == 1:
            return DofValue(Fraction(1), exact)
        return DofValue(exact, exact)
    if len(shared) == 1:
        exact = Fraction(3, 2) * m
        if m == 1:
            return DofValue(Fraction(1), exact)
        return DofValue(exact, exact)
    if len(shared) == 2:
        a, b = sorted(shared)
        if a[0] != b[0]:
            return DofValue(2 * m, 2 * m)
    raise PreconditionError(f"no known DoF result for sharing pattern {sorted(pattern.shared)}")
