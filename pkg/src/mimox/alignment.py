"""Interference-alignment beamforming constructions.

Three schemes live here:

* null-space zero forcing with aligned interference pairs for arbitrary
  antenna counts and integer DoF tuples;
* the 3-symbol-extension eigenbasis scheme for ``M x M`` channels, which
  reaches ``4M`` streams over three channel uses;
* the same eigenbasis scheme on per-slot diagonal single-antenna channels.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DefectiveMatrixError, DegenerateChannelError, InfeasibleError, PreconditionError
from .numerics import (
    RANK_TOL,
    AntennaConfig,
    ChannelSet,
    _rng,
    eig,
    extend,
    null_space,
    numerical_rank,
    orthogonal_complement,
    random_orthonormal_extension,
    range_basis,
    singular_values,
    unit_columns,
)
from .region import DofTuple

EIGENBASIS_MAX_COND = 1e8
EQUALITY_TOL = 1e-6
GROUPING_CANDIDATES = 64
MESSAGES = ("11", "12", "21", "22")


def _pos(x: int) -> int:
    return max(int(x), 0)


def _ints(d) -> tuple[int, int, int, int]:
    values = tuple(d)
    if len(values) != 4:
        raise ValueError("a DoF tuple has four entries")
    out = []
    for v in values:
        if int(v) != v or v < 0:
            raise ValueError(f"DoF entries must be nonnegative integers, got {v}")
        out.append(int(v))
    return tuple(out)


class InterferenceCount(NamedTuple):
    dims: int
    r1: int
    r2: int
    r: int
    r0: int


def count_interference_dims(config: AntennaConfig, d, receiver: int) -> InterferenceCount:
    """Interference dimensions left at ``receiver`` by the null-space construction.

    At receiver 1 the interferers are ``W21`` (through ``H11``) and ``W22``
    (through ``H12``); receiver 2 swaps indices, so its ``r1`` refers to
    ``W11`` and ``r2`` to ``W12``.
    """
    d11, d12, d21, d22 = _ints(d)
    m1, m2 = config.m1, config.m2
    if receiver == 1:
        n, da, db = config.n1, d21, d22
    elif receiver == 2:
        n, da, db = config.n2, d11, d12
    else:
        raise ValueError("receiver must be 1 or 2")
    r1 = _pos(m1 - n)
    r2 = _pos(m2 - n)
    r = _pos(m1 + m2 - n) - r1 - r2
    ea, eb = _pos(da - r1), _pos(db - r2)
    r0 = min(ea, eb, r)
    return InterferenceCount(ea + eb - r0, r1, r2, r, r0)


def feasible_by_counting(config: AntennaConfig, d) -> bool:
    return not _counting_violations(config, d)


def _counting_violations(config: AntennaConfig, d) -> list[str]:
    d11, d12, d21, d22 = _ints(d)
    out = []
    i1 = count_interference_dims(config, d, 1).dims
    i2 = count_interference_dims(config, d, 2).dims
    if config.n1 < d11 + d12 + i1:
        out.append(f"N1={config.n1} < d11+d12+interference={d11 + d12 + i1}")
    if config.n2 < d21 + d22 + i2:
        out.append(f"N2={config.n2} < d21+d22+interference={d21 + d22 + i2}")
    if config.m1 < d11 + d21:
        out.append(f"M1={config.m1} < d11+d21={d11 + d21}")
    if config.m2 < d12 + d22:
        out.append(f"M2={config.m2} < d12+d22={d12 + d22}")
    return out


@dataclass(frozen=True)
class ReceiverAlignment:
    """Alignment bookkeeping for the two messages interfering at one receiver.

    ``pairs`` lists column indices ``(a, b)`` whose images are aligned, where
    ``a`` indexes the transmitter-1 message and ``b`` the transmitter-2
    message. ``zero_forced`` counts leading columns of each that lie in the
    null space of their cross channel.
    """

    r1: int
    r2: int
    r: int
    r0: int
    pairs: tuple[tuple[int, int], ...] = ()
    zero_forced: tuple[int, int] = (0, 0)


@dataclass(frozen=True, eq=False)
class BeamformingPlan:
    v11: np.ndarray
    v12: np.ndarray
    v21: np.ndarray
    v22: np.ndarray
    counts: DofTuple
    rx1: ReceiverAlignment
    rx2: ReceiverAlignment
    channels: ChannelSet = field(repr=False)
    scheme: str = "zero-forcing"
    certificates: dict = field(default_factory=dict)

    @property
    def extension_factor(self) -> int:
        return self.channels.extension_factor

    def v(self, message: str) -> np.ndarray:
        return getattr(self, "v" + message)

    def alignment(self, receiver: int) -> ReceiverAlignment:
        return self.rx1 if receiver == 1 else self.rx2


@dataclass(frozen=True)
class AlignmentDiagnostics:
    interference_dims_rx1: int
    interference_dims_rx2: int
    desired_plus_interference_rank_rx1: int
    desired_plus_interference_rank_rx2: int
    alignment_residual: float
    zero_forcing_residual: float = 0.0


def _effective_config(channels: ChannelSet) -> AntennaConfig:
    n1, m1 = channels.h11.shape
    n2, m2 = channels.h22.shape
    return AntennaConfig(m1, m2, n1, n2)


def _interferer_directions(ha, hb, da, db, rng, tol):
    """Directions for the two messages whose images interfere through ``ha``, ``hb``."""
    n, ma = ha.shape
    mb = hb.shape[1]
    r1, r2 = _pos(ma - n), _pos(mb - n)
    r = _pos(ma + mb - n) - r1 - r2
    na, nb = null_space(ha, tol), null_space(hb, tol)
    if na.shape[1] != r1 or nb.shape[1] != r2:
        raise DegenerateChannelError(
            f"cross-channel null spaces have dimensions {na.shape[1]}, {nb.shape[1]}; "
            f"generic channels give {r1}, {r2}"
        )
    r0 = min(_pos(da - r1), _pos(db - r2), r)
    za, zb = min(da, r1), min(db, r2)
    tops = np.zeros((ma, 0), dtype=complex)
    bots = np.zeros((mb, 0), dtype=complex)
    if r0:
        joint = null_space(np.hstack([ha, hb]), tol)
        if joint.shape[1] != r1 + r2 + r:
            raise DegenerateChannelError("stacked channel null space has non-generic dimension")
        block = np.zeros((ma + mb, r1 + r2), dtype=complex)
        block[:ma, :r1] = na
        block[ma:, r1:] = nb
        rest = joint - block @ (block.conj().T @ joint)
        mixed = range_basis(rest, tol, floor=1.0)
        if mixed.shape[1] != r:
            raise DegenerateChannelError("mixed null space has non-generic dimension")
        tops = unit_columns(mixed[:ma, :r0])
        bots = unit_columns(mixed[ma:, :r0])
    va = np.hstack([na[:, :za], tops])
    vb = np.hstack([nb[:, :zb], bots])
    va = np.hstack([va, random_orthonormal_extension(va, da - va.shape[1], rng)])
    vb = np.hstack([vb, random_orthonormal_extension(vb, db - vb.shape[1], rng)])
    pairs = tuple((za + i, zb + i) for i in range(r0))
    return va, vb, ReceiverAlignment(r1, r2, r, r0, pairs, (za, zb))


def construct_zero_forcing_plan(
    channels: ChannelSet, d, seed=0, tol: float = RANK_TOL
) -> BeamformingPlan:
    """Null-space zero forcing with aligned interference pairs.

    Messages for receiver 2 take, in order, directions in the null spaces of
    their cross channels to receiver 1, then paired sub-vectors of the joint
    null space of ``[H11 H12]`` (which align at receiver 1), then isotropic
    random directions. Messages for receiver 1 use the mirror construction.
    """
    d = _ints(d)
    config = _effective_config(channels)
    violations = _counting_violations(config, d)
    if violations:
        raise InfeasibleError("DoF assignment infeasible by dimension counting: " + "; ".join(violations))
    d11, d12, d21, d22 = d
    rng = _rng(seed)
    v21, v22, rx1 = _interferer_directions(channels.h11, channels.h12, d21, d22, rng, tol)
    v11, v12, rx2 = _interferer_directions(channels.h21, channels.h22, d11, d12, rng, tol)
    for name, stack, want in (("transmitter 1", np.hstack([v11, v21]), d11 + d21),
                              ("transmitter 2", np.hstack([v12, v22]), d12 + d22)):
        if numerical_rank(stack, tol) != want:
            raise DegenerateChannelError(f"{name} directions are linearly dependent")
    return BeamformingPlan(
        v11=v11, v12=v12, v21=v21, v22=v22,
        counts=DofTuple(*d), rx1=rx1, rx2=rx2,
        channels=channels, scheme="zero-forcing",
    )


def plan_channels(channels: ChannelSet, plan: BeamformingPlan) -> ChannelSet:
    """Channel set matching the plan's dimensions (extending fixed channels if needed)."""
    if channels.h11.shape[1] == plan.v11.shape[0] and channels.h11.shape[0] == plan.channels.h11.shape[0]:
        return channels
    k = plan.extension_factor
    if channels.extension_factor == 1 and plan.channels.extension_kind == "block_repeat":
        return extend(channels, k)
    raise ValueError("plan dimensions do not match the channel set")


def _sin_angle(x: np.ndarray, y: np.ndarray) -> float:
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        return 1.0
    u = x / nx
    # distance from the line, not sqrt(1 - cos^2), to keep precision near zero
    return float(np.linalg.norm(y - u * np.vdot(u, y)) / ny)


def _receiver_view(channels: ChannelSet, plan: BeamformingPlan, i: int):
    k = 2 if i == 1 else 1
    desired = np.hstack([channels.h(i, 1) @ plan.v(f"{i}1"), channels.h(i, 2) @ plan.v(f"{i}2")])
    interference = np.hstack([channels.h(i, 1) @ plan.v(f"{k}1"), channels.h(i, 2) @ plan.v(f"{k}2")])
    return desired, interference


def diagnose(channels: ChannelSet, plan: BeamformingPlan, tol: float = RANK_TOL) -> AlignmentDiagnostics:
    """Receiver-side ranks and alignment residuals for a plan."""
    channels = plan_channels(channels, plan)
    dims, totals = [], []
    residual, zf_residual = 0.0, 0.0
    for i in (1, 2):
        desired, interference = _receiver_view(channels, plan, i)
        full = np.hstack([desired, interference])
        # unit-norm beamformers: channel norms give the scale when every image is zero-forced
        scale = max(singular_values(full)[0] if full.size else 0.0,
                    np.linalg.norm(channels.h(i, 1), 2), np.linalg.norm(channels.h(i, 2), 2))
        dims.append(numerical_rank(interference, tol, floor=scale))
        totals.append(numerical_rank(full, tol, floor=scale))
        k = 2 if i == 1 else 1
        ha, hb = channels.h(i, 1), channels.h(i, 2)
        va, vb = plan.v(f"{k}1"), plan.v(f"{k}2")
        meta = plan.alignment(i)
        for a, b in meta.pairs:
            residual = max(residual, _sin_angle(ha @ va[:, a], hb @ vb[:, b]))
        za, zb = meta.zero_forced
        for h, v, z in ((ha, va, za), (hb, vb, zb)):
            if z:
                leak = np.linalg.norm(h @ v[:, :z], axis=0).max() / max(np.linalg.norm(h, 2), 1e-300)
                zf_residual = max(zf_residual, float(leak))
    return AlignmentDiagnostics(dims[0], dims[1], totals[0], totals[1], residual, zf_residual)


def randomize_aligned_directions(plan: BeamformingPlan, seed) -> BeamformingPlan:
    """Copy of ``plan`` with every aligned direction replaced by an isotropic one.

    Zero-forcing directions are kept; only alignment is destroyed.
    """
    rng = _rng(seed)
    vs = {m: plan.v(m).copy() for m in MESSAGES}
    for i in (1, 2):
        k = 2 if i == 1 else 1
        meta = plan.alignment(i)
        for side, message in ((0, f"{k}1"), (1, f"{k}2")):
            cols = sorted({pair[side] for pair in meta.pairs})
            if not cols:
                continue
            v = vs[message]
            keep = [c for c in range(v.shape[1]) if c not in cols]
            fresh = random_orthonormal_extension(v[:, keep], len(cols), rng)
            v[:, cols] = fresh
    stripped = {
        "rx1": replace(plan.rx1, r0=0, pairs=()),
        "rx2": replace(plan.rx2, r0=0, pairs=()),
    }
    return replace(plan, **{"v" + m: vs[m] for m in MESSAGES}, **stripped,
                   scheme=plan.scheme + "+misaligned", certificates={})


def product_matrix_f(channels: ChannelSet, tol: float = RANK_TOL) -> np.ndarray:
    """``inv(H11) H12 inv(H22) H21`` on the base (unextended) square channels.

    Per-slot diagonal channel sets are already the base object, so their
    ``K x K`` product is returned.
    """
    if channels.extension_kind == "block_repeat":
        channels = channels.base_channels()
    mats = channels.matrices()
    n = channels.h11.shape[0]
    for link, h in mats.items():
        if h.shape != (n, n):
            raise PreconditionError("product matrix F needs square channels of equal size")
        if numerical_rank(h, tol) < n:
            raise DegenerateChannelError(f"channel matrix h{link} is singular")
    return np.linalg.solve(mats["11"], mats["12"] @ np.linalg.solve(mats["22"], mats["21"]))


def _classes(values: Sequence[complex], tol: float) -> list[int]:
    reps: list[complex] = []
    labels = []
    for v in values:
        for c, rep in enumerate(reps):
            if abs(v - rep) <= tol * max(abs(v), abs(rep)):
                labels.append(c)
                break
        else:
            labels.append(len(reps))
            reps.append(v)
    return labels


def group_eigenvalue_indices(values: Sequence[complex], equality_tol: float = EQUALITY_TOL) -> list[tuple[int, int, int]]:
    """Index triples ``(lead, a, b)`` with the lead value distinct from ``a`` and ``b``.

    Such a grouping exists iff no value repeats more than ``2M`` times among
    the ``3M`` inputs. Leaders are drawn from each equivalence class up to
    ``min(count, 2M - count)``, which satisfies Hall's condition; followers
    are then matched by a memoised search.
    """
    values = list(values)
    if len(values) % 3 or not values:
        raise ValueError("need a positive multiple of three values")
    m = len(values) // 3
    labels = _classes(values, equality_tol)
    n_classes = max(labels) + 1
    members = [[i for i, c in enumerate(labels) if c == k] for k in range(n_classes)]
    counts = [len(x) for x in members]
    worst = max(counts)
    if worst > 2 * m:
        raise PreconditionError(
            f"eigenvalue multiplicity condition violated: a value repeats {worst} times "
            f"among {3 * m} (at most {2 * m} allowed, i.e. multiplicity <= 2M/3 for F)"
        )
    leaders: list[int] = []
    need = m
    for k in range(n_classes):
        take = min(counts[k], 2 * m - counts[k], need)
        leaders += [k] * take
        need -= take
    if need:
        raise PreconditionError("eigenvalue multiplicity condition violated")
    pool = list(counts)
    for k in leaders:
        pool[k] -= 1

    @lru_cache(maxsize=None)
    def solve(t: int, state: tuple[int, ...]):
        if t == len(leaders):
            return ()
        lead = leaders[t]
        options = sorted((k for k in range(n_classes) if k != lead and state[k] > 0),
                         key=lambda k: (-state[k], k))
        for a_pos, a in enumerate(options):
            for b in options[a_pos:]:
                nxt = list(state)
                nxt[a] -= 1
                if nxt[b] == 0:
                    continue
                nxt[b] -= 1
                rest = solve(t + 1, tuple(nxt))
                if rest is not None:
                    return ((a, b),) + rest
        return None

    follow = solve(0, tuple(pool))
    if follow is None:  # unreachable when the multiplicity test passes
        raise PreconditionError("no valid eigenvalue grouping")
    queues = [list(x) for x in members]
    triples = []
    for k in leaders:
        triples.append([queues[k].pop(0)])
    for triple, (a, b) in zip(triples, follow):
        triple.append(queues[a].pop(0))
        triple.append(queues[b].pop(0))
    return [tuple(t) for t in triples]


def group_eigenvalues(values: Sequence[complex], equality_tol: float = EQUALITY_TOL) -> list[tuple[complex, complex, complex]]:
    values = list(values)
    return [tuple(values[i] for i in t) for t in group_eigenvalue_indices(values, equality_tol)]


def candidate_groupings(values: Sequence[complex], rng: np.random.Generator, count: int = GROUPING_CANDIDATES,
                        equality_tol: float = EQUALITY_TOL) -> list[list[tuple[int, int, int]]]:
    """The deterministic grouping followed by up to ``count - 1`` random valid ones."""
    values = list(values)
    first = group_eigenvalue_indices(values, equality_tol)
    labels = _classes(values, equality_tol)
    out, seen = [first], {tuple(first)}
    n = len(values)
    for _ in range(4 * count):
        if len(out) >= count:
            break
        order = [int(x) for x in rng.permutation(n)]
        groups = []
        for t in range(0, n, 3):
            tri = order[t:t + 3]
            lead = next((k for k in rng.permutation(3)
                         if all(labels[tri[k]] != labels[tri[j]] for j in range(3) if j != k)), None)
            if lead is None:
                break
            groups.append((tri[lead],) + tuple(x for j, x in enumerate(tri) if j != lead))
        else:
            key = tuple(groups)
            if key not in seen:
                seen.add(key)
                out.append(groups)
    return out


def _eigen_alignment_plan(ext: ChannelSet, values, vectors, m: int, scheme: str, tol: float,
                          groups: list[tuple[int, int, int]]) -> BeamformingPlan:
    """Eigen-coordinate patterns ``[1 1 0]`` / ``[1 0 1]`` per eigenvalue triple."""
    perm = [i for g in groups for i in g]
    e = vectors[:, perm]
    lam = np.asarray(values)[perm]
    v11_f = np.kron(np.eye(m), np.array([[1.0], [1.0], [0.0]]))
    v21_f = np.kron(np.eye(m), np.array([[1.0], [0.0], [1.0]]))
    cert1 = np.hstack([v11_f, lam[:, None] * v11_f, v21_f])
    cert2 = np.hstack([v21_f, v21_f / lam[:, None], v11_f])
    v11 = e @ v11_f
    v21 = e @ v21_f
    v22 = np.linalg.solve(ext.h12, ext.h11 @ v21)
    v12 = np.linalg.solve(ext.h22, ext.h21 @ v11)
    n = 3 * m
    aligned = tuple((c, c) for c in range(m))
    meta = ReceiverAlignment(0, 0, n, m, aligned, (0, 0))
    plan = BeamformingPlan(
        v11=unit_columns(v11), v12=unit_columns(v12),
        v21=unit_columns(v21), v22=unit_columns(v22),
        counts=DofTuple(m, m, m, m), rx1=meta, rx2=meta,
        channels=ext, scheme=scheme,
    )
    certs = {}
    for key, mat in (("eigen_rank_rx1", cert1), ("eigen_rank_rx2", cert2)):
        s = singular_values(mat)
        certs[key] = int(np.count_nonzero(s > tol * s[0]))
        certs[key.replace("rank", "min_sv_ratio")] = float(s[-1] / s[0])
    for i in (1, 2):
        desired, interference = _receiver_view(ext, plan, i)
        s = singular_values(np.hstack([desired, interference[:, :m]]))
        certs[f"receiver_rank_rx{i}"] = int(np.count_nonzero(s > tol * s[0]))
        certs[f"receiver_min_sv_ratio_rx{i}"] = float(s[-1] / s[0])
        comp = orthogonal_complement(range_basis(interference[:, :m], tol), desired.shape[0])
        certs[f"projected_min_sv_rx{i}"] = float(singular_values(comp.conj().T @ desired)[-1])
    return replace(plan, certificates=certs)


def _plan_score(plan: BeamformingPlan) -> float:
    c = plan.certificates
    return min(c["projected_min_sv_rx1"], c["projected_min_sv_rx2"])


def _best_eigen_plan(ext, values, vectors, m, scheme, tol, seed) -> BeamformingPlan:
    """Every valid grouping aligns exactly; keep the one whose receivers are best conditioned."""
    rng = _rng(0 if seed is None else seed)
    best = None
    for groups in candidate_groupings(values, rng):
        plan = _eigen_alignment_plan(ext, values, vectors, m, scheme, tol, groups)
        if best is None or _plan_score(plan) > _plan_score(best):
            best = plan
    return best


def construct_three_symbol_plan(channels: ChannelSet, seed=None, tol: float = RANK_TOL) -> BeamformingPlan:
    """``4M`` streams over the 3-symbol extension of ``M x M`` fixed channels.

    ``seed`` only drives which eigenvalue groupings are tried; alignment is
    exact for all of them.
    """
    if channels.extension_factor != 1:
        raise PreconditionError("expects unextended base channels")
    m1, m2, n1, n2 = _effective_config(channels).as_tuple()
    if not (m1 == m2 == n1 == n2):
        raise PreconditionError("3-symbol scheme requires M antennas at every node")
    m = m1
    f = product_matrix_f(channels, tol)
    values, vectors = eig(f)
    cond = np.linalg.cond(vectors)
    if cond > EIGENBASIS_MAX_COND:
        raise DefectiveMatrixError(f"eigenbasis of F too ill conditioned (cond={cond:.3g})")
    ext = extend(channels, 3)
    big_values = np.tile(values, 3)
    big_vectors = np.kron(np.eye(3), vectors)
    return _best_eigen_plan(ext, big_values, big_vectors, m, "three-symbol", tol, seed)


def construct_time_varying_plan(channels: ChannelSet, seed=None, tol: float = RANK_TOL) -> BeamformingPlan:
    """Four streams over three slots of single-antenna time-varying channels."""
    if channels.extension_kind != "per_slot_diagonal" or channels.extension_factor != 3:
        raise PreconditionError("expects a per-slot diagonal channel set over 3 slots")
    f = product_matrix_f(channels, tol)
    values = np.diag(f).copy()
    try:
        group_eigenvalue_indices(values)
    except PreconditionError as exc:
        raise PreconditionError(
            "all three per-slot values of F coincide; channels are effectively fixed "
            "and no alignment scheme exists (" + str(exc) + ")"
        ) from None
    return _best_eigen_plan(channels, values, np.eye(3, dtype=complex), 1, "time-varying", tol, seed)
