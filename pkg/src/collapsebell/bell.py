"""Monte Carlo Bell-trial engines for the singlet state.

Two engines share the same geometry bookkeeping and differ only in how
outcomes are produced:

- standard_qm samples the singlet joint distribution regardless of where the
  collapses land;
- causal_collapse is a local model keyed to the causal relation of the two
  collapse events: spacelike pairs draw outcomes from a shared hidden variable
  (bounding CHSH at 2), causally ordered pairs let the later wing condition on
  the earlier outcome (reproducing the quantum joint exactly), and co-located
  simultaneous pairs sample the joint directly.

Per-trial randomness comes from a counter-based generator (Philox keyed by the
seed); trial i owns a fixed block of the stream, so runs are reproducible and
chunkable without changing output.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from . import design
from .errors import ModelError
from .spacetime import (
    CausalClass,
    CausalKind,
    CausalOrder,
    LIGHTLIKE_EPS,
    SpacetimeEvent,
    Vec3,
)

Engine = Literal["standard_qm", "causal_collapse"]
ENGINES = ("standard_qm", "causal_collapse")

# Uniform draws consumed per trial (two Philox blocks of four 64-bit words).
_DRAWS_PER_TRIAL = 8
_COL_SET_L, _COL_SET_R, _COL_DELAY_L, _COL_DELAY_R = 0, 1, 2, 3
_COL_HIDDEN, _COL_OUT1, _COL_OUT2 = 4, 5, 6

CSV_HEADER = "trial,setL,setR,a,b,tL,xL,yL,zL,tR,xR,yR,zR,class"

_CLASS_NAMES = (CausalKind.TIMELIKE.value, CausalKind.LIGHTLIKE.value,
                CausalKind.SPACELIKE.value)


def _norm_angle(theta: float) -> float:
    return float(theta) % (2.0 * math.pi)


@dataclass(frozen=True)
class SettingsSpec:
    """Two analyzer angles per wing; per trial one is picked uniformly per wing."""

    wing_l: tuple[float, float]
    wing_r: tuple[float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "wing_l", tuple(_norm_angle(t) for t in self.wing_l))
        object.__setattr__(self, "wing_r", tuple(_norm_angle(t) for t in self.wing_r))
        if len(self.wing_l) != 2 or len(self.wing_r) != 2:
            raise ValueError("each wing needs exactly two settings")


def chsh_optimal_settings() -> SettingsSpec:
    """Angles maximizing the quantum CHSH value (|S| = 2 sqrt 2)."""
    return SettingsSpec((0.0, math.pi / 2), (math.pi / 4, 3 * math.pi / 4))


@dataclass(frozen=True)
class HiddenVariable:
    """Shared local hidden variable, uniform on [0, 2 pi) at generation."""

    value: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", _norm_angle(self.value))


@dataclass(frozen=True)
class TrialRecord:
    setting_l: int            # 1 or 2
    setting_r: int
    angle_l: float
    angle_r: float
    outcome_a: int            # +-1
    outcome_b: int
    collapse_l: SpacetimeEvent
    collapse_r: SpacetimeEvent
    causal_class: CausalClass


@dataclass(frozen=True)
class ChshResult:
    s_hat: float
    e11: float
    e12: float
    e21: float
    e22: float
    n: int
    std_err: float
    p_bound: float

    def __post_init__(self) -> None:
        for e in (self.e11, self.e12, self.e21, self.e22):
            if abs(e) > 1.0 + 1e-12:
                raise ValueError("correlations must lie in [-1, 1]")
        if abs(self.s_hat) > 4.0 + 1e-12:
            raise ValueError("|s_hat| cannot exceed 4")
        if not 0.0 < self.p_bound <= 1.0:
            raise ValueError("p_bound must lie in (0, 1]")

    @property
    def s_abs(self) -> float:
        return abs(self.s_hat)


def qm_joint_prob(delta: float, a: int, b: int) -> float:
    """Singlet joint probability P(a, b) = (1 - a b cos delta) / 4."""
    if a not in (-1, 1) or b not in (-1, 1):
        raise ValueError("outcomes must be +-1")
    return (1.0 - a * b * math.cos(delta)) / 4.0


def lhv_outcome(lam: HiddenVariable | float, theta: float, wing: Literal["L", "R"]) -> int:
    """Deterministic sign model: wing L returns sign(cos(theta - lambda)),
    wing R the negation; sign(0) counts as +1."""
    lam_value = lam.value if isinstance(lam, HiddenVariable) else float(lam)
    s = 1 if math.cos(theta - lam_value) >= 0.0 else -1
    if wing == "L":
        return s
    if wing == "R":
        return -s
    raise ValueError("wing must be 'L' or 'R'")


def _fold_angle(delta: float) -> float:
    """Fold an angle difference into [0, pi]."""
    return abs(((delta + math.pi) % (2.0 * math.pi)) - math.pi)


def correlation_closed_form(engine: str, delta: float) -> float:
    """E(delta) = -cos(delta) for the quantum engine; the spacelike branch of
    the causal engine integrates the sign model to 2 delta/pi - 1."""
    d = _fold_angle(delta)
    if engine == "qm":
        return -math.cos(d)
    if engine == "lhv-spacelike":
        return 2.0 * d / math.pi - 1.0
    raise ValueError("engine must be 'qm' or 'lhv-spacelike'")


def chsh_closed_form(engine: str, settings: SettingsSpec) -> float:
    """|S| = |E(1,1) - E(1,2) + E(2,1) + E(2,2)| from the closed-form correlations."""
    e = {}
    for i, th_l in enumerate(settings.wing_l, start=1):
        for j, th_r in enumerate(settings.wing_r, start=1):
            e[i, j] = correlation_closed_form(engine, th_l - th_r)
    return abs(e[1, 1] - e[1, 2] + e[2, 1] + e[2, 2])


def azuma_p_bound(s_hat: float, n: int) -> float:
    """Azuma-Hoeffding bound on P(S_hat >= observed) under any local hidden
    variable model, memory allowed: exp(-n (s - 2)^2 / 32) for s > 2, else 1.

    The per-trial game score a*b*sigma(i,j) has conditional mean at most 1/2
    under every LHV strategy and increments bounded by 2, which gives the
    exponent for s_hat = 4 * mean(score).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if s_hat <= 2.0:
        return 1.0
    # Floor at the smallest positive float: exp underflows near n ~ 1e5 at
    # strong violations, and a larger bound is still a valid bound.
    return max(math.exp(-n * (s_hat - 2.0) ** 2 / 32.0), math.ulp(0.0))


class TrialLog:
    """Array-backed sequence of TrialRecord; cheap to slice and export."""

    def __init__(self, *, engine: str, model: str, seed: int, pos_l: Vec3, pos_r: Vec3,
                 set_l: np.ndarray, set_r: np.ndarray, angle_l: np.ndarray,
                 angle_r: np.ndarray, a: np.ndarray, b: np.ndarray,
                 t_l: np.ndarray, t_r: np.ndarray, cls: np.ndarray) -> None:
        self.engine = engine
        self.model = model
        self.seed = seed
        self.pos_l = pos_l
        self.pos_r = pos_r
        self.set_l = set_l
        self.set_r = set_r
        self.angle_l = angle_l
        self.angle_r = angle_r
        self.a = a
        self.b = b
        self.t_l = t_l
        self.t_r = t_r
        self.cls = cls

    def __len__(self) -> int:
        return len(self.a)

    def _record(self, i: int) -> TrialRecord:
        kind = CausalKind(_CLASS_NAMES[self.cls[i]])
        if kind is CausalKind.SPACELIKE:
            cc = CausalClass(kind, None)
        else:
            dt = self.t_r[i] - self.t_l[i]
            order = (CausalOrder.FIRST_EARLIER if dt > 0
                     else CausalOrder.SECOND_EARLIER if dt < 0
                     else CausalOrder.SIMULTANEOUS)
            cc = CausalClass(kind, order)
        return TrialRecord(
            setting_l=int(self.set_l[i]), setting_r=int(self.set_r[i]),
            angle_l=float(self.angle_l[i]), angle_r=float(self.angle_r[i]),
            outcome_a=int(self.a[i]), outcome_b=int(self.b[i]),
            collapse_l=SpacetimeEvent(float(self.t_l[i]), self.pos_l),
            collapse_r=SpacetimeEvent(float(self.t_r[i]), self.pos_r),
            causal_class=cc,
        )

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return [self._record(i) for i in range(*idx.indices(len(self)))]
        return self._record(int(idx))

    def __iter__(self):
        return (self._record(i) for i in range(len(self)))

    def class_counts(self) -> dict[str, int]:
        return {name: int(np.sum(self.cls == code))
                for code, name in enumerate(_CLASS_NAMES)}


def trial_uniforms(n: int, seed: int) -> np.ndarray:
    """The (n, 8) uniform block for trials 0..n-1; row i is a fixed function of
    (seed, i) regardless of n (Philox counter blocks)."""
    gen = np.random.Generator(np.random.Philox(key=seed))
    return gen.random((n, _DRAWS_PER_TRIAL))


def run_trials(config, model, engine: Engine, n: int, seed: int,
               deterministic_collapse: bool = False) -> TrialLog:
    """Simulate n Bell trials on an experiment design.

    Per trial: settings are drawn uniformly per wing; each wing's collapse is
    placed at its amplifier at input time + actuation + a collapse delay
    (exponential with the model's mean tau for devices, exactly the perception
    time for humans); the pair is causally classified; outcomes follow the
    selected engine. Identical (config, model, engine, n, seed) give identical
    logs.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    if isinstance(model, str):
        model = design.model_preset(model)
    k = config.constants

    wings = (config.wing_l, config.wing_r)
    inputs = [design.amplifier_input_event(w, k) for w in wings]
    taus = [design.wing_tau(w, model, k) for w in wings]
    for tau in taus:
        if math.isinf(tau):
            raise ModelError(f"model {model.name} predicts no collapse at this apparatus")
        if not tau > 0:
            raise ValueError("collapse time must be positive")

    u = trial_uniforms(n, seed)
    set_l = (u[:, _COL_SET_L] >= 0.5).astype(np.int8) + 1
    set_r = (u[:, _COL_SET_R] >= 0.5).astype(np.int8) + 1
    ang_l = np.asarray(config.settings.wing_l)[set_l - 1]
    ang_r = np.asarray(config.settings.wing_r)[set_r - 1]
    cosd = np.cos(ang_l - ang_r)

    t_cols = (_COL_DELAY_L, _COL_DELAY_R)
    times = []
    for wing, inp, tau, col in zip(wings, inputs, taus, t_cols):
        base = inp.t + design.wing_actuation(wing)
        if isinstance(wing.observer, design.HumanObserver):
            # Perception completes the collapse at a definite lag.
            times.append(np.full(n, base + tau))
        elif deterministic_collapse:
            times.append(np.full(n, base + tau))
        else:
            times.append(base - tau * np.log1p(-u[:, col]))
    t_l, t_r = times

    pos_l, pos_r = inputs[0].pos, inputs[1].pos
    d2 = sum((a - b) ** 2 for a, b in zip(pos_l, pos_r))
    dt = t_r - t_l
    ct2 = (k.c * dt) ** 2
    s2 = ct2 - d2
    lightlike = np.abs(s2) <= LIGHTLIKE_EPS * (ct2 + d2)
    timelike = (s2 > 0) & ~lightlike
    cls = np.where(timelike, 0, np.where(lightlike, 1, 2)).astype(np.uint8)
    ordered = cls != 2

    a = np.empty(n, dtype=np.int8)
    b = np.empty(n, dtype=np.int8)
    u1, u2 = u[:, _COL_OUT1], u[:, _COL_OUT2]

    def joint_sample(mask: np.ndarray) -> None:
        # Cells in order (+,+), (+,-), (-,+), (-,-); cumulative split at 1/2
        # keeps both marginals exactly fair.
        c1 = (1.0 - cosd[mask]) / 4.0
        c3 = 0.5 + (1.0 + cosd[mask]) / 4.0
        um = u1[mask]
        a[mask] = np.where(um < 0.5, 1, -1)
        b[mask] = np.where((um < c1) | ((um >= 0.5) & (um < c3)), 1, -1)

    if engine == "standard_qm":
        joint_sample(np.ones(n, dtype=bool))
    else:
        spacelike = ~ordered
        if np.any(spacelike):
            lam = 2.0 * math.pi * u[:, _COL_HIDDEN]
            sign_l = np.where(np.cos(ang_l - lam) >= 0.0, 1, -1)
            sign_r = np.where(np.cos(ang_r - lam) >= 0.0, 1, -1)
            a[spacelike] = sign_l[spacelike]
            b[spacelike] = -sign_r[spacelike]
        seq = ordered & (dt != 0.0)
        if np.any(seq):
            earlier = np.where(u1 < 0.5, 1, -1)
            p_plus = (1.0 - earlier * cosd) / 2.0
            later = np.where(u2 < p_plus, 1, -1)
            l_first = dt > 0
            a[seq] = np.where(l_first[seq], earlier[seq], later[seq])
            b[seq] = np.where(l_first[seq], later[seq], earlier[seq])
        colocated = ordered & (dt == 0.0)
        if np.any(colocated):
            joint_sample(colocated)

    return TrialLog(engine=engine, model=model.name, seed=int(seed),
                    pos_l=pos_l, pos_r=pos_r, set_l=set_l, set_r=set_r,
                    angle_l=ang_l, angle_r=ang_r, a=a, b=b,
                    t_l=t_l, t_r=t_r, cls=cls)


def _arrays_from_records(records: Iterable[TrialRecord]):
    recs = list(records)
    set_l = np.array([r.setting_l for r in recs], dtype=np.int8)
    set_r = np.array([r.setting_r for r in recs], dtype=np.int8)
    a = np.array([r.outcome_a for r in recs], dtype=np.int8)
    b = np.array([r.outcome_b for r in recs], dtype=np.int8)
    return set_l, set_r, a, b


def chsh_estimate(records: TrialLog | Iterable[TrialRecord]) -> ChshResult:
    """Per-pair correlations, CHSH estimate, binomial error and martingale bound."""
    if isinstance(records, TrialLog):
        set_l, set_r, a, b = records.set_l, records.set_r, records.a, records.b
    else:
        set_l, set_r, a, b = _arrays_from_records(records)
    n = len(a)
    if n == 0:
        raise ValueError("no trials")
    prod = (a * b).astype(np.float64)
    e = {}
    var_sum = 0.0
    for i in (1, 2):
        for j in (1, 2):
            mask = (set_l == i) & (set_r == j)
            count = int(np.sum(mask))
            if count == 0:
                raise ValueError(f"no trials with setting pair ({i},{j})")
            eij = float(np.mean(prod[mask]))
            e[i, j] = eij
            var_sum += (1.0 - eij * eij) / count
    s_hat = e[1, 1] - e[1, 2] + e[2, 1] + e[2, 2]
    # Memory-robust game score: sigma = -1 on pair (1,2), +1 elsewhere.
    sigma = np.where((set_l == 1) & (set_r == 2), -1.0, 1.0)
    s_game = 4.0 * float(np.mean(prod * sigma))
    return ChshResult(
        s_hat=s_hat, e11=e[1, 1], e12=e[1, 2], e21=e[2, 1], e22=e[2, 2],
        n=n, std_err=math.sqrt(var_sum), p_bound=azuma_p_bound(abs(s_game), n),
    )


def write_csv(log: TrialLog, path) -> None:
    """Fixed-column trial log; floats use shortest round-trip repr so identical
    runs give byte-identical files."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        xl, yl, zl = (repr(v) for v in log.pos_l)
        xr, yr, zr = (repr(v) for v in log.pos_r)
        for i in range(len(log)):
            writer.writerow((
                i, int(log.set_l[i]), int(log.set_r[i]),
                int(log.a[i]), int(log.b[i]),
                repr(float(log.t_l[i])), xl, yl, zl,
                repr(float(log.t_r[i])), xr, yr, zr,
                _CLASS_NAMES[log.cls[i]],
            ))
