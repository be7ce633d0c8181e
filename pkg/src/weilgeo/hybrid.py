"""Regime-switching simulator for a shrinking 3-sphere universe.

A timeline over cosmic time tau drives the sphere diameter rho(tau)
toward zero.  Above the threshold diameter h the sample is classical
("SET"): curvature is the real scalar 6/rho^2, cross-checked against the
chart oracle.  At or below h the sample switches to the infinitesimal
regime ("G"): curvature becomes a nilpotent element with zero
augmentation, and no division by rho is ever performed there - the G
branch takes over strictly before the blow-up.

The two descriptions force a two-patch atlas on the ambient R^4; the
report records that structure and carries a cited exoticness marker.  It
does not construct an exotic smooth structure.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .manifold import catalog, classical_riemann
from .weil import DkOfN, InfinitesimalSpec, WeilElement, element_to_json, generators

REGIME_SET = "SET"
REGIME_G = "G"

#: Named shrink profiles rho(tau); continuous, with rho(0) = 0.
PROFILES: dict[str, Callable[[float], float]] = {
    "abs": abs,
    "quadratic": lambda t: t * t,
}

EXOTIC_CITATION = (
    "Marker only: a smooth structure on R^4 admitting no atlas smoothly "
    "equivalent to the single global chart is exotic (Gompf & Stipsicz, "
    "4-Manifolds and Kirby Calculus, Thm 9.4.10); on such a structure the "
    "Riemann tensor cannot be made to vanish globally by any "
    "diffeomorphism, since a globally flat R^4 is standard. No exotic "
    "smooth structure is constructed here."
)

#: Fixed interior point where SET-branch curvature is cross-checked.
_ORACLE_POINT = (math.pi / 2, math.pi / 2, math.pi)
_ORACLE_REL_TOL = 1e-8


class HybridConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HybridConfig:
    """Parameters of one timeline run.

    h is the regime threshold in diameter units; order_k and m fix the
    nilpotent representation space DkOfN(order_k, m) of G-regime
    curvature; epsilon1/epsilon2 are the patch-overlap margins.
    """

    h: float
    tau_min: float = -2.0
    tau_max: float = 2.0
    steps: int = 9
    order_k: int = 1
    m: int = 4
    shrink_profile: str = "abs"
    epsilon1: float = 0.1
    epsilon2: float = 0.1
    cross_check: bool = True

    def __post_init__(self):
        if self.h <= 0:
            raise HybridConfigError(f"threshold h must be > 0, got {self.h}")
        if self.tau_min >= self.tau_max:
            raise HybridConfigError(
                f"need tau_min < tau_max, got [{self.tau_min}, {self.tau_max}]")
        if self.steps < 2:
            raise HybridConfigError(f"need steps >= 2, got {self.steps}")
        if self.order_k < 1:
            raise HybridConfigError(f"need order_k >= 1, got {self.order_k}")
        if not 4 <= self.m <= 8:
            raise HybridConfigError(f"need 4 <= m <= 8, got {self.m}")
        if self.shrink_profile not in PROFILES:
            raise HybridConfigError(
                f"unknown profile {self.shrink_profile!r}; "
                f"known: {sorted(PROFILES)}")
        if self.epsilon1 <= 0 or self.epsilon2 <= 0:
            raise HybridConfigError("overlap margins must be > 0")
        if self.epsilon1 + self.epsilon2 >= self.tau_max - self.tau_min:
            raise HybridConfigError(
                "overlap margins must stay smaller than the tau range so "
                "neither enlarged patch swallows the whole run")

    @property
    def profile(self) -> Callable[[float], float]:
        return PROFILES[self.shrink_profile]

    @property
    def g_spec(self) -> InfinitesimalSpec:
        return DkOfN(self.order_k, self.m)


@dataclass(frozen=True)
class HybridState:
    """One timeline sample."""

    tau: float
    rho: float
    regime: str
    curvature_scalar: float | None     # SET only
    curvature_weil: WeilElement | None  # G only
    side: str                          # "negative" for tau < 0 else "positive"


@dataclass(frozen=True)
class Patch:
    name: str
    lo: float  # -inf allowed
    hi: float  # +inf allowed


@dataclass(frozen=True)
class AtlasReport:
    """Two-patch atlas forced by the regime switch, with overlap interval
    and the (cited, non-computed) exoticness marker."""

    patches: tuple[Patch, Patch]
    overlap: tuple[float, float]
    single_global_chart: bool
    exotic_marker: bool
    citation: str

    def to_json(self) -> dict:
        def bound(v: float):
            if math.isinf(v):
                return "-inf" if v < 0 else "inf"
            return v

        return {
            "patches": [{"name": p.name,
                         "tau_interval": [bound(p.lo), bound(p.hi)]}
                        for p in self.patches],
            "overlap": [self.overlap[0], self.overlap[1]],
            "single_global_chart": self.single_global_chart,
            "exotic_marker": self.exotic_marker,
            "citation": self.citation,
        }


@dataclass
class SimulationResult:
    states: list[HybridState]
    atlas: AtlasReport
    guarded_divisions: int   # divisions attempted at rho <= h; must stay 0


class _DivisionGuard:
    """Counts any attempt to evaluate the SET formula inside the G zone."""

    def __init__(self, h: float):
        self.h = h
        self.count = 0

    def curvature(self, rho: float) -> float:
        if rho <= self.h:
            self.count += 1
        return 6.0 / (rho * rho)


def regime_of(rho: float, cfg: HybridConfig) -> str:
    """G at or below the threshold, SET above.  The boundary goes to G so
    the classical branch's division stays away from small diameters."""
    if rho < 0:
        raise ValueError(f"diameter must be >= 0, got {rho}")
    return REGIME_G if rho <= cfg.h else REGIME_SET


def g_regime_curvature(value_at_threshold: float,
                       spec: InfinitesimalSpec) -> WeilElement:
    """Nilpotent representation of curvature below the threshold: the
    classical value at the switch redistributed equally onto the degree-1
    monomials, so the augmentation is zero while the coefficients carry
    the threshold value.  This is a modeling choice; swap this function
    to try alternatives."""
    share = value_at_threshold / spec.generators
    acc = None
    for g in generators(spec):
        term = g * share
        acc = term if acc is None else acc + term
    return acc


def step_state(tau: float, cfg: HybridConfig,
               _guard: _DivisionGuard | None = None) -> HybridState:
    """Sample the timeline at tau."""
    if not cfg.tau_min <= tau <= cfg.tau_max:
        raise ValueError(
            f"tau {tau} outside [{cfg.tau_min}, {cfg.tau_max}]")
    rho = cfg.profile(tau)
    if rho < 0:
        raise ValueError(f"shrink profile produced negative diameter {rho}")
    side = "negative" if tau < 0 else "positive"
    regime = regime_of(rho, cfg)
    if regime == REGIME_SET:
        guard = _guard if _guard is not None else _DivisionGuard(cfg.h)
        value = guard.curvature(rho)
        if cfg.cross_check:
            oracle = classical_riemann(catalog("sphere3", radius=rho),
                                       _ORACLE_POINT).scalar_curvature
            if abs(oracle - value) > _ORACLE_REL_TOL * abs(value):
                raise AssertionError(
                    f"classical oracle disagrees at rho={rho}: "
                    f"{oracle} vs {value}")
        return HybridState(tau=tau, rho=rho, regime=regime,
                           curvature_scalar=value, curvature_weil=None,
                           side=side)
    # G branch: no division by rho ever happens here.
    value_at_switch = 6.0 / (cfg.h * cfg.h)
    element = g_regime_curvature(value_at_switch, cfg.g_spec)
    return HybridState(tau=tau, rho=rho, regime=regime,
                       curvature_scalar=None, curvature_weil=element,
                       side=side)


def make_atlas(cfg: HybridConfig) -> AtlasReport:
    return AtlasReport(
        patches=(Patch("R4_lt_h", -math.inf, cfg.h + cfg.epsilon1),
                 Patch("R4_gt_h", cfg.h - cfg.epsilon2, math.inf)),
        overlap=(cfg.h - cfg.epsilon2, cfg.h + cfg.epsilon1),
        single_global_chart=False,
        exotic_marker=True,
        citation=EXOTIC_CITATION,
    )


def simulate(cfg: HybridConfig) -> SimulationResult:
    """Deterministic uniform-grid run: `steps` samples over the tau range
    in order, plus the atlas report and the division-guard counter."""
    guard = _DivisionGuard(cfg.h)
    span = cfg.tau_max - cfg.tau_min
    states = [
        step_state(cfg.tau_min + span * i / (cfg.steps - 1), cfg, guard)
        for i in range(cfg.steps)
    ]
    return SimulationResult(states=states, atlas=make_atlas(cfg),
                            guarded_divisions=guard.count)


# ---------------------------------------------------------------------------
# Emitters
# ---------------------------------------------------------------------------

TIMELINE_COLUMNS = ("tau", "rho", "regime", "curvature_scalar",
                    "curvature_weil_json", "side")


def _fmt(x: float) -> str:
    return format(x, ".17g")


def timeline_csv(states: Sequence[HybridState]) -> str:
    """One row per sample; scalar column empty in G, element column empty
    in SET; floats at 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TIMELINE_COLUMNS)
    for s in states:
        writer.writerow([
            _fmt(s.tau),
            _fmt(s.rho),
            s.regime,
            "" if s.curvature_scalar is None else _fmt(s.curvature_scalar),
            "" if s.curvature_weil is None else json.dumps(
                element_to_json(s.curvature_weil), sort_keys=True,
                separators=(",", ":")),
            s.side,
        ])
    return buf.getvalue()


def state_to_json(s: HybridState) -> dict:
    return {
        "tau": s.tau,
        "rho": s.rho,
        "regime": s.regime,
        "curvature_scalar": s.curvature_scalar,
        "curvature_weil": None if s.curvature_weil is None
        else element_to_json(s.curvature_weil),
        "side": s.side,
    }


def timeline_json(states: Sequence[HybridState]) -> str:
    return json.dumps([state_to_json(s) for s in states],
                      sort_keys=True, indent=2) + "\n"


def atlas_json(report: AtlasReport) -> str:
    return json.dumps(report.to_json(), sort_keys=True, indent=2) + "\n"
