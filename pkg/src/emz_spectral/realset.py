"""Set algebra on a bounded window of the real line, and measure classes.

A :class:`RealSet` is a finite union of intervals (with open/closed
endpoint flags) plus isolated atoms, always held in canonical form.  Boolean
operations are exact: both operands are swept over their joint breakpoints,
and each breakpoint and each open gap between breakpoints is classified
separately.

Infinite sets (half-lines, eigenvalue progressions) are truncated to the
window when they are built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import WindowMismatch

EPS_ATOM = 1e-9


class Interval(NamedTuple):
    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def to_dict(self):
        return {"lo": self.lo, "hi": self.hi,
                "lo_closed": self.lo_closed, "hi_closed": self.hi_closed}


def _cluster(values: Sequence[float], eps: float, anchors: Sequence[float]):
    """Map each value to a representative; values within ``eps`` of a
    cluster start share it.  Anchors (window ends) win their cluster."""
    order = sorted(set(values) | set(anchors))
    reps: dict[float, float] = {}
    clusters: list[list[float]] = []
    for v in order:
        if clusters and v - clusters[-1][0] <= eps:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    anchor_set = set(anchors)
    points = []
    for members in clusters:
        rep = next((a for a in members if a in anchor_set), members[0])
        points.append(rep)
        for v in members:
            reps[v] = rep
    return reps, points


def _members(points, mids, intervals, atoms):
    """Membership of breakpoints and of gap midpoints in a snapped set."""
    pts = np.asarray(points, dtype=float)
    mds = np.asarray(mids, dtype=float)
    pt_in = np.isin(pts, np.asarray(atoms, dtype=float)) if atoms else np.zeros(len(pts), bool)
    mid_in = np.zeros(len(mds), bool)
    if intervals:
        lo = np.array([iv.lo for iv in intervals])
        hi = np.array([iv.hi for iv in intervals])
        lc = np.array([iv.lo_closed for iv in intervals])
        hc = np.array([iv.hi_closed for iv in intervals])
        p = pts[:, None]
        pt_in |= (((p > lo) & (p < hi)) | ((p == lo) & lc) | ((p == hi) & hc)).any(axis=1)
        if len(mds):
            m = mds[:, None]
            mid_in = ((m > lo) & (m < hi)).any(axis=1)
    return pt_in, mid_in


def _assemble(points, pt_in, mid_in):
    """Build canonical intervals/atoms from per-element membership.

    Elements interleave as P0 G0 P1 G1 ... Pm; a maximal run of members
    containing a gap is an interval, a lone member point is an atom.
    """
    m = len(points) - 1
    flags = []
    for k in range(m + 1):
        flags.append(bool(pt_in[k]))
        if k < m:
            flags.append(bool(mid_in[k]))
    intervals: list[Interval] = []
    atoms: list[float] = []
    e, n = 0, len(flags)
    while e < n:
        if not flags[e]:
            e += 1
            continue
        t = e
        while t + 1 < n and flags[t + 1]:
            t += 1
        if e == t and e % 2 == 0:
            atoms.append(points[e // 2])
        else:
            lo = points[e // 2] if e % 2 == 0 else points[(e - 1) // 2]
            hi = points[t // 2] if t % 2 == 0 else points[(t + 1) // 2]
            intervals.append(Interval(lo, hi, e % 2 == 0, t % 2 == 0))
        e = t + 1
    return intervals, atoms


@dataclass(frozen=True)
class RealSet:
    """Canonical finite union of intervals and atoms inside ``window``."""

    window: tuple[float, float]
    intervals: tuple[Interval, ...] = ()
    atoms: tuple[float, ...] = ()
    generator: str | None = field(default=None, compare=False)
    eps: float = field(default=EPS_ATOM, compare=False)

    # --- construction -----------------------------------------------------

    @classmethod
    def build(cls, window, intervals: Iterable = (), atoms: Iterable[float] = (),
              generator=None, eps=EPS_ATOM) -> "RealSet":
        """Canonicalize arbitrary input, truncating everything to ``window``.

        Intervals may be :class:`Interval` or ``(lo, hi)`` pairs (open);
        infinite endpoints are allowed and clipped.
        """
        wlo, whi = float(window[0]), float(window[1])
        if not wlo < whi:
            raise ValueError(f"window lower end must be below upper end, got {window}")
        ivs = []
        for iv in intervals:
            iv = iv if isinstance(iv, Interval) else Interval(*iv)
            lo, hi, lc, hc = float(iv.lo), float(iv.hi), iv.lo_closed, iv.hi_closed
            if lo < wlo:
                lo, lc = wlo, True
            if hi > whi:
                hi, hc = whi, True
            if hi - lo <= eps:
                if (lc or hc) and hi >= lo - eps and wlo - eps <= lo <= whi + eps:
                    atoms = list(atoms) + [lo]
                continue
            ivs.append(Interval(lo, hi, bool(lc), bool(hc)))
        ats = [float(a) for a in atoms if wlo - eps <= a <= whi + eps]
        return cls._sweep((wlo, whi), eps, [(ivs, ats)], lambda flags: flags[0],
                          generator=generator)

    @classmethod
    def empty(cls, window, eps=EPS_ATOM) -> "RealSet":
        return cls((float(window[0]), float(window[1])), eps=eps)

    @classmethod
    def full(cls, window, eps=EPS_ATOM) -> "RealSet":
        w = (float(window[0]), float(window[1]))
        return cls(w, (Interval(w[0], w[1], True, True),), eps=eps)

    @classmethod
    def from_atoms(cls, window, atoms, generator=None, eps=EPS_ATOM) -> "RealSet":
        return cls.build(window, (), atoms, generator=generator, eps=eps)

    @classmethod
    def progression(cls, window, offset: float, step: float, lo=-math.inf, hi=math.inf,
                    eps=EPS_ATOM, label=None) -> "RealSet":
        """Atoms ``offset + step*n`` that lie in ``[lo, hi]`` and the window."""
        wlo, whi = window
        a, b = max(wlo, lo), min(whi, hi)
        if a > b:
            return cls.empty(window, eps)
        n0 = math.ceil((a - offset) / step - 1e-12)
        n1 = math.floor((b - offset) / step + 1e-12)
        pts = [offset + step * n for n in range(n0, n1 + 1)]
        gen = label or f"{offset:g}+{step:g}n"
        return cls.from_atoms(window, pts, generator=gen, eps=eps)

    @classmethod
    def _sweep(cls, window, eps, operands, rule: Callable[[tuple], bool], generator=None):
        raw = []
        for ivs, ats in operands:
            for iv in ivs:
                raw.extend((iv.lo, iv.hi))
            raw.extend(ats)
        reps, points = _cluster(raw, eps, window)
        points = [p for p in points if window[0] <= p <= window[1]]
        mids = [(points[k] + points[k + 1]) / 2 for k in range(len(points) - 1)]
        flags_pt, flags_mid = [], []
        for ivs, ats in operands:
            snapped = [Interval(reps[iv.lo], reps[iv.hi], iv.lo_closed, iv.hi_closed)
                       for iv in ivs]
            snapped = [iv for iv in snapped if iv.hi > iv.lo]
            s_atoms = sorted({reps[a] for a in ats})
            p_in, m_in = _members(points, mids, snapped, s_atoms)
            flags_pt.append(p_in)
            flags_mid.append(m_in)
        pt_out = [rule(tuple(f[k] for f in flags_pt)) for k in range(len(points))]
        mid_out = [rule(tuple(f[k] for f in flags_mid)) for k in range(len(mids))]
        intervals, atoms = _assemble(points, pt_out, mid_out)
        return cls(window, tuple(intervals), tuple(atoms), generator=generator, eps=eps)

    # --- algebra ------------------------------------------------------------

    def _check(self, other: "RealSet"):
        if self.window != other.window:
            raise WindowMismatch(f"windows differ: {self.window} vs {other.window}")

    def _binary(self, other, rule):
        self._check(other)
        return RealSet._sweep(self.window, max(self.eps, other.eps),
                              [(self.intervals, self.atoms), (other.intervals, other.atoms)],
                              rule)

    def union(self, other):
        return self._binary(other, lambda f: f[0] or f[1])

    def intersect(self, other):
        return self._binary(other, lambda f: f[0] and f[1])

    def diff(self, other):
        return self._binary(other, lambda f: f[0] and not f[1])

    def symmetric_diff(self, other):
        return self._binary(other, lambda f: f[0] != f[1])

    def complement(self):
        return RealSet.full(self.window, self.eps).diff(self)

    __or__ = union
    __and__ = intersect
    __sub__ = diff

    # --- queries ------------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.intervals and not self.atoms

    def has_positive_length(self) -> bool:
        return bool(self.intervals)

    def length(self) -> float:
        return math.fsum(iv.hi - iv.lo for iv in self.intervals)

    def contains(self, x: float) -> bool:
        e = self.eps
        for a in self.atoms:
            if abs(x - a) <= e:
                return True
        for iv in self.intervals:
            if abs(x - iv.lo) <= e:
                return iv.lo_closed or x > iv.lo
            if abs(x - iv.hi) <= e:
                return iv.hi_closed or x < iv.hi
            if iv.lo < x < iv.hi:
                return True
        return False

    def contains_interior(self, x: float) -> bool:
        """Membership excluding interval endpoints and atoms."""
        return any(iv.lo + self.eps < x < iv.hi - self.eps for iv in self.intervals)

    def interval_part(self) -> "RealSet":
        return RealSet(self.window, self.intervals, (), eps=self.eps)

    def atom_part(self) -> "RealSet":
        return RealSet(self.window, (), self.atoms, generator=self.generator, eps=self.eps)

    def closure(self) -> "RealSet":
        ivs = [Interval(iv.lo, iv.hi, True, True) for iv in self.intervals]
        return RealSet.build(self.window, ivs, self.atoms, eps=self.eps)

    def negate(self) -> "RealSet":
        """Reflection ``x -> -x``; the window is reflected too."""
        w = (-self.window[1], -self.window[0])
        ivs = [Interval(-iv.hi, -iv.lo, iv.hi_closed, iv.lo_closed) for iv in self.intervals]
        return RealSet.build(w, ivs, [-a for a in self.atoms], eps=self.eps)

    def with_window(self, window) -> "RealSet":
        return RealSet.build(window, self.intervals, self.atoms, self.generator, self.eps)

    def approx_equal(self, other: "RealSet") -> bool:
        """Equality with atom/endpoint positions compared at ``eps``."""
        if self.window != other.window or len(self.intervals) != len(other.intervals):
            return False
        if len(self.atoms) != len(other.atoms):
            return False
        e = max(self.eps, other.eps)
        for a, b in zip(self.intervals, other.intervals):
            if abs(a.lo - b.lo) > e or abs(a.hi - b.hi) > e:
                return False
            if a.lo_closed != b.lo_closed or a.hi_closed != b.hi_closed:
                return False
        return all(abs(a - b) <= e for a, b in zip(self.atoms, other.atoms))

    def __bool__(self):
        return not self.is_empty()

    def __repr__(self):
        parts = []
        for iv in self.intervals:
            parts.append(f"{'[' if iv.lo_closed else '('}{iv.lo:g},{iv.hi:g}"
                         f"{']' if iv.hi_closed else ')'}")
        if self.atoms:
            shown = ", ".join(f"{a:g}" for a in self.atoms[:6])
            more = ", ..." if len(self.atoms) > 6 else ""
            parts.append("{" + shown + more + "}")
        return f"RealSet({' U '.join(parts) or 'empty'})"

    # --- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        d = {"window": list(self.window),
             "intervals": [iv.to_dict() for iv in self.intervals],
             "atoms": list(self.atoms)}
        if self.generator:
            d["generator"] = self.generator
        return d

    @classmethod
    def from_dict(cls, d: dict, window=None, eps=EPS_ATOM) -> "RealSet":
        w = window if window is not None else d["window"]
        ivs = []
        for iv in d.get("intervals", []):
            if isinstance(iv, dict):
                ivs.append(Interval(_num(iv["lo"]), _num(iv["hi"]),
                                    bool(iv.get("lo_closed", False)),
                                    bool(iv.get("hi_closed", False))))
            else:
                ivs.append(Interval(_num(iv[0]), _num(iv[1])))
        out = cls.build(w, ivs, [float(a) for a in d.get("atoms", [])],
                        generator=d.get("generator"), eps=eps)
        prog = d.get("progression")
        if prog:
            out = out | cls.progression(w, float(prog.get("offset", 0.0)), float(prog["step"]),
                                        _num(prog.get("min", -math.inf)),
                                        _num(prog.get("max", math.inf)), eps=eps)
            out = RealSet(out.window, out.intervals, out.atoms,
                          generator=d.get("generator") or f"progression{prog}", eps=eps)
        return out


def _num(v) -> float:
    if v is None:
        return math.nan
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        if s in ("-inf", "-infinity"):
            return -math.inf
    return float(v)


def set_combine(a: RealSet, b: RealSet, op: str) -> RealSet:
    """Exact Boolean combination; ``op`` is union, intersect or diff."""
    ops = {"union": a.union, "intersect": a.intersect, "diff": a.diff}
    try:
        return ops[op](b)
    except KeyError:
        raise ValueError(f"unknown set operation {op!r}") from None


# --- measure classes ---------------------------------------------------------


@dataclass(frozen=True)
class SpectralMeasureClass:
    """Null-set view of a spectral measure: supports of its ac and pp parts."""

    ac_support: RealSet
    pp_support: RealSet

    def __post_init__(self):
        if self.ac_support.window != self.pp_support.window:
            raise WindowMismatch("ac and pp supports live on different windows")
        # atoms are Lebesgue-null, intervals cannot carry a pp part
        if self.ac_support.atoms:
            object.__setattr__(self, "ac_support", self.ac_support.interval_part())
        if self.pp_support.intervals:
            object.__setattr__(self, "pp_support", self.pp_support.atom_part())

    @property
    def window(self):
        return self.ac_support.window

    @classmethod
    def empty(cls, window, eps=EPS_ATOM):
        e = RealSet.empty(window, eps)
        return cls(e, e)

    @classmethod
    def from_set(cls, s: RealSet) -> "SpectralMeasureClass":
        """Intervals become the ac part, atoms the pp part."""
        return cls(s.interval_part(), s.atom_part())

    def support(self) -> RealSet:
        return self.ac_support | self.pp_support

    def is_null(self) -> bool:
        return not self.ac_support.intervals and not self.pp_support.atoms

    def restrict(self, s: RealSet) -> "SpectralMeasureClass":
        return SpectralMeasureClass((self.ac_support & s).interval_part(),
                                    (self.pp_support & s).atom_part())

    def union(self, other: "SpectralMeasureClass") -> "SpectralMeasureClass":
        return SpectralMeasureClass(self.ac_support | other.ac_support,
                                    self.pp_support | other.pp_support)

    def charges_point(self, x: float) -> bool:
        return self.pp_support.contains(x)

    def equivalent(self, other: "SpectralMeasureClass") -> bool:
        """Mutual absolute continuity at class level."""
        ac_diff = self.ac_support.symmetric_diff(other.ac_support)
        pp_diff = self.pp_support.symmetric_diff(other.pp_support)
        return not ac_diff.intervals and not pp_diff.atoms

    def to_dict(self):
        return {"ac_support": self.ac_support.to_dict(),
                "pp_support": self.pp_support.to_dict()}


def class_measure_sign(m: SpectralMeasureClass, s: RealSet) -> str:
    """``"positive"`` if ``m`` charges ``s``, else ``"zero"``."""
    if s.is_empty():
        return "zero"
    if (s & m.ac_support).intervals:
        return "positive"
    if (s & m.pp_support).atoms:
        return "positive"
    return "zero"


def split_pp_cont(m: SpectralMeasureClass):
    """Separate the pure point and continuous parts of a class."""
    e = RealSet.empty(m.window, m.ac_support.eps)
    return SpectralMeasureClass(e, m.pp_support), SpectralMeasureClass(m.ac_support, e)


@dataclass(frozen=True)
class WeightedPPMeasure:
    """Pure point measure given by (position, weight) atoms."""

    atoms: tuple[tuple[float, float], ...]
    eps: float = EPS_ATOM

    def __post_init__(self):
        atoms = tuple(sorted((float(p), float(w)) for p, w in self.atoms))
        for p, w in atoms:
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"atom weight must be positive and finite, got {w} at {p}")
        for (p, _), (q, _) in zip(atoms, atoms[1:]):
            if q - p <= self.eps:
                raise ValueError(f"atoms {p} and {q} coincide at tolerance {self.eps}")
        object.__setattr__(self, "atoms", atoms)

    @property
    def positions(self):
        return [p for p, _ in self.atoms]

    @property
    def weights(self):
        return [w for _, w in self.atoms]

    def total_mass(self) -> float:
        return math.fsum(self.weights)

    def mass(self, s: RealSet) -> float:
        return math.fsum(w for p, w in self.atoms if s.contains(p))

    def weight_at(self, x: float) -> float:
        for p, w in self.atoms:
            if abs(p - x) <= self.eps:
                return w
        return 0.0

    def integrate(self, f: Callable[[float], float], window=None) -> float:
        vals = [f(p) * w for p, w in self.atoms
                if window is None or window[0] <= p <= window[1]]
        return math.fsum(vals) if vals and not isinstance(vals[0], complex) else sum(vals)

    def support(self, window) -> RealSet:
        return RealSet.from_atoms(window, self.positions, eps=self.eps)

    def to_dict(self):
        return {"atoms": [[p, w] for p, w in self.atoms]}


def sum_measures(ms: Sequence[WeightedPPMeasure], eps=EPS_ATOM) -> WeightedPPMeasure:
    """The measure ``sum_i mu_i``; coinciding atoms add their weights."""
    pts = sorted((p, w) for m in ms for p, w in m.atoms)
    merged: list[list[float]] = []
    for p, w in pts:
        if merged and p - merged[-1][0] <= eps:
            merged[-1][1] += w
        else:
            merged.append([p, w])
    return WeightedPPMeasure(tuple((p, w) for p, w in merged), eps=eps)


def measure_sum_eval(ms: Sequence[WeightedPPMeasure], f: Callable[[float], float],
                     window) -> tuple[float, float]:
    """Evaluate ``sum_i int f dmu_i`` and ``int f d(sum_i mu_i)``.

    Both orders are returned so callers can check they agree.
    """
    if not ms:
        return 0.0, 0.0
    left = math.fsum(m.integrate(f, window) for m in ms)
    right = sum_measures(ms).integrate(f, window)
    return left, right
