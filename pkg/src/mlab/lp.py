"""Exact rational linear programming.

A dense two-phase primal simplex over :class:`fractions.Fraction` using
Bland's rule (lowest index enters, lowest basic index leaves on ties), so
identical programs always produce identical outcomes.

Every outcome carries a certificate expressed against
:meth:`LinearProgram.normalized_rows`, the program rewritten as rows of the
form ``a.x <= b`` or ``a.x == b`` (``>=`` rows negated, then one row per finite
lower bound ``-x_j <= -l_j``, then one per finite upper bound ``x_j <= u_j``).
With ``s = +1`` for minimisation and ``-1`` for maximisation:

* optimal: multipliers ``y`` (``>= 0`` on inequality rows) with
  ``s*c + sum_k y_k a_k == 0`` and dual value ``-s * sum_k y_k b_k`` equal to
  the primal value;
* infeasible: ``y`` (``>= 0`` on inequality rows) with ``sum_k y_k a_k == 0``
  and ``sum_k y_k b_k < 0``, i.e. the rows combine to ``0 <= negative``;
* unbounded: a feasible point plus a ray ``d`` with ``a_k.d <= 0`` (``== 0`` on
  equality rows) and ``s * c.d < 0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import MalformedProgram

LE, EQ, GE = "<=", "==", ">="
_RELATIONS = {"<=": LE, "==": EQ, "=": EQ, ">=": GE}


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _frac(v) -> Fraction:
    if isinstance(v, float):
        raise MalformedProgram(f"floating point coefficient {v!r}; use exact rationals")
    return Fraction(v)


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple
    relation: str
    rhs: Fraction

    def __post_init__(self):
        rel = _RELATIONS.get(self.relation)
        if rel is None:
            raise MalformedProgram(f"unknown relation {self.relation!r}")
        object.__setattr__(self, "relation", rel)
        object.__setattr__(self, "coeffs", tuple(_frac(a) for a in self.coeffs))
        object.__setattr__(self, "rhs", _frac(self.rhs))


@dataclass(frozen=True)
class LinearProgram:
    """``sense`` c.x subject to constraints and per-variable bounds.

    ``bounds[j]`` is ``(lower, upper)`` with ``None`` meaning unbounded on that
    side; omitting ``bounds`` makes every variable free.
    """

    objective: tuple
    constraints: tuple = ()
    bounds: Optional[tuple] = None
    sense: str = "min"

    def __post_init__(self):
        obj = tuple(_frac(c) for c in self.objective)
        n = len(obj)
        if n == 0:
            raise MalformedProgram("program needs at least one variable")
        if self.sense not in ("min", "max"):
            raise MalformedProgram(f"sense must be 'min' or 'max', got {self.sense!r}")
        cons = []
        for c in self.constraints:
            if not isinstance(c, Constraint):
                c = Constraint(*c)
            if len(c.coeffs) != n:
                raise MalformedProgram(
                    f"constraint has {len(c.coeffs)} coefficients, expected {n}")
            cons.append(c)
        if self.bounds is None:
            bnds = ((None, None),) * n
        else:
            if len(self.bounds) != n:
                raise MalformedProgram(f"{len(self.bounds)} bounds for {n} variables")
            bnds = tuple(
                (None if lo is None else _frac(lo), None if hi is None else _frac(hi))
                for lo, hi in self.bounds)
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "constraints", tuple(cons))
        object.__setattr__(self, "bounds", bnds)

    @property
    def n(self) -> int:
        return len(self.objective)

    def normalized_rows(self) -> list:
        """Rows ``(coeffs, is_equality, rhs)`` in ``<=``/``==`` form, certificate order."""
        rows = []
        for c in self.constraints:
            if c.relation == GE:
                rows.append((tuple(-a for a in c.coeffs), False, -c.rhs))
            else:
                rows.append((c.coeffs, c.relation == EQ, c.rhs))
        zero = (Fraction(0),) * self.n
        for j, (lo, _) in enumerate(self.bounds):
            if lo is not None:
                rows.append((zero[:j] + (Fraction(-1),) + zero[j + 1:], False, -lo))
        for j, (_, hi) in enumerate(self.bounds):
            if hi is not None:
                rows.append((zero[:j] + (Fraction(1),) + zero[j + 1:], False, hi))
        return rows


@dataclass(frozen=True)
class LpOutcome:
    status: Status
    x: Optional[tuple] = None  # optimum, or a feasible point when unbounded
    value: Optional[Fraction] = None
    dual: Optional[tuple] = None
    farkas: Optional[tuple] = None
    ray: Optional[tuple] = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def _dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(a, b) if x and y), Fraction(0))


class _Tableau:
    """Standard-form tableau ``A z = b, z >= 0, b >= 0`` with an explicit basis."""

    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols

    def reduced_costs(self, cost):
        d = list(cost)
        obj = Fraction(0)
        for r, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[r]
                for j, a in enumerate(row):
                    if a:
                        d[j] -= cb * a
                obj += cb * self.rhs[r]
        return d, obj

    def pivot(self, r, e, d):
        row = self.rows[r]
        p = row[e]
        if p != 1:
            inv = 1 / p
            row = [a * inv if a else a for a in row]
            self.rows[r] = row
            self.rhs[r] *= inv
        nz = [(j, a) for j, a in enumerate(row) if a]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[e]
            if f:
                for j, a in nz:
                    other[j] -= f * a
                self.rhs[i] -= f * self.rhs[r]
        f = d[e]
        if f:
            for j, a in nz:
                d[j] -= f * a
        self.basis[r] = e
        return f * self.rhs[r]

    def run(self, d, allowed):
        """Bland's-rule iterations; returns None at optimum or the unbounded column."""
        while True:
            e = next((j for j in range(self.ncols) if allowed[j] and d[j] < 0), None)
            if e is None:
                return None
            best = None
            for r, row in enumerate(self.rows):
                a = row[e]
                if a > 0:
                    ratio = self.rhs[r] / a
                    key = (ratio, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return e
            self.pivot(best[1], e, d)


def solve(lp: LinearProgram) -> LpOutcome:
    n = lp.n
    s = 1 if lp.sense == "min" else -1

    # x = shift + T z, one or two z columns per x variable
    zcols = []  # (x index, sign)
    shift = [Fraction(0)] * n
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            zcols.append((j, 1))
            shift[j] = lo
        elif hi is not None:
            zcols.append((j, -1))
            shift[j] = hi
        else:
            zcols.append((j, 1))
            zcols.append((j, -1))
    nz = len(zcols)

    # standard rows: constraints, then upper rows of doubly bounded variables
    srows = [(c.coeffs, c.relation, c.rhs) for c in lp.constraints]
    boxed = [j for j, (lo, hi) in enumerate(lp.bounds) if lo is not None and hi is not None]
    for j in boxed:
        e = [Fraction(0)] * n
        e[j] = Fraction(1)
        srows.append((tuple(e), LE, lp.bounds[j][1]))
    m = len(srows)
    nslack = sum(1 for _, rel, _ in srows if rel != EQ)

    sigma = []
    init_col = []
    body = []
    rhs = []
    slack_at = nz
    art_needed = []
    for coeffs, rel, b in srows:
        zrow = [coeffs[j] * sg if coeffs[j] else Fraction(0) for j, sg in zcols]
        bb = b - _dot(coeffs, shift)
        sg = -1 if bb < 0 else 1
        slack = [Fraction(0)] * nslack
        scol = None
        if rel != EQ:
            scol = slack_at - nz
            slack[scol] = Fraction(1 if rel == LE else -1)
            slack_at += 1
        row = zrow + slack
        if sg < 0:
            row = [-a for a in row]
            bb = -bb
        sigma.append(sg)
        body.append(row)
        rhs.append(bb)
        if scol is not None and row[nz + scol] == 1:
            init_col.append(nz + scol)
            art_needed.append(False)
        else:
            init_col.append(None)
            art_needed.append(True)
    nart = sum(art_needed)
    base = nz + nslack
    k = 0
    for r in range(m):
        body[r].extend([Fraction(0)] * nart)
        if art_needed[r]:
            body[r][base + k] = Fraction(1)
            init_col[r] = base + k
            k += 1
    ncols = base + nart
    is_art = [False] * base + [True] * nart

    tab = _Tableau(body, rhs, list(init_col), ncols)

    def dual_from(d, cost):
        return [cost[init_col[r]] - d[init_col[r]] for r in range(m)]

    def to_normalized(mu, vec_x):
        """Map standard-row multipliers ``mu`` (already sign-corrected) to ``y``."""
        y = []
        nc = len(lp.constraints)
        for r in range(nc):
            rho = -1 if lp.constraints[r].relation == GE else 1
            y.append(-rho * mu[r])
        upper_of_boxed = {j: -mu[nc + i] for i, j in enumerate(boxed)}
        for j, (lo, _) in enumerate(lp.bounds):
            if lo is not None:
                y.append(vec_x[j])
        for j, (lo, hi) in enumerate(lp.bounds):
            if hi is not None:
                y.append(upper_of_boxed[j] if lo is not None else -vec_x[j])
        return tuple(y)

    # phase 1
    if nart:
        cost1 = [Fraction(0)] * base + [Fraction(1)] * nart
        d1, _ = tab.reduced_costs(cost1)
        tab.run(d1, [True] * ncols)
        obj1 = sum((tab.rhs[r] for r, b in enumerate(tab.basis) if is_art[b]), Fraction(0))
        if obj1 > 0:
            pi = dual_from(d1, cost1)
            mu = [sigma[r] * pi[r] for r in range(m)]
            g = [Fraction(0)] * n
            for r, (coeffs, _, _) in enumerate(srows):
                if mu[r]:
                    for j, a in enumerate(coeffs):
                        if a:
                            g[j] += mu[r] * a
            # lower-bound multiplier is -g_j, upper-only multiplier is g_j
            farkas = to_normalized(mu, [-gj for gj in g])
            return LpOutcome(Status.INFEASIBLE, farkas=farkas)
        # drive remaining zero-level artificials out of the basis
        for r in range(m):
            if is_art[tab.basis[r]]:
                row = tab.rows[r]
                j = next((j for j in range(base) if row[j]), None)
                if j is not None:
                    tab.pivot(r, j, d1)

    # phase 2
    cost = [Fraction(0)] * ncols
    for col, (j, sg) in enumerate(zcols):
        cost[col] = s * lp.objective[j] * sg
    d, _ = tab.reduced_costs(cost)
    allowed = [not a for a in is_art]
    ray_col = tab.run(d, allowed)

    zval = [Fraction(0)] * ncols
    for r, b in enumerate(tab.basis):
        zval[b] = tab.rhs[r]
    x = list(shift)
    for col, (j, sg) in enumerate(zcols):
        if zval[col]:
            x[j] += sg * zval[col]
    x = tuple(x)

    if ray_col is not None:
        dz = [Fraction(0)] * ncols
        dz[ray_col] = Fraction(1)
        for r, b in enumerate(tab.basis):
            if tab.rows[r][ray_col]:
                dz[b] = -tab.rows[r][ray_col]
        ray = [Fraction(0)] * n
        for col, (j, sg) in enumerate(zcols):
            if dz[col]:
                ray[j] += sg * dz[col]
        return LpOutcome(Status.UNBOUNDED, x=x, ray=tuple(ray))

    pi = dual_from(d, cost)
    mu = [sigma[r] * pi[r] for r in range(m)]
    red = [s * c for c in lp.objective]
    for r, (coeffs, _, _) in enumerate(srows):
        if mu[r]:
            for j, a in enumerate(coeffs):
                if a:
                    red[j] -= mu[r] * a
    # lower-bound multiplier is d_j, upper-only multiplier is -d_j
    dual = to_normalized(mu, red)
    value = _dot(lp.objective, x)
    return LpOutcome(Status.OPTIMAL, x=x, value=value, dual=dual)


def _feasible(rows, x) -> bool:
    for a, eq, b in rows:
        lhs = _dot(a, x)
        if (eq and lhs != b) or (not eq and lhs > b):
            return False
    return True


def verify_certificate(lp: LinearProgram, outcome: LpOutcome) -> bool:
    """Re-check an outcome against ``lp`` by exact substitution."""
    rows = lp.normalized_rows()
    n = lp.n
    s = 1 if lp.sense == "min" else -1
    try:
        if outcome.status is Status.OPTIMAL:
            x, y = outcome.x, outcome.dual
            if x is None or y is None or len(x) != n or len(y) != len(rows):
                return False
            if not _feasible(rows, x):
                return False
            if any(yk < 0 for yk, (_, eq, _) in zip(y, rows) if not eq):
                return False
            for j in range(n):
                if s * lp.objective[j] + sum((yk * a[j] for yk, (a, _, _) in zip(y, rows)),
                                             Fraction(0)) != 0:
                    return False
            primal = _dot(lp.objective, x)
            dual_value = -s * sum((yk * b for yk, (_, _, b) in zip(y, rows)), Fraction(0))
            return primal == outcome.value == dual_value
        if outcome.status is Status.INFEASIBLE:
            y = outcome.farkas
            if y is None or len(y) != len(rows):
                return False
            if any(yk < 0 for yk, (_, eq, _) in zip(y, rows) if not eq):
                return False
            for j in range(n):
                if sum((yk * a[j] for yk, (a, _, _) in zip(y, rows)), Fraction(0)) != 0:
                    return False
            return sum((yk * b for yk, (_, _, b) in zip(y, rows)), Fraction(0)) < 0
        if outcome.status is Status.UNBOUNDED:
            x, d = outcome.x, outcome.ray
            if x is None or d is None or len(x) != n or len(d) != n:
                return False
            if not _feasible(rows, x):
                return False
            for a, eq, _ in rows:
                ad = _dot(a, d)
                if (eq and ad != 0) or ad > 0:
                    return False
            return s * _dot(lp.objective, d) < 0
    except (TypeError, ZeroDivisionError):
        return False
    return False
