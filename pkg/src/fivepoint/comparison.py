"""LSS inequalities, comparison configurations and tense arrays.

For a center ``p`` and points ``x_1..x_n`` the LSS matrix is
``a_ij = d(p,x_i)^2 + d(p,x_j)^2 - d(x_i,x_j)^2``; the inequality asks
``lambda^T A lambda >= 0`` on the standard simplex.  For ``n <= 4`` the
minimum is found exactly by enumerating the faces of the simplex.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .metric import FiniteMetric, QuadraticForm, simplex_vertices

TAU_LSS = 1e-9
TAU_TENSE = 1e-8
TAU_CFG = 1e-8
TAU_HULL = 1e-9
LAMBDA_FLOOR = 1e-6


class LssError(ValueError):
    pass


class RealizationMismatch(LssError):
    pass


# ---------------------------------------------------------------------------
# minimisation over the simplex


def _faces(n: int) -> list[tuple[int, ...]]:
    return [f for k in range(1, n + 1) for f in itertools.combinations(range(n), k)]


@dataclass
class FaceCandidate:
    face: tuple[int, ...]
    lam: np.ndarray  # full length, zero off the face
    value: float


def face_candidates(A, tol: float = TAU_LSS) -> tuple[list[FaceCandidate], list[tuple[int, ...]]]:
    """Stationary points of ``lambda^T A lambda`` on every face of the simplex.

    On face ``S`` solves ``A_S lambda = mu 1, sum lambda = 1``; keeps the
    solutions with ``lambda >= -tol``.  Faces whose bordered system is
    singular are returned separately: on such a face the restricted form is
    degenerate, and the minimum over the closed face is attained on one of
    its sub-faces, which are enumerated too.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    out: list[FaceCandidate] = []
    degenerate: list[tuple[int, ...]] = []
    for i in range(n):
        lam = np.zeros(n)
        lam[i] = 1.0
        out.append(FaceCandidate((i,), lam, float(A[i, i])))
    for k in range(2, n + 1):
        faces = list(itertools.combinations(range(n), k))
        K = np.zeros((len(faces), k + 1, k + 1))
        for f, face in enumerate(faces):
            K[f, :k, :k] = A[np.ix_(face, face)]
        K[:, :k, k] = -1.0
        K[:, k, :k] = 1.0
        rhs = np.zeros((len(faces), k + 1, 1))
        rhs[:, k, 0] = 1.0
        try:
            sols = np.linalg.solve(K, rhs)[..., 0]
            ok = [True] * len(faces)
        except np.linalg.LinAlgError:
            sols = np.zeros((len(faces), k + 1))
            ok = []
            for f in range(len(faces)):
                try:
                    sols[f] = np.linalg.solve(K[f], rhs[f])[:, 0]
                    ok.append(True)
                except np.linalg.LinAlgError:
                    ok.append(False)
        for f, face in enumerate(faces):
            sol = sols[f]
            if not ok[f] or not np.all(np.isfinite(sol)) or np.abs(sol[:k]).max() > 1e8:
                degenerate.append(face)
                continue
            lam_s = sol[:k]
            if lam_s.min() < -tol:
                continue
            lam_s = np.clip(lam_s, 0.0, None)
            lam_s /= lam_s.sum()
            lam = np.zeros(n)
            lam[list(face)] = lam_s
            out.append(FaceCandidate(face, lam, float(lam @ A @ lam)))
    return out, degenerate


def simplex_minimum(A, tol: float = TAU_LSS) -> tuple[float, np.ndarray]:
    """Exact minimum and a minimiser of ``lambda^T A lambda`` on the simplex."""
    cands, _ = face_candidates(A, tol)
    best = min(cands, key=lambda c: c.value)
    return best.value, best.lam


def _solve_fraction(K: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    n = len(K)
    M = [row[:] + [r] for row, r in zip(K, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [M[i][n] / M[i][i] for i in range(n)]


def simplex_minimum_exact(A: Sequence[Sequence[Fraction]]) -> tuple[Fraction, list[Fraction]]:
    """Face enumeration in rational arithmetic (exactly singular faces skipped)."""
    n = len(A)
    best: tuple[Fraction, list[Fraction]] | None = None
    for face in _faces(n):
        k = len(face)
        K = [[A[i][j] for j in face] + [Fraction(-1)] for i in face] + [[Fraction(1)] * k + [Fraction(0)]]
        sol = _solve_fraction(K, [Fraction(0)] * k + [Fraction(1)])
        if sol is None or min(sol[:k]) < 0:
            continue
        lam = [Fraction(0)] * n
        for i, v in zip(face, sol[:k]):
            lam[i] = v
        val = sum(A[i][j] * lam[i] * lam[j] for i in range(n) for j in range(n))
        if best is None or val < best[0]:
            best = (val, lam)
    assert best is not None
    return best


def lss_matrix(m: FiniteMetric, center: str, others: Sequence[str]) -> np.ndarray:
    p = m.index(center)
    idx = [m.index(x) for x in others]
    D = m.matrix
    r2 = D[p, idx] ** 2
    return r2[:, None] + r2[None, :] - D[np.ix_(idx, idx)] ** 2


def lss_matrix_exact(m: FiniteMetric, center: str, others: Sequence[str]) -> list[list[Fraction]]:
    e = m.exact_dist
    return [[e(center, a) ** 2 + e(center, b) ** 2 - e(a, b) ** 2 for b in others] for a in others]


def positive_null_vector(A, tol: float) -> np.ndarray | None:
    """A simplex point with ``A lambda = 0`` maximising its smallest entry."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    w, V = np.linalg.eigh(A)
    N = V[:, np.abs(w) <= tol]
    if N.shape[1] == 0:
        return None
    # variables (c, t): maximise t s.t. N c >= t, 1^T N c = 1
    k = N.shape[1]
    cost = np.zeros(k + 1)
    cost[-1] = -1.0
    A_ub = np.hstack([-N, np.ones((n, 1))])
    A_eq = np.hstack([N.sum(0)[None, :], np.zeros((1, 1))])
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(None, None)] * k + [(None, 1.0)], method="highs")
    if res.status != 0:
        return None
    lam = N @ res.x[:k]
    return lam


@dataclass
class LssReport:
    center: str
    others: tuple[str, ...]
    A: np.ndarray
    min_value: float
    argmin: np.ndarray
    holds: bool
    tight: bool  # minimum is zero within tolerance
    scale2: float = 1.0
    degenerate_faces: list = field(default_factory=list)

    @cached_property
    def positive_lambda(self) -> np.ndarray | None:
        """Weights ``lambda >= LAMBDA_FLOOR`` with ``A lambda = 0`` when tight."""
        if not (self.holds and self.tight):
            return None
        lam = positive_null_vector(self.A, TAU_TENSE * self.scale2)
        if lam is None or lam.min() < LAMBDA_FLOOR:
            return None
        return lam

    @property
    def equality_with_positive_lambda(self) -> bool:
        return self.positive_lambda is not None

    def to_json(self) -> dict:
        pos = self.positive_lambda
        return {
            "center": self.center,
            "others": list(self.others),
            "A": self.A.tolist(),
            "min_value": self.min_value,
            "argmin": self.argmin.tolist(),
            "holds": self.holds,
            "equality_with_positive_lambda": pos is not None,
            "positive_lambda": None if pos is None else pos.tolist(),
            "degenerate_faces": [[self.others[i] for i in f] for f in self.degenerate_faces],
        }


def _report_from(center, others, A, value, lam, scale2, degenerate, exact_value=None,
                 tol: float = TAU_LSS) -> LssReport:
    if exact_value is not None:
        holds = exact_value >= 0
        tight = exact_value == 0
    else:
        holds = value >= -tol * scale2
        tight = holds and value <= TAU_TENSE * scale2
    return LssReport(center, tuple(others), A, float(value), lam, bool(holds), bool(tight), scale2, degenerate)


def lss_with_center(m: FiniteMetric, center: str, others: Sequence[str]) -> LssReport:
    """Minimum of the LSS form for one center over the simplex."""
    others = tuple(others)
    if not 1 <= len(others) <= 4 or center in others or len(set(others)) != len(others):
        raise LssError(f"bad array: center {center!r}, others {others}")
    A = lss_matrix(m, center, others)
    scale2 = m.scale() ** 2
    if m.exact is not None:
        Ae = lss_matrix_exact(m, center, others)
        val, lam = simplex_minimum_exact(Ae)
        return _report_from(center, others, A, float(val), np.array([float(x) for x in lam]), scale2, [], val)
    cands, degenerate = face_candidates(A)
    best = min(cands, key=lambda c: c.value)
    return _report_from(center, others, A, best.value, best.lam, scale2, degenerate)


@dataclass
class LssSummary:
    holds: bool
    reports: list[LssReport]

    @property
    def witness(self) -> LssReport | None:
        bad = [r for r in self.reports if not r.holds]
        return min(bad, key=lambda r: r.min_value) if bad else None

    def full_reports(self) -> list[LssReport]:
        """Reports using all remaining points (one per center)."""
        k = max(len(r.others) for r in self.reports)
        return [r for r in self.reports if len(r.others) == k]

    def to_json(self) -> dict:
        w = self.witness
        return {"holds": self.holds, "witness": None if w is None else w.to_json(),
                "reports": [r.to_json() for r in self.reports]}


def lss_holds(m: FiniteMetric) -> bool:
    """Verdict of :func:`lss_all` without building subset reports."""
    scale2 = m.scale() ** 2
    for center in m.labels:
        others = [x for x in m.labels if x != center]
        if m.exact is not None:
            val, _ = simplex_minimum_exact(lss_matrix_exact(m, center, others))
            if val < 0:
                return False
            continue
        val, _ = simplex_minimum(lss_matrix(m, center, others))
        if val < -TAU_LSS * scale2:
            return False
    return True


def lss_all(m: FiniteMetric, tol: float = TAU_LSS) -> LssSummary:
    """LSS for every center and every nonempty subset of the other points.

    The faces of the full simplex are solved once per center; a subset's
    minimum is the smallest candidate on faces inside it.  An inequality
    holds when its minimum is at least ``-tol * diameter^2``.
    """
    if m.n > 5:
        raise LssError("at most five points")
    reports: list[LssReport] = []
    scale2 = m.scale() ** 2
    for center in m.labels:
        others = [x for x in m.labels if x != center]
        if not others:
            continue
        if m.exact is not None:
            for k in range(1, len(others) + 1):
                for sub in itertools.combinations(others, k):
                    reports.append(lss_with_center(m, center, sub))
            continue
        A = lss_matrix(m, center, others)
        cands, degenerate = face_candidates(A)
        for k in range(1, len(others) + 1):
            for sub in itertools.combinations(range(len(others)), k):
                sset = set(sub)
                inside = [c for c in cands if sset.issuperset(c.face)]
                best = min(inside, key=lambda c: c.value)
                lam = best.lam[list(sub)]
                A_sub = A[np.ix_(sub, sub)]
                degen = [tuple(sub.index(i) for i in f) for f in degenerate if sset.issuperset(f)]
                reports.append(_report_from(center, [others[i] for i in sub], A_sub, best.value, lam,
                                            scale2, degen, tol=tol))
    return LssSummary(all(r.holds for r in reports), reports)


# ---------------------------------------------------------------------------
# (n+1)-comparison configurations


@dataclass
class ComparisonConfiguration:
    center: str
    others: tuple[str, ...]
    points: np.ndarray  # rows: x~_i; the center sits at the origin
    residual: float
    iterations: int = 0
    converged: bool = True

    def pairwise_gaps(self, m: FiniteMetric) -> np.ndarray:
        """``|x~_i - x~_j| - d(x_i, x_j)`` for the other points."""
        P = self.points
        dist = np.linalg.norm(P[:, None] - P[None, :], axis=-1)
        idx = [m.index(x) for x in self.others]
        return dist - m.matrix[np.ix_(idx, idx)]

    def to_json(self) -> dict:
        return {"center": self.center, "others": list(self.others), "points": self.points.tolist(),
                "residual": self.residual, "iterations": self.iterations, "converged": self.converged}


def _objective(X, D, iu):
    diff = X[:, :, None, :] - X[:, None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    gap = np.minimum(dist - D, 0.0)
    s = (gap[:, iu[0], iu[1]] ** 2).sum(-1)
    return s, diff, dist, gap


def _gradient(diff, dist, gap):
    with np.errstate(invalid="ignore", divide="ignore"):
        coef = np.where(dist > 0, 2.0 * gap / dist, 0.0)
    return (coef[..., None] * diff).sum(axis=2)


def comparison_config(m: FiniteMetric, center: str, others: Sequence[str] | None = None, *,
                      starts: int = 16, max_iter: int = 10000, seed: int = 0, dim: int | None = None,
                      tol: float = 1e-24) -> ComparisonConfiguration:
    """Configuration with exact radii minimising ``sum phi(|x~_i - x~_j| - d_ij)``.

    ``phi(t) = min(t, 0)^2``.  Projected descent on the product of spheres
    around the origin with Armijo backtracking from step 1, run from
    ``starts`` random initial configurations in parallel.  A positive
    residual when the LSS inequality fails for this center is expected.
    """
    if others is None:
        others = [x for x in m.labels if x != center]
    others = tuple(others)
    n = len(others)
    scale = m.scale()
    p = m.index(center)
    idx = [m.index(x) for x in others]
    r = m.matrix[p, idx] / scale
    D = m.matrix[np.ix_(idx, idx)] / scale
    k = dim or max(n, 1)
    if n <= 1:
        P = np.zeros((n, k))
        if n == 1:
            P[0, 0] = r[0] * scale
        return ComparisonConfiguration(center, others, P, 0.0)

    rng = np.random.default_rng(seed)
    X = rng.normal(size=(starts, n, k))
    X /= np.linalg.norm(X, axis=-1, keepdims=True)
    X *= r[None, :, None]
    fixed = r == 0
    iu = np.triu_indices(n, 1)

    def project(Y):
        nrm = np.linalg.norm(Y, axis=-1, keepdims=True)
        nrm = np.where(nrm > 0, nrm, 1.0)
        return Y / nrm * r[None, :, None]

    s, diff, dist, gap = _objective(X, D, iu)
    step = np.ones(starts)
    active = np.ones(starts, dtype=bool)
    history = [s.copy()]
    it = 0
    for it in range(1, max_iter + 1):
        g = _gradient(diff, dist, gap)
        unit = X / np.where(np.linalg.norm(X, axis=-1, keepdims=True) > 0,
                            np.linalg.norm(X, axis=-1, keepdims=True), 1.0)
        g = g - (g * unit).sum(-1, keepdims=True) * unit
        g[:, fixed] = 0.0
        gnorm2 = (g ** 2).sum((1, 2))
        active &= (s > tol) & (gnorm2 > 1e-32)
        if not active.any():
            break
        trial_step = np.minimum(step * 2.0, 1.0)
        todo = active.copy()
        newX = X.copy()
        news = s.copy()
        for _ in range(60):
            if not todo.any():
                break
            cand = project(X[todo] - trial_step[todo, None, None] * g[todo])
            cs, *_ = _objective(cand, D, iu)
            ok = cs <= s[todo] - 1e-4 * trial_step[todo] * gnorm2[todo]
            ids = np.flatnonzero(todo)
            newX[ids[ok]] = cand[ok]
            news[ids[ok]] = cs[ok]
            todo[ids[ok]] = False
            trial_step[ids[~ok]] *= 0.5
        stalled = todo  # no decrease found
        step = np.where(stalled, step, trial_step)
        active &= ~stalled
        X = newX
        s, diff, dist, gap = _objective(X, D, iu)
        history.append(s.copy())
        if it % 200 == 0 and len(history) > 200:
            old = history[-201]
            active &= ~(old - s <= 1e-10 * np.maximum(old, 1e-300))
            history = history[-201:]
    best = int(np.argmin(s))
    P = X[best] * scale
    # radii are exact by construction; renormalise once more against drift
    nrm = np.linalg.norm(P, axis=-1)
    P = np.where(nrm[:, None] > 0, P / np.where(nrm[:, None] > 0, nrm[:, None], 1) * (r * scale)[:, None], P)
    resid = float(s[best]) * scale ** 2
    return ComparisonConfiguration(center, others, P, resid, it, it < max_iter)


# ---------------------------------------------------------------------------
# tense arrays


@dataclass
class TenseSet:
    points: tuple[str, ...]  # center first
    center: str
    degenerate: bool
    realization: np.ndarray  # rows follow ``points``; the center at the origin
    weights: np.ndarray | None = None  # convex weights of the other points

    @property
    def others(self) -> tuple[str, ...]:
        return tuple(x for x in self.points if x != self.center)

    @property
    def size(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {"points": list(self.points), "center": self.center, "degenerate": self.degenerate,
                "realization": self.realization.tolist(),
                "weights": None if self.weights is None else self.weights.tolist()}

    def word(self) -> str:
        """``abc`` notation for triples (ends around the center)."""
        o = sorted(self.others)
        return f"{o[0]}{self.center}{o[1]}" if self.size == 3 else self.center + ":" + "".join(o)


def tense_triples(m: FiniteMetric) -> list[TenseSet]:
    """Triples ``a b c`` (center ``b``) with ``d(a,b) + d(b,c) = d(a,c)``."""
    out = []
    slack = TAU_TENSE * m.scale()
    for a, c in itertools.combinations(m.labels, 2):
        for b in m.labels:
            if b in (a, c):
                continue
            if m.exact is not None:
                tight = m.exact_dist(a, b) + m.exact_dist(b, c) == m.exact_dist(a, c)
            else:
                tight = abs(m.dist(a, b) + m.dist(b, c) - m.dist(a, c)) <= slack
            if not tight:
                continue
            dab, dbc = m.dist(a, b), m.dist(b, c)
            real = np.array([[0.0], [-dab], [dbc]])
            total = dab + dbc
            w = np.array([dbc / total, dab / total]) if total > 0 else np.array([0.5, 0.5])
            out.append(TenseSet((b, a, c), b, dab == 0 or dbc == 0, real, w))
    return out


def realize(A, tol: float) -> np.ndarray:
    """Points ``y_i`` with ``2 <y_i, y_j> = A_ij`` (rank-revealing)."""
    w, V = np.linalg.eigh(np.asarray(A, dtype=float) / 2)
    keep = w > tol
    if not keep.any():
        return np.zeros((len(w), 1))
    return V[:, keep] * np.sqrt(w[keep])


def tense_array(m: FiniteMetric, center: str, others: Sequence[str]) -> TenseSet | None:
    """Nondegenerate tense array with the given center, or ``None``.

    Tense means the LSS minimum is zero at a strictly positive weight vector;
    the comparison configuration is then isometric to the array and is
    returned as the realization.
    """
    others = tuple(others)
    if len(others) not in (3, 4):
        raise LssError("tense_array expects three or four other points")
    rep = lss_with_center(m, center, others)
    if not rep.holds or not rep.equality_with_positive_lambda:
        return None
    scale = m.scale()
    Y = realize(rep.A, TAU_TENSE * scale ** 2)
    pts = (center,) + others
    real = np.vstack([np.zeros((1, Y.shape[1])), Y])
    dist = np.linalg.norm(real[:, None] - real[None, :], axis=-1)
    target = m.submetric(pts).matrix
    err = np.abs(dist - target).max()
    if err > TAU_CFG * scale:
        raise RealizationMismatch(f"array {center}:{''.join(others)} is LSS-tight but its realization "
                                  f"misses distances by {err:.3g}")
    return TenseSet(pts, center, False, real, rep.positive_lambda)


@dataclass
class TenseStructure:
    triples: list[TenseSet]
    quads: list[TenseSet]
    quints: list[TenseSet]

    def largest(self) -> int:
        if self.quints:
            return 5
        if self.quads:
            return 4
        return 3 if self.triples else 0

    def signature(self) -> tuple:
        """Relabeling-sensitive summary used in equivariance checks."""
        return (tuple(sorted(t.word() for t in self.triples)),
                tuple(sorted(q.word() for q in self.quads)),
                tuple(sorted(q.word() for q in self.quints)))

    def to_json(self) -> dict:
        return {"triples": [t.to_json() for t in self.triples], "quads": [q.to_json() for q in self.quads],
                "quints": [q.to_json() for q in self.quints]}


def tense_structure(m: FiniteMetric) -> TenseStructure:
    """All 3-point tense sets and all nondegenerate 4- and 5-point tense arrays."""
    quads, quints = [], []
    for center in m.labels:
        rest = [x for x in m.labels if x != center]
        for k, bucket in ((3, quads), (4, quints)):
            for sub in itertools.combinations(rest, k):
                t = tense_array(m, center, sub)
                if t is not None:
                    bucket.append(t)
    return TenseStructure(tense_triples(m), quads, quints)


# ---------------------------------------------------------------------------
# perturbations keeping three-point tense sets


def pair_index(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def squared_distances_to_form(D2: np.ndarray) -> QuadraticForm:
    last = D2[-1, :-1]
    return QuadraticForm.from_matrix((last[:, None] + last[None, :] - D2[:-1, :-1]) / 2)


def perturbation_space(m: FiniteMetric, triples: Sequence[TenseSet]) -> tuple[list[QuadraticForm], int]:
    """Forms whose three-point tense sets keep proportional side lengths.

    In squared-distance coordinates proportionality of the sides of a triple
    is linear: ``D'_ij D_jk = D'_jk D_ij`` and ``D'_ij D_ik = D'_ik D_ij``.
    Returns a basis (as forms on ``R^{n-1}``) of the common solution space
    and its dimension.
    """
    n = m.n
    pairs = pair_index(n)
    col = {p: c for c, p in enumerate(pairs)}
    D2 = m.matrix ** 2
    rows = []
    for t in triples:
        i, j, k = sorted(m.index(x) for x in t.points)
        pij, pjk, pik = col[(i, j)], col[(j, k)], col[(i, k)]
        r1 = np.zeros(len(pairs))
        r1[pij] += D2[j, k]
        r1[pjk] -= D2[i, j]
        r2 = np.zeros(len(pairs))
        r2[pij] += D2[i, k]
        r2[pik] -= D2[i, j]
        rows += [r1, r2]
    if rows:
        C = np.array(rows)
        C /= max(np.abs(C).max(), 1e-300)
        B = null_space(C, rcond=1e-10)
    else:
        B = np.eye(len(pairs))
    basis = []
    for v in B.T:
        S = np.zeros((n, n))
        for (i, j), x in zip(pairs, v):
            S[i, j] = S[j, i] = x
        basis.append(squared_distances_to_form(S))
    return basis, len(basis)


def form_vector(W: QuadraticForm) -> np.ndarray:
    """Squared-distance coordinates of a form (pairs in lexicographic order)."""
    V = simplex_vertices(W.n + 1)
    return np.array([W(V[i] - V[j]) for i, j in pair_index(W.n + 1)])
