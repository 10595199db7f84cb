"""Floating-point side: residuals, LU determinants and level search.

The search looks for high-determinant matrices of a fixed sign/level pattern
(a :class:`SearchTemplate`) whose entries are bounded by 1. Level 0 is pinned
to 1 and the remaining levels move in [-1, 1]. Orthogonality is enforced by a
penalty: each restart runs bounded Nelder-Mead on

    -log|det M| + mu * (sum of squared off-diagonal entries of M M^T
                        + squared spread of its diagonal)

for an increasing sequence of ``mu``, warm-starting each stage from the last.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
from scipy.optimize import minimize

from .cretan import CretanMatrix, determinant, verify_exact
from .errors import NoFeasiblePoint, ParseError, SingularWithinTolerance

__all__ = [
    "ResidualReport",
    "residual",
    "float_det",
    "compare_exact_float",
    "SearchTemplate",
    "circulant_template",
    "bordered_circulant_template",
    "pattern_template",
    "diagonal_template",
    "circ5_template",
    "s5d_template",
    "diag5_template",
    "a9_template",
    "TEMPLATES",
    "SearchConfig",
    "SearchResult",
    "search",
]

MAX_DECIMALS = 17
PIVOT_FLOOR = 1e-300


@dataclass(frozen=True)
class ResidualReport:
    max_offdiag: float
    max_diag_dev: float
    fitted_omega: float
    decimal_places: int

    @property
    def max_residual(self) -> float:
        return max(self.max_offdiag, self.max_diag_dev)


def _decimal_places(r: float) -> int:
    """Largest p with ``r < 0.5 * 10**-p``, capped at MAX_DECIMALS."""
    if r == 0:
        return MAX_DECIMALS
    p = math.floor(-math.log10(2 * r))
    # guard the boundary against log10 rounding
    while p > -MAX_DECIMALS and not r < 0.5 * 10.0**-p:
        p -= 1
    while p < MAX_DECIMALS and r < 0.5 * 10.0 ** -(p + 1):
        p += 1
    return min(p, MAX_DECIMALS)


def residual(M, omega: float | None = None) -> ResidualReport:
    """Distance of ``M M^T`` from a multiple of the identity.

    The weight is fitted as the mean of the diagonal unless ``omega`` is given.
    """
    M = np.asarray(M, dtype=float)
    G = M @ M.T
    diag = np.diag(G)
    fitted = float(diag.mean()) if omega is None else float(omega)
    off = G - np.diag(diag)
    max_off = float(np.abs(off).max()) if G.size > 1 else 0.0
    max_dev = float(np.abs(diag - fitted).max())
    return ResidualReport(max_off, max_dev, fitted, _decimal_places(max(max_off, max_dev)))


def float_det(M, strict: bool = False) -> float:
    """Signed determinant from an LU factorization with partial pivoting.

    A pivot below 1e-300 in modulus means the matrix is singular to working
    precision: the result is 0.0, or SingularWithinTolerance when ``strict``.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 1.0
    with warnings.catch_warnings():
        # exact zero pivots are handled below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    pivots = np.diag(lu)
    if np.any(np.abs(pivots) < PIVOT_FLOOR):
        if strict:
            raise SingularWithinTolerance("a pivot underflowed 1e-300")
        return 0.0
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    return float((-1) ** swaps * np.prod(pivots))


@dataclass
class Comparison:
    weight_exact: str
    weight_float: float
    det_exact: str
    det_float: float
    lu_det: float
    levels: list[tuple[str, float]]
    residual: ResidualReport

    @property
    def passed(self) -> bool:
        return self.residual.decimal_places >= 10


def compare_exact_float(cm: CretanMatrix) -> Comparison:
    """Pair each exact quantity with its floating-point evaluation."""
    if not verify_exact(cm).passed:
        raise ValueError("matrix is not exactly orthogonal")
    det = determinant(cm)
    M = cm.to_float()
    return Comparison(
        weight_exact=str(cm.weight),
        weight_float=float(cm.weight),
        det_exact=f"({cm.weight})^({cm.order}/2)",
        det_float=det.det_float,
        lu_det=float_det(M),
        levels=[(str(x), float(x)) for x in cm.levels],
        residual=residual(M),
    )


STRUCTURES = ("full-pattern", "circulant", "bordered-circulant", "diagonal-plus-offdiagonal")


@dataclass(frozen=True, eq=False)
class SearchTemplate:
    """Which level, and with which sign, sits in each cell."""

    name: str
    variables: np.ndarray  # (n, n) level indices
    signs: np.ndarray  # (n, n) entries in {-1, +1}
    structure_tag: str = "full-pattern"
    variable_names: tuple[str, ...] = ()

    def __post_init__(self):
        var = np.asarray(self.variables, dtype=np.int64)
        sgn = np.asarray(self.signs, dtype=np.int64)
        object.__setattr__(self, "variables", var)
        object.__setattr__(self, "signs", sgn)
        if not self.variable_names:
            names = tuple("abcdefghijklmnopqrstuvwxyz"[: self.variable_count])
            object.__setattr__(self, "variable_names", names)
        problems = self.problems()
        if problems:
            raise ValueError(f"invalid template {self.name!r}: " + "; ".join(problems))

    @property
    def order(self) -> int:
        return self.variables.shape[0]

    @property
    def variable_count(self) -> int:
        return int(self.variables.max()) + 1

    def problems(self) -> list[str]:
        var, sgn = self.variables, self.signs
        out = []
        if var.ndim != 2 or var.shape[0] != var.shape[1] or sgn.shape != var.shape:
            return ["slot map must be square with matching sign map"]
        if var.min() < 0 or set(np.unique(var)) != set(range(int(var.max()) + 1)):
            out.append("variable indices must cover a contiguous range from 0")
        if not np.isin(sgn, (-1, 1)).all():
            out.append("signs must be +1 or -1")
        if len(self.variable_names) != int(var.max()) + 1:
            out.append("one name per variable required")
        if self.structure_tag not in STRUCTURES:
            out.append(f"unknown structure {self.structure_tag!r}")
        elif self.structure_tag == "circulant" and not _is_circulant(var, sgn):
            out.append("slot map is not circulant")
        elif self.structure_tag == "bordered-circulant" and not _is_circulant(var[1:, 1:], sgn[1:, 1:]):
            out.append("core of slot map is not circulant")
        elif self.structure_tag == "diagonal-plus-offdiagonal":
            n = var.shape[0]
            off = ~np.eye(n, dtype=bool)
            if len(set(np.diag(var))) != 1 or len(set(var[off])) > 1:
                out.append("diagonal and off-diagonal must each hold one variable")
        return out

    def instantiate(self, levels) -> np.ndarray:
        return self.signs * np.asarray(levels, dtype=float)[self.variables]

    def as_dict(self) -> dict:
        names = self.variable_names
        pattern = [
            [("-" if s < 0 else "") + names[v] for v, s in zip(vrow, srow)]
            for vrow, srow in zip(self.variables.tolist(), self.signs.tolist())
        ]
        return {
            "name": self.name,
            "structure_tag": self.structure_tag,
            "variables": list(names),
            "pattern": pattern,
        }


def _is_circulant(var: np.ndarray, sgn: np.ndarray) -> bool:
    n = var.shape[0]
    return all(
        np.array_equal(np.roll(var[0], i), var[i]) and np.array_equal(np.roll(sgn[0], i), sgn[i])
        for i in range(n)
    )


def _parse_tokens(tokens, names) -> tuple[list[int], list[int]]:
    var, sgn = [], []
    for tok in tokens:
        tok = tok.strip()
        s = -1 if tok.startswith("-") else 1
        name = tok.lstrip("+-").strip()
        if name not in names:
            raise ValueError(f"unknown variable {name!r} in pattern")
        var.append(names.index(name))
        sgn.append(s)
    return var, sgn


def circulant_template(first_row, names, name="circulant") -> SearchTemplate:
    names = tuple(names)
    var, sgn = _parse_tokens(first_row, names)
    n = len(var)
    V = np.array([np.roll(var, i) for i in range(n)])
    S = np.array([np.roll(sgn, i) for i in range(n)])
    return SearchTemplate(name, V, S, "circulant", names)


def bordered_circulant_template(corner, border, core_row, names, name="bordered") -> SearchTemplate:
    """A corner cell and a constant border around a circulant core."""
    names = tuple(names)
    (cv,), (cs,) = _parse_tokens([corner], names)
    (bv,), (bs,) = _parse_tokens([border], names)
    var, sgn = _parse_tokens(core_row, names)
    m = len(var)
    V = np.empty((m + 1, m + 1), dtype=np.int64)
    S = np.empty_like(V)
    V[0, 0], S[0, 0] = cv, cs
    V[0, 1:], S[0, 1:] = bv, bs
    V[1:, 0], S[1:, 0] = bv, bs
    V[1:, 1:] = [np.roll(var, i) for i in range(m)]
    S[1:, 1:] = [np.roll(sgn, i) for i in range(m)]
    return SearchTemplate(name, V, S, "bordered-circulant", names)


def pattern_template(rows, names, name="pattern", structure_tag="full-pattern") -> SearchTemplate:
    names = tuple(names)
    parsed = [_parse_tokens(r, names) for r in rows]
    V = np.array([p[0] for p in parsed])
    S = np.array([p[1] for p in parsed])
    return SearchTemplate(name, V, S, structure_tag, names)


def diagonal_template(n: int, name: str | None = None) -> SearchTemplate:
    V = 1 - np.eye(n, dtype=np.int64)
    return SearchTemplate(name or f"diag{n}", V, np.ones((n, n), dtype=np.int64), "diagonal-plus-offdiagonal", ("x", "y"))


def circ5_template() -> SearchTemplate:
    return circulant_template(["c", "b", "-a", "-a", "b"], "abc", "circ5")


def s5d_template() -> SearchTemplate:
    rows = [
        "a -a -b -a -c",
        "b a -a c -a",
        "a a c -b a",
        "a -c a a -b",
        "c -b -a a a",
    ]
    return pattern_template([r.split() for r in rows], "abc", "s5d")


def diag5_template() -> SearchTemplate:
    return diagonal_template(5, "diag5")


def a9_template() -> SearchTemplate:
    """Order 9: corner -d, border b, core circ(a, -a, c, c, a, c, -a, -a)."""
    return bordered_circulant_template(
        "-d", "b", ["a", "-a", "c", "c", "a", "c", "-a", "-a"], "abcd", "a9"
    )


TEMPLATES = {
    "circ5": circ5_template,
    "s5d": s5d_template,
    "diag5": diag5_template,
    "a9": a9_template,
}


def load_template(data: dict) -> SearchTemplate:
    """Template from its JSON form: a full ``pattern``, a ``circulant`` row, or a bordered circulant."""
    names = tuple(data["variables"])
    name = data.get("name", "custom")
    if "pattern" in data:
        rows = [r.split() if isinstance(r, str) else r for r in data["pattern"]]
        return pattern_template(rows, names, name, data.get("structure_tag", "full-pattern"))
    if "circulant" in data:
        return circulant_template(data["circulant"], names, name)
    if "core" in data:
        return bordered_circulant_template(data["corner"], data["border"], data["core"], names, name)
    raise ValueError("template needs 'pattern', 'circulant' or 'core'")


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 32
    max_iters: int = 3000
    seed: int = 0
    tol: float = 1e-5
    penalty_schedule: tuple[float, ...] = (1e1, 1e3, 1e5, 1e7)
    workers: int = 1

    @classmethod
    def from_file(cls, path: str | Path) -> SearchConfig:
        """Read ``key = value`` lines; ``#`` starts a comment."""
        values = {}
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                key, sep, value = text.partition("=")
                if not sep:
                    raise ParseError(f"expected 'key = value', got {text!r}", lineno)
                values[key.strip().replace("-", "_")] = value.strip()
        return cls.from_strings(values)

    @classmethod
    def from_strings(cls, values: dict[str, str]) -> SearchConfig:
        kwargs = {}
        for key, value in values.items():
            if key in ("restarts", "max_iters", "seed", "workers"):
                kwargs[key] = int(value)
            elif key == "tol":
                kwargs[key] = float(value)
            elif key in ("penalty_schedule", "penalty"):
                kwargs["penalty_schedule"] = tuple(float(t) for t in value.replace(",", " ").split())
            else:
                raise ParseError(f"unknown search setting {key!r}")
        return cls(**kwargs)


@dataclass
class SearchResult:
    template: str
    levels: list[float]
    matrix: np.ndarray
    residual: ResidualReport
    abs_det: float
    feasible: bool
    restart: int
    penalty_trace: list[dict] = field(default_factory=list)
    restarts: list[dict] = field(default_factory=list)
    variable_names: tuple[str, ...] = ()
    config: SearchConfig | None = None

    @property
    def fitted_omega(self) -> float:
        return self.residual.fitted_omega

    def summary(self) -> str:
        r = self.residual
        return (
            f"order={self.matrix.shape[0]} tau={len(self.levels)} omega={r.fitted_omega:.6f} "
            f"|det|={self.abs_det:.6g} residual={r.max_residual:.3g}"
        )

    def to_json(self) -> dict:
        cfg = None
        if self.config is not None:
            cfg = asdict(self.config)
            cfg.pop("workers")  # output must not depend on parallelism
            cfg["penalty_schedule"] = list(cfg["penalty_schedule"])
        return {
            "kind": "search-result",
            "template": self.template,
            "order": int(self.matrix.shape[0]),
            "variable_names": list(self.variable_names),
            "levels": [float(x) for x in self.levels],
            "matrix": self.matrix.tolist(),
            "residual": asdict(self.residual),
            "fitted_omega": self.fitted_omega,
            "abs_det": self.abs_det,
            "feasible": self.feasible,
            "restart": self.restart,
            "config": cfg,
            "penalty_trace": self.penalty_trace,
            "restarts": self.restarts,
        }


def _penalty(G: np.ndarray) -> float:
    diag = np.diag(G)
    off = G - np.diag(diag)
    return float(np.sum(off * off) + np.sum((diag - diag.mean()) ** 2))


def _objective(z, template: SearchTemplate, mu: float) -> float:
    M = template.instantiate(np.concatenate(([1.0], np.clip(z, -1.0, 1.0))))
    sign, logdet = np.linalg.slogdet(M)
    if sign == 0 or not np.isfinite(logdet):
        return 1e12
    return -logdet + mu * _penalty(M @ M.T)


def _run_restart(template: SearchTemplate, config: SearchConfig, index: int, seed_seq) -> dict:
    rng = np.random.default_rng(seed_seq)
    free = template.variable_count - 1
    z = rng.uniform(-1.0, 1.0, free)
    bounds = [(-1.0, 1.0)] * free
    trace = []
    for mu in config.penalty_schedule:
        if free == 0:
            break
        res = minimize(
            _objective,
            z,
            args=(template, mu),
            method="Nelder-Mead",
            bounds=bounds,
            options={"maxiter": config.max_iters, "xatol": 1e-12, "fatol": 1e-14, "adaptive": free > 2},
        )
        z = np.clip(res.x, -1.0, 1.0)
        M = template.instantiate(np.concatenate(([1.0], z)))
        trace.append(
            {
                "restart": index,
                "mu": mu,
                "iterations": int(res.nit),
                "evaluations": int(res.nfev),
                "objective": float(res.fun),
                "residual": residual(M).max_residual,
            }
        )
    levels = np.concatenate(([1.0], z))
    M = template.instantiate(levels)
    return {
        "index": index,
        "levels": levels,
        "report": residual(M),
        "abs_det": abs(float_det(M)),
        "trace": trace,
    }


def _rank_key(run: dict, tol: float):
    r = run["report"].max_residual
    return (r > tol, -run["abs_det"] if r <= tol else r, run["index"])


def search(template: SearchTemplate, config: SearchConfig | None = None) -> SearchResult:
    """Multi-start penalty search for high-determinant orthogonal levels.

    Restarts are seeded from ``config.seed`` independently of one another, so
    the result does not depend on ``config.workers``. Among restarts whose
    residual is within ``tol`` the largest |det| wins, ties going to the lower
    restart index; if none is within ``tol`` the smallest residual wins and the
    result is flagged infeasible. Raises NoFeasiblePoint when even that
    residual exceeds ``10 * tol``.
    """
    config = config or SearchConfig()
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    jobs = [(template, config, i, s) for i, s in enumerate(seeds)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            runs = list(pool.map(_run_restart, *zip(*jobs)))
    else:
        runs = [_run_restart(*job) for job in jobs]
    best = min(runs, key=lambda run: _rank_key(run, config.tol))
    report = best["report"]
    if report.max_residual > 10 * config.tol:
        raise NoFeasiblePoint(
            f"best residual {report.max_residual:.3g} over {config.restarts} restarts exceeds {10 * config.tol:g}"
        )
    return SearchResult(
        template=template.name,
        levels=[float(x) for x in best["levels"]],
        matrix=template.instantiate(best["levels"]),
        residual=report,
        abs_det=best["abs_det"],
        feasible=report.max_residual <= config.tol,
        restart=best["index"],
        penalty_trace=best["trace"],
        restarts=[
            {"restart": run["index"], "abs_det": run["abs_det"], "residual": run["report"].max_residual}
            for run in runs
        ],
        variable_names=template.variable_names,
        config=config,
    )
