"""Top-level proving machinery.

``branch_and_prune`` maintains a worklist of regions whose union always
contains the reduction triple of every SOPS for the parameter interval:
regions are pruned, discarded when proven empty, emitted when small
enough, or bisected.  ``prove_interval`` then bounds the Floquet
multipliers of every terminal region; if each one certifies asymptotic
stability the interval's SOPS is unique up to time translation, and a
certificate records the evidence.  ``sweep`` partitions a parameter
range into subintervals and proves each independently.

``simulate_sops`` is a non-rigorous fixed-step integrator used as a test
oracle only; it never participates in any proof path.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .apriori import AprioriParams
from .floquet import FloquetOutcome, OutcomeKind, floquet_bound
from .interval import HALF_PI, Interval
from .prune import prune
from .region import Region
from .seed import seed_pair


class ConfigError(ValueError):
    pass


class ResourceLimitExceeded(RuntimeError):
    """Worklist or wall-clock budget exhausted; the run has no verdict."""


class NonConvergence(RuntimeError):
    """Simulation failed to settle onto a periodic cycle."""

    def __init__(self, message: str, result: "SimResult | None" = None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class ProofConfig:
    """All knobs of one proving run.

    eps1/eps2 are the terminal diameters for short/long-period regions,
    n_time the grid resolution, n_period the long seed's refinement
    passes, n_prune the contractor passes per worklist pop, and
    n_floquet/m_floquet the outer/inner multiplier-bound iterations.
    """

    alpha_lo: float
    alpha_hi: float
    delta_alpha: float
    eps1: float
    eps2: float
    n_time: int
    i0: int = 2
    j0: int = 20
    n_period: int = 10
    n_prune: int = 4
    n_floquet: int = 20
    m_floquet: int = 5
    max_pushes: int = 10 ** 6
    wall_budget_seconds: float | None = None

    def __post_init__(self) -> None:
        if not self.alpha_lo > HALF_PI.hi:
            raise ConfigError(
                f"alpha_lo={self.alpha_lo} must exceed pi/2")
        if not self.alpha_hi >= self.alpha_lo:
            raise ConfigError("alpha_hi must be >= alpha_lo")
        if not self.delta_alpha > 0:
            raise ConfigError("delta_alpha must be positive")
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise ConfigError("eps1 and eps2 must be positive")
        for name in ("n_time", "i0", "j0", "n_period", "n_prune",
                     "n_floquet", "m_floquet"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.max_pushes < 1:
            raise ConfigError("max_pushes must be positive")

    def config_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RegionRecord:
    """Certificate entry for one terminal region."""

    q_lo: float
    q_hi: float
    qbar_lo: float
    qbar_hi: float
    m_lo: float
    m_hi: float
    lambda_max: float
    outcome: str
    outer_iterations: int

    @staticmethod
    def from_region(r: Region, out: FloquetOutcome) -> "RegionRecord":
        return RegionRecord(
            r.i_q.lo, r.i_q.hi, r.i_qbar.lo, r.i_qbar.hi,
            r.i_m.lo, r.i_m.hi,
            out.lambda_max, out.kind.value, out.outer_iterations)


@dataclass
class ProofCertificate:
    """Machine witness of one subinterval's uniqueness verdict.

    verdict True means every terminal region certified stability, so
    the subinterval has a unique SOPS up to time translation.  verdict
    None means the run hit a resource limit and proves nothing.  An
    empty terminal set makes the claim vacuously true but is flagged as
    an anomaly, since SOPS are known to exist above pi/2.
    """

    alpha_lo: float
    alpha_hi: float
    verdict: bool | None
    regions: list[RegionRecord] = field(default_factory=list)
    anomaly_empty: bool = False
    wall_seconds: float = 0.0
    config: ProofConfig | None = None
    failure: str | None = None

    @property
    def region_count(self) -> int:
        return len(self.regions)

    @property
    def lambda_max_worst(self) -> float | None:
        vals = [rec.lambda_max for rec in self.regions
                if rec.outcome == OutcomeKind.BOUNDED_STABLE.value]
        return max(vals) if vals else None

    @property
    def outcome_histogram(self) -> dict[str, int]:
        hist: dict[str, int] = {}
        for rec in self.regions:
            hist[rec.outcome] = hist.get(rec.outcome, 0) + 1
        return hist

    def canonical_dict(self) -> dict:
        """Deterministic payload: excludes wall time, which is volatile."""
        return {
            "alpha_lo": self.alpha_lo,
            "alpha_hi": self.alpha_hi,
            "verdict": self.verdict,
            "region_count": self.region_count,
            "lambda_max_worst": self.lambda_max_worst,
            "outcome_histogram": dict(sorted(self.outcome_histogram.items())),
            "anomaly_empty": self.anomaly_empty,
            "failure": self.failure,
            "config_hash": self.config.config_hash() if self.config else None,
            "regions": [asdict(rec) for rec in self.regions],
        }

    def to_json_line(self) -> str:
        return json.dumps(self.canonical_dict(), sort_keys=True)


def branch_and_prune(i_alpha: Interval, cfg: ProofConfig,
                     on_event=None) -> list[Region]:
    """Exhaustive terminal region set for the parameter interval.

    Depth-first worklist: pop, prune, drop when empty, emit when the
    terminal test passes, otherwise bisect and push both halves.  The
    union of live, terminal and soundly-discarded regions contains every
    SOPS triple at every step.  ``on_event(kind, *regions)`` observes
    pops, discards, terminals and splits, for diagnostics and tests.
    """
    params = AprioriParams(cfg.i0, cfg.j0)
    stack: list[Region] = list(
        seed_pair(i_alpha, params, cfg.n_time, cfg.n_period))
    terminal: list[Region] = []
    pushes = len(stack)
    started = time.perf_counter()
    while stack:
        if (cfg.wall_budget_seconds is not None
                and time.perf_counter() - started > cfg.wall_budget_seconds):
            raise ResourceLimitExceeded(
                f"wall budget {cfg.wall_budget_seconds}s exhausted")
        region = stack.pop()
        if on_event:
            on_event("pop", region)
        pruned = prune(region, cfg.n_prune)
        if pruned is None:
            if on_event:
                on_event("discard", region)
            continue
        if pruned.is_terminal(cfg.eps1, cfg.eps2):
            terminal.append(pruned)
            if on_event:
                on_event("terminal", pruned)
            continue
        a, b = pruned.subdivide()
        pushes += 2
        if pushes > cfg.max_pushes:
            raise ResourceLimitExceeded(
                f"worklist push cap {cfg.max_pushes} exceeded")
        stack.append(a)
        stack.append(b)
        if on_event:
            on_event("split", pruned, a, b)
    return terminal


def prove_interval(i_alpha: Interval, cfg: ProofConfig) -> ProofCertificate:
    """Full pipeline for one subinterval: exhaust, then certify stability."""
    started = time.perf_counter()
    cert = ProofCertificate(i_alpha.lo, i_alpha.hi, None, config=cfg)
    try:
        terminal = branch_and_prune(i_alpha, cfg)
    except ResourceLimitExceeded as exc:
        cert.failure = str(exc)
        cert.wall_seconds = time.perf_counter() - started
        return cert
    records = []
    all_certified = True
    for region in terminal:
        outcome = floquet_bound(region, cfg.n_floquet, cfg.m_floquet)
        records.append(RegionRecord.from_region(region, outcome))
        if outcome.kind is OutcomeKind.INCONCLUSIVE:
            all_certified = False
    cert.regions = records
    cert.anomaly_empty = not terminal
    cert.verdict = all_certified
    cert.wall_seconds = time.perf_counter() - started
    return cert


def subintervals(lo: float, hi: float, width: float) -> list[tuple[float, float]]:
    """Closed overlapping subintervals of [lo, hi] of the given width."""
    if hi <= lo:
        return [(lo, hi)]
    count = max(1, math.ceil((hi - lo) / width - 1e-9))
    pts = [lo + k * width for k in range(count)]
    pts.append(hi)
    out = []
    for k in range(count):
        a, b = pts[k], min(pts[k + 1], hi)
        if b <= a:
            continue
        out.append((a, b))
    if out and out[-1][1] < hi:
        out[-1] = (out[-1][0], hi)
    return out


def _prove_sub(args: tuple[float, float, ProofConfig]) -> ProofCertificate:
    lo, hi, cfg = args
    try:
        return prove_interval(Interval(lo, hi), cfg)
    except Exception as exc:  # failures isolate per subinterval
        cert = ProofCertificate(lo, hi, None, config=cfg)
        cert.failure = f"{type(exc).__name__}: {exc}"
        return cert


def sweep(cfg: ProofConfig, jobs: int = 1, progress=None) -> list[ProofCertificate]:
    """Prove every width-delta_alpha subinterval of [alpha_lo, alpha_hi].

    Subintervals are independent; with jobs > 1 they run in separate
    processes.  Failures isolate: a subinterval that errors yields a
    verdict-less certificate and the sweep continues.
    """
    parts = subintervals(cfg.alpha_lo, cfg.alpha_hi, cfg.delta_alpha)
    tasks = [(a, b, cfg) for a, b in parts]
    certs: list[ProofCertificate] = []
    if jobs > 1 and len(tasks) > 1:
        import concurrent.futures as cf
        with cf.ProcessPoolExecutor(max_workers=jobs) as pool:
            for cert in pool.map(_prove_sub, tasks):
                certs.append(cert)
                if progress:
                    progress(cert)
    else:
        for task in tasks:
            cert = _prove_sub(task)
            certs.append(cert)
            if progress:
                progress(cert)
    return certs


def sweep_verdict(certs: list[ProofCertificate]) -> bool | None:
    """Aggregate verdict: AND over subintervals, None if any has no verdict."""
    if any(c.verdict is None for c in certs):
        return None
    return all(c.verdict for c in certs)


# -- non-rigorous simulation oracle ------------------------------------


@dataclass
class SimResult:
    """Approximate SOPS data extracted from a long simulation.

    The trajectory is stored on a uniform grid with its derivative, so
    cubic interpolation is available anywhere.  q/qbar/xmax/period
    describe the final settled cycle, translated so the reference
    up-crossing sits at time 0.
    """

    alpha: float
    step: float
    times: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    q: float | None = None
    qbar: float | None = None
    xmax: float | None = None
    period: float | None = None
    t_up: float | None = None
    converged: bool = False

    def _interp(self, t: float) -> float:
        h = self.step
        if t <= self.times[0]:
            return float(self.values[0])
        if t >= self.times[-1]:
            return float(self.values[-1])
        k = int((t - self.times[0]) / h)
        k = min(k, len(self.times) - 2)
        th = (t - self.times[k]) / h
        x0, x1 = self.values[k], self.values[k + 1]
        f0, f1 = self.derivs[k], self.derivs[k + 1]
        h00 = (1 + 2 * th) * (1 - th) ** 2
        h10 = th * (1 - th) ** 2
        h01 = th * th * (3 - 2 * th)
        h11 = th * th * (th - 1)
        return float(h00 * x0 + h10 * h * f0 + h01 * x1 + h11 * h * f1)

    def x_at(self, t: float) -> float:
        """Cycle value at time t, with the reference up-crossing at 0."""
        if not self.converged:
            raise NonConvergence("no settled cycle available", self)
        phase = math.fmod(t, self.period)
        if phase < 0:
            phase += self.period
        return self._interp(self.t_up + phase)

    def kappa(self) -> tuple[float, float, float]:
        return self.q, self.qbar, self.xmax


def _hermite_mid(x0, x1, f0, f1, h) -> float:
    # cubic Hermite at the midpoint of a step
    return 0.5 * (x0 + x1) + 0.125 * h * (f0 - f1)


def simulate_sops(alpha: float, horizon: float = 400.0,
                  step: float = 1.0 / 1024.0) -> SimResult:
    """Integrate x'(t) = -alpha (e^{x(t-1)} - 1) to an attracting cycle.

    Method of steps with fixed-step 4th-order quadrature (the rate
    depends only on the delayed value, so each step is a Simpson rule on
    known history).  Zeros and extrema of the settled cycle are located
    by bisection on the cubic interpolant.  Raises NonConvergence if the
    period fails to stabilize to 1e-6 within the horizon, or the
    solution decays.  Test oracle only: no rounding control.
    """
    if not (alpha > 0) or not math.isfinite(alpha):
        raise ValueError(f"alpha must be positive and finite, got {alpha}")
    m = round(1.0 / step)
    if abs(m * step - 1.0) > 1e-12 or m < 8:
        raise ValueError("step must be 1/m for an integer m >= 8")
    h = 1.0 / m
    nsteps = int(math.ceil(horizon / h))
    x = np.empty(nsteps + 1)
    f = np.empty(nsteps + 1)
    hist = 0.1  # constant history segment on [-1, 0]

    def rate(xdel: float) -> float:
        return -alpha * math.expm1(xdel)

    x[0] = hist
    for k in range(nsteps):
        # delayed values at t_k - 1, t_k - 1 + h/2, t_k - 1 + h
        j = k - m
        if j < 0:
            # the whole delayed step is in the constant history segment
            # (x[0] equals the history value, so the j+1 == 0 edge too)
            d0 = dmid = d1 = hist
        else:
            d0 = x[j]
            dmid = _hermite_mid(x[j], x[j + 1], f[j], f[j + 1], h)
            d1 = x[j + 1]
        g0 = rate(d0)
        gmid = rate(dmid)
        g1 = rate(d1)
        if k == 0:
            f[0] = g0
        f[k + 1] = g1
        x[k + 1] = x[k] + (h / 6.0) * (g0 + 4.0 * gmid + g1)

    times = np.arange(nsteps + 1) * h
    res = SimResult(alpha=alpha, step=h, times=times, values=x, derivs=f)

    # settle check: need meaningful oscillation in the tail
    tail = x[int(0.5 * nsteps):]
    if np.max(np.abs(tail)) < 1e-3:
        raise NonConvergence("solution decayed toward 0", res)

    # locate zeros by sign change + bisection on the interpolant
    sgn = np.sign(x)
    flips = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    zeros = []
    for k in flips:
        a, b = times[k], times[k + 1]
        fa = x[k]
        for _ in range(60):
            c = 0.5 * (a + b)
            fc = res._interp(c)
            if fa * fc <= 0:
                b = c
            else:
                a, fa = c, fc
        zeros.append((0.5 * (a + b), x[k] < 0))  # (time, is_up_crossing)
    if len(zeros) < 7:
        raise NonConvergence("too few zero crossings detected", res)

    ups = [t for t, up in zeros if up]
    if len(ups) < 4:
        raise NonConvergence("too few up-crossings detected", res)
    periods = np.diff(ups[-4:])
    if np.max(np.abs(periods - periods[-1])) > 1e-6:
        raise NonConvergence(
            f"period not settled: last periods {periods}", res)

    t_up = ups[-2]
    downs = [t for t, up in zeros if not up and t > t_up]
    ups_after = [t for t in ups if t > t_up]
    if not downs or not ups_after:
        raise NonConvergence("incomplete final cycle", res)
    t_dn = downs[0]
    t_up2 = ups_after[0]
    res.q = t_dn - t_up
    res.qbar = t_up2 - t_dn
    res.period = t_up2 - t_up
    res.t_up = t_up
    res.xmax = res._interp(t_up + 1.0)
    res.converged = True
    return res
