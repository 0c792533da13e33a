"""Batch front end.

Subcommands:
  prove           run the sweep, write certificates, exit by verdict
  seed-check      rerun the short-parameter emptiness sweep of the long seed
  floquet-report  turn certificates into the multiplier-bound CSV + figure
  simulate        non-rigorous trajectory for external inspection

Exit codes are a stable contract: 0 success/true, 1 false verdict,
2 non-verdict (resource limit), 64 bad configuration or arguments,
66 missing input.  Certificates are line-delimited JSON records whose
content is bit-identical across reruns with the same configuration and
build; wall-clock timings go to a sidecar file because they are not
reproducible.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import fields as dc_fields
from pathlib import Path

from .apriori import AprioriParams
from .interval import Interval
from .prover import (
    ConfigError,
    NonConvergence,
    ProofConfig,
    simulate_sops,
    sweep,
    sweep_verdict,
)
from .seed import seed_long

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_NO_VERDICT = 2
EXIT_USAGE = 64
EXIT_NOINPUT = 66

_INT_FIELDS = {"n_time", "i0", "j0", "n_period", "n_prune", "n_floquet",
               "m_floquet", "max_pushes"}


def parse_config_text(text: str) -> dict:
    """Parse the flat key = value config format; unknown keys are errors."""
    known = {f.name for f in dc_fields(ProofConfig)}
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _INT_FIELDS:
                out[key] = int(val)
            elif key == "wall_budget_seconds":
                out[key] = None if val.lower() == "none" else float(val)
            else:
                out[key] = float(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}")
    return out


def load_config(path: str | None, overrides: dict) -> ProofConfig:
    data: dict = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {path}")
        data = parse_config_text(p.read_text())
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ProofConfig(**data)
    except TypeError as exc:
        raise ConfigError(f"incomplete config: {exc}")


def _ensure_outdir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_prove(args) -> int:
    cfg = load_config(args.config, {
        "alpha_lo": args.alpha_lo, "alpha_hi": args.alpha_hi})
    outdir = _ensure_outdir(args.out)
    printed = []

    def progress(cert):
        status = {True: "TRUE", False: "FALSE", None: "NO-VERDICT"}[cert.verdict]
        print(f"[{cert.alpha_lo:.6g}, {cert.alpha_hi:.6g}] "
              f"{status} regions={cert.region_count} "
              f"wall={cert.wall_seconds:.1f}s", flush=True)
        printed.append(cert)

    certs = sweep(cfg, jobs=args.jobs, progress=progress)
    cert_path = outdir / "certificates.jsonl"
    with cert_path.open("w") as fh:
        for cert in certs:
            fh.write(cert.to_json_line() + "\n")
    with (outdir / "timings.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha_lo", "alpha_hi", "wall_seconds"])
        for cert in certs:
            writer.writerow([repr(cert.alpha_lo), repr(cert.alpha_hi),
                             f"{cert.wall_seconds:.3f}"])
    verdict = sweep_verdict(certs)
    print(f"wrote {cert_path} ({len(certs)} certificates); "
          f"global verdict: {verdict}")
    if verdict is None:
        return EXIT_NO_VERDICT
    return EXIT_OK if verdict else EXIT_FALSE


def cmd_seed_check(args) -> int:
    lo = args.alpha_lo if args.alpha_lo is not None else 1.57
    hi = args.alpha_hi if args.alpha_hi is not None else 2.07
    if not (math.isfinite(lo) and math.isfinite(hi) and 1.0 < lo < hi):
        print(f"bad range [{lo}, {hi}]", file=sys.stderr)
        return EXIT_USAGE
    n_time, n_period = 128, 10
    params = AprioriParams(2, 20)
    if args.config is not None:
        data = parse_config_text(Path(args.config).read_text())
        n_time = data.get("n_time", n_time)
        n_period = data.get("n_period", n_period)
        params = AprioriParams(data.get("i0", 2), data.get("j0", 20))
    all_empty = True
    a = lo
    while a < hi - 1e-12:
        b = min(a + 0.1, hi)
        region = seed_long(Interval(a, b), params, n_time, n_period)
        empty = region is None
        all_empty &= empty
        label = "EMPTY" if empty else "NON-EMPTY"
        extra = ""
        if region is not None:
            extra = (f"  qbar=[{region.i_qbar.lo:.4g}, {region.i_qbar.hi:.4g}]")
        print(f"[{a:.6g}, {b:.6g}] {label}{extra}", flush=True)
        a = b
    print("all long seeds empty" if all_empty else "long seed survived")
    return EXIT_OK if all_empty else EXIT_FALSE


def _render_report_figure(rows: list[dict], fig_path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    styles = {
        "BoundedStable": ("tab:blue", "explicit bound"),
        "StableByContradiction": ("tab:orange", "by contradiction"),
        "Inconclusive": ("tab:red", "inconclusive"),
    }
    seen = set()
    for row in rows:
        mid = 0.5 * (row["alpha_lo"] + row["alpha_hi"])
        lam = row["lambda_max_worst"]
        kind = row["outcome_kind"]
        color, label = styles.get(kind, ("gray", kind))
        if lam is None:
            lam = 1.0
        ax.plot([row["alpha_lo"], row["alpha_hi"]], [lam, lam],
                color=color, lw=2,
                label=label if kind not in seen else None)
        seen.add(kind)
        ax.plot([mid], [lam], marker=".", ms=4, color=color)
    ax.axhline(1.0, color="k", lw=0.8, ls="--")
    ax.set_xlabel("alpha")
    ax.set_ylabel("upper bound on Floquet multiplier modulus")
    ax.set_title("Worst multiplier bound per certified subinterval")
    if seen:
        ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)


def cmd_floquet_report(args) -> int:
    outdir = Path(args.out)
    cert_path = outdir / "certificates.jsonl"
    if not cert_path.is_file():
        print(f"no certificates at {cert_path}", file=sys.stderr)
        return EXIT_NOINPUT
    import json
    rows = []
    with cert_path.open() as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            hist = rec.get("outcome_histogram", {})
            if rec.get("verdict") is True:
                kind = ("BoundedStable"
                        if set(hist) <= {"BoundedStable"}
                        else "StableByContradiction")
            else:
                kind = "Inconclusive"
            rows.append({
                "alpha_lo": rec["alpha_lo"],
                "alpha_hi": rec["alpha_hi"],
                "lambda_max_worst": rec.get("lambda_max_worst"),
                "outcome_kind": kind,
            })
    csv_path = outdir / "floquet_report.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha_lo", "alpha_hi", "lambda_max_worst",
                         "outcome_kind"])
        for row in rows:
            lam = row["lambda_max_worst"]
            writer.writerow([repr(row["alpha_lo"]), repr(row["alpha_hi"]),
                             "" if lam is None else repr(lam),
                             row["outcome_kind"]])
    fig_path = outdir / "floquet_report.png"
    _render_report_figure(rows, fig_path)
    print(f"wrote {csv_path} and {fig_path} ({len(rows)} rows)")
    return EXIT_OK


def _render_trajectory_figure(res, fig_path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    ax.plot(res.times, res.values, lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("x(t)")
    title = f"alpha = {res.alpha}"
    if res.converged:
        title += (f"   q = {res.q:.4f}, qbar = {res.qbar:.4f}, "
                  f"max = {res.xmax:.4f}")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)


def cmd_simulate(args) -> int:
    alpha = args.alpha
    if alpha is None or not math.isfinite(alpha) or alpha <= 0:
        print(f"bad alpha: {alpha}", file=sys.stderr)
        return EXIT_USAGE
    outdir = _ensure_outdir(args.out)
    flagged = None
    try:
        res = simulate_sops(alpha, horizon=args.horizon, step=args.step)
    except NonConvergence as exc:
        if exc.result is None:
            print(f"simulation failed: {exc}", file=sys.stderr)
            return EXIT_USAGE
        res = exc.result
        flagged = str(exc)
    csv_path = outdir / "trajectory.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "dx"])
        for t, v, d in zip(res.times, res.values, res.derivs):
            writer.writerow([f"{t:.9g}", repr(float(v)), repr(float(d))])
    fig_path = outdir / "trajectory.png"
    _render_trajectory_figure(res, fig_path)
    if flagged:
        print(f"NonConvergence: {flagged}")
    else:
        print(f"settled cycle: q={res.q:.6f} qbar={res.qbar:.6f} "
              f"max={res.xmax:.6f} period={res.period:.6f}")
    print(f"wrote {csv_path} and {fig_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wrightcert",
        description="certify uniqueness of slowly oscillating periodic "
                    "solutions of Wright's equation over parameter intervals")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--jobs", type=int, default=1,
                       help="subinterval parallelism")
        p.add_argument("--alpha-lo", dest="alpha_lo", type=float, default=None)
        p.add_argument("--alpha-hi", dest="alpha_hi", type=float, default=None)

    p = sub.add_parser("prove", help="run the proving sweep")
    common(p)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("seed-check",
                       help="verify the long seed is empty on [1.57, 2.07]")
    common(p)
    p.set_defaults(func=cmd_seed_check)

    p = sub.add_parser("floquet-report",
                       help="emit multiplier-bound CSV and figure")
    common(p)
    p.set_defaults(func=cmd_floquet_report)

    p = sub.add_parser("simulate", help="non-rigorous trajectory dump")
    common(p)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--horizon", type=float, default=400.0)
    p.add_argument("--step", type=float, default=1.0 / 1024.0)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
