"""Batch front door: validate, spectra, transfer sweeps, fits, studies.

Config files use the line-oriented key=value grammar of the potential
module plus ``window.*`` and ``study.*`` keys::

    gamma = 1.0
    b = 1.0
    w.kind = constant
    w.coeffs = 1.0
    window.e_min = 2.0
    window.e_max = 3.0
    study.h_list = 1e-1, 3e-2, 1e-2     # sorted descending, all >= 1e-4
    study.energy = 2.5                  # transfer/fit/check; default midpoint
    study.n_terms = 4

Every CSV starts with a `# config-hash:` provenance line (sha256 of the
config text) followed by the header row; floats carry 17 significant
digits so identical configs give byte-identical files.  Exit codes:
0 success, 1 validation failure, 2 tolerance or run failure, 64 bad
config.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import interior, matching, oracle, potential, spectral, wkb_exterior
from .errors import (
    ConfigError,
    NonPositiveGap,
    NonPositiveW,
    NotIncreasing,
    SwkbError,
)
from .potential import EnergyWindow, Potential

_COMMANDS = ("validate", "eigenvalues", "transfer", "fit", "study", "check")
_VALIDATION_ERRORS = (ConfigError, NonPositiveW, NotIncreasing, NonPositiveGap)


@dataclass(frozen=True)
class Job:
    """Parsed config plus derived objects shared by all commands."""

    p: Potential
    window: EnergyWindow
    h_list: tuple[float, ...]
    methods: tuple[str, ...]
    n_terms: int
    delta_int: float | None
    eps: float | None
    energy: float
    max_m: int
    max_n: int
    quad_tol: float
    imag_tol: float
    det_tol: float
    defect_tol: float
    out: Path
    config_hash: str


def _get_float(cfg: dict, key: str, default: float | None) -> float | None:
    if key not in cfg:
        return default
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"bad float for {key}: {cfg[key]!r}") from exc


def _get_int(cfg: dict, key: str, default: int) -> int:
    if key not in cfg:
        return default
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"bad int for {key}: {cfg[key]!r}") from exc


def build_job(text: str, out_override: str | None = None) -> Job:
    cfg = potential.parse_config(text)
    p = potential.potential_from_config(cfg)
    e_min = _get_float(cfg, "window.e_min", None)
    e_max = _get_float(cfg, "window.e_max", None)
    if e_min is None or e_max is None:
        raise ConfigError("window.e_min and window.e_max are required")
    window = EnergyWindow(e_min, e_max)

    if "study.h_list" in cfg:
        h_list = potential._parse_floats(cfg["study.h_list"])
    else:
        h_list = (1e-1, 3e-2, 1e-2)
    if not h_list:
        raise ConfigError("study.h_list is empty")
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ConfigError("study.h_list must be sorted descending")
    if min(h_list) < 1e-4:
        raise ConfigError("all h must be >= 1e-4")

    methods = tuple(
        tok.strip() for tok in cfg.get("study.methods",
                                       "bs_leading,matched").split(",")
        if tok.strip())
    for m in methods:
        if m not in ("bs_leading", "matched"):
            raise ConfigError(f"unknown method {m!r}")

    energy = _get_float(cfg, "study.energy", 0.5 * (e_min + e_max))
    out = Path(out_override if out_override is not None
               else cfg.get("study.out", "."))
    return Job(
        p=p,
        window=window,
        h_list=tuple(h_list),
        methods=methods,
        n_terms=_get_int(cfg, "study.n_terms", 4),
        delta_int=_get_float(cfg, "study.delta_int", None),
        eps=_get_float(cfg, "study.eps", None),
        energy=float(energy),
        max_m=_get_int(cfg, "study.max_m", 2),
        max_n=_get_int(cfg, "study.max_n", 2),
        quad_tol=_get_float(cfg, "study.quad_tol", 1e-12),
        imag_tol=_get_float(cfg, "study.imag_tol", 0.1),
        det_tol=_get_float(cfg, "study.det_tol", 1e-6),
        defect_tol=_get_float(cfg, "study.defect_tol", 1e-6),
        out=out,
        config_hash=hashlib.sha256(text.encode()).hexdigest(),
    )


def _match_config(job: Job) -> matching.MatchConfig:
    return matching.MatchConfig(n_terms=job.n_terms, delta_int=job.delta_int,
                                eps=job.eps, quad_tol=job.quad_tol,
                                imag_tol=job.imag_tol)


def _parallel_map(fn, items, n_threads: int) -> list:
    if n_threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_threads) as ex:
        return list(ex.map(fn, items))


def _write_csv(job: Job, name: str, body: str) -> Path:
    job.out.mkdir(parents=True, exist_ok=True)
    path = job.out / name
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# config-hash: {job.config_hash}\n")
        fh.write(body)
    return path


def _eigenvalue_rows(results) -> str:
    lines = ["h,method,k,E"]
    for res in results:
        for k, e in res.eigenvalues:
            lines.append(f"{res.h:.17g},{res.method},{k},{e:.17g}")
    return "\n".join(lines) + "\n"


def _cmd_validate(job: Job) -> int:
    win = potential.validate(job.p, job.window)
    print(f"delta={win.delta!r}")
    print("admissible")
    return 0


def _cmd_eigenvalues(job: Job, n_threads: int) -> int:
    win = potential.validate(job.p, job.window)
    mc = _match_config(job)

    def per_h(h: float):
        out = []
        if "bs_leading" in job.methods:
            out.append(spectral.bs_leading(job.p, win, h))
        if "matched" in job.methods:
            out.append(spectral.eigenvalues_matched(job.p, win, h, mc))
        return out

    groups = _parallel_map(per_h, list(job.h_list), n_threads)
    _write_csv(job, "eigenvalues.csv",
               _eigenvalue_rows([r for grp in groups for r in grp]))
    refs = _parallel_map(lambda h: oracle.eigenvalues(job.p, win, h),
                         list(job.h_list), n_threads)
    _write_csv(job, "oracle.csv", _eigenvalue_rows(refs))
    print(f"wrote {job.out / 'eigenvalues.csv'} and {job.out / 'oracle.csv'}")
    return 0


def _cmd_transfer(job: Job, n_threads: int) -> int:
    potential.validate(job.p, job.window)
    mc = _match_config(job)
    tms = _parallel_map(
        lambda h: matching.connect(job.p, job.energy, h, mc),
        list(job.h_list), n_threads)
    _write_csv(job, "transfer.csv", matching.dump_transfer(tms))
    print(f"wrote {job.out / 'transfer.csv'}")
    return 0


def _cmd_fit(job: Job) -> int:
    potential.validate(job.p, job.window)
    fit = matching.fit_corrections(job.p, job.energy, job.h_list,
                                   job.max_m, job.max_n, _match_config(job))
    _write_csv(job, "fit.csv", matching.dump_fit(fit))
    worst = float(np.max(fit.residual))
    print(f"wrote {job.out / 'fit.csv'} (worst relative residual "
          f"{worst:.3e})")
    return 0


def _cmd_study(job: Job) -> int:
    win = potential.validate(job.p, job.window)
    rep = spectral.convergence_study(job.p, win, job.h_list,
                                     methods=job.methods,
                                     cfg=_match_config(job))
    _write_csv(job, "study.csv", spectral.dump_study(rep))
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for method, slope in rep.slopes.items():
        print(f"{method}: slope={slope}")
    print(f"wrote {job.out / 'study.csv'}")
    return 0


def _cmd_check(job: Job, n_threads: int) -> int:
    """Invariant sweep: det, realness, Wronskians, residuals, grid error."""
    potential.validate(job.p, job.window)
    mc = _match_config(job)

    def per_h(h: float):
        tm = matching.connect(job.p, job.energy, h, mc)
        icfg = interior.make_config(job.p, job.energy, h,
                                    delta_int=job.delta_int, eps=job.eps)
        vp, vm = interior.solve_basis(job.p, icfg)
        est = max(vp.error_estimate, vm.error_estimate)
        qm = wkb_exterior.build_quasimode(job.p, job.energy, job.n_terms,
                                          icfg.x_h, quad_tol=job.quad_tol)
        xs = np.linspace(icfg.x_h, job.p.b, 7)
        wd = wkb_exterior.wronskian_defect(qm, h, xs)
        res = max(wkb_exterior.residual(qm, h, float(x)) for x in xs)
        return tm, est, wd, res

    rows = _parallel_map(per_h, list(job.h_list), n_threads)
    lines = ["h,det_err,imag_defect,wronskian_defect,residual_sup,"
             "interior_estimate"]
    failed = False
    for h, (tm, est, wd, res) in zip(job.h_list, rows):
        det_err = abs(tm.det - 1.0)
        ok = det_err <= job.det_tol and tm.imag_defect <= job.defect_tol
        failed = failed or not ok
        print(f"h={h:.6g} det_err={det_err:.3e} "
              f"imag_defect={tm.imag_defect:.3e} wronskian={wd:.3e} "
              f"residual={res:.3e} interior_est={est:.3e} "
              f"{'PASS' if ok else 'FAIL'}")
        lines.append(f"{h:.17g},{det_err:.17g},{tm.imag_defect:.17g},"
                     f"{wd:.17g},{res:.17g},{est:.17g}")
    _write_csv(job, "check.csv", "\n".join(lines) + "\n")
    return 2 if failed else 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="swkb",
        description="Transfer matrices and eigenvalues for -h^2 u'' + "
                    "x^gamma W(x) u = E u on [0, b].")
    ap.add_argument("command", choices=_COMMANDS)
    ap.add_argument("--config", required=True, help="key=value config file")
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads (default: SWKB_THREADS or 1)")
    args = ap.parse_args(argv)

    n_threads = args.threads
    if n_threads is None:
        try:
            n_threads = int(os.environ.get("SWKB_THREADS", "1"))
        except ValueError:
            n_threads = 1
    n_threads = max(1, n_threads)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 64
    try:
        job = build_job(text, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 64

    try:
        if args.command == "validate":
            return _cmd_validate(job)
        if args.command == "eigenvalues":
            return _cmd_eigenvalues(job, n_threads)
        if args.command == "transfer":
            return _cmd_transfer(job, n_threads)
        if args.command == "fit":
            return _cmd_fit(job)
        if args.command == "study":
            return _cmd_study(job)
        return _cmd_check(job, n_threads)
    except _VALIDATION_ERRORS as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return 1
    except SwkbError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
