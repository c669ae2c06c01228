"""Command-line front end: ``aftinfo {bound,sweep,simulate,verify,empirical}``.

Exit codes: 0 success, 1 usage or configuration error, 2 domain or
numerical error, 3 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import secrets
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import (
    SWEEP_LOGLOGISTIC_GRID,
    SWEEP_WEIBULL_GRID,
    RunConfig,
    load_config,
    parse_config,
)
from .covariate import info_bound, relative_efficiency
from .density import (
    LengthBiased,
    LogLogistic,
    Mixture,
    Scheme,
    TwoPoint,
    UnitUniform,
    Weibull,
    BaselineDensity,
)
from .empirical import empirical_h_known_gain, empirical_information
from .errors import AftInfoError, ConfigError
from .fisher import (
    info_scale,
    info_scale_closed_form,
    verify_mixture_contraction,
    verify_patience_inequality,
)
from .sampler import (
    DirectTruncation,
    ShortWindowWarning,
    read_records,
    sample_direct,
    simulate,
    write_records,
)

__all__ = ["main", "cmd_bound", "cmd_sweep", "cmd_simulate", "cmd_verify", "cmd_empirical",
           "EXIT_OK", "EXIT_USAGE", "EXIT_DOMAIN", "EXIT_VERIFY"]

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3

# closed form versus quadrature, relative
AGREEMENT_RTOL = 1e-6
IDENTITY_ATOL = 1e-8


class UsageError(Exception):
    pass


class VerificationFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for domain errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _u64(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _pos_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="shared JSON run configuration")
    common.add_argument("--out", type=Path, help="output file (stdout when omitted)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--seed", type=_u64, help="RNG seed, overrides the config")
    common.add_argument("--tol", type=_pos_float, help="quadrature tolerance for informations")
    p = _Parser(prog="aftinfo", description="Information bounds for the AFT regression "
                "parameter under length biased and current duration sampling.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("bound", parents=[common], help="four-way bound table at theta")
    sub.add_parser("sweep", parents=[common], help="information versus gamma")
    sub.add_parser("simulate", parents=[common], help="simulate episode records")
    sub.add_parser("verify", parents=[common], help="run the inequality battery")
    sub.add_parser("empirical", parents=[common], help="Monte Carlo bound estimates")
    return p


# ---------------------------------------------------------------------------
# output helpers


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        out.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_bound(cfg: RunConfig) -> dict:
    """Bounds for both schemes with h unknown and known, plus I_s(f2)/I_s(f1)."""
    m = cfg.require_baseline()
    if cfg.covariates is None:
        raise ConfigError(f"{cfg.source}: field 'covariates' is required for 'bound'")
    law = cfg.covariates.tilt(cfg.theta)
    rows = []
    for scheme in Scheme:
        for known in (False, True):
            rep = info_bound(m, law, scheme, h_known=known, tol=cfg.tol)
            rows.append(rep.to_dict())
    return {"baseline": m.name, "theta": list(cfg.theta), "bounds": rows,
            "relative_efficiency": relative_efficiency(m, cfg.tol)}


def _bound_table(res):
    header = ["scheme", "h_known", "scalar_info", "error_estimate", "matrix"]
    rows = [[b["scheme"], b["h_known"], b["scalar_info"], b["error_estimate"],
             json.dumps(b["matrix"])] for b in res["bounds"]]
    rows.append(["relative_efficiency", "", res["relative_efficiency"], "", ""])
    return header, rows


def _sweep_family(cfg: RunConfig) -> str:
    fam = cfg.sweep.get("family")
    if fam is None and cfg.baseline is not None:
        fam = "loglogistic" if isinstance(cfg.baseline, LogLogistic) else (
            "weibull" if isinstance(cfg.baseline, Weibull) else None)
    fam = None if fam is None else str(fam).lower().replace("-", "").replace("_", "")
    if fam not in ("weibull", "loglogistic"):
        raise ConfigError(f"{cfg.source}: sweep.family must be 'weibull' or 'loglogistic'")
    return fam


def cmd_sweep(cfg: RunConfig) -> dict:
    """Closed-form and quadrature informations over a gamma grid."""
    fam = _sweep_family(cfg)
    default = SWEEP_WEIBULL_GRID if fam == "weibull" else SWEEP_LOGLOGISTIC_GRID
    gammas = cfg.sweep.get("gammas", default)
    if not isinstance(gammas, (list, tuple)) or not gammas:
        raise ConfigError(f"{cfg.source}: sweep.gammas must be a nonempty list")
    make = Weibull if fam == "weibull" else LogLogistic
    rows, failed = [], []
    for g in gammas:
        g = float(g)
        i_lb = info_scale_closed_form(fam, g, Scheme.LENGTH_BIASED).value
        i_cd = info_scale_closed_form(fam, g, Scheme.CURRENT_DURATION).value
        m = make(g)
        q_lb = info_scale(Scheme.LENGTH_BIASED.density(m), cfg.tol)
        q_cd = info_scale(Scheme.CURRENT_DURATION.density(m), cfg.tol)
        dev_lb = abs(q_lb.value - i_lb) / i_lb
        dev_cd = abs(q_cd.value - i_cd) / i_cd
        if not (q_lb.finite and q_cd.finite and max(dev_lb, dev_cd) < AGREEMENT_RTOL):
            failed.append(f"{fam} gamma={g:g}")
        rows.append({"gamma": g, "i_lb": i_lb, "i_cd": i_cd, "ratio": i_cd / i_lb,
                     "i_lb_quad": q_lb.value, "i_cd_quad": q_cd.value,
                     "dev_lb": dev_lb, "dev_cd": dev_cd})
    return {"family": fam, "rows": rows, "failed": failed}


SWEEP_COLUMNS = ["gamma", "i_lb", "i_cd", "ratio", "i_lb_quad", "i_cd_quad", "dev_lb", "dev_cd"]


def _resolve_seed(cfg: RunConfig) -> tuple[int, bool]:
    if cfg.seed is not None:
        return cfg.seed, False
    return secrets.randbits(63), True


def _summary(sample, seed, generated, acceptance=None) -> dict:
    n = len(sample)
    out = {
        "mode": sample.meta.get("mode"),
        "seed": seed,
        "seed_generated": generated,
        "n": n,
        "mean_x": float(sample.x.mean()) if n else None,
        "mean_d": float(sample.d.mean()) if n else None,
        "mean_z": sample.z.mean(axis=0).tolist() if n else None,
        "warnings": list(sample.meta.get("warnings", [])),
    }
    if acceptance is not None:
        out["acceptance_rate"] = acceptance
    if sample.meta.get("mode") == "point_process":
        out["N"] = sample.meta["n"]
        out["points"] = sample.meta["points"]
    return out


def _draw(cfg: RunConfig):
    seed, generated = _resolve_seed(cfg)
    scfg = cfg.sampler_config(seed)
    acceptance = None
    # guard warnings reach the user through the summary and a stderr line instead
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ShortWindowWarning)
        if isinstance(scfg.mode, DirectTruncation):
            sample, acceptance = sample_direct(scfg)
        else:
            sample = simulate(scfg)
    return sample, _summary(sample, seed, generated, acceptance)


def cmd_simulate(cfg: RunConfig, out: Path, fmt: str) -> dict:
    """Write the records to ``out`` and a summary to ``<out>.summary.json``."""
    sample, summary = _draw(cfg)
    try:
        write_records(sample, out, "jsonl" if fmt == "json" else "csv")
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from None
    summary["records"] = str(out)
    summary["format"] = fmt
    _emit(_json_text(summary), Path(str(out) + ".summary.json"))
    return summary


def _check(kind, case, status, **values):
    return {"check": kind, "case": case, "status": status, **values}


def cmd_verify(cfg: RunConfig) -> dict:
    """Closed forms, both inequalities and the f1 to f2 mixing identity."""
    vs = cfg.verify
    tol = cfg.tol
    checks = []
    corrupt = vs.corrupt_closed_form or {}

    def _corruption(fam, g, scheme):
        if not corrupt:
            return 0.0
        same = (str(corrupt.get("family", "")).lower() == fam
                and math.isclose(float(corrupt.get("gamma", math.nan)), g)
                and Scheme.parse(corrupt.get("scheme", "lb")) is scheme)
        return float(corrupt.get("delta", 1.0)) if same else 0.0

    models = [Weibull(g) for g in vs.weibull] + [LogLogistic(g) for g in vs.loglogistic]
    for m in models:
        fam = "weibull" if isinstance(m, Weibull) else "loglogistic"
        for scheme in Scheme:
            exact = info_scale_closed_form(fam, m.gamma, scheme).value
            exact += _corruption(fam, m.gamma, scheme)
            q = info_scale(scheme.density(m), tol)
            rel = abs(q.value - exact) / abs(exact) if exact else abs(q.value)
            ok = q.finite and rel < AGREEMENT_RTOL
            checks.append(_check("closed_form", f"{m.name} {scheme.value}",
                                 "holds" if ok else "violated",
                                 closed_form=exact, quadrature=q.value, rel_error=rel))

    for m in models + list(vs.custom):
        r = verify_patience_inequality(m, tol)
        checks.append(_check("patience", m.name, r.status, i1=r.i1, i2=r.i2,
                             margin=r.margin, error=r.error))

    for base in vs.mixing_bases:
        f = BaselineDensity(base)
        for law in vs.mixing_laws:
            r = verify_mixture_contraction(f, law, tol)
            status = r.status
            if status == "holds" and r.degenerate:
                status = "equality"
            checks.append(_check("contraction", f"{base.name} x {law!r}", status,
                                 i_f=r.i_f, i_h=r.i_h, error=r.error, degenerate=r.degenerate))

    # I_s(h) along TwoPoint(1, b) is nonincreasing in b and tends to I_s(f)
    f = BaselineDensity(Weibull(1.0))
    prev = info_scale(f, tol)
    ok_mono = True
    values = []
    for b in (1.001, 1.5, 2.0, 5.0):
        cur = info_scale(Mixture(f, TwoPoint(1.0, b, 0.5)), tol)
        values.append(cur.value)
        ok_mono &= cur.value <= prev.value + prev.error_estimate + cur.error_estimate
        prev = cur
    checks.append(_check("two_point_family", "exponential, b in (1.001, 1.5, 2, 5)",
                         "holds" if ok_mono else "violated", values=values))

    # the length biased law mixed over U(0,1) is the current duration law
    x = np.geomspace(0.05, 8.0, 20)
    for m in (Weibull(1.0), Weibull(2.0)):
        h = Mixture(LengthBiased(m), UnitUniform()).pdf(x)
        f2 = Scheme.CURRENT_DURATION.density(m).pdf(x)
        dev = float(np.max(np.abs(h - f2)))
        checks.append(_check("mixing_identity", m.name,
                             "holds" if dev < IDENTITY_ATOL else "violated", max_abs_dev=dev))

    failed = [f"{c['check']}: {c['case']}" for c in checks if c["status"] == "violated"]
    return {"checks": checks, "failed": failed, "passed": not failed}


VERIFY_COLUMNS = ["check", "case", "status", "details"]


def cmd_empirical(cfg: RunConfig) -> dict:
    """Efficient-score covariance estimates compared with the analytic bounds."""
    m = cfg.require_baseline()
    blk = cfg.empirical
    if "records" in blk:
        path = Path(blk["records"])
        if not path.is_absolute() and cfg.source not in ("<defaults>", "<config>"):
            path = Path(cfg.source).parent / path
        try:
            sample = read_records(path)
        except OSError as exc:
            raise ConfigError(f"{cfg.source}: empirical.records: cannot read {path}: "
                              f"{exc.strerror}") from None
        provenance = {"records": str(blk["records"])}
    else:
        sample, provenance = _draw(cfg)
    if sample.dim != len(cfg.theta):
        raise ConfigError(f"{cfg.source}: records carry {sample.dim} covariates "
                          f"but theta has length {len(cfg.theta)}")
    law = None if cfg.covariates is None else cfg.covariates.tilt(cfg.theta)
    schemes = blk.get("schemes", [s.value for s in Scheme])
    h_known = bool(blk.get("h_known", False))
    groups = int(blk.get("groups", 100))
    reports = []
    for s in schemes:
        reports.append(empirical_information(sample, cfg.theta, m, s, law, groups=groups)
                       .to_dict())
        if h_known:
            gain = empirical_h_known_gain(sample, cfg.theta, m, s, law, groups=groups)
            d = gain.to_dict()
            d["estimates"] = "h_known_minus_h_unknown"
            reports.append(d)
    limit = blk.get("max_deviation_se")
    failed = []
    if limit is not None:
        for r in reports:
            dev = r["deviation_in_se"]
            if dev is not None and np.max(np.abs(dev)) > float(limit):
                failed.append(f"{r['scheme']} h_known={r['h_known']}")
    return {"baseline": m.name, "theta": list(cfg.theta), "sample": provenance,
            "reports": reports, "failed": failed}


# ---------------------------------------------------------------------------


def _run(args) -> int:
    cfg = load_config(args.config) if args.config else parse_config({}, "<defaults>")
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tol is not None:
        cfg.tol = args.tol
    cmd = args.command
    if cmd == "bound":
        res = cmd_bound(cfg)
        if args.format == "csv":
            _emit(_csv_text(*_bound_table(res)), args.out)
        else:
            _emit(_json_text(res), args.out)
        return EXIT_OK
    if cmd == "sweep":
        res = cmd_sweep(cfg)
        if args.format == "json":
            _emit(_json_text(res), args.out)
        else:
            _emit(_csv_text(SWEEP_COLUMNS, [[r[c] for c in SWEEP_COLUMNS] for r in res["rows"]]),
                  args.out)
        if res["failed"]:
            raise VerificationFailed("closed form and quadrature disagree: "
                                     + "; ".join(res["failed"]))
        return EXIT_OK
    if cmd == "simulate":
        if args.out is None:
            raise UsageError("simulate needs --out for the record file")
        res = cmd_simulate(cfg, args.out, args.format or "csv")
        for w in res["warnings"]:
            print(f"warning: {w}", file=sys.stderr)
        return EXIT_OK
    if cmd == "verify":
        res = cmd_verify(cfg)
        if args.format == "csv":
            rows = [[c["check"], c["case"], c["status"],
                     json.dumps({k: v for k, v in c.items()
                                 if k not in ("check", "case", "status")}, sort_keys=True)]
                    for c in res["checks"]]
            _emit(_csv_text(VERIFY_COLUMNS, rows), args.out)
        else:
            _emit(_json_text(res), args.out)
        if res["failed"]:
            raise VerificationFailed("failed checks: " + "; ".join(res["failed"]))
        return EXIT_OK
    if cmd == "empirical":
        res = cmd_empirical(cfg)
        if args.format == "csv":
            header = ["scheme", "h_known", "i", "j", "estimate", "se", "target", "deviation_se"]
            rows = []
            for r in res["reports"]:
                est = np.asarray(r["matrix_estimate"])
                for (i, j), v in np.ndenumerate(est):
                    tgt = "" if r["target"] is None else r["target"][i][j]
                    dev = "" if r["deviation_in_se"] is None else r["deviation_in_se"][i][j]
                    rows.append([r["scheme"], r["h_known"], i, j, float(v),
                                 r["standard_errors"][i][j], tgt, dev])
            _emit(_csv_text(header, rows), args.out)
        else:
            _emit(_json_text(res), args.out)
        for r in res["reports"]:
            if r["deviation_in_se"] is not None:
                dev = np.asarray(r["deviation_in_se"], dtype=float)
                print(f"{r['scheme']} h_known={r['h_known']}: deviation "
                      f"{np.array2string(dev, precision=2)} SE", file=sys.stderr)
        if res["failed"]:
            raise VerificationFailed("estimates beyond max_deviation_se: "
                                     + "; ".join(res["failed"]))
        return EXIT_OK
    raise UsageError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _run(args)
    except (UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except AftInfoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
