"""prism-engine command line.

Exit codes: 0 ok, 1 check failures, 2 configuration/usage error,
3 results emitted but some cell is not certified stable.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .config import ConfigError, JobConfig, format_poly, parse_eisenstein, parse_poly, read_config

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_UNSTABLE = 0, 1, 2, 3

CSV_FIELDS = ["p", "M", "e", "eisenstein", "relations", "i", "j_used", "h0", "h1", "euler", "stable_j", "stable_precision", "ledger", "runtime_ms"]
SWEEP_FIELDS = ["cell", "status", "p", "M", "e", "eisenstein", "relations", "i", "j_used", "h0", "h1", "euler", "stable_j", "stable_precision", "error"]


def atomic_write(path: str, data: str):
    """Write to a temp file in the same directory, then rename over path."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None):
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# --- arguments -------------------------------------------------------------

def _common(sp):
    sp.add_argument("--config", help="INI file with a [job] section; flags override it")
    sp.add_argument("--p", type=int)
    sp.add_argument("--M", type=int)
    sp.add_argument("--eisenstein", help='coefficients constant first ("-3,1") or "z - 3" (degree <= 2)')
    sp.add_argument("--relation", action="append", help='relation polynomial, e.g. "z^2"; repeatable')
    sp.add_argument("--i", type=int)
    sp.add_argument("--i-min", type=int)
    sp.add_argument("--i-max", type=int)
    sp.add_argument("--prec-z", type=int)
    sp.add_argument("--delta-depth", type=int)
    sp.add_argument("--degree", type=int)
    sp.add_argument("--jmax", type=int)
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--format", choices=["json", "csv"])
    sp.add_argument("--out", help="output path (written atomically)")


def build_parser():
    ap = argparse.ArgumentParser(prog="prism-engine", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"prism-engine {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, hlp in [
        ("syntomic", "syntomic cohomology H0, H1 of one presentation over a range of weights"),
        ("envelope", "truncated envelope with its torsion/stability certificate"),
        ("nygaard", "Nygaard filtration lengths and invariants"),
        ("sweep", "grid over relations x weights; CSV table plus JSON manifest"),
    ]:
        _common(sub.add_parser(name, help=hlp))
    ck = sub.add_parser("check", help="randomized property suites")
    ck.add_argument("suite", help="witt, delta, prism, envelope, nygaard, filtration or all")
    ck.add_argument("--trials", type=int)
    ck.add_argument("--seed", type=int, default=0)
    return ap


def config_from_args(args) -> JobConfig:
    base = read_config(args.config) if getattr(args, "config", None) else JobConfig()
    d = base.to_dict()
    p = args.p if args.p is not None else base.p
    d["p"] = p
    if args.eisenstein is not None:
        d["eisenstein"] = parse_eisenstein(args.eisenstein, p)
    elif args.p is not None and args.config is None:
        d["eisenstein"] = [-p, 1]
    if args.relation is not None:
        d["relations"] = [parse_poly(r, "relation") for r in args.relation]
    for k in ("M", "prec_z", "delta_depth", "degree", "jmax", "jobs", "seed", "format"):
        v = getattr(args, k, None)
        if v is not None:
            d[k] = v
    if args.i is not None:
        d["i_min"] = d["i_max"] = args.i
    if args.i_min is not None:
        d["i_min"] = args.i_min
        if args.i_max is None and args.i is None:
            d["i_max"] = max(d["i_max"], args.i_min)
    if args.i_max is not None:
        d["i_max"] = args.i_max
    return JobConfig(**d).validate()


def _presentation(cfg: JobConfig, relations=None):
    from .delta_prism import make_breuil_kisin
    from .envelope import PresentationError, make_presentation
    from .series import OrientationError

    try:
        prism = make_breuil_kisin(cfg.p, max(cfg.M, 2) + 1, cfg.prec_z, cfg.eisenstein)
    except OrientationError as exc:
        raise ConfigError("eisenstein", "distinguished", str(exc)) from None
    rels = cfg.relations if relations is None else relations
    try:
        return make_presentation(prism, rels)
    except PresentationError as exc:
        raise ConfigError("relations", "presentation", str(exc)) from None


def _bounds(cfg: JobConfig):
    from .envelope import EnvelopeBounds

    return EnvelopeBounds(cfg.M, cfg.prec_z, cfg.delta_depth, cfg.degree, cfg.jmax)


def _lst(x):
    return json.dumps(x, separators=(",", ":"))


def _flat(d: dict, names) -> dict:
    row = {}
    for k in names:
        if k in ("stable_j", "stable_precision"):
            v = d.get("stable", {}).get(k.split("_", 1)[1])
        else:
            v = d.get(k, "")
        if isinstance(v, (list, dict, bool)):
            v = _lst(v)
        row[k] = "" if v is None else v
    return row


def _csv(rows, names) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(_flat(r, names))
    return buf.getvalue()


# --- commands --------------------------------------------------------------

def cmd_syntomic(cfg: JobConfig, out=None) -> int:
    from .syntomic import TruncationError, syntomic

    pres = _presentation(cfg)
    docs = []
    for i in cfg.i_values:
        try:
            res = syntomic(pres, i, cfg.M, _bounds(cfg), jmax=cfg.jmax)
        except TruncationError as exc:
            raise ConfigError("jmax", "truncation", str(exc)) from None
        docs.append(res)
    rows = [r.to_json() for r in docs]
    if cfg.format == "csv":
        _emit(_csv(rows, CSV_FIELDS), out)
    else:
        _emit(_dumps(rows[0] if len(rows) == 1 else rows), out)
    return EXIT_OK if all(r.certified for r in docs) else EXIT_UNSTABLE


def cmd_envelope(cfg: JobConfig, out=None) -> int:
    from .envelope import build_envelope, certify_envelope, hodge_tate_filtration

    pres = _presentation(cfg)
    env = build_envelope(pres, _bounds(cfg))
    cert = certify_envelope(env)
    doc = {
        "p": cfg.p,
        "M": cfg.M,
        "eisenstein": pres.E,
        "relations": [list(r) for r in pres.relations],
        "trivial": env.trivial,
        "bounds": {"Z": cfg.prec_z, "K": cfg.delta_depth, "D": cfg.degree, "J": cfg.jmax},
        "certificate": {
            "certified": cert.certified,
            "stable": cert.stable,
            "d_deficit": cert.d_deficit,
            "p_deficit": cert.p_deficit,
            "p_deficit_deeper": cert.p_deficit_deeper,
            "closure_defects": [list(x) for x in cert.closure_defects],
        },
    }
    if not env.trivial:
        win = env.window()
        doc["window_length"] = win.length()
        doc["hodge_tate_lengths"] = [win.length() - F.length() for F in hodge_tate_filtration(env, min(cfg.jmax, env.J))]
        doc["basis"] = [{"n": n, "generator": prov} for n, prov in env.basis()]
    doc["ledger"] = env.ledger
    _emit(_dumps(doc), out)
    return EXIT_OK if cert.certified else EXIT_UNSTABLE


def cmd_nygaard(cfg: JobConfig, out=None) -> int:
    import numpy as np

    from .nygaard import divided_frobenius, nygaard_filtration
    from .syntomic import build_models, cell_config

    pres = _presentation(cfg)
    if pres.c == 0:
        doc = {"relations": [], "trivial": True, "lengths": list(range(cfg.jmax + 1)), "invariants": True}
        _emit(_dumps(doc), out)
        return EXIT_OK
    J = cfg.jmax
    env, tw, cc = build_models(pres, cfg.M, cell_config(pres, 0, cfg.M, J, cfg.prec_z, dWw=max(0, cfg.degree - J)))
    nyg = nygaard_filtration(tw, env, J)
    lens = nyg.lengths()
    inv = nyg.check_invariants()
    strict = all(a < b for a, b in zip(lens, lens[1:]))
    lands = {}
    for i in range(min(2, J) + 1):
        ok = True
        for g in nyg.piece(i).generators:
            try:
                divided_frobenius(nyg, np.array([int(x) for x in g], dtype=object), i)
            except Exception:
                ok = False
                break
        lands[str(i)] = ok
    doc = {
        "p": cfg.p,
        "eisenstein": pres.E,
        "relations": [list(r) for r in pres.relations],
        "jmax": J,
        "lengths": lens,
        "invariants": inv,
        "strictly_decreasing": strict,
        "divided_frobenius_lands": lands,
        "ledger": {"J": env.J, "N": env.N, "ambient_weight": env.W, "twist_window": tw.window, "dim": env.dim},
    }
    _emit(_dumps(doc), out)
    return EXIT_OK if inv and strict and all(lands.values()) else EXIT_UNSTABLE


def _sweep_cell(job):
    cfg_text, rel, i = job
    from .syntomic import syntomic

    cfg = JobConfig.parse(cfg_text)
    try:
        pres = _presentation(cfg, [rel] if rel is not None else [])
        res = syntomic(pres, i, cfg.M, _bounds(cfg), jmax=cfg.jmax)
        d = res.to_json()
        d["status"] = "ok" if res.certified else "unstable"
        d.pop("runtime_ms")
        d.pop("ledger")
        return d
    except Exception as exc:  # recorded per cell
        return {"status": "error", "error": f"{type(exc).__name__}: {exc}", "i": i, "relations": [rel] if rel is not None else []}


def cmd_sweep(cfg: JobConfig, out=None) -> int:
    rels = cfg.relations or [None]
    text = cfg.serialize()
    jobs = [(text, r, i) for r in rels for i in cfg.i_values]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            cells = list(ex.map(_sweep_cell, jobs))
    else:
        cells = [_sweep_cell(j) for j in jobs]
    for k, c in enumerate(cells):
        c["cell"] = k
    table = _csv(cells, SWEEP_FIELDS)
    manifest = {
        "tool": "prism-engine",
        "version": __version__,
        "config": text,
        "config_sha256": cfg.digest(),
        "shape": [len(rels), len(cfg.i_values)],
        "cells": [
            {"cell": c["cell"], "relation": format_poly(r) if r else "", "i": i, "status": c["status"], **({"error": c["error"]} if "error" in c else {})}
            for c, (_, r, i) in zip(cells, jobs)
        ],
    }
    if out:
        stem = out[:-4] if out.endswith(".csv") else out
        atomic_write(out if out.endswith(".csv") else out + ".csv", table)
        atomic_write(stem + ".manifest.json", _dumps(manifest))
    else:
        sys.stdout.write(table)
        sys.stdout.write(_dumps(manifest))
    st = {c["status"] for c in cells}
    if "error" in st:
        return EXIT_FAIL
    return EXIT_UNSTABLE if "unstable" in st else EXIT_OK


def cmd_check(suite: str, trials=None, seed=0) -> int:
    from .checks import SUITES

    names = list(SUITES) if suite == "all" else [suite]
    bad = 0
    for name in names:
        fn = SUITES[name]
        t = fn(seed=seed) if trials is None else fn(trials=trials, seed=seed)
        status = "PASS" if t.ok else "FAIL"
        print(f"{name}: {t.passed} passed, {t.failed} failed  {status}")
        for f in t.failures:
            print(f"  failure: {f}")
        bad += t.failed
    return EXIT_OK if bad == 0 else EXIT_FAIL


def main(argv=None) -> int:
    from .checks import SUITES

    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "check":
        if args.suite not in SUITES and args.suite != "all":
            sys.stderr.write(f"prism-engine check: unknown suite {args.suite!r}; choose from {', '.join(SUITES)}, all\n")
            return EXIT_CONFIG
        if args.trials is not None and args.trials < 1:
            sys.stderr.write("prism-engine check: --trials must be >= 1\n")
            return EXIT_CONFIG
        return cmd_check(args.suite, args.trials, args.seed)
    try:
        cfg = config_from_args(args)
        fn = {"syntomic": cmd_syntomic, "envelope": cmd_envelope, "nygaard": cmd_nygaard, "sweep": cmd_sweep}[args.command]
        return fn(cfg, args.out)
    except ConfigError as exc:
        sys.stderr.write(json.dumps(exc.diagnostic(), sort_keys=True) + "\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "io", "message": str(exc)}) + "\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
