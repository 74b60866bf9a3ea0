"""Command-line front end: run systems from JSON configs, write artifacts.

Subcommands (all take ``--config PATH`` and write into ``--out DIR``):

========  ==========================================  ==================
eval      function values on a uniform x-grid         eval.csv
dim       theoretical dimension report                dim.json
boxdim    empirical box-counting fit                  boxdim.json + .csv
nbern     n-block approximation convergence table     nbern.csv
tent      tent-system bundle (entropy, Markov, dim)   tent.json
sample    graph point cloud                           sample.csv
========  ==========================================  ==================

Exit codes: 0 ok; 2 invalid config or usage; 3 a named theorem
precondition fails for the given system; 4 the box-counting diagnostics
reject the run.  Every command is deterministic given its config -- the
CSV format is pinned (comma separator, ``.`` decimal point, one header
row, LF line endings, shortest round-trip float repr) and JSON keys are
sorted, so re-runs are byte-identical and artifacts can be golden-file
tested.  JSON reports embed the sha256 of the config file they came
from plus the tolerance values in effect.

Set ``FRACDIM_LOG=info`` (or ``debug``) to see progress on stderr;
nothing is printed on success otherwise.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import boxcount, dimension, graphs, measures, symbolic, tentmap
from .config import SystemConfig, load_config
from .errors import DiagnosticsFailed, InvalidConfig, PreconditionFailed

log = logging.getLogger("fracdim")


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------


def _jsonable(v):
    """Recursively convert report values to JSON-encodable types.

    Fractions (and any other exact scalar, e.g. quadratic integers) keep
    their exact textual form rather than being rounded through float.
    """
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        return float(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if dataclasses.is_dataclass(v) and not isinstance(v, type):
        return _jsonable(dataclasses.asdict(v))
    return str(v)


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    log.info("wrote %s", path)


def _cell(v) -> str:
    # np.float64 is a float subclass whose repr is not the bare literal,
    # so normalize through the builtin before taking repr.
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        count = 0
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")
            count += 1
    log.info("wrote %s (%d rows)", path, count)


def _scaffold(cfg: SystemConfig, tolerances: dict) -> dict:
    return {
        "config_sha256": cfg.sha256,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "tolerances": tolerances,
    }


# ---------------------------------------------------------------------------
# shared sampling
# ---------------------------------------------------------------------------


def _sample_cloud(cfg: SystemConfig):
    if cfg.kind == "series":
        return graphs.series_samples(cfg.system, cfg.depth, cap=cfg.cap)
    if cfg.kind in ("fif", "markov-fif"):
        return graphs.sample_graph(cfg.system, cfg.depth, cap=cfg.cap)
    return tentmap.sample_graph(cfg.system, cfg.depth, cap=cfg.cap)


def _default_anchor(sft) -> tuple:
    """Deterministic anchor for the pad construction: the first admissible
    loop (i, i), else the first admissible pair in row-major order."""
    for i in range(1, sft.m + 1):
        if sft.allows(i, i):
            return (i, i)
    for i in range(1, sft.m + 1):
        for j in range(1, sft.m + 1):
            if sft.allows(i, j):
                return (i, j)
    raise PreconditionFailed("adjacency matrix has no admissible transition")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_eval(cfg: SystemConfig, out: Path, grid: int) -> int:
    if grid < 2:
        raise InvalidConfig("--grid must be at least 2")
    xs = np.linspace(0.0, 1.0, grid)
    if cfg.kind == "series":
        ys = [graphs.eval_series(cfg.system, float(x), eps=cfg.eval_eps) for x in xs]
    elif cfg.kind in ("fif", "markov-fif"):
        ys = [graphs.graph_eval(cfg.system, float(x)) for x in xs]
    else:
        ys = tentmap.takagi_beta_samples(cfg.system, xs, eps=cfg.eval_eps)
    _write_csv(out / "eval.csv", "x,y", zip((float(x) for x in xs), (float(y) for y in ys)))
    return 0


def _dim_report(cfg: SystemConfig) -> dict:
    if cfg.kind in ("fif", "markov-fif"):
        rep = dimension.theoretical_box_dim(cfg.system)
        return {
            "theoretical_box": rep.theoretical_box,
            "hausdorff_equals_box": rep.hausdorff_equals_box,
            "s_root": rep.s_root,
            "branch": rep.branch,
            "witnesses": rep.witnesses,
        }
    if cfg.kind == "series":
        spec = cfg.system
        a, b = float(spec.alpha), spec.b
        if not spec.fractal_regime:
            return {"theoretical_box": 1.0, "branch": "series-smooth", "phi": spec.kind}
        # uniform system: b branches, scaling alpha each, base length 1/b;
        # the Moran root coincides with the closed form 2 + log a / log b
        # and reporting both keeps the dual route visible in the artifact
        s = dimension.moran_solve((a,) * b, (1.0 / b,) * b)
        return {
            "theoretical_box": s,
            "branch": "series-moran",
            "closed_form": 2.0 + math.log(a) / math.log(b),
            "phi": spec.kind,
        }
    # tent
    sysT = cfg.system
    a, b = sysT.alpha_float, sysT.beta_float
    doc = {
        "theoretical_box": 2.0 + math.log(a) / math.log(b),
        "branch": "tent-closed-form",
    }
    part = tentmap.detect_markov(sysT.beta, tol=cfg.detect_tol)
    if part is None:
        doc["markov"] = None
    else:
        s_m = tentmap.markov_dim(sysT, part)
        doc["markov"] = {
            "label": part.label,
            "exact": part.exact,
            "breakpoints": [float(p) for p in part.breakpoints],
            "s_m": s_m,
            "closed_form_gap": abs(s_m - doc["theoretical_box"]),
        }
    return doc


def cmd_dim(cfg: SystemConfig, out: Path) -> int:
    doc = _scaffold(cfg, {"eval_eps": cfg.eval_eps, "detect_tol": cfg.detect_tol})
    doc["report"] = _dim_report(cfg)
    if cfg.kind == "markov-fif":
        st = measures.ergodic_stats(cfg.system)
        doc["measure"] = {"h": st.h, "chi1": st.chi1, "chi2": st.chi2, "dim": st.dim}
    _write_json(out / "dim.json", doc)
    return 0


def cmd_boxdim(cfg: SystemConfig, out: Path, threads: int) -> int:
    xs, ys = _sample_cloud(cfg)
    log.info("sampled %d points", len(xs))
    scales = cfg.scales if cfg.scales is not None else boxcount.default_scales()
    res = boxcount.box_dimension((xs, ys), scales=scales, threads=threads)
    doc = _scaffold(cfg, {"saturation_rtol": boxcount.SATURATION_RTOL})
    doc["points"] = len(xs)
    doc["fit"] = {
        "dim": res.dim,
        "slope": res.fit.slope,
        "intercept": res.fit.intercept,
        "stderr": res.fit.stderr,
        "scales": list(res.fit.scales),
    }
    doc["counts"] = [[g.eps, g.n] for g in res.counts]
    doc["dropped"] = list(res.dropped)
    doc["saturation"] = [[e, nf, nh] for e, nf, nh in res.saturation]
    doc["max_saturation_gap"] = res.max_saturation_gap
    _write_json(out / "boxdim.json", doc)
    _write_csv(
        out / "boxdim.csv",
        "log_inv_eps,log_n",
        ((math.log(1.0 / g.eps), math.log(g.n)) for g in res.counts),
    )
    return 0


def cmd_nbern(cfg: SystemConfig, out: Path, ns: list[int]) -> int:
    if cfg.kind not in ("fif", "markov-fif"):
        raise InvalidConfig("nbern needs a fif or markov-fif config")
    sys_ = cfg.system
    mm = measures.equilibrium_markov(sys_)
    h = measures.entropy(mm)
    anchor = cfg.anchor if cfg.anchor is not None else _default_anchor(sys_.sft)
    pads = symbolic.nbern_pads(sys_.sft, anchor)
    words2 = symbolic.admissible_words(sys_.sft, 2)
    rows = []
    for n in ns:
        hn = symbolic.markov_nbern_entropy(mm.q, mm.P, n, pads.k)
        gap2 = max(
            abs(
                symbolic.markov_nbern_cylinder_mass(pads, mm.q, mm.P, n, w)
                - measures.markov_cylinder_mass(mm, w)
            )
            for w in words2
        )
        rows.append((n, hn, abs(hn - h), gap2))
        log.info("n=%d entropy gap %.3g cylinder gap %.3g", n, rows[-1][2], rows[-1][3])
    _write_csv(out / "nbern.csv", "n,h_n,entropy_gap,cyl2_gap", rows)
    return 0


def cmd_tent(cfg: SystemConfig, out: Path) -> int:
    if cfg.kind != "tent":
        raise InvalidConfig("tent needs a tent config")
    sysT = cfg.system
    doc = _scaffold(cfg, {"eval_eps": cfg.eval_eps, "detect_tol": cfg.detect_tol})
    doc["beta"] = float(sysT.beta_float)
    doc["alpha"] = float(sysT.alpha_float)
    n = cfg.entropy_n
    est = tentmap.entropy_estimate(sysT.beta, n)
    log_beta = math.log(sysT.beta_float)
    doc["entropy"] = {
        "n": n,
        "estimate": est,
        "log_beta": log_beta,
        "abs_gap": abs(est - log_beta),
    }
    doc["report"] = _dim_report(cfg)
    _write_json(out / "tent.json", doc)
    return 0


def cmd_sample(cfg: SystemConfig, out: Path) -> int:
    xs, ys = _sample_cloud(cfg)
    _write_csv(out / "sample.csv", "x,y", zip((float(x) for x in xs), (float(y) for y in ys)))
    return 0


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------


def _parse_n_list(text: str) -> list[int]:
    try:
        ns = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidConfig(f"--n: cannot parse {text!r} as a comma-separated integer list")
    if not ns or any(n < 1 for n in ns):
        raise InvalidConfig("--n: need positive integers")
    return ns


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON system configuration")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--threads", type=int, default=1, help="worker cap for counting")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")

    parser = argparse.ArgumentParser(
        prog="fracdim",
        description="fractal function graphs: constructions, dimensions, estimators",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_eval = sub.add_parser("eval", parents=[common], help="function values on a uniform grid")
    p_eval.add_argument("--grid", type=int, default=1025, help="number of x points")
    sub.add_parser("dim", parents=[common], help="theoretical dimension report")
    sub.add_parser("boxdim", parents=[common], help="box-counting dimension fit")
    p_nbern = sub.add_parser("nbern", parents=[common], help="n-block approximation table")
    p_nbern.add_argument("--n", default="20,40,80", help="comma-separated block lengths")
    sub.add_parser("tent", parents=[common], help="tent-system report")
    sub.add_parser("sample", parents=[common], help="emit the sampled point cloud")
    return parser


def _setup_logging() -> None:
    name = os.environ.get("FRACDIM_LOG", "warning").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise InvalidConfig("--seed must be nonnegative")
        cfg = replace(cfg, seed=args.seed)
    if args.threads < 1:
        raise InvalidConfig("--threads must be at least 1")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.command == "eval":
        return cmd_eval(cfg, out, args.grid)
    if args.command == "dim":
        return cmd_dim(cfg, out)
    if args.command == "boxdim":
        return cmd_boxdim(cfg, out, args.threads)
    if args.command == "nbern":
        return cmd_nbern(cfg, out, _parse_n_list(args.n))
    if args.command == "tent":
        return cmd_tent(cfg, out)
    return cmd_sample(cfg, out)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _setup_logging()
    try:
        return _run(args)
    except PreconditionFailed as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return 3
    except InvalidConfig as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    except DiagnosticsFailed as exc:
        print(f"diagnostics failed: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        # library-level contract violations surface as config problems
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
