"""Command-line entry point: ``subml {solve-beta,ber-sweep,complexity-sweep,validate}``."""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
from datetime import datetime, timezone
from typing import Dict, List, Sequence

from . import __version__
from .analytics import MimoBoundParams, union_bound_mimo_shifted
from .channel import NOISE_CONVENTION, SnrReference, noise_density
from .config import load_config, parse_mimo, parse_snr_range
from .constellation import VectorConstellation, parse_modulation
from .errors import ConfigError, Infeasible, NoConvergence, SubmlError, SweepAborted
from .harness import BetaModel, LinkConfig, SweepPoint, TargetRule, run_sweep
from .solver import SolverConfig, siso_curve, solve_mimo, solve_siso
from .svg import Series, line_chart

EXIT_INFEASIBLE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_CONFIG = 4
EXIT_ABORTED = 5

CSV_COLUMNS = ("snr_db", "beta", "target_p", "ser", "ser_ci_lo", "ser_ci_hi",
               "ber", "ber_ci_lo", "ber_ci_hi", "norm_complexity", "hit_rate",
               "paper_hit_prob", "trials")


# ---------------------------------------------------------------- manifest

def run_manifest(cfg: LinkConfig, command: str, stamp: bool = False) -> Dict:
    """Everything needed to re-run a sweep bit-identically.

    The timestamp is only recorded when requested (or when
    ``SOURCE_DATE_EPOCH`` is set), so default outputs stay byte-identical
    across re-runs.
    """
    ts = None
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        ts = datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    elif stamp:
        ts = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return {
        "tool": "subml",
        "version": __version__,
        "command": command,
        "timestamp": ts,
        "master_seed": cfg.seed,
        "noise_convention": NOISE_CONVENTION,
        "snr_definition": ("SNR = (d_min/2)^2 / N0" if cfg.snr_ref is SnrReference.DMIN
                           else "SNR = Es/N0, unit average symbol energy"),
        "config": cfg.as_dict(),
    }


def _num(x) -> str:
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def format_csv(points: Sequence[SweepPoint], manifest: Dict) -> str:
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for p in points:
        row = (p.snr_db, p.beta, p.target_p, p.ser, p.ser_ci[0], p.ser_ci[1],
               p.ber, p.ber_ci[0], p.ber_ci[1], p.normalized_complexity,
               p.hit_rate, p.paper_hit_prob, int(p.trials))
        buf.write(",".join(_num(v) for v in row) + "\n")
    return buf.getvalue()


def format_svg(points: Sequence[SweepPoint], kind: str, cfg: LinkConfig) -> str:
    snr = [p.snr_db for p in points]
    setup = f"{cfg.modulation.upper()} {cfg.nt}x{cfg.nr}, target {cfg.target}"
    if kind == "complexity":
        return line_chart(
            [Series("proposed", snr, [p.normalized_complexity for p in points]),
             Series("ML", snr, [p.ml_normalized_complexity for p in points])],
            f"Query complexity vs SNR ({setup})", "SNR (dB)",
            "normalized CF evaluations", ylim=(0.0, 1.05))
    return line_chart(
        [Series("proposed", snr, [p.ber for p in points]),
         Series("ML", snr, [p.ml_ber for p in points]),
         Series("target", snr, [p.target_p for p in points])],
        f"BER vs SNR ({setup})", "SNR (dB)", "BER", logy=True)


# ---------------------------------------------------------------- settings

_FLAG_KEYS = {
    "mod": "modulation", "mimo": "mimo", "channel": "channel", "target": "target",
    "branch": "branch", "snr_ref": "snr_ref", "beta_model": "beta_model",
    "snr_db_range": "snr_db_range", "trials": "trials", "seed": "seed",
    "out": "out", "plot": "plot",
}

_DEFAULTS = {
    "modulation": "qam16", "mimo": "2x2", "channel": "identity",
    "target": "pmin-factor:2.0", "branch": "lower", "snr_ref": "dmin",
    "beta_model": "siso", "snr_db_range": "0:14:2", "trials": "100000", "seed": "0",
}


def build_link_config(settings: Dict[str, str], lines: Dict[str, int] | None = None) -> LinkConfig:
    """Turn raw string settings into a validated :class:`LinkConfig`."""
    lines = lines or {}
    s = dict(_DEFAULTS)
    s.update({k: v for k, v in settings.items() if v is not None})
    if "snr_db" in settings and settings.get("snr_db") is not None:
        s.pop("snr_db_range", None)

    def field(key, fn):
        try:
            return fn(s[key])
        except (ValueError, SubmlError) as exc:
            raise ConfigError(str(exc), line=lines.get(key), field=key) from None

    modulation = field("modulation", lambda t: parse_modulation(t).name)
    nt, nr = field("mimo", parse_mimo)
    if "snr_db" in s:
        snr = field("snr_db", lambda t: tuple(float(x) for x in t.split(",") if x.strip()))
    else:
        snr = field("snr_db_range", parse_snr_range)
    kwargs = dict(
        modulation=modulation, nt=nt, nr=nr,
        channel=field("channel", str.lower),
        snr_db=snr,
        target=field("target", TargetRule.parse),
        trials=field("trials", int),
        seed=field("seed", int),
        branch=field("branch", str.lower),
        snr_ref=field("snr_ref", lambda t: SnrReference(t.lower())),
        beta_model=field("beta_model", lambda t: BetaModel(t.lower())),
    )
    try:
        return LinkConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _settings_from_args(args) -> tuple:
    settings: Dict[str, str] = {}
    lines: Dict[str, int] = {}
    if getattr(args, "config", None):
        raw = load_config(args.config)
        lines = raw.pop("__lines__", {})
        settings.update(raw)
    for flag, key in _FLAG_KEYS.items():
        val = getattr(args, flag, None)
        if val is not None:
            settings[key] = str(val)
            lines.pop(key, None)
            if key == "snr_db_range":
                settings.pop("snr_db", None)
    return settings, lines


# ---------------------------------------------------------------- commands

def cmd_solve_beta(args) -> int:
    try:
        c = parse_modulation(args.mod)
        nt, nr = parse_mimo(args.mimo) if args.mimo else (1, 1)
        target_rule = TargetRule.parse(args.target)
    except (ValueError, SubmlError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    n0 = noise_density(args.snr_db, c, args.snr_ref)
    cfg = SolverConfig(branch=args.branch)
    try:
        if args.beta_model == "union":
            v = VectorConstellation.uniform(c, nt)
            bound = MimoBoundParams.from_vector(v, nr, n0)
            pmin = union_bound_mimo_shifted(bound, 0.5 * v.d_min)
            target = _apply_target(target_rule, pmin)
            sol = solve_mimo(bound, v.d_min, target,
                             SolverConfig(branch=args.branch, floor=1e-6, start=0.01))
        else:
            pmin = siso_curve(c, n0)(0.5 * c.d_min)
            target = _apply_target(target_rule, pmin)
            sol = solve_siso(c, n0, target, cfg)
    except Infeasible as exc:
        print(f"infeasible target_p: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NoConvergence as exc:
        print(f"no convergence for beta: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    print(f"modulation   {c.name} ({nt}x{nr}, beta model {args.beta_model})")
    print(f"snr_db       {args.snr_db:g} (reference {SnrReference(args.snr_ref).value})")
    print(f"N0           {n0!r}")
    print(f"d_min        {c.d_min!r}")
    print(f"p_min        {pmin!r}")
    print(f"target_p     {target!r}")
    print(f"beta         {sol.beta!r}")
    print(f"beta/d_min   {sol.beta / c.d_min!r}")
    print(f"residual     {sol.residual!r}")
    print(f"iterations   {sol.iterations}")
    print(f"branch       {sol.branch.value}")
    return 0


def _apply_target(rule: TargetRule, pmin: float) -> float:
    return pmin * rule.value if rule.kind == "factor_of_pmin" else rule.value


def _cmd_sweep(args, kind: str) -> int:
    try:
        settings, lines = _settings_from_args(args)
        cfg = build_link_config(settings, lines)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        points = run_sweep(cfg, threads=args.threads)
    except SweepAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    manifest = run_manifest(cfg, f"{kind}-sweep", stamp=args.stamp)
    text = format_csv(points, manifest)
    out = settings.get("out")
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    plot = settings.get("plot")
    if plot:
        svg = format_svg(points, kind, cfg)
        header = "<!-- manifest: " + json.dumps(manifest, sort_keys=True).replace("--", "- -") + " -->\n"
        with open(plot, "w", encoding="utf-8", newline="") as fh:
            fh.write(header + svg)
    return 0


def cmd_ber_sweep(args) -> int:
    return _cmd_sweep(args, "ber")


def cmd_complexity_sweep(args) -> int:
    return _cmd_sweep(args, "complexity")


def cmd_validate(args) -> int:
    from .selfcheck import run_checks
    checks = run_checks(quick=args.quick)
    width = max(len(c.name) for c in checks)
    failed = 0
    for c in checks:
        status = "PASS" if c.ok else "FAIL"
        failed += not c.ok
        print(f"{status}  {c.name:<{width}}  {c.detail}")
    if args.quick:
        print("(--quick: million-trial Monte Carlo checks skipped)")
    return 1 if failed else 0


# ---------------------------------------------------------------- parser

def _add_link_flags(p, sweep: bool):
    p.add_argument("--mod", help="bpsk | pam4 | qam<M>")
    p.add_argument("--mimo", help="NtxNr, e.g. 2x2 (sweeps default to 2x2, solve-beta to 1x1)")
    p.add_argument("--target", help="pmin-factor:<c> | abs:<p>")
    p.add_argument("--branch", choices=("lower", "upper"))
    p.add_argument("--snr-ref", dest="snr_ref", choices=("dmin", "es"),
                   help="SNR definition: (d_min/2)^2/N0 (default) or Es/N0")
    p.add_argument("--beta-model", dest="beta_model", choices=("siso", "union"),
                   help="curve inverted for beta (default siso)")
    if sweep:
        p.add_argument("--config", help="INI-style config file")
        p.add_argument("--channel", choices=("identity", "rayleigh"))
        p.add_argument("--snr-db-range", dest="snr_db_range", help="start:stop:step in dB")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="CSV output path (default stdout)")
        p.add_argument("--plot", help="SVG output path")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default $SUBML_THREADS or CPU count)")
        p.add_argument("--stamp", action="store_true",
                       help="record the wall-clock time in the manifest")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="subml", description=__doc__)
    ap.add_argument("--version", action="version", version=f"subml {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-beta", help="solve the boundary shift for a target BER")
    _add_link_flags(p, sweep=False)
    p.add_argument("--snr-db", dest="snr_db", type=float, required=True)
    p.set_defaults(func=cmd_solve_beta, mod="qam16", target="pmin-factor:2.0",
                   branch="lower", snr_ref="dmin", beta_model="siso")

    for name, fn in (("ber-sweep", cmd_ber_sweep), ("complexity-sweep", cmd_complexity_sweep)):
        p = sub.add_parser(name, help=f"Monte Carlo {name.split('-')[0]} sweep")
        _add_link_flags(p, sweep=True)
        p.set_defaults(func=fn)

    p = sub.add_parser("validate", help="run analytic and Monte Carlo self-checks")
    p.add_argument("--quick", action="store_true", help="skip million-trial checks")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv: List[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
