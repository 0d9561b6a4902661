"""Command-line front end.

Every command reads a graph file (graph6 or plain edge-list, sniffed
from the content), does its work through the library, and prints one
JSON document (or a plain-text rendering with ``--format text``).
Outputs are deterministic: same input and same seed give byte-identical
bytes, rationals are printed as ``num/den`` strings, and randomized
commands always echo the seed they ran with so any run can be replayed.

Exit codes: 0 success; 2 the input failed validation (unreadable,
malformed, or outside the class a command requires); 3 an explosion
guard stopped the computation; 4 an internal invariant was violated
(these indicate a bug and are always worth reporting).
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .augment import (
    BiasInfeasible,
    DeficiencyError,
    PreconditionFailure,
    deficiency_report,
    exact_phase5_distribution,
    run_phase5,
)
from .fractional_lp import (
    ColouringError,
    MergeFailure,
    TARGET_BOUND,
    chi_f_exact,
    chi_f_upper_subcubic,
    verify_certificate,
)
from .graph_core import Graph, GraphError, GuardExceeded, analyze, parse_edge_list, parse_graph6
from .sampler import (
    is_independent,
    monte_carlo,
    run_phases_1_4,
    trial_stream,
)
from .two_factor import (
    NoQualifyingTwoFactor,
    TwoFactorError,
    select_two_factor,
    two_factor_from_json_dict,
    two_factor_to_json_dict,
)

__all__ = ["RunConfig", "main", "run",
           "cmd_validate", "cmd_two_factor", "cmd_prob",
           "cmd_chif", "cmd_certify", "cmd_corpus"]

LOWER_BOUND_NUM = 88  # per-vertex guarantee is (88 + epsilon)/256

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_GUARD = 3
EXIT_INVARIANT = 4

_VALIDATION_ERRORS = (
    GraphError,
    TwoFactorError,
    NoQualifyingTwoFactor,
    DeficiencyError,
    ColouringError,
    OSError,
    json.JSONDecodeError,
)
_INVARIANT_ERRORS = (
    BiasInfeasible,
    PreconditionFailure,
    MergeFailure,
    AssertionError,
    RuntimeError,
)


@dataclass(frozen=True)
class RunConfig:
    """Everything a command run depends on, resolved from argv.

    ``seed`` is always concrete by the time a command runs: when the
    user does not pass --seed, a fresh 64-bit seed is drawn and echoed
    in the output.  Guards must be positive; ``format`` is ``json`` or
    ``text``.
    """

    command: str
    paths: tuple
    seed: int
    trials: int
    exact: bool
    max_orientations: int | None
    max_branches: int | None
    phase4: str
    fmt: str
    two_factor_path: str | None
    workers: int | None
    require_cubic_triangle_free: bool
    search: bool

    def __post_init__(self):
        if not 0 <= self.seed < 1 << 64:
            raise GraphError("seed must fit in 64 bits")
        for name in ("trials", "max_orientations", "max_branches"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise GraphError(f"{name} must be positive")


def _fr(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def _read_graph(path: str) -> Graph:
    text = Path(path).read_text()
    return _parse_graph_text(text, path)


def _parse_graph_text(text: str, origin: str) -> Graph:
    lines = [
        s for s in (line.strip() for line in text.splitlines())
        if s and not s.startswith("#")
    ]
    if not lines:
        raise GraphError(f"{origin}: no graph data")
    head = lines[0].split()
    if len(head) == 2 and all(tok.isdigit() for tok in head):
        return parse_edge_list(text)
    if len(lines) > 1:
        raise GraphError(
            f"{origin}: {len(lines)} graphs in file; expected exactly one"
        )
    return parse_graph6(lines[0])


def _load_two_factor(g: Graph, path: str):
    data = json.loads(Path(path).read_text())
    return two_factor_from_json_dict(g, data)


def _pick_two_factor(g: Graph, cfg: RunConfig):
    if cfg.two_factor_path:
        return _load_two_factor(g, cfg.two_factor_path), "pinned"
    return select_two_factor(g), "selected"


# -- commands ---------------------------------------------------------------------


def cmd_validate(cfg: RunConfig) -> dict:
    g = _read_graph(cfg.paths[0])
    report = analyze(g)
    payload = {"command": "validate", "input": cfg.paths[0], **report.to_json_dict()}
    if cfg.require_cubic_triangle_free and not (
        report.is_cubic and report.is_triangle_free
    ):
        payload["verdict"] = "fail"
        raise _Failure(payload)
    payload["verdict"] = "pass"
    return payload


def cmd_two_factor(cfg: RunConfig) -> dict:
    g = _read_graph(cfg.paths[0])
    tf, origin = _pick_two_factor(g, cfg)
    from .two_factor import satisfies_ks_condition

    return {
        "command": "two-factor",
        "input": cfg.paths[0],
        "origin": origin,
        "cycle_count": len(tf.cycles),
        "cycle_lengths": [len(c) for c in tf.cycles],
        "meets_cut_condition": satisfies_ks_condition(g, tf),
        **two_factor_to_json_dict(tf),
    }


def _epsilon_payload(g: Graph, tf) -> tuple[dict, list]:
    recs = deficiency_report(g, tf)
    eps_table = {str(r.vertex): _fr(r.epsilon) for r in recs}
    deficient = [r.to_json_dict() for r in recs if r.deficient]
    return eps_table, deficient


def _exact_prob(cfg: RunConfig, g: Graph, tf) -> dict:
    plan, result = exact_phase5_distribution(
        g, tf,
        phase4=cfg.phase4,
        max_orientations=cfg.max_orientations,
        max_branches=cfg.max_branches,
    )
    eps_table, deficient = _epsilon_payload(g, tf)
    marginals = {str(v): _fr(result.marginals[v]) for v in range(g.n)}
    lo = min(result.marginals[v] for v in range(g.n)) if g.n else Fraction(1)
    return {
        "mode": "exact",
        "phase4": cfg.phase4,
        "marginals": marginals,
        "epsilon": eps_table,
        "deficiency_report": deficient,
        "min_marginal": _fr(lo),
        "threshold": f"{LOWER_BOUND_NUM}/256",
        "meets_threshold": lo >= Fraction(LOWER_BOUND_NUM, 256),
    }


def _monte_carlo_prob(cfg: RunConfig, g: Graph, tf) -> dict:
    eps_table, deficient = _epsilon_payload(g, tf)
    base = {
        "mode": "monte-carlo",
        "phase4": cfg.phase4,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "epsilon": eps_table,
        "deficiency_report": deficient,
        "threshold": f"{LOWER_BOUND_NUM}/256",
    }
    if deficient:
        # the repair phase needs the exact plan; trials then replay all
        # five phases from each trial's own bit stream
        plan, _ = exact_phase5_distribution(
            g, tf,
            phase4=cfg.phase4,
            max_orientations=cfg.max_orientations,
            max_branches=cfg.max_branches,
        )
        counts = [0] * g.n
        violations = 0
        for t in range(cfg.trials):
            rng = trial_stream(cfg.seed, t)
            _, out = run_phases_1_4(g, tf, rng, cfg.phase4)
            out = run_phase5(out, plan, rng)
            if not is_independent(g, out.members):
                violations += 1
            for v in out.members:
                counts[v] += 1
        base.update({
            "backend": "five-phase-reference",
            "violations": violations,
            "counts": counts,
            "frequencies": [_fr(Fraction(c, cfg.trials)) for c in counts],
        })
        lo = Fraction(min(counts), cfg.trials)
    else:
        report = monte_carlo(
            g, tf, cfg.trials, cfg.seed,
            phase4=cfg.phase4, workers=cfg.workers,
        )
        base.update({
            "backend": report.backend,
            "violations": report.violations,
            "counts": list(report.counts),
            "frequencies": [_fr(report.frequency(v)) for v in range(g.n)],
        })
        lo = min(report.frequency(v) for v in range(g.n))
    base["min_frequency"] = _fr(lo)
    base["meets_threshold"] = lo >= Fraction(LOWER_BOUND_NUM, 256)
    return base


def cmd_prob(cfg: RunConfig) -> dict:
    g = _read_graph(cfg.paths[0])
    tf, origin = _pick_two_factor(g, cfg)
    body = _exact_prob(cfg, g, tf) if cfg.exact else _monte_carlo_prob(cfg, g, tf)
    return {
        "command": "prob",
        "input": cfg.paths[0],
        "two_factor": {"origin": origin, **two_factor_to_json_dict(tf)},
        **body,
    }


def cmd_chif(cfg: RunConfig) -> dict:
    g = _read_graph(cfg.paths[0])
    value, primal, dual = chi_f_exact(g)
    return {
        "command": "chif",
        "input": cfg.paths[0],
        "chi_f": _fr(value),
        "weighting": primal.to_json_dict(),
        "dual_clique": {str(v): _fr(q) for v, q in sorted(dual.items()) if q > 0},
    }


def cmd_certify(cfg: RunConfig) -> dict:
    g = _read_graph(cfg.paths[0])
    kw = {"phase4": cfg.phase4}
    if cfg.max_orientations is not None:
        kw["max_orientations"] = cfg.max_orientations
    if cfg.max_branches is not None:
        kw["max_branches"] = cfg.max_branches
    bound, cert = chi_f_upper_subcubic(g, **kw)
    verdict = verify_certificate(g, cert)
    return {
        "command": "certify",
        "input": cfg.paths[0],
        "bound": _fr(bound),
        "verified": verdict.ok,
        "certificate": cert.to_json_dict(),
    }


def _corpus_row(origin: str, g: Graph, search: bool) -> dict:
    report = analyze(g)
    row = {
        "graph": origin,
        "n": g.n,
        "m": g.m,
        "is_connected": report.is_connected,
        "is_cubic": report.is_cubic,
        "is_triangle_free": report.is_triangle_free,
        "is_bridgeless": report.is_bridgeless,
        "chi_f": None,
        "min_marginal": None,
        "deficient_count": None,
    }
    try:
        row["chi_f"] = _fr(chi_f_exact(g)[0])
    except GuardExceeded:
        pass
    if (report.is_cubic and report.is_triangle_free
            and report.is_bridgeless and report.is_connected):
        try:
            tf = select_two_factor(g)
        except NoQualifyingTwoFactor:
            row["deficient_count"] = "no-qualifying-two-factor"
            return row
        recs = deficiency_report(g, tf)
        deficient = [r for r in recs if r.deficient]
        row["deficient_count"] = len(deficient)
        if search:
            row["deficient"] = [r.to_json_dict() for r in deficient]
        try:
            _, result = exact_phase5_distribution(g, tf)
        except GuardExceeded:
            return row
        row["min_marginal"] = _fr(min(result.marginals[v] for v in range(g.n)))
    return row


def cmd_corpus(cfg: RunConfig) -> dict:
    root = Path(cfg.paths[0])
    if not root.is_dir():
        raise GraphError(f"{root}: not a directory")
    rows = []
    for path in sorted(root.glob("*.g6")):
        lines = [
            s for s in (line.strip() for line in path.read_text().splitlines())
            if s and not s.startswith("#")
        ]
        for i, line in enumerate(lines, start=1):
            origin = f"{path.name}:{i}" if len(lines) > 1 else path.name
            rows.append(_corpus_row(origin, parse_graph6(line), cfg.search))
    if cfg.search:
        rows = [r for r in rows if r.get("deficient_count") not in (0, None)]
    return {
        "command": "corpus",
        "input": cfg.paths[0],
        "search": cfg.search,
        "count": len(rows),
        "rows": rows,
    }


# -- plumbing ---------------------------------------------------------------------


class _Failure(Exception):
    """A command-specific validation verdict that still carries a payload."""

    def __init__(self, payload: dict):
        super().__init__("validation failed")
        self.payload = payload


_COMMANDS = {
    "validate": cmd_validate,
    "two-factor": cmd_two_factor,
    "prob": cmd_prob,
    "chif": cmd_chif,
    "certify": cmd_certify,
    "corpus": cmd_corpus,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracchrom",
        description="Fractional-colouring toolkit for triangle-free subcubic graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, path_help):
        p = sub.add_parser(name, help=help_)
        p.add_argument("path", help=path_help)
        p.add_argument("--seed", type=int, default=None,
                       help="64-bit seed; drawn and echoed when omitted")
        p.add_argument("--trials", type=int, default=10000)
        p.add_argument("--exact", action="store_true",
                       help="exact enumeration instead of Monte Carlo")
        p.add_argument("--max-orient", type=int, default=None, dest="max_orient")
        p.add_argument("--max-branches", type=int, default=None, dest="max_branches")
        p.add_argument("--two-factor", default=None, dest="two_factor",
                       metavar="FILE", help="pin the two-factor from a JSON file")
        p.add_argument("--phase4-feasibility", choices=("start", "recompute"),
                       default="start", dest="phase4")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--workers", type=int, default=None,
                       help="Monte Carlo worker count (default: FRACCHROM_THREADS or 1)")
        return p

    v = add("validate", "parse a graph and report its structure", "graph file")
    v.add_argument("--require-cubic-triangle-free", action="store_true")
    add("two-factor", "select (or load) a qualifying two-factor", "graph file")
    add("prob", "per-vertex inclusion probabilities, exact or sampled", "graph file")
    add("chif", "exact fractional chromatic number with certificates", "graph file")
    add("certify", "32/11 multiset certificate for a subcubic graph", "graph file")
    c = add("corpus", "summarize every graph6 file in a directory", "directory")
    c.add_argument("--search", action="store_true",
                   help="keep only graphs whose selected two-factor has deficient vertices")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    seed = args.seed
    if seed is None:
        seed = secrets.randbits(64)
    return RunConfig(
        command=args.command,
        paths=(args.path,),
        seed=seed,
        trials=args.trials,
        exact=args.exact,
        max_orientations=args.max_orient,
        max_branches=args.max_branches,
        phase4=args.phase4,
        fmt=args.format,
        two_factor_path=args.two_factor,
        workers=args.workers,
        require_cubic_triangle_free=getattr(
            args, "require_cubic_triangle_free", False),
        search=getattr(args, "search", False),
    )


_CSV_COLUMNS = (
    "graph", "n", "m", "is_connected", "is_cubic", "is_triangle_free",
    "is_bridgeless", "chi_f", "min_marginal", "deficient_count",
)


def _render_corpus_csv(payload: dict) -> str:
    lines = [",".join(_CSV_COLUMNS)]
    for row in payload["rows"]:
        lines.append(",".join(_csv_cell(row.get(c)) for c in _CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def _render(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if payload.get("command") == "corpus":
        return _render_corpus_csv(payload)
    lines = []

    def walk(key, value, depth):
        pad = "  " * depth
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            for k2, v2 in value.items():
                walk(k2, v2, depth + 1)
        elif isinstance(value, list):
            lines.append(f"{pad}{key}: " + " ".join(_scalar(v) for v in value))
        else:
            lines.append(f"{pad}{key}: {_scalar(value)}")

    for k, v in payload.items():
        walk(k, v, 0)
    return "\n".join(lines) + "\n"


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        payload = _COMMANDS[cfg.command](cfg)
    except _Failure as exc:
        out.write(_render(exc.payload, args.format))
        return EXIT_VALIDATION
    except _VALIDATION_ERRORS as exc:
        err.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except GuardExceeded as exc:
        err.write(f"guard exceeded: {exc}\n")
        return EXIT_GUARD
    except _INVARIANT_ERRORS as exc:
        err.write(f"internal invariant violated ({type(exc).__name__}): {exc}\n")
        return EXIT_INVARIANT
    out.write(_render(payload, cfg.fmt))
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
