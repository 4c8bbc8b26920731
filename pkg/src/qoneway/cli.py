"""Command-line runner: ``qoneway {learn,majix,lsd,entropy-check,oracle}``.

Every command writes CSV tables (to ``--out`` when given, else to stdout).
Each table starts with ``# `` header lines recording the command, its
configuration and the RNG algorithm, so identical configurations produce
byte-identical reports.  Exit status: 0 when every check passes, 1 when an
invariant check fails (a replay file reproducing the first failure is
written), 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import experiments, proofs
from .instances import (
    InstanceInvariantError,
    InstanceSyntaxError,
    ProtocolBundle,
    bundled_instance_path,
    format_instance,
    parse_instance_file,
)
from .learner import ContractViolation, InternalConsistencyError, LearnerConfig, audit_progress
from .oracle import DEFAULT_EXACT_LIMIT, conflicts_respected, distinct_rows, exact_one_way_cost, row_classes
from .protocol import (
    DEFAULT_DIM_CAP,
    DimensionCapError,
    PartialFunction,
    ProtocolInvariantError,
    QuantumOneWayProtocol,
    induced_function,
)
from .sampling import RNG_ALGORITHM

COMMANDS = ("learn", "majix", "lsd", "entropy-check", "oracle")
EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
MAJIX_N = 121
MAJIX_SAMPLES = 100
LSD_DIM = 8
LSD_ANGLES = (0.0, 0.02, 0.05, 2 * math.asin(0.05 * math.sqrt(2)), 0.3, 0.8, 2 * math.asin(0.45 * math.sqrt(2)), 1.4, math.pi / 2)


class InputError(ValueError):
    """Bad command-line input; maps to exit status 2."""


@dataclass
class ExperimentConfig:
    command: str
    instance: str | None = None
    seed: int | None = None
    epsilon: float | None = None
    trials: int | None = None
    out: str | None = None
    dim_cap: int = DEFAULT_DIM_CAP
    exact_limit: int = DEFAULT_EXACT_LIMIT
    replay: str | None = None

    def header(self) -> list[str]:
        parts = [
            f"instance={self.instance or '-'}",
            f"seed={'-' if self.seed is None else self.seed}",
            f"epsilon={'-' if self.epsilon is None else repr(self.epsilon)}",
            f"trials={'-' if self.trials is None else self.trials}",
            f"dim_cap={self.dim_cap}",
            f"exact_limit={self.exact_limit}",
        ]
        if self.replay:
            parts.append(f"replay={self.replay}")
        return [f"qoneway {self.command}", " ".join(parts), f"rng={RNG_ALGORITHM}"]

    def need_seed(self) -> int:
        if self.seed is None:
            raise InputError(f"'{self.command}' is randomized and needs --seed")
        return self.seed


@dataclass
class Report:
    tables: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    replay: object | None = None

    def table(self, name: str, columns: list[str], rows: list) -> None:
        self.tables[name] = (columns, sorted(rows, key=lambda r: tuple(_sort_key(v) for v in r)))

    def fail(self, message: str, replay=None) -> None:
        self.failures.append(message)
        if self.replay is None and replay is not None:
            self.replay = replay


def _sort_key(v):
    return (0, v, "") if isinstance(v, (int, float)) and not isinstance(v, bool) else (1, 0, str(v))


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if v == math.inf else f"{v:.12g}"
    return str(v)


def render_table(cfg: ExperimentConfig, name: str, columns: list[str], rows: list) -> str:
    buf = io.StringIO()
    for line in cfg.header() + [f"table={name}"]:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def resolve_instance(spec: str) -> Path:
    path = Path(spec)
    if path.is_file():
        return path
    for name in (spec, f"{spec}.txt"):
        bundled = bundled_instance_path(name)
        if bundled.is_file():
            return bundled
    raise InputError(f"no instance file or bundled instance named '{spec}'")


def load_instance(cfg: ExperimentConfig, kinds: tuple):
    obj = parse_instance_file(resolve_instance(cfg.instance))
    if not isinstance(obj, kinds):
        names = ", ".join(k.__name__ for k in kinds)
        raise InputError(f"'{cfg.command}' expects {names}, got {type(obj).__name__}")
    return obj


# --- learn ---------------------------------------------------------------------


def _learn_one(cfg: ExperimentConfig, p: QuantumOneWayProtocol, f: PartialFunction, rep: Report) -> None:
    if p.dim > cfg.dim_cap:
        raise DimensionCapError(p.dim, cfg.dim_cap)
    eps = cfg.epsilon if cfg.epsilon is not None else p.epsilon
    try:
        outcome, det = experiments.learn_instance(p, f, eps, 0, cfg.exact_limit)
    except InternalConsistencyError as exc:
        rep.fail(str(exc), ProtocolBundle(f, p))
        return
    run_rows, audit_rows = [], []
    for x, run in det.runs.items():
        report = audit_progress(run)
        run_rows.append([x, run.updates, len(det.message(x)), run.initial_entropy, run.final_entropy, report.passed])
        for i, u in enumerate(run.audit):
            audit_rows.append([x, i, u.y, u.rank, u.deficit, u.eps_y, u.eps_tilde, u.progress, u.deficit / 2, u.progress - u.deficit / 2])
        for line in report.failures:
            rep.fail(f"x={x}: audit {line.step} failed: {line.detail}", ProtocolBundle(f, p))
    budget_limit = p.prior_budget / (5 * math.sqrt(eps)) + 1
    rep.table("learn_runs", ["x", "updates", "transcript_bits", "initial_entropy", "final_entropy", "audit_passed"], run_rows)
    rep.table(
        "learn_audit",
        ["x", "update", "y", "rank", "deficit", "eps_y", "eps_tilde", "progress", "half_deficit", "margin"],
        audit_rows,
    )
    summary = {
        "q": p.q,
        "dim": p.dim,
        "x_count": f.x_count,
        "y_count": f.y_count,
        "epsilon": eps,
        "prior_budget": p.prior_budget,
        "max_updates": outcome.max_updates,
        "update_limit": budget_limit,
        "cost_bits": outcome.cost,
        "cost_bound_bits": outcome.cost_bound,
        "distinct_messages": outcome.distinct_messages,
        "oracle_chromatic_number": outcome.chromatic_number,
        "oracle_bits": math.ceil(math.log2(outcome.chromatic_number)) if outcome.chromatic_number > 1 else 0,
        "oracle_exact": outcome.oracle_exact,
        "matches_f": outcome.matches,
    }
    rep.table("learn_summary", ["key", "value"], [[k, v] for k, v in summary.items()])
    bundle = ProtocolBundle(f, p)
    if not outcome.matches:
        rep.fail("compiled protocol disagrees with f", bundle)
    if outcome.max_updates > budget_limit:
        rep.fail(f"{outcome.max_updates} updates exceed the limit {budget_limit:.6g}", bundle)
    if outcome.chromatic_number > outcome.distinct_messages:
        rep.fail("oracle chromatic number exceeds the compiled message count", bundle)


def cmd_learn(cfg: ExperimentConfig, rep: Report) -> None:
    if cfg.instance:
        obj = load_instance(cfg, (ProtocolBundle, QuantumOneWayProtocol))
        if isinstance(obj, ProtocolBundle):
            p, f = obj.protocol, obj.function
        else:
            p, f = obj, induced_function(obj.messages, obj.measurements, obj.epsilon)
        _learn_one(cfg, p, f, rep)
        return
    seed = cfg.need_seed()
    eps = cfg.epsilon if cfg.epsilon is not None else 1e-4
    count = cfg.trials if cfg.trials is not None else 50
    rows = []
    for i, (p, f) in enumerate(experiments.suite_protocols(count, seed, eps)):
        try:
            o, _ = experiments.learn_instance(p, f, eps, i, cfg.exact_limit)
        except InternalConsistencyError as exc:
            rep.fail(f"protocol {i}: {exc}", ProtocolBundle(f, p))
            continue
        rows.append(
            [o.index, o.q, o.x_count, o.y_count, o.max_updates, o.update_limit, o.matches, o.cost, o.cost_bound,
             o.distinct_messages, o.chromatic_number, o.oracle_exact, o.audit_passed, o.min_progress_margin]
        )
        if not o.passed:
            rep.fail(f"protocol {i} failed its checks", ProtocolBundle(f, p))
    rep.table(
        "learn_suite",
        ["index", "q", "x_count", "y_count", "max_updates", "update_limit", "matches_f", "cost_bits", "cost_bound_bits",
         "distinct_messages", "oracle_chromatic_number", "oracle_exact", "audit_passed", "min_progress_margin"],
        rows,
    )


# --- majix ---------------------------------------------------------------------


def _majix_row(inst: proofs.MajIxInstance) -> list:
    value = proofs.majix_value(inst)
    cheat = proofs.majix_optimal_cheat(inst)
    honest = proofs.majix_acceptance(inst, proofs.honest_proof(inst)) if value == 1 else float("nan")
    label = {1: "1", 0: "0"}.get(value, "undefined")
    return [inst.n, inst.k, label, cheat.value, cheat.closed_form, cheat.soundness_bound, honest,
            proofs.bob_to_alice_acceptance(inst)]


MAJIX_COLUMNS = ["n", "k", "value", "cheat_optimum", "k_over_sqrt_n", "soundness_bound", "honest_acceptance", "b2a_exact_acceptance"]
MC_COLUMNS = ["seed", "n", "k", "reps", "trials", "accepted", "rate", "limit"]


def _mc_row(inst, cfg: ExperimentConfig, seed: int, rep: Report) -> list:
    trials = cfg.trials if cfg.trials is not None else 10_000
    mc = proofs.majix_monte_carlo(inst, proofs.DEFAULT_REPS, trials, seed)
    exact = proofs.bob_to_alice_acceptance(inst)
    limit = exact + 3 * math.sqrt(exact * (1 - exact) / trials)
    if proofs.majix_value(inst) == 1 and mc.accepted != trials:
        rep.fail(f"B->A protocol rejected a 1-input (k={inst.k})", inst)
    if proofs.majix_value(inst) == 0 and mc.rate > limit:
        rep.fail(f"B->A acceptance {mc.rate:.4f} exceeds {limit:.4f} (k={inst.k})", inst)
    return [seed, inst.n, inst.k, mc.reps, trials, mc.accepted, mc.rate, limit]


def _check_majix(inst, row, rep: Report) -> None:
    _, _, value, cheat, closed, bound, honest, _ = row
    if value == "1" and abs(honest - 1.0) > 1e-9:
        rep.fail(f"honest proof accepted with probability {honest!r}", inst)
    if abs(cheat - closed) > 1e-9:
        rep.fail(f"cheat optimum {cheat!r} differs from k/sqrt(n)", inst)
    if value == "0" and cheat > bound + 1e-12:
        rep.fail(f"cheat optimum {cheat!r} exceeds {bound} on a 0-input", inst)


def cmd_majix(cfg: ExperimentConfig, rep: Report) -> None:
    seed = cfg.need_seed()
    if cfg.instance:
        inst = load_instance(cfg, (proofs.MajIxInstance,))
        row = _majix_row(inst)
        _check_majix(inst, row, rep)
        rep.table("majix_values", MAJIX_COLUMNS, [row])
        if proofs.majix_value(inst) != proofs.UNDEFINED:
            rep.table("majix_monte_carlo", MC_COLUMNS, [_mc_row(inst, cfg, seed, rep)])
        return
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    root = math.isqrt(MAJIX_N)
    rows = []
    undefined = []
    for k in range(root + 1):
        value = proofs.majix_value_from_count(k, root)
        if value == proofs.UNDEFINED:
            undefined.append(k)
        inst = proofs.majix_instance(MAJIX_N, value, rng, k=k)
        row = _majix_row(inst)
        _check_majix(inst, row, rep)
        rows.append(row)
    rep.table("majix_values", MAJIX_COLUMNS, rows)
    if undefined != [10]:
        rep.fail(f"undefined region is k in {undefined}, expected [10]")
    worst = math.inf
    for _ in range(MAJIX_SAMPLES):
        inst = proofs.majix_instance(MAJIX_N, 1, rng)
        acc = proofs.majix_acceptance(inst, proofs.honest_proof(inst))
        worst = min(worst, acc)
        if abs(acc - 1.0) > 1e-9:
            rep.fail(f"honest proof accepted with probability {acc!r}", inst)
    rep.table("majix_completeness", ["n", "samples", "min_acceptance"], [[MAJIX_N, MAJIX_SAMPLES, worst]])
    boundary = proofs.majix_instance(MAJIX_N, 0, rng, k=(9 * root) // 10)
    honest = proofs.majix_instance(MAJIX_N, 1, rng)
    rep.table("majix_monte_carlo", MC_COLUMNS, [_mc_row(boundary, cfg, seed, rep), _mc_row(honest, cfg, seed, rep)])


# --- lsd -----------------------------------------------------------------------

LSD_COLUMNS = ["d", "angle", "distance", "value", "optimal_acceptance", "sampled_distance", "sampled_gap"]


def _lsd_row(inst: proofs.LsdInstance, angle, samples: int, seed: int, rep: Report) -> list:
    dist = proofs.lsd_distance(inst)
    acc, _ = proofs.lsd_optimal_proof(inst)
    sampled = proofs.lsd_sampled_distance(inst, samples, seed)
    value = {1: "1", 0: "0"}.get(proofs.lsd_value(inst), "undefined")
    if dist <= proofs.LSD_CLOSE + 1e-12 and acc < 0.98 - 1e-12:
        rep.fail(f"close instance accepted with only {acc!r}", inst)
    if dist >= proofs.LSD_FAR - 1e-12 and acc > 0.0361 + 1e-12:
        rep.fail(f"far instance accepted with {acc!r}", inst)
    if abs(sampled - dist) > 1e-3:
        rep.fail(f"sampled distance {sampled!r} is off by more than 1e-3 from {dist!r}", inst)
    return [inst.d, angle, dist, value, acc, sampled, sampled - dist]


def cmd_lsd(cfg: ExperimentConfig, rep: Report) -> None:
    seed = cfg.need_seed()
    samples = cfg.trials if cfg.trials is not None else 10_000
    if cfg.instance:
        inst = load_instance(cfg, (proofs.LsdInstance,))
        if inst.d > cfg.dim_cap:
            raise DimensionCapError(inst.d, cfg.dim_cap)
        rep.table("lsd", LSD_COLUMNS, [_lsd_row(inst, "-", samples, seed, rep)])
        return
    if LSD_DIM > cfg.dim_cap:
        raise DimensionCapError(LSD_DIM, cfg.dim_cap)
    rows = []
    for i, angle in enumerate(LSD_ANGLES):
        inst = proofs.lsd_instance(LSD_DIM, angle, np.random.SeedSequence([seed, i]))
        rows.append(_lsd_row(inst, angle, samples, seed + i, rep))
    rep.table("lsd", LSD_COLUMNS, rows)


# --- entropy-check ---------------------------------------------------------------


def cmd_entropy_check(cfg: ExperimentConfig, rep: Report) -> None:
    if cfg.replay:
        states = parse_instance_file(resolve_instance(cfg.replay))
        if not isinstance(states, dict) or not {"rho", "sigma"} <= states.keys():
            raise InputError("a replay file needs [states] with 'rho' and 'sigma'")
        suites = experiments.replay_states(states)
    else:
        suites = experiments.inequality_sweep(cfg.trials if cfg.trials is not None else 1000, cfg.need_seed())
    rows = []
    for name, s in suites.items():
        rows.append([name, s.trials, s.failures, s.worst_margin, s.passed])
        if not s.passed:
            witness = {k: v for k, v in s.first_failure.items() if v is not None}
            rep.fail(f"{name}: {s.failures} of {s.trials} trials failed", witness)
    rep.table("entropy_check", ["suite", "trials", "failures", "worst_margin", "passed"], rows)


# --- oracle --------------------------------------------------------------------


def cmd_oracle(cfg: ExperimentConfig, rep: Report) -> None:
    if not cfg.instance:
        raise InputError("'oracle' needs an instance (a function table)")
    obj = load_instance(cfg, (PartialFunction, ProtocolBundle))
    f = obj.function if isinstance(obj, ProtocolBundle) else obj
    res = exact_one_way_cost(f, cfg.exact_limit)
    g = distinct_rows(f)
    rep.table("oracle_colouring", ["x", "colour"], [[x, c] for x, c in res.colouring.items()])
    summary = {
        "x_count": f.x_count,
        "y_count": f.y_count,
        "conflict_edges": len(g.edges),
        "row_classes": row_classes(f),
        "chromatic_number": res.chromatic_number,
        "bits": res.bits,
        "exact": res.exact,
    }
    rep.table("oracle_summary", ["key", "value"], [[k, v] for k, v in summary.items()])
    if not conflicts_respected(res.colouring, g):
        rep.fail("colouring gives two conflicting rows the same message", f)


HANDLERS = {
    "learn": cmd_learn,
    "majix": cmd_majix,
    "lsd": cmd_lsd,
    "entropy-check": cmd_entropy_check,
    "oracle": cmd_oracle,
}


def run_command(cfg: ExperimentConfig, stdout=None, stderr=None) -> int:
    """Run one command; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    rep = Report()
    try:
        if cfg.seed is not None and not 0 <= cfg.seed < 2**64:
            raise InputError("--seed must be a 64-bit unsigned integer")
        if cfg.trials is not None and cfg.trials < 1:
            raise InputError("--trials must be positive")
        if cfg.epsilon is not None:
            LearnerConfig(cfg.epsilon)
        HANDLERS[cfg.command](cfg, rep)
    except (InputError, InstanceSyntaxError, InstanceInvariantError, DimensionCapError, FileNotFoundError,
            ContractViolation, ProtocolInvariantError, proofs.InvalidInstanceError, ValueError) as exc:
        stderr.write(f"qoneway {cfg.command}: input error: {exc}\n")
        return EXIT_INPUT
    texts = {name: render_table(cfg, name, cols, rows) for name, (cols, rows) in rep.tables.items()}
    out_dir = Path(cfg.out) if cfg.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in texts.items():
            (out_dir / f"{name}.csv").write_text(text)
    else:
        stdout.write("\n".join(texts.values()))
    if not rep.failures:
        return EXIT_PASS
    for msg in rep.failures:
        stderr.write(f"qoneway {cfg.command}: FAIL {msg}\n")
    if rep.replay is not None:
        replay_path = (out_dir or Path.cwd()) / f"replay-{cfg.command}.txt"
        obj = rep.replay
        text = format_instance(obj)
        replay_path.write_text("".join(f"# {line}\n" for line in cfg.header()) + text)
        stderr.write(f"qoneway {cfg.command}: replay file written to {replay_path}\n")
    return EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="64-bit seed (required by randomized commands)")
    common.add_argument("--epsilon", type=float, help="learner error parameter override")
    common.add_argument("--trials", type=int, help="trial, sample or protocol count")
    common.add_argument("--out", help="directory for CSV reports (default: stdout)")
    common.add_argument("--dim-cap", type=int, default=DEFAULT_DIM_CAP, help="largest Hilbert-space dimension allowed")
    common.add_argument("--exact-limit", type=int, default=DEFAULT_EXACT_LIMIT, help="largest component coloured exactly")
    parser = argparse.ArgumentParser(prog="qoneway", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("instance", nargs="?", help="instance file or bundled instance name")
        if name == "entropy-check":
            p.add_argument("--replay", help="re-run the checks on a [states] replay file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    cfg = ExperimentConfig(
        command=args.command,
        instance=args.instance,
        seed=args.seed,
        epsilon=args.epsilon,
        trials=args.trials,
        out=args.out,
        dim_cap=args.dim_cap,
        exact_limit=args.exact_limit,
        replay=getattr(args, "replay", None),
    )
    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
