"""Experiment harness: build, verify, spectrum, and compare subcommands.

Exit codes: 0 all checks pass, 1 verification failure, 2 input error.
JSON reports are emitted with sorted keys so identical commands and seeds
produce byte-identical bytes; --deterministic zeroes the wall-clock
timings, which are otherwise the only nonreproducible field.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from .blockenc import build_ancilla_efficient_Q, extract_block, verify_encoding
from .cnf import load_dimacs
from .errors import BoundViolated, NotErgodic, ParwalkError
from .markov import (
    check_detailed_balance,
    discriminant,
    gibbs_distribution,
    lazy,
    spectral_gaps,
    stationary_distribution,
)
from .models import build_cnf, build_hypercube
from .parchain import (
    acceptance_matrix,
    decompose_discriminant,
    glauber,
    metropolis,
    transition_matrix,
)
from .spectra import eigenbasis_embedding, phase_gap_check, walk_spectrum
from .szegedy import ancilla_comparison, comparison_counts, par_walk, standard_walk

DEFAULT_CAP = 6
EXTRACT_TOL_DEFAULT = 1e-9
DECOMP_TOL = 1e-10
WALK_TOL = 1e-10
BALANCE_TOL = 1e-12
STATIONARY_TOL = 1e-10


def _rule(name: str):
    return metropolis() if name == "metropolis" else glauber()


class _Timer:
    def __init__(self, deterministic: bool):
        self.deterministic = deterministic
        self.timings = {}

    def time(self, label: str, fn):
        t0 = time.perf_counter()
        out = fn()
        ms = 1000.0 * (time.perf_counter() - t0)
        self.timings[label] = 0.0 if self.deterministic else round(ms, 3)
        return out


def _build_bundle(args, need_matrices: bool):
    """Model echo plus (model, prop), the latter None for counts-only."""
    if args.model == "hypercube":
        if args.n is None:
            raise ParwalkError("hypercube models need --n")
        levels = args.n + 1 if args.energy == "hamming" else args.levels
        if levels is None:
            raise ParwalkError("random energies need --B")
        echo = {
            "source": "hypercube",
            "n": int(args.n),
            "states": 1 << args.n,
            "energy": args.energy,
            "levels": int(levels),
            "seed": int(args.seed),
            "beta": float(args.beta),
            "acceptance": args.acceptance,
        }
        if not need_matrices:
            return echo, None, None
        _check_cap(args, args.n)
        model, prop = build_hypercube(
            args.n, energy=args.energy, levels=levels, seed=args.seed, beta=args.beta
        )
        return echo, model, prop
    if args.cnf_file is None:
        raise ParwalkError("cnf models need --cnf-file")
    formula = load_dimacs(args.cnf_file)
    echo = {
        "source": "cnf",
        "path": args.cnf_file,
        "n": int(formula.num_vars),
        "states": 1 << formula.num_vars,
        "energy": "violated-clauses",
        "levels": int(formula.num_clauses + 1),
        "seed": int(args.seed),
        "beta": float(args.beta),
        "acceptance": args.acceptance,
    }
    if not need_matrices:
        return echo, None, None
    _check_cap(args, formula.num_vars)
    model, prop = build_cnf(formula, beta=args.beta)
    return echo, model, prop


def _check_cap(args, n: int):
    cap = DEFAULT_CAP if args.max_n is None else args.max_n
    if args.max_n is not None:
        walk_bytes = (2 * (1 << (2 * args.max_n))) ** 2 * 8
        print(
            f"cap raised to n={args.max_n}: largest dense walk "
            f"~{walk_bytes / 2**20:.0f} MiB",
            file=sys.stderr,
        )
    if n > cap:
        raise ParwalkError(
            f"n={n} exceeds the dense-build cap {cap}; raise it with --max-n"
        )


def _faulted_deviation(dec) -> float:
    """Test hook: perturb the accept table at a live proposal entry and
    recompose against Q."""
    ga = dec.ga.copy()
    off = dec.s * (1.0 - np.eye(dec.s.shape[0]))
    ys, xs = np.nonzero(off)
    if ys.size:
        y, x = ys[0], xs[0]
        ga[y, x] += 1e-6
        ga[x, y] += 1e-6
    return float(np.abs(ga * dec.s + dec.r - dec.q).max())


def _spectrum_quantities(dec, model, prop, rule):
    """Embed the chain (lazy when periodic) and return gap data."""
    report = spectral_gaps(dec.q)
    if report.periodic:
        a = acceptance_matrix(model, rule)
        p_lazy = lazy(transition_matrix(prop, a))
        q_used = discriminant(p_lazy, gibbs_distribution(model))
        used = spectral_gaps(q_used)
        was_lazy = True
    else:
        q_used = dec.q
        used = report
        was_lazy = False
    emb = eigenbasis_embedding(q_used)
    spec = walk_spectrum(emb, q_used)
    return {
        "delta": float(used.delta),
        "delta_plus": float(used.delta_plus),
        "phase_gap": float(spec.phase_gap),
        "lazy": was_lazy,
    }, q_used, used, emb, spec


def _emit(args, report: dict) -> None:
    payload = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    if args.json:
        sys.stdout.write(payload)
    else:
        _print_table(report)


def _print_table(report: dict, indent: str = "") -> None:
    for key in sorted(report):
        val = report[key]
        if isinstance(val, dict):
            print(f"{indent}{key}:")
            _print_table(val, indent + "  ")
        else:
            print(f"{indent}{key}: {val}")


def _run_report(args):
    """Shared build/verify pipeline. Returns (report, failures)."""
    timer = _Timer(args.deterministic)
    echo, model, prop = _build_bundle(args, need_matrices=True)
    failures = []

    rule = _rule(args.acceptance)
    dec = timer.time("chain", lambda: decompose_discriminant(model, prop, rule))
    decomp_dev = float(dec.deviation)
    if args.inject_fault:
        decomp_dev = _faulted_deviation(dec)
    if decomp_dev > DECOMP_TOL:
        failures.append(
            ("DecompositionMismatch",
             f"(G(.)A)(.)S + R deviates from Q by {decomp_dev:.3e}")
        )

    pi = gibbs_distribution(model)
    p = transition_matrix(prop, acceptance_matrix(model, rule))
    if not check_detailed_balance(p, pi, tol=BALANCE_TOL):
        failures.append(
            ("NotReversible", f"detailed balance fails at {BALANCE_TOL}")
        )

    deviations = {
        "decomposition": {"value": decomp_dev, "tol": DECOMP_TOL},
        "extraction": None,
        "tst": None,
        "par_tst": None,
    }
    ancillas = {"szegedy": None, "paper": None, "logical": None}
    gamma = None

    counts = comparison_counts(model.n, prop.kappa, model.levels)
    ancillas["szegedy"] = counts.szegedy_qubits
    ancillas["paper"] = counts.paper_qubits

    if args.construction in ("compressed", "both"):
        be = timer.time(
            "encoding", lambda: build_ancilla_efficient_Q(model, prop, rule)
        )
        got = extract_block(be)
        ext_dev = float(np.abs(got - dec.q).max())
        deviations["extraction"] = {"value": ext_dev, "tol": args.tol}
        ancillas["logical"] = be.anc_qubits
        gamma = float(be.gamma)
        if ext_dev > args.tol:
            failures.append(
                ("DecompositionMismatch", f"extraction deviates by {ext_dev:.3e}")
            )
        enc_rep = verify_encoding(be, dec.q, tol=args.tol)
        if not enc_rep.passed:
            failures.append(
                ("DecompositionMismatch",
                 f"encoding deviation {enc_rep.max_abs_dev:.3e}, "
                 f"unitary deviation {enc_rep.unitary_dev:.3e}")
            )

    spectrum, q_used, gaps_used, emb, spec = timer.time(
        "spectrum", lambda: _spectrum_quantities(dec, model, prop, rule)
    )
    tst_dev = float(np.abs(emb.t.T @ emb.s @ emb.t - q_used).max())
    deviations["tst"] = {"value": tst_dev, "tol": args.tol}
    if tst_dev > args.tol:
        failures.append(("DecompositionMismatch", f"tst deviates by {tst_dev:.3e}"))
    try:
        phase_gap_check(spec, gaps_used.delta_plus)
    except BoundViolated as exc:
        failures.append(("BoundViolated", str(exc)))

    if args.construction in ("szegedy", "both"):
        a = acceptance_matrix(model, rule)
        walk = timer.time("walks", lambda: par_walk(prop, a))
        got = walk.t.T @ walk.reflector @ walk.t
        par_dev = float(np.abs(got - dec.q).max())
        deviations["par_tst"] = {"value": par_dev, "tol": WALK_TOL}
        if par_dev > WALK_TOL:
            failures.append(
                ("DecompositionMismatch", f"par_tst deviates by {par_dev:.3e}")
            )

    try:
        pi_fix = stationary_distribution(p)
        stat_dev = float(np.abs(pi_fix.probs - pi.probs).max())
        if stat_dev > STATIONARY_TOL:
            failures.append(
                ("NotErgodic", f"stationary vs gibbs deviates by {stat_dev:.3e}")
            )
    except NotErgodic as exc:
        failures.append(("NotErgodic", str(exc)))

    report = {
        "model": echo,
        "ancillas": ancillas,
        "gamma": gamma,
        "deviations": deviations,
        "spectrum": spectrum,
        "pass": not failures,
        "timings_ms": timer.timings,
    }
    return report, failures


def cmd_build(args) -> int:
    report, _ = _run_report(args)
    _emit(args, report)
    return 0


def cmd_verify(args) -> int:
    report, failures = _run_report(args)
    _emit(args, report)
    if failures:
        name, msg = failures[0]
        print(f"FAIL {name}: {msg}", file=sys.stderr)
        return 1
    return 0


def cmd_spectrum(args) -> int:
    echo, model, prop = _build_bundle(args, need_matrices=True)
    rule = _rule(args.acceptance)
    dec = decompose_discriminant(model, prop, rule)
    spectrum, q_used, gaps_used, emb, spec = _spectrum_quantities(
        dec, model, prop, rule
    )
    lines = ["index,lambda,predicted_phase,measured_phase,abs_err"]
    for i, (lam, pred, meas) in enumerate(
        zip(spec.lambdas, spec.predicted, spec.measured)
    ):
        err = abs(float(meas) - float(pred))
        lines.append(f"{i},{float(lam)!r},{float(pred)!r},{float(meas)!r},{err:.3e}")
    lines.append(f"delta,{float(gaps_used.delta)!r}")
    lines.append(f"delta_plus,{float(gaps_used.delta_plus)!r}")
    lines.append(f"phase_gap,{spec.phase_gap!r}")
    lines.append(f"sqrt_2_delta_plus,{math.sqrt(2.0 * gaps_used.delta_plus)!r}")
    payload = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return 0


def cmd_compare(args) -> int:
    echo, model, prop = _build_bundle(args, need_matrices=not args.counts_only)
    if args.counts_only:
        kappa = echo["n"]
        counts = comparison_counts(echo["states"], kappa, echo["levels"])
        ancillas = {
            "szegedy": counts.szegedy_qubits,
            "paper": counts.paper_qubits,
            "logical": None,
        }
        gammas = {"szegedy": 1.0, "paper": counts.paper_gamma}
    else:
        rule = _rule(args.acceptance)
        comp = ancilla_comparison(model, prop, rule)
        ancillas = {
            "szegedy": comp.szegedy_qubits,
            "paper": comp.paper_qubits,
            "logical": comp.logical_qubits,
        }
        gammas = {"szegedy": comp.szegedy_gamma, "paper": comp.paper_gamma}
    report = {"model": echo, "ancillas": ancillas, "gamma": gammas}
    if args.json or args.out:
        _emit(args, report)
        return 0
    logical = ancillas["logical"]
    print("construction   extra qubits   gamma")
    print(f"szegedy        {ancillas['szegedy']:<14d} {gammas['szegedy']}")
    print(f"compressed     {ancillas['paper']:<14d} {gammas['paper']}")
    print(f"built          {'-' if logical is None else logical}")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parwalk",
        description="Ancilla-efficient discriminant encodings of "
        "propose-accept/reject chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("build", cmd_build),
        ("verify", cmd_verify),
        ("spectrum", cmd_spectrum),
        ("compare", cmd_compare),
    ):
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        p.add_argument("--model", choices=("hypercube", "cnf"), default="hypercube")
        p.add_argument("--n", type=int, default=3, help="hypercube bit count")
        p.add_argument(
            "--energy", choices=("hamming", "random"), default="hamming"
        )
        p.add_argument("--B", type=int, dest="levels", help="energy level count")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--beta", type=float, default=1.0)
        p.add_argument(
            "--acceptance", choices=("metropolis", "glauber"), default="metropolis"
        )
        p.add_argument(
            "--construction",
            choices=("compressed", "szegedy", "both"),
            default="both",
        )
        p.add_argument("--tol", type=float, default=EXTRACT_TOL_DEFAULT)
        p.add_argument("--cnf-file", help="DIMACS CNF path for --model cnf")
        p.add_argument(
            "--max-n", type=int, help="raise the dense-build cap (prints estimate)"
        )
        p.add_argument("--out", help="write the report or CSV here")
        p.add_argument("--json", action="store_true", help="JSON on stdout")
        p.add_argument(
            "--deterministic",
            action="store_true",
            help="zero the timing fields for byte-stable reports",
        )
        p.add_argument("--counts-only", action="store_true")
        p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParwalkError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
