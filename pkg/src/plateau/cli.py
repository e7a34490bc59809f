"""Command-line entry point: ``plateau <command> [flags]``.

Exit codes: 0 success, 1 a verification tolerance failed, 2 bad flags or
input, 3 resource guard refused the run.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import __version__
from .experiment import (
    MAX_QUBITS,
    OBSERVABLES,
    ExperimentConfig,
    ResourceGuardError,
    make_observable,
    read_csv,
    run_sweep,
    write_csv,
    write_sidecar,
)
from .gradient import grad_commutator, grad_finite_difference, grad_parameter_shift
from .haar import (
    check_first_moment,
    check_second_moment,
    frame_potential,
    haar_frame_potential,
    haar_twirl,
    moments_to_json,
    predict_variance_case3,
)
from .plotting import KINDS, write_plot
from .rpqc import ParamIndex, execute_batch, sample_arrays, sample_rpqc
from .statevector import PauliString

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_int_list(text: str) -> list[int]:
    """Parse ``"a"``, ``"a:b"``, ``"a:b:step"`` or comma lists of those.

    Ranges include ``b`` whenever ``b - a`` is a multiple of ``step``.
    """
    values: list[int] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise UsageError(f"empty entry in {text!r}")
        parts = item.split(":")
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise UsageError(f"not an integer range: {item!r}") from None
        if len(nums) == 1:
            values.append(nums[0])
            continue
        if len(nums) > 3:
            raise UsageError(f"range must be a:b or a:b:step, got {item!r}")
        a, b = nums[0], nums[1]
        step = nums[2] if len(nums) == 3 else 1
        if step <= 0 or b < a:
            raise UsageError(f"range needs a <= b and step > 0, got {item!r}")
        values.extend(range(a, b + 1, step))
    return values


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_sweep(args) -> int:
    qubits = parse_int_list(args.qubits)
    layers = parse_int_list(args.layers)
    if any(n > MAX_QUBITS for n in qubits):
        print(f"error: refusing qubit counts above {MAX_QUBITS} (dense statevector memory)",
              file=sys.stderr)
        return EXIT_GUARD
    try:
        config = ExperimentConfig(
            qubit_list=qubits,
            layer_list=layers,
            samples_per_point=args.samples,
            observable=args.observable,
            grad_param=args.grad_param,
            master_seed=args.seed,
            method=args.method,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    def progress(r):
        if not args.quiet:
            print(f"n={r.n_qubits:<3d} L={r.n_layers:<4d} mean={r.grad_mean:+.3e} "
                  f"var={r.grad_var:.4e} +- {r.var_stderr:.1e} (2-design {r.pred_var_2design:.4e})",
                  file=sys.stderr)

    try:
        reports = run_sweep(config, workers=args.workers, progress=progress)
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    write_csv(reports, args.out)
    sidecar = write_sidecar(config, args.out)
    if not args.quiet:
        print(f"wrote {args.out} ({len(reports)} rows) and {sidecar}", file=sys.stderr)
    return EXIT_OK


def cmd_predict(args) -> int:
    qubits = parse_int_list(args.qubits)
    if min(qubits) < 2 and args.observable == "zz":
        raise UsageError("Z1 Z2 needs at least 2 qubits")
    if min(qubits) < 1:
        raise UsageError("qubit counts must be positive")
    print("n_qubits,pred_var_2design")
    for n in qubits:
        value = predict_variance_case3(make_observable(args.observable, n), n).value
        print(f"{n},{value!r}")
    return EXIT_OK


def cmd_check_haar(args) -> int:
    rng = np.random.default_rng(args.seed)
    dim, tol = args.dim, args.tol
    if dim < 2 or dim > 8:
        raise UsageError("--dim must be between 2 and 8")
    try:
        first = check_first_moment(dim, args.samples, rng, min_samples=1)
        second = check_second_moment(dim, args.samples, rng, min_samples=1)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    operator = np.diag(np.arange(1, dim + 1)).astype(complex)
    twirl = haar_twirl(operator, args.samples, rng)
    twirl_err = float(np.abs(twirl - np.trace(operator) / dim * np.eye(dim)).max())

    by_index = {e.indices: e for e in second}
    rows = [
        ("first moment, max over all tuples", max(e.abs_error for e in first)),
        ("second moment, max over all tuples", max(e.abs_error for e in second)),
        ("E|U00|^4", by_index[(0,) * 8].abs_error),
        ("E|U00|^2|U01|^2", by_index[(0, 0, 0, 1, 0, 0, 0, 1)].abs_error),
        ("E[U00 U11 U01* U10*]", by_index[(0, 0, 1, 1, 0, 1, 1, 0)].abs_error),
        ("twirl U O U^dag = Tr(O)/N I", twirl_err),
    ]
    ok = all(err < tol for _, err in rows)
    print(f"{'check':<40} {'max abs error':>14} {'tol':>9}  status")
    for name, err in rows:
        print(f"{name:<40} {err:>14.3e} {tol:>9.1e}  {_status(err < tol)}")
    if args.json:
        with open(args.json, "w") as f:
            f.write(moments_to_json(first + second))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check_design(args) -> int:
    n, layers, count = args.qubits, args.layers, args.states
    if n < 2 or layers < 1 or count < 2:
        raise UsageError("need --qubits >= 2, --layers >= 1, --states >= 2")
    if n > MAX_QUBITS:
        print(f"error: refusing {n} qubits; limit is {MAX_QUBITS}", file=sys.stderr)
        return EXIT_GUARD
    rng = np.random.default_rng(args.seed)
    draws = [sample_arrays(n, layers, rng) for _ in range(count)]
    codes = np.stack([c for c, _ in draws])
    angles = np.stack([a for _, a in draws])
    states = execute_batch(n, codes, angles)
    dim = 1 << n
    ok = True
    print(f"{'t':>2} {'frame potential':>16} {'Haar value':>12} {'rel. dev':>9}  status")
    for t in (1, 2):
        value = frame_potential(states, t)
        ref = haar_frame_potential(dim, t)
        rel = abs(value - ref) / ref
        ok &= rel < args.tol
        print(f"{t:>2} {value:>16.6e} {ref:>12.6e} {rel:>9.3%}  {_status(rel < args.tol)}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_grad_check(args) -> int:
    if args.max_qubits < 2 or args.max_layers < 1 or args.instances < 1:
        raise UsageError("need --max-qubits >= 2, --max-layers >= 1, --instances >= 1")
    if not 0 < args.step <= 1e-3:
        raise UsageError("--step must be in (0, 1e-3]")
    rng = np.random.default_rng(args.seed)
    worst_exact = worst_fd = 0.0
    for _ in range(args.instances):
        n = int(rng.integers(2, args.max_qubits + 1))
        layers = int(rng.integers(1, args.max_layers + 1))
        spec = sample_rpqc(n, layers, rng)
        k = ParamIndex.from_flat(int(rng.integers(spec.n_params)), n)
        qubits = rng.choice(n, size=min(n, 2), replace=False)
        obs = PauliString({int(q): "XYZ"[int(rng.integers(3))] for q in qubits})
        c = grad_commutator(spec, k, obs)
        worst_exact = max(worst_exact, abs(c - grad_parameter_shift(spec, k, obs)))
        worst_fd = max(worst_fd, abs(c - grad_finite_difference(spec, k, obs, args.step)))
    rows = [
        ("commutator vs parameter shift", worst_exact, args.exact_tol),
        (f"commutator vs finite difference (h={args.step:g})", worst_fd, args.tol),
    ]
    print(f"{'check':<46} {'max abs error':>14} {'tol':>9}  status")
    for name, err, tol in rows:
        print(f"{name:<46} {err:>14.3e} {tol:>9.1e}  {_status(err < tol)}")
    return EXIT_OK if all(err < tol for _, err, tol in rows) else EXIT_FAIL


def cmd_plot(args) -> int:
    try:
        reports = read_csv(args.input)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    try:
        svg, script = write_plot(reports, args.kind, args.out, args.input)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"wrote {svg} and {script}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plateau",
        description="Gradient statistics of random parameterized quantum circuits.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("sweep", help="Monte Carlo gradient-variance sweep to CSV")
    p.add_argument("--qubits", required=True, help="a:b:step, a:b, a or comma list")
    p.add_argument("--layers", required=True, help="a:b:step, a:b, a or comma list")
    p.add_argument("--samples", type=int, default=500, help="circuits per grid point (default 500)")
    p.add_argument("--observable", choices=OBSERVABLES, default="zz")
    p.add_argument("--grad-param", type=int, default=0,
                   help="flat parameter index k = layer*n + qubit (default 0)")
    p.add_argument("--seed", type=_u64, default=0, help="master seed (u64)")
    p.add_argument("--method", choices=["parameter_shift", "commutator", "finite_difference"],
                   default="parameter_shift")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: $PLATEAU_THREADS or CPU count)")
    p.add_argument("--out", required=True, help="output CSV; a .json sidecar is written beside it")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("predict", help="print 2-design plateau variances")
    p.add_argument("--observable", choices=OBSERVABLES, default="zz")
    p.add_argument("--qubits", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("check-haar", help="Monte Carlo check of Haar moment formulas")
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--tol", type=float, default=5e-3)
    p.add_argument("--json", help="write every moment estimate to this JSON file")
    p.set_defaults(func=cmd_check_haar)

    p = sub.add_parser("check-design", help="frame potential of RPQC output states")
    p.add_argument("--qubits", type=int, default=6)
    p.add_argument("--layers", type=int, default=60)
    p.add_argument("--states", type=int, default=2000)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--tol", type=float, default=0.1, help="relative tolerance (default 0.1)")
    p.set_defaults(func=cmd_check_design)

    p = sub.add_parser("grad-check", help="cross-check the three gradient methods")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--max-qubits", type=int, default=6)
    p.add_argument("--max-layers", type=int, default=8)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--step", type=float, default=1e-4, help="finite-difference step")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--exact-tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_grad_check)

    p = sub.add_parser("plot", help="semi-log SVG (plus gnuplot script) from a sweep CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
