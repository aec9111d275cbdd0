"""Command-line entry point.

Machine-readable output (JSON, CSV, or a bare number) goes to stdout or
the path given with --out; human summaries go to stderr.  Every randomized
subcommand takes --seed (fixed default, so bare invocations reproduce) and
the same seed always produces byte-identical primary output.  Exit codes:
0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

import numpy as np

from . import _kernels, biascheck, dense, gates, serial
from .benchmark import (
    CoherentX,
    ImperfectBias,
    Miscalibrated,
    PerfectBias,
    compare,
    predict,
    simulate_experiment,
    theorem1_decompose,
)
from .builder import HadamardTestSpec, NoiseAssignment, build
from .circuit import LocalGate, PrepState, XDiag, validate_circuit
from .fastsim import EstimationPlan, estimate_overlap, hoeffding_shots
from .noise import (
    ConstantNV,
    ConstantP,
    DeltaPower,
    SqrtLogDelta,
    SqrtLogNV,
    attenuation,
    direct_measure_brute_force,
    direct_measure_scaling,
    overhead_schedule,
    sample_complexity,
)

DEFAULT_SEED = 12345


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        print(text)


def _emit_json(obj: Any, out_path: str | None) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True), out_path)


def _load_circuit(path: str):
    c = serial.load_circuit(path)
    report = validate_circuit(c)
    if not report.ok:
        raise ValueError("invalid circuit: " + "; ".join(report.violations))
    return c


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_validate(args) -> int:
    c = serial.load_circuit(args.circuit)
    report = validate_circuit(c)
    _emit_json({"valid": report.ok, "violations": report.violations}, args.out)
    _say("valid" if report.ok else f"{len(report.violations)} violation(s)")
    return 0


def _cmd_exact(args) -> int:
    c = _load_circuit(args.circuit)
    data_prep, b_gates, u_gates = theorem1_decompose(c)
    overlap = dense.exact_overlap(data_prep, b_gates, u_gates)
    y, z = dense.overlap_to_yz(overlap)
    _emit_json(
        {"re": overlap.real, "im": overlap.imag, "y": y, "z": z}, args.out
    )
    _say(f"<psi|U|psi> = {overlap.real:+.12g} {overlap.imag:+.12g}i")
    return 0


def _cmd_estimate(args) -> int:
    c = _load_circuit(args.circuit)
    data_prep, b_gates, u_gates = theorem1_decompose(c)
    if args.shots is not None:
        plan = EstimationPlan(args.eps, args.delta, args.shots, args.seed)
    else:
        plan = EstimationPlan.from_accuracy(args.eps, args.delta, args.seed)
    result = estimate_overlap(b_gates, u_gates, data_prep, plan)
    # the elapsed time is deliberately left out of the primary output so that
    # identical seeded invocations stay byte-identical
    _emit_json(
        {
            "mean_re": result.mean.real,
            "mean_im": result.mean.imag,
            "stderr_re": result.stderr_re,
            "stderr_im": result.stderr_im,
            "n_shots": result.n_shots,
        },
        args.out,
    )
    _say(
        f"estimated {result.mean.real:+.6f} {result.mean.imag:+.6f}i from "
        f"{result.n_shots} shots in {result.seconds:.3f}s [{_kernels.backend_name()}]"
    )
    return 0


def _gate_entry_to_local(entry: dict, default_kind: str | None = None) -> LocalGate:
    entry = dict(entry)
    if "kind" not in entry and default_kind:
        entry["kind"] = default_kind
    return serial.gate_from_jsonable(entry).gate


def _cmd_build(args) -> int:
    with open(args.spec, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    n = int(raw["n"])
    prep_entries = raw.get("prep")
    if prep_entries is None:
        prep = PrepState.zeros(n)
    else:
        prep = PrepState(
            tuple((float(e["theta"]), float(e.get("phi", 0.0))) for e in prep_entries)
        )
    noise_raw = raw.get("noise", {})
    p_v = noise_raw.get("p_v", 0.0)
    noise = NoiseAssignment(
        p_prep=float(noise_raw.get("p_prep", 0.0)),
        p_meas=float(noise_raw.get("p_meas", 0.0)),
        p_v=tuple(p_v) if isinstance(p_v, list) else float(p_v),
        p_cxx=float(noise_raw.get("p_cxx", 0.0)),
        p_data=float(noise_raw.get("p_data", 0.0)),
    )
    spec = HadamardTestSpec(
        n=n,
        prep=prep,
        b_gates=[_gate_entry_to_local(e) for e in raw.get("b_gates", [])],
        v_gates=[_gate_entry_to_local(e, "xdiag") for e in raw.get("v_gates", [])],
        w_gates=[_gate_entry_to_local(e, "xdiag") for e in raw.get("w_gates", [])],
        parallel=int(raw.get("parallel", 0)),
        noise=noise,
        basis=str(raw.get("basis", "Z")),
        identity_noise=raw.get("identity_noise"),
    )
    circuit, report = build(spec)
    serial.save_circuit(circuit, args.out_circuit)
    report_obj = {
        "L_n": report.l_n,
        "N_n": report.n_n,
        "N_I": report.n_identity,
        "depth": report.depth,
        "total_gates": report.total_gates,
        "N_V": report.n_v,
        "N_W": report.n_w,
    }
    _emit_json(report_obj, args.report)
    _say(f"wrote circuit with {report.total_gates} gates to {args.out_circuit}")
    return 0


def _cmd_alpha(args) -> int:
    c = _load_circuit(args.circuit)
    report = attenuation(c)
    _emit_json(
        {
            "alpha": report.alpha,
            "n_noisy": report.n_noisy,
            "n_identity": report.n_identity,
            "factors": [
                {"label": label, "p": p, "factor": f} for label, p, f in report.factors
            ],
        },
        args.out,
    )
    _say(f"alpha = {report.alpha:.12g} over {len(report.factors)} locations")
    return 0


def _cmd_samples(args) -> int:
    n = sample_complexity(args.eps, args.delta, args.alpha)
    _emit(str(n), args.out)
    _say(f"{n} repetitions for eps={args.eps}, delta={args.delta}, alpha={args.alpha}")
    return 0


def _parse_p_rule(text: str):
    kind, _, rest = text.partition(":")
    if kind == "const":
        return ConstantP(float(rest))
    if kind == "power":
        a, _, k = rest.partition(",")
        return DeltaPower(float(a), float(k))
    if kind == "sqrtlog":
        return SqrtLogDelta()
    raise ValueError(f"unknown p rule {text!r}; use const:P, power:A,K or sqrtlog")


def _parse_nv_rule(text: str):
    kind, _, rest = text.partition(":")
    if kind == "const":
        return ConstantNV(int(rest))
    if kind == "sqrtlog":
        return SqrtLogNV()
    raise ValueError(f"unknown N_V rule {text!r}; use const:N or sqrtlog")


def _cmd_scaling(args) -> int:
    lo, _, hi = args.n_pow2.partition(":")
    n_list = [2**i for i in range(int(lo), int(hi) + 1)]
    sched = overhead_schedule(
        _parse_p_rule(args.p_rule),
        _parse_nv_rule(args.nv_rule),
        n_list,
        args.eps,
        args.delta,
        extra_locations=args.extra_locations,
    )
    if args.format == "json":
        _emit_json(
            {
                "rows": [
                    {
                        "n": int(n),
                        "p_n": p,
                        "N_V": nv,
                        "alpha": a,
                        "C_n": cn,
                    }
                    for n, p, nv, a, cn in zip(
                        sched.n, sched.p_n, sched.n_v, sched.alpha, sched.c_n
                    )
                ],
                "slope": sched.slope,
                "extra_locations": sched.extra_locations,
            },
            args.out,
        )
    else:
        lines = ["n,p_n,N_V,alpha,C_n"]
        for n, p, nv, a, cn in zip(sched.n, sched.p_n, sched.n_v, sched.alpha, sched.c_n):
            lines.append(f"{int(n)},{p:.12g},{nv:.12g},{a:.12g},{cn:.12g}")
        _emit("\n".join(lines), args.out)
    _say(f"fitted growth exponent {sched.slope:.4f}")
    return 0


def _cmd_meas_demo(args) -> int:
    report = direct_measure_scaling(args.n, args.p)
    _emit(f"{report.p_correct:.12g}", args.out)
    if args.n <= 20:
        brute = direct_measure_brute_force(args.n, args.p)
        _say(
            f"p_correct = {report.p_correct:.12g} "
            f"(brute-force binomial sum agrees to {abs(brute - report.p_correct):.2e})"
        )
    else:
        _say(f"p_correct = {report.p_correct:.12g}")
    return 0


_NAMED_CHECK_MATRICES = {
    "hadamard": lambda: gates.H.copy(),
    "x": lambda: gates.X.copy(),
    "y": lambda: gates.Y.copy(),
    "z": lambda: gates.Z.copy(),
    "cnot": lambda: gates.CNOT.copy(),
    "toffoli": lambda: gates.TOFFOLI.copy(),
    "toffoli_prime": lambda: gates.TOFFOLI_PRIME.copy(),
    "cxx": lambda: gates.CXX.copy(),
}


def _load_matrix(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        rows = json.load(fh)
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def _check_gate_matrix(args) -> np.ndarray:
    if args.named:
        if args.named not in _NAMED_CHECK_MATRICES:
            raise ValueError(
                f"unknown gate {args.named!r}; choices: {sorted(_NAMED_CHECK_MATRICES)}"
            )
        return _NAMED_CHECK_MATRICES[args.named]()
    if args.xrot is not None:
        return gates.x_rotation(args.xrot)
    if args.matrix:
        return _load_matrix(args.matrix)
    raise ValueError("check-gate needs --named, --xrot or --matrix")


def _pauli_name(m: np.ndarray) -> str | None:
    for name, p in (("I", gates.I2), ("X", gates.X), ("Y", gates.Y), ("Z", gates.Z)):
        for phase, tag in ((1, ""), (-1, "-")):
            if np.max(np.abs(m - phase * p)) < 1e-9:
                return tag + name
    return None


def _cmd_check_gate(args) -> int:
    m = _check_gate_matrix(args)
    x_type = biascheck.is_x_type(m, args.tol)
    cert = biascheck.certify_bias_preserving(m, args.tol)
    obj: dict[str, Any] = {
        "name": args.named or ("xrot" if args.xrot is not None else args.matrix),
        "x_type": x_type,
        "bias_preserving": cert.ok,
    }
    if cert.ok:
        obj["certificate"] = {
            "perm": [int(v) for v in cert.perm],
            "phases": [float(v) for v in cert.phases],
            "global_phase": cert.global_phase,
        }
        summary = "bias-preserving" + ("; X-type" if x_type else "; not X-type")
    else:
        ce = cert.counterexample
        k = cert.arity
        image = None
        if len(ce.mask_positions) <= k:
            ops = [gates.X if j in ce.mask_positions else gates.I2 for j in range(k)]
            conj = m @ gates.kron(*ops) @ m.conj().T
            image = _pauli_name(conj) if k == 1 else None
        detail = ce.describe(k)
        if image:
            detail = f"conjugating X gives {image}, not X-type"
        obj["counterexample"] = {
            "mask_positions": list(ce.mask_positions),
            "entry": list(ce.entry),
            "value": [ce.value.real, ce.value.imag],
        }
        summary = f"NOT bias-preserving; counterexample: {detail}"
    if args.axis:
        axis = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}.get(
            args.axis.lower()
        )
        if axis is None:
            parts = [float(v) for v in args.axis.split(",")]
            axis = (parts[0], parts[1], parts[2])
        check = biascheck.check_controlled(axis, m)
        obj["controlled"] = {"axis": list(axis), "ok": check.ok, "reason": check.reason}
        summary += f"; controlled[{args.axis}]: {'pass' if check.ok else 'fail'} ({check.reason})"
    obj["summary"] = summary
    _emit_json(obj, args.out)
    _say(summary)
    return 0


def _cmd_propagate(args) -> int:
    m = _check_gate_matrix(args)
    mask = tuple(int(v) for v in args.mask.split(",")) if args.mask else ()
    result = biascheck.propagate_error(m, mask, tol=args.tol)
    obj: dict[str, Any] = {
        "mask_positions": list(result.mask_positions),
        "x_type": result.x_type,
        "is_pauli": result.is_pauli,
    }
    if result.table is not None:
        obj["table"] = [[v.real, v.imag] for v in result.table]
    if result.pauli_mask is not None:
        obj["pauli_mask"] = list(result.pauli_mask)
    if result.witness is not None:
        r, c, v = result.witness
        obj["witness"] = {"entry": [r, c], "value": [v.real, v.imag]}
    _emit_json(obj, args.out)
    if result.x_type:
        kind = (
            f"Pauli X on positions {list(result.pauli_mask)}"
            if result.is_pauli
            else "X-type, not Pauli"
        )
        _say(f"propagates to an X-basis diagonal operator ({kind})")
    else:
        _say("propagation leaves the X-type class")
    return 0


def _parse_scenario(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    variant = raw.get("variant", "perfect_bias")
    if variant == "perfect_bias":
        return PerfectBias()
    if variant == "imperfect_bias":
        return ImperfectBias(float(raw.get("p_z", 0.0)), float(raw.get("p_y", 0.0)))
    if variant == "miscalibrated":
        return Miscalibrated(float(raw["multiplier"]))
    if variant == "coherent_x":
        return CoherentX(float(raw["theta"]))
    raise ValueError(f"unknown scenario variant {variant!r}")


def _cmd_benchmark(args) -> int:
    c = _load_circuit(args.circuit)
    scenario = _parse_scenario(args.scenario)
    counts = simulate_experiment(c, scenario, args.shots, args.seed, backend=args.backend)
    prediction = predict(c, seed=args.seed)
    verdict = compare(counts, prediction, args.delta)
    _emit_json(
        {
            "consistent": verdict.consistent,
            "est_y": verdict.est_y,
            "est_z": verdict.est_z,
            "pred_ay": verdict.pred_ay,
            "pred_az": verdict.pred_az,
            "halfwidth": verdict.halfwidth,
            "hints": [{"hint": h, "evidence": e} for h, e in verdict.hints],
            "shots": verdict.shots,
        },
        args.out,
    )
    tag = "CONSISTENT" if verdict.consistent else "INCONSISTENT"
    hint_tags = ",".join(h for h, _ in verdict.hints) or "none"
    _say(f"{tag} (hints: {hint_tags})")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hadbias",
        description="Biased-noise Hadamard tests: build, simulate, certify, benchmark.",
    )
    parser.add_argument("--threads", type=int, default=0, help="bound the worker count")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", help="write the primary output to this path")

    p = sub.add_parser("validate", help="check a circuit file for violations")
    p.add_argument("--circuit", required=True, help="circuit JSON path")
    add_out(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("exact", help="dense-oracle overlap <psi|U|psi> of a circuit")
    p.add_argument("--circuit", required=True)
    add_out(p)
    p.set_defaults(func=_cmd_exact)

    p = sub.add_parser("estimate", help="sampled classical estimate of the overlap")
    p.add_argument("--circuit", required=True)
    p.add_argument("--eps", type=float, default=0.05, help="target additive accuracy")
    p.add_argument("--delta", type=float, default=0.05, help="failure probability")
    p.add_argument("--shots", type=int, default=None, help="override the shot count")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    add_out(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("build", help="build a noise-resilient Hadamard-test circuit")
    p.add_argument("--spec", required=True, help="builder spec JSON path")
    p.add_argument("--out-circuit", required=True, help="circuit JSON output path")
    p.add_argument("--report", help="write the build report here instead of stdout")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("alpha", help="attenuation report of a circuit")
    p.add_argument("--circuit", required=True)
    add_out(p)
    p.set_defaults(func=_cmd_alpha)

    p = sub.add_parser("samples", help="Hoeffding repetition count")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    add_out(p)
    p.set_defaults(func=_cmd_samples)

    p = sub.add_parser("scaling", help="scale-dependent overhead schedule (CSV)")
    p.add_argument("--p-rule", required=True, help="const:P | power:A,K | sqrtlog")
    p.add_argument("--nv-rule", required=True, help="const:N | sqrtlog")
    p.add_argument("--n-pow2", default="4:20", help="range of exponents LO:HI for n=2^i")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--extra-locations", type=int, default=4)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    add_out(p)
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("meas-demo", help="noisy direct-measurement success probability")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    add_out(p)
    p.set_defaults(func=_cmd_meas_demo)

    p = sub.add_parser("check-gate", help="certify a gate matrix")
    p.add_argument("--named", help="|".join(sorted(_NAMED_CHECK_MATRICES)))
    p.add_argument("--xrot", type=float, help="check exp(i*theta*X)")
    p.add_argument("--matrix", help="JSON file with rows of [re,im] pairs")
    p.add_argument("--axis", help="also run the controlled-gate check for this axis")
    p.add_argument("--tol", type=float, default=1e-8)
    add_out(p)
    p.set_defaults(func=_cmd_check_gate)

    p = sub.add_parser("propagate", help="push an X mask through a gate")
    p.add_argument("--named", help="|".join(sorted(_NAMED_CHECK_MATRICES)))
    p.add_argument("--xrot", type=float)
    p.add_argument("--matrix", help="JSON file with rows of [re,im] pairs")
    p.add_argument("--mask", default="", help="comma-separated support positions")
    p.add_argument("--tol", type=float, default=1e-9)
    add_out(p)
    p.set_defaults(func=_cmd_propagate)

    p = sub.add_parser("benchmark", help="simulated experiment vs classical prediction")
    p.add_argument("--circuit", required=True)
    p.add_argument("--scenario", required=True, help="scenario JSON path")
    p.add_argument("--shots", type=int, required=True, help="shots per basis")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--backend", choices=("small", "large"), default="small")
    add_out(p)
    p.set_defaults(func=_cmd_benchmark)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads:
        _kernels.set_num_threads(args.threads)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        _say(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
