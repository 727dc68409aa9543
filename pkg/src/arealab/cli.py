"""``arealab`` command line: one subcommand per experiment, one report per run.

Every run prints a JSON report (schema ``arealab/1``) and, with ``--out DIR``,
writes it to ``DIR/<command>.json`` together with a CSV for sweeps.

Exit status: 0 when every audited inequality holds, 1 when one fails, 2 for
usage errors, 3 when the requested size exceeds a configured cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, constructions, fingerprint, qecc
from .lattice import Lattice, Region, enumerate_cubic_regions
from .state import FeasibilityError, SparseState, renyi_entropy, schmidt_spectrum

SCHEMA = "arealab/1"
MAX_SUPPORT = 1 << 20
TOL = 1e-12

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3

FAMILIES = ("ti-random", "ti-index", "mirror-random", "ghz", "product", "file")


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        out.append(math.inf if tok in ("inf", "infinity") else float(tok))
    return out


def _int_list(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",")]


def _observable(name: str, d: int) -> np.ndarray:
    if name.startswith("proj"):
        level = int(name[4:])
        if not 0 <= level < d:
            raise UsageError(f"observable {name} needs level < {d}")
        return analysis.projector(d, level)
    raise UsageError(f"unknown observable {name!r}; use proj0, proj1, ...")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# State families


def _check_feasible(D: int, L: int, family: str) -> None:
    n = L ** (D - 1)
    if family in ("ti-random", "ti-index", "mirror-random"):
        if n > constructions.ORBIT_CAP:
            raise FeasibilityError(f"sub-lattice of {n} sites exceeds orbit cap {constructions.ORBIT_CAP}")
        if L * 2**n > MAX_SUPPORT:
            raise FeasibilityError(f"support L*2^{n} exceeds cap {MAX_SUPPORT}")


def build_phi(family: str, D: int, L: int, seed: int, index: int = 0, path: str | None = None) -> SparseState:
    """Hyperplane state for a named family; random families draw from ``seed``."""
    _check_feasible(D, L, family)
    shape = (L,) * (D - 1)
    rng = np.random.default_rng(seed)
    if family == "ti-random":
        return constructions.random_span_state(constructions.ti_basis(shape), rng)
    if family == "mirror-random":
        return constructions.random_span_state(constructions.mirror_ti_basis(shape), rng)
    if family == "ti-index":
        basis = constructions.ti_basis(shape)
        if not 0 <= index < len(basis):
            raise UsageError(f"--phi-index must lie in [0, {len(basis)})")
        return basis.state(index)
    if family == "ghz":
        return constructions.ghz_phi(shape)
    if family == "product":
        return constructions.product_phi(shape)
    if family == "file":
        if not path:
            raise UsageError("--family file needs --phi-file")
        return SparseState.load(path)
    raise UsageError(f"unknown family {family!r}")


def _phi_from_args(args, L=None) -> SparseState:
    return build_phi(args.family, args.D, L or args.L, args.seed, args.phi_index, args.phi_file)


# Subcommands. Each returns (result dict, csv rows or None, passed flag).


def cmd_audit(args):
    lattice = Lattice(args.D, args.L)
    psi = constructions.area_law_state(_phi_from_args(args), lattice)
    audit = analysis.area_law_audit(psi, args.max_volume)
    rows = [
        {**{"offset": " ".join(map(str, r.region.offset)), "lengths": " ".join(map(str, r.region.lengths))},
         "schmidt_rank": r.schmidt_rank, "s0": r.s0, "rank_bound": r.rank_bound,
         "boundary": r.boundary, "ok": r.ok}
        for r in audit.records
    ]
    result = audit.to_json()
    result["summary"] = audit.summary()
    return result, rows, audit.passed


def cmd_entropy(args):
    lattice = Lattice(args.D, args.L)
    psi = constructions.area_law_state(_phi_from_args(args), lattice)
    region = Region.parse(args.region) if args.region else Region((0,) * args.D, (1,) * args.D)
    if not region.fits(lattice):
        raise UsageError(f"region {args.region} does not fit the lattice")
    spec = schmidt_spectrum(psi, region)
    values = [(a, renyi_entropy(spec, a)) for a in _float_list(args.alpha)]
    s0 = renyi_entropy(spec, 0)
    ok = all(v <= s0 + 1e-12 for _, v in values)
    rows = [{"alpha": a, "entropy_bits": v} for a, v in values]
    result = {
        "region": region.to_json(),
        "schmidt_rank": spec.rank,
        "entropies": [{"alpha": a, "bits": v} for a, v in values],
        "bounded_by_s0": ok,
    }
    return result, rows, ok


def cmd_correlators(args):
    lattice = Lattice(args.D, args.L)
    psi = constructions.area_law_state(_phi_from_args(args), lattice)
    A, B = _observable(args.obs_a, 3), _observable(args.obs_b, 3)
    bound = np.linalg.norm(A, 2) * np.linalg.norm(B, 2)
    rows, ok = [], True
    for ia, ib in itertools.combinations(range(lattice.n_sites), 2):
        rec = analysis.connected_correlator(psi, A, ia, B, ib)
        ok &= abs(rec.connected_value) <= bound + TOL
        rows.append({"siteA": " ".join(map(str, rec.siteA)), "siteB": " ".join(map(str, rec.siteB)),
                     "separation": rec.separation, "connected": rec.connected_value,
                     "imag_residue": rec.imag_residue})
    vals = np.array([r["connected"] for r in rows])
    result = {
        "n_pairs": len(rows),
        "max_abs_connected": float(np.abs(vals).max(initial=0.0)),
        "max_L_times_abs": float(args.L * np.abs(vals).max(initial=0.0)),
        "norm_bound_respected": bool(ok),
    }
    return result, rows, bool(ok)


def cmd_decay(args):
    Ls = _int_list(args.Ls)
    A, B = _observable(args.obs_a, 3), _observable(args.obs_b, 3)

    def family(L):
        return constructions.area_law_state(_phi_from_args(args, L), Lattice(args.D, L))

    prof = analysis.decay_profile(family, A, B, args.pattern, Ls)
    rows = [{"L": L, "connected": v} for L, v in zip(prof.Ls, prof.values)]
    return prof.to_json(), rows, True


def cmd_isotropic(args):
    lattice = Lattice(args.D, args.L)
    phi = _phi_from_args(args)
    big = constructions.isotropic_area_law_state(phi, lattice)
    tr = analysis.invariance_check(big, "translations")
    rot = analysis.invariance_check(big, ["rotations", "reflections"])
    audit = analysis.area_law_audit(big, args.max_volume, analysis.isotropic_rank_limit)
    ok = tr <= TOL and rot <= TOL and audit.passed
    result = {
        "support": big.support,
        "max_cross_overlap": big.meta.get("max_cross_overlap", 0.0),
        "translation_infidelity": tr,
        "rotation_reflection_infidelity": rot,
        "minimal_c": audit.minimal_c,
        "area_law_ok": audit.passed,
        "summary": audit.summary(),
    }
    return result, None, ok


def _hermitian_basis(d: int) -> list[np.ndarray]:
    out = []
    for i in range(d):
        for j in range(i, d):
            if i == j:
                M = np.zeros((d, d), complex)
                M[i, i] = 1
                out.append(M)
            else:
                M = np.zeros((d, d), complex)
                M[i, j] = M[j, i] = 1
                out.append(M)
                M = np.zeros((d, d), complex)
                M[i, j], M[j, i] = -1j, 1j
                out.append(M)
    return out


def cmd_qecc(args):
    code = qecc.build_513()
    lattice = Lattice(args.D, args.L)
    if lattice.plane_size < code.n:
        raise UsageError(f"hyperplane of {lattice.plane_size} sites cannot hold {code.n} code qubits")
    rng = np.random.default_rng(args.seed)
    worst_mix = 0.0
    states = []
    for _ in range(args.samples):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        cw = qecc.encode_logical(code, v / np.linalg.norm(v))
        worst_mix = max(worst_mix, qecc.max_mixedness_defect(cw, code.distance - 1)[0])
        states.append(cw)
    psi = qecc.qecc_area_state(states[0], lattice, pad=lattice.plane_size > code.n)
    basis = _hermitian_basis(3)
    worst_corr = 0.0
    rows = []
    for ia, ib in itertools.combinations(range(lattice.n_sites), 2):
        pair_worst = max(
            abs(analysis.connected_correlator(psi, A, ia, B, ib).connected_value)
            for A in basis for B in basis
        )
        worst_corr = max(worst_corr, pair_worst)
        rows.append({"siteA": ia, "siteB": ib, "max_abs_connected": pair_worst})
    ok = worst_mix <= TOL and worst_corr <= TOL
    result = {
        "code": code.to_json(),
        "samples": args.samples,
        "max_trace_distance_from_mixed": worst_mix,
        "max_abs_connected": worst_corr,
        "support": psi.support,
        "meta": psi.meta,
    }
    return result, rows, ok


def cmd_crossterm(args):
    lattice = Lattice(args.D, args.L)
    phi = _phi_from_args(args)
    rows = []
    for region in enumerate_cubic_regions(lattice, args.max_volume or lattice.n_sites):
        sites = region.sites(lattice)
        for j, k in itertools.permutations(range(args.D), 2):
            if not analysis.cross_term_vanishes_structurally(lattice, j, k, sites):
                continue
            val = analysis.cross_term_check(phi, lattice, j, k, region)
            rows.append({"offset": " ".join(map(str, region.offset)),
                         "lengths": " ".join(map(str, region.lengths)), "j": j, "k": k, "trace_norm": val})
    worst = max((r["trace_norm"] for r in rows), default=0.0)
    return {"n_checks": len(rows), "max_trace_norm": worst}, rows, worst <= TOL


def cmd_counting(args):
    if args.q is not None:
        q = args.q
    elif args.L is not None:
        q = analysis.dimension_for_lattice(args.L, args.D)
    else:
        raise UsageError("counting needs --q or --L")
    report = analysis.counting_report(q, args.epsilon, args.budget, args.L, args.D if args.L else None)
    return report, None, True


def cmd_fingerprint(args):
    code = fingerprint.make_code(args.n, args.seed)
    rng = np.random.default_rng([args.seed, 2])
    x = rng.integers(0, 2, args.n)
    y = x.copy()
    y[rng.integers(args.n)] ^= 1
    reps = args.reps or fingerprint.repetitions_for(args.delta, code.max_overlap)
    run_rng = np.random.default_rng([args.seed, 3])
    kwargs = dict(repetitions=reps, mode=args.mode, rng=run_rng)
    if args.epsilon:
        same = fingerprint.perturbed_protocol(x, x, code, args.epsilon, seed=args.seed, **kwargs)
        diff = fingerprint.perturbed_protocol(x, y, code, args.epsilon, seed=args.seed, **kwargs)
    else:
        same = fingerprint.equality_protocol(x, x, code, **kwargs)
        diff = fingerprint.equality_protocol(x, y, code, **kwargs)
    result = {
        "code": code.to_json(),
        "repetitions": reps,
        "equal_pair": same.to_json(),
        "unequal_pair": diff.to_json(),
    }
    if args.shots:
        hx, hy = fingerprint.build_fingerprint(x, code), fingerprint.build_fingerprint(y, code)
        p = fingerprint.swap_test_accept(hx, hy)
        hits = int(np.random.default_rng([args.seed, 4]).binomial(args.shots, p))
        sigma = math.sqrt(p * (1 - p) / args.shots)
        result["sampling_check"] = {"shots": args.shots, "analytic": p, "frequency": hits / args.shots,
                                    "within_3_sigma": abs(hits / args.shots - p) <= 3 * sigma + 1e-15}
    ok = same.decision == "equal" and diff.decision == "unequal"
    return result, None, ok


def cmd_cost(args):
    rows = [fingerprint.cost_report(n, args.delta) for n in _int_list(args.n)]
    return {"rows": rows}, rows, True


COMMANDS = {
    "audit": cmd_audit,
    "entropy": cmd_entropy,
    "correlators": cmd_correlators,
    "decay": cmd_decay,
    "isotropic": cmd_isotropic,
    "qecc-check": cmd_qecc,
    "crossterm": cmd_crossterm,
    "counting": cmd_counting,
    "fingerprint": cmd_fingerprint,
    "cost": cmd_cost,
}


def _add_common(p) -> None:
    p.add_argument("--out", help="directory for JSON/CSV reports")
    p.add_argument("--seed", type=int, default=0)


def _add_lattice(p, L: int = 4) -> None:
    p.add_argument("--D", type=int, default=2)
    p.add_argument("--L", type=int, default=L)


def _add_family(p, default: str = "ti-random") -> None:
    p.add_argument("--family", choices=FAMILIES, default=default)
    p.add_argument("--phi-index", type=int, default=0)
    p.add_argument("--phi-file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arealab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help, L=None, family=None):
        p = sub.add_parser(name, help=help)
        _add_common(p)
        if L is not None:
            _add_lattice(p, L)
        if family is not None:
            _add_family(p, family)
        return p

    p = add("audit", "strong area-law audit over cubic regions", 4, "ti-random")
    p.add_argument("--max-volume", type=int)
    p = add("entropy", "Renyi entropies of one region", 4, "ti-random")
    p.add_argument("--alpha", default="0,0.5,1,2,inf")
    p.add_argument("--region", help="offset:lengths, e.g. 0,0:2,2")
    p = add("correlators", "connected correlators over site pairs", 4, "ti-random")
    p.add_argument("--obs-a", default="proj1")
    p.add_argument("--obs-b", default="proj1")
    p = add("decay", "correlator decay with L", family="ghz")
    p.add_argument("--D", type=int, default=2)
    p.add_argument("--Ls", default="3..8")
    p.add_argument("--pattern", choices=("same-row", "different-row"), default="same-row")
    p.add_argument("--obs-a", default="proj1")
    p.add_argument("--obs-b", default="proj1")
    p = add("isotropic", "isotropic construction checks", 3, "mirror-random")
    p.add_argument("--max-volume", type=int)
    p = add("qecc-check", "five-qubit code state checks", 5)
    p.add_argument("--samples", type=int, default=25)
    p = add("crossterm", "rotated-copy cross terms", 3, "ghz")
    p.add_argument("--max-volume", type=int)
    p = add("counting", "epsilon-net counting comparison")
    p.add_argument("--q", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--D", type=int, default=2)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--budget", type=int, default=10**6)
    p = add("fingerprint", "fingerprint equality protocol")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--reps", type=int)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--mode", choices=("analytic", "sampling"), default="analytic")
    p = add("cost", "communication cost table")
    p.add_argument("--n", default="256,4096,65536,1048576")
    p.add_argument("--delta", type=float, default=1e-3)
    return parser


def _validate(args) -> None:
    if getattr(args, "D", 2) is not None and getattr(args, "D", 2) < 1:
        raise UsageError("--D must be >= 1")
    L = getattr(args, "L", None)
    if L is not None and L < 1:
        raise UsageError("--L must be >= 1")
    if args.command in ("audit", "entropy", "correlators", "isotropic", "crossterm", "decay") and args.D < 2:
        raise UsageError("constructions need --D >= 2")
    if args.command in ("isotropic", "crossterm") and args.L < 2:
        raise UsageError("isotropic constructions need --L >= 2")
    if args.command == "fingerprint":
        if args.n < 2:
            raise UsageError("--n must be >= 2")
        if args.reps is not None and args.reps < 1:
            raise UsageError("--reps must be >= 1")
        if not 0 <= args.epsilon < 1:
            raise UsageError("--epsilon must lie in [0, 1)")
        if args.shots < 0:
            raise UsageError("--shots must be >= 0")
    if args.command == "counting":
        if not 0 < args.epsilon < 1:
            raise UsageError("--epsilon must lie in (0, 1)")
        if args.budget < 1:
            raise UsageError("--budget must be >= 1")


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _jsonable(v) for k, v in row.items()})
    return buf.getvalue()


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        result, rows, passed = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"arealab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FeasibilityError as exc:
        print(f"arealab {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("out",)}
    report = {"schema": SCHEMA, "command": args.command, "config": config,
              "passed": bool(passed), "result": result}
    text = json.dumps(_jsonable(report), indent=2) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.json").write_text(text)
        if rows:
            (out / f"{args.command}.csv").write_text(_csv_text(rows))
    return EXIT_OK if passed else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
