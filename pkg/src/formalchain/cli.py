"""Batch experiment runner.

Subcommands: pair, series, grow, sample, gap, twofield, positivity.
Single-object results are printed as JSON, traces as CSV; every output embeds
the resolved configuration and seed, and diagnostics go to stderr.  Exit
codes: 0 success, 2 configuration or parse error, 3 boundary mismatch,
4 numeric failure (an internal oracle disagreed beyond tolerance).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import List, Optional

import numpy as np

from . import config as cfgmod
from .chains import detect_termination, example_cancellation_chain, run as run_chains
from .errors import (
    BoundaryError,
    ConfigError,
    FormalChainError,
    ParseError,
)
from .graphs import (
    NeighborGraph,
    build_neighbor_graph,
    cycle_graph,
    path_graph,
    spectral_gap,
    star_graph,
)
from .growth import grow_layer, mirror_double
from .pairing import (
    Bounded1Ket,
    BoundedSurfaceKet,
    BoundarySpec,
    MatchingGluer,
    MockEquivalence,
    SurfaceGluer,
    cauchy_schwarz_check,
    example_superposed_arcs,
    l2_handle_series,
    lightlike_search,
    order_circle_count,
    pair,
    square_partial_sums,
)
from .superpose import Superposition, superposition_to_json
from .topo import classify_curves, classify_surface, from_text, iso_key, to_text
from .twofield import TwoFieldParams, evolve, gaussian_packet, product_state

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BOUNDARY = 3
EXIT_NUMERIC = 4


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="formalchain",
        description="Formal chains of combinatorial manifolds: pairings, growth, sampling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_pair = sub.add_parser("pair", help="pair a superposition of kets with itself")
    p_pair.add_argument("--example", choices=["freedman-3.1", "cancellation-3.2"])
    p_pair.add_argument("--kets", help="JSON ket file")

    p_series = sub.add_parser("series", help="handle-series coefficients and square sums")
    p_series.add_argument("--gmax", type=int, default=10000)
    p_series.add_argument("--exact-upto", type=int, default=8)

    p_grow = sub.add_parser("grow", help="grow one Lorentzian layer over a slice")
    p_grow.add_argument("--input", required=True, help="triangulation text file")
    p_grow.add_argument("--seed", type=int, required=True)
    p_grow.add_argument("--config", help="run config file")
    p_grow.add_argument("--subdivisions", type=int, default=1)
    p_grow.add_argument("--out", help="write the mirror double as triangulation text")

    p_sample = sub.add_parser("sample", help="sample formal chains")
    p_sample.add_argument("--seed", type=int, required=True)
    p_sample.add_argument("--config", help="run config file")
    p_sample.add_argument("--sweeps", type=int, help="override the sweeps setting")
    p_sample.add_argument("--chains", type=int, help="override the chains setting")
    p_sample.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="override any run-config key (repeatable)",
    )
    p_sample.add_argument("--trace", help="write per-sweep action trace CSV here")

    p_gap = sub.add_parser("gap", help="spectral gap of a neighbor graph")
    p_gap.add_argument(
        "--graph", required=True,
        help="path<n> | cycle<n> | star<n> | circles:<min>:<max> | sphere:<max vertices>",
    )

    p_two = sub.add_parser("twofield", help="two-particle molecule evolution")
    p_two.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p_two.add_argument("--steps", type=int, default=4000)
    p_two.add_argument("--dt", type=float, default=1e-3)
    p_two.add_argument("--grid", type=int, default=256)
    p_two.add_argument("--v-depth", type=float, default=0.0)
    p_two.add_argument("--v-width", type=float, default=1.0)
    p_two.add_argument("--stride", type=int, default=50)

    p_pos = sub.add_parser("positivity", help="order checks and light-like search")
    p_pos.add_argument("--seed", type=int, required=True)
    p_pos.add_argument("--points", type=int, default=4, help="boundary points (even)")
    p_pos.add_argument("--families", type=int, default=5)
    p_pos.add_argument("--kets-per-family", type=int, default=4)
    p_pos.add_argument("--trials", type=int, default=40)
    p_pos.add_argument("--steps", type=int, default=300)
    p_pos.add_argument(
        "--max-free-circles", type=int, default=0,
        help="allow kets with up to this many free circles (positivity still "
             "holds but the 0.05 floor is only for pure matchings)",
    )

    args = parser.parse_args(argv)
    try:
        return {
            "pair": cmd_pair,
            "series": cmd_series,
            "grow": cmd_grow,
            "sample": cmd_sample,
            "gap": cmd_gap,
            "twofield": cmd_twofield,
            "positivity": cmd_positivity,
        }[args.command](args)
    except (ConfigError, ParseError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BoundaryError as exc:
        print(f"boundary mismatch: {exc}", file=sys.stderr)
        return EXIT_BOUNDARY
    except FormalChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True, indent=2))


def _norm2_entry(s: Superposition) -> dict:
    n2 = s.norm2()
    entry = {"norm2": float(n2)}
    if isinstance(n2, Fraction):
        entry["norm2_exact"] = str(n2)
    return entry


def cmd_pair(args) -> int:
    if bool(args.example) == bool(args.kets):
        raise ConfigError("pass exactly one of --example / --kets")
    if args.example == "freedman-3.1":
        v, gluer = example_superposed_arcs()
        result = pair(v, v, gluer)
        payload = {"example": args.example, "result": superposition_to_json(result)}
        payload.update(_norm2_entry(result))
        _emit_json(payload)
        return EXIT_OK
    if args.example == "cancellation-3.2":
        chain = example_cancellation_chain()
        frontier = chain.sites[-1]
        terminated, at_dim = detect_termination(chain)
        payload = {
            "example": args.example,
            "result": superposition_to_json(frontier.state),
            "terminated": terminated,
            "terminated_dimension": at_dim,
        }
        payload.update(_norm2_entry(frontier.state))
        _emit_json(payload)
        return EXIT_OK
    with open(args.kets) as fh:
        data = json.load(fh)
    v, gluer = _kets_from_json(data)
    result = pair(v, v, gluer)
    payload = {"kets": args.kets, "result": superposition_to_json(result)}
    payload.update(_norm2_entry(result))
    _emit_json(payload)
    return EXIT_OK


def _kets_from_json(data: dict):
    """Ket file: {"boundary": {...}, "kets": [...]} or {"mock": {...}, "kets": [...]}."""
    terms = []
    if "mock" in data:
        mock = MockEquivalence.from_json(json.dumps(data["mock"]))
        for k in data["kets"]:
            terms.append((complex(k.get("re", 0.0), k.get("im", 0.0)), k["id"]))
        return Superposition(terms), mock
    bd = data.get("boundary")
    if bd is None:
        raise ConfigError("ket file needs a 'boundary' or 'mock' object")
    if bd.get("dimension") == 0:
        spec = BoundarySpec(0, points=tuple(bd.get("points", ())))
        for k in data["kets"]:
            ket = Bounded1Ket(
                tuple(tuple(p) for p in k["matching"]), k.get("free_circles", 0)
            )
            terms.append((complex(k.get("re", 0.0), k.get("im", 0.0)), ket))
        return Superposition(terms), MatchingGluer(spec)
    if bd.get("dimension") == 1:
        spec = BoundarySpec(1, circles=tuple(bd.get("circles", ())))
        for k in data["kets"]:
            ket = BoundedSurfaceKet(
                tuple((int(g), frozenset(ls)) for g, ls in k["components"]),
                tuple(k.get("closed", ())),
            )
            terms.append((complex(k.get("re", 0.0), k.get("im", 0.0)), ket))
        return Superposition(terms), SurfaceGluer(spec)
    raise ConfigError(f"unsupported boundary dimension {bd.get('dimension')!r}")


def cmd_series(args) -> int:
    if args.gmax < 0:
        raise ConfigError("--gmax must be nonnegative")
    exact_up = min(args.exact_upto, args.gmax)
    exact = l2_handle_series(lambda n: Fraction(1, n + 1), exact_up)
    full = l2_handle_series(lambda n: 1.0 / (n + 1), args.gmax)
    rows = square_partial_sums(full)
    print("# handle series, c_n = 1/(n+1); coefficients collected by genus")
    print("# square-summability of the collected series is reported, not asserted:")
    print("# partial sums of squares are the last column")
    for g, c in exact:
        print(f"# exact g={g}: {c}")
    print("g,coefficient,partial_sum_of_squares")
    for g, c, acc in rows:
        print(f"{g},{c!r},{acc!r}")
    return EXIT_OK


def cmd_grow(args) -> int:
    with open(args.input) as fh:
        y = from_text(fh.read())
    settings = {}
    if args.config:
        with open(args.config) as fh:
            settings = cfgmod.parse_config_text(fh.read(), cfgmod.GROWTH_KEYS | cfgmod.ACTION_KEYS)
    growth = cfgmod.growth_config_from(settings)
    rng = random.Random(f"{args.seed}:grow")
    cob = grow_layer(y, growth, rng, subdivisions=args.subdivisions)
    doubled = mirror_double(cob)
    if doubled.dim == 2 and doubled.is_pure():
        key = str(classify_surface(doubled))
    elif doubled.dim == 1:
        key = str(classify_curves(doubled))
    else:
        key = str(iso_key(doubled))
    payload = {
        "config": cfgmod.resolved_echo(settings, args.seed),
        "input_chi": y.euler_characteristic(),
        "layer_chi": cob.space.euler_characteristic(),
        "chi_constraint_satisfied": cob.space.euler_characteristic() == y.euler_characteristic(),
        "upper_slice_chi": cob.upper_slice().euler_characteristic(),
        "double_class": key,
        "double_chi": doubled.euler_characteristic(),
    }
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(to_text(doubled))
        payload["out"] = args.out
    _emit_json(payload)
    return EXIT_OK


def cmd_sample(args) -> int:
    settings = {}
    if args.config:
        with open(args.config) as fh:
            settings = cfgmod.parse_config_text(fh.read(), cfgmod.SAMPLE_COMMAND_KEYS)
    overrides = []
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set needs KEY=VALUE, got {item!r}")
        overrides.append(item)
    if args.sweeps is not None:
        overrides.append(f"sweeps={args.sweeps}")
    if args.chains is not None:
        overrides.append(f"chains={args.chains}")
    if overrides:
        extra = cfgmod.parse_config_text("\n".join(overrides), cfgmod.SAMPLE_COMMAND_KEYS)
        settings.update(extra)
    params = cfgmod.action_params_from(settings)
    cfg = cfgmod.sampler_config_from(settings, args.seed)
    stats = run_chains(cfg, params)
    payload = stats.as_dict()
    payload["config"] = cfgmod.resolved_echo(settings, args.seed)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("sweep,chain_id,S_total,S_curv,S_vol,S_kin,terminated_d\n")
            for row in stats.trace:
                fh.write(",".join(repr(x) if isinstance(x, float) else str(x) for x in row) + "\n")
        payload["trace"] = args.trace
    _emit_json(payload)
    return EXIT_OK


def _parse_graph(spec: str) -> NeighborGraph:
    if spec.startswith("path"):
        return path_graph(int(spec[4:]))
    if spec.startswith("cycle"):
        return cycle_graph(int(spec[5:]))
    if spec.startswith("star"):
        return star_graph(int(spec[4:]))
    if spec.startswith("circles:"):
        _, lo, hi = spec.split(":")
        return build_neighbor_graph(1, int(hi), min_size=int(lo))
    if spec.startswith("sphere:"):
        _, cap = spec.split(":")
        return build_neighbor_graph(2, int(cap))
    raise ConfigError(f"unknown graph spec {spec!r}")


def cmd_gap(args) -> int:
    g = _parse_graph(args.graph)
    gap, connected = spectral_gap(g)
    payload = {
        "graph": args.graph,
        "vertices": g.n,
        "edges": len(g.edges),
        "connected": connected,
        "gap": gap,
        "truncated": g.truncated,
    }
    if g.n <= 200:
        dense = sorted(np.linalg.eigvalsh(g.laplacian()))
        oracle = 0.0 if not connected else next((x for x in dense if x > 1e-9), 0.0)
        payload["dense_oracle"] = float(oracle)
        payload["oracle_abs_diff"] = abs(gap - oracle)
        if abs(gap - oracle) > 1e-6:
            _emit_json(payload)
            print("numeric failure: iterative gap disagrees with dense oracle", file=sys.stderr)
            return EXIT_NUMERIC
    _emit_json(payload)
    return EXIT_OK


def cmd_twofield(args) -> int:
    p = TwoFieldParams(
        lam=args.lam, v_depth=args.v_depth, v_width=args.v_width,
        dt=args.dt, steps=args.steps, grid_n=args.grid, sample_stride=args.stride,
    )
    psi = gaussian_packet(p, center=1.0)
    traj = evolve(product_state(p, psi, psi), p)
    print(f"# lambda = {args.lam}, v_depth = {args.v_depth}, v_width = {args.v_width}")
    print(f"# dt = {args.dt}, steps = {args.steps}, grid = {args.grid}, L = {p.grid_l}")
    print("t,joint_norm,phi_norm,com_x")
    for t, jn, en, cm in zip(traj.times, traj.joint_norms, traj.erased_norms, traj.com_means):
        print(f"{t!r},{jn!r},{en!r},{cm!r}")
    return EXIT_OK


def cmd_positivity(args) -> int:
    if args.points % 2 or args.points < 2:
        raise ConfigError("--points must be even and at least 2")
    labels = tuple(range(args.points))
    spec = BoundarySpec(0, points=labels)
    gluer = MatchingGluer(spec)
    all_matchings = _perfect_matchings(labels)
    violations = cauchy_schwarz_check(all_matchings, gluer, order_circle_count)
    rng = random.Random(f"{args.seed}:positivity")
    residuals = []
    for fam_i in range(args.families):
        fam = _random_family(all_matchings, args.kets_per_family, rng, args.max_free_circles)
        res = lightlike_search(
            fam, gluer, trials=args.trials, steps=args.steps, seed=args.seed + fam_i
        )
        residuals.append(res.min_residual)
    mock = MockEquivalence.all_equal(["A", "B"], "all-glued")
    mock_res = lightlike_search(
        ["A", "B"], mock, trials=max(4, args.trials // 4), steps=args.steps, seed=args.seed
    )
    amps = {k: complex(a) for k, a in mock_res.argmin.items()}
    ratio = amps.get("B", 0j) / amps.get("A", 1j) if amps.get("A") else 0j
    payload = {
        "config": {
            "points": args.points, "families": args.families,
            "kets_per_family": args.kets_per_family,
            "trials": args.trials, "steps": args.steps, "seed": args.seed,
        },
        "order_violations": len(violations),
        "min_residuals": residuals,
        "min_residual_floor": min(residuals) if residuals else None,
        "mock_null_residual": mock_res.min_residual,
        "mock_argmin_ratio_re": ratio.real,
        "mock_argmin_ratio_im": ratio.imag,
    }
    _emit_json(payload)
    if mock_res.min_residual > 1e-8:
        print("numeric failure: constructed null vector not found", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _perfect_matchings(labels):
    labels = list(labels)
    if not labels:
        return [Bounded1Ket(())]
    out = []

    def rec(rest, acc):
        if not rest:
            out.append(Bounded1Ket(tuple(acc)))
            return
        first = rest[0]
        for i in range(1, len(rest)):
            rec(rest[1:i] + rest[i + 1:], acc + [(first, rest[i])])

    rec(labels, [])
    return out


def _random_family(matchings, size, rng, max_free_circles=0):
    fam = set()
    guard = 0
    while len(fam) < size and guard < 10000:
        m = matchings[rng.randrange(len(matchings))]
        free = rng.randrange(max_free_circles + 1)
        fam.add(Bounded1Ket(m.matching, free))
        guard += 1
    return sorted(fam, key=str)


if __name__ == "__main__":
    sys.exit(main())
