"""Formal chains and the Metropolis sampler over them.

A chain alternates grow / double / fluctuate links starting from the empty
set: a grow link raises the dimension by adding a Lorentzian layer (a
superposition of layers where allowed), a double link pairs the layer
superposition against itself into a closed Euclidean site, and fluctuate
links retriangulate one collected term at a time.  After dimension 2 a chain
may enter the mock stage, where kets are opaque ids glued through a
user-supplied equivalence table; that stage stands in for the dimension in
which cancellation becomes possible for purely topological reasons, and its
sites are labeled dimension 4.

Termination means the latest Euclidean site collects to the zero
superposition; a terminated chain is frozen and contributes nothing further
to the action.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .action import ActionParams, FluctuationStep, total_action
from .errors import (
    EulerConstraintError,
    FormalChainError,
    GeometryError,
    MoveError,
    StructureError,
    SuperpositionForbiddenError,
    UnsupportedError,
)
from .growth import Cobordism, GrowthConfig, double_cross, grow_superposed, mirror_double
from .superpose import Superposition, conj
from .topo import Triangulation, apply_pachner, iso_key, moves_for, point_set

GROW = "grow"
DOUBLE = "double"
FLUCTUATE = "fluctuate"

MOCK_DIM = 4  # the stage the opaque-ket mechanism stands in for


@dataclass(frozen=True)
class ChainSite:
    """One site of a formal chain."""

    dim: int
    kind: str  # "X", "Y", "mock_X", "mock_Y"
    state: Superposition
    reps: Dict[object, Triangulation] = field(default_factory=dict)
    x_terms: Tuple[Tuple[object, object], ...] = ()  # (amplitude, Cobordism | mock id)

    def is_euclidean(self) -> bool:
        return self.kind in ("Y", "mock_Y")


@dataclass(frozen=True)
class FormalChain:
    """Ordered sites plus the link labels connecting consecutive sites.

    The implicit first site is the empty set (dimension -1); ``links[i]``
    connects site i-1 to site i with links[0] leaving the empty set.
    """

    sites: Tuple[ChainSite, ...] = ()
    links: Tuple[str, ...] = ()
    steps: Tuple[FluctuationStep, ...] = ()
    terminated_dim: Optional[int] = None

    @staticmethod
    def start() -> "FormalChain":
        return FormalChain()

    @property
    def terminated(self) -> bool:
        return self.terminated_dim is not None

    def frontier(self) -> Optional[ChainSite]:
        return self.sites[-1] if self.sites else None

    def euclidean_sites(self) -> Iterator[ChainSite]:
        return (s for s in self.sites if s.is_euclidean())

    def fluctuation_steps(self) -> Sequence[FluctuationStep]:
        return self.steps

    def extended(self, new_sites: Sequence[ChainSite], new_links: Sequence[str],
                 new_steps: Sequence[FluctuationStep] = ()) -> "FormalChain":
        return FormalChain(
            self.sites + tuple(new_sites),
            self.links + tuple(new_links),
            self.steps + tuple(new_steps),
            self.terminated_dim,
        )

    def with_last_pair_replaced(self, x: ChainSite, y: ChainSite) -> "FormalChain":
        return FormalChain(
            self.sites[:-2] + (x, y), self.links, self.steps, self.terminated_dim
        )


def detect_termination(chain: FormalChain) -> Tuple[bool, Optional[int]]:
    """A chain terminates when its latest Euclidean site collects to zero."""
    for site in reversed(chain.sites):
        if site.is_euclidean():
            if site.state.is_zero():
                return True, site.dim
            return False, None
    return False, None


def validate_chain(chain: FormalChain) -> None:
    """Structural invariants: link cycle, alternation, dimension growth."""
    if len(chain.sites) != len(chain.links):
        raise StructureError("every site needs exactly one incoming link")
    prev_dim = -1  # the empty set
    prev_kind = None
    for site, link in zip(chain.sites, chain.links):
        if link == GROW:
            if site.kind not in ("X", "mock_X"):
                raise StructureError("grow must produce an X site")
            if site.dim <= prev_dim:
                raise StructureError("grow must raise dimension")
            if prev_kind not in (None, "Y", "mock_Y"):
                raise StructureError("grow must leave a Euclidean site")
        elif link == DOUBLE:
            if site.kind not in ("Y", "mock_Y"):
                raise StructureError("double must produce a Euclidean site")
            if prev_kind not in ("X", "mock_X") or site.dim != prev_dim:
                raise StructureError("double must follow the X site of equal dimension")
        elif link == FLUCTUATE:
            if site.kind != "Y" or prev_kind != "Y" or site.dim != prev_dim:
                raise StructureError("fluctuate connects Euclidean sites of one dimension")
        else:
            raise StructureError(f"unknown link {link!r}")
        prev_dim, prev_kind = site.dim, site.kind
    n_fluct = sum(1 for l in chain.links if l == FLUCTUATE)
    if n_fluct != len(chain.steps):
        raise StructureError("fluctuation steps out of sync with fluctuate links")


# -- sampler -------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    chains: int = 20
    sweeps: int = 100
    max_dimension: int = 2
    mock_stage: bool = True
    initial_points: int = 1
    x1_candidates: int = 2
    weight_extend: float = 0.4
    weight_fluctuate: float = 0.4
    weight_reweight: float = 0.2
    temperature: float = 1.0
    growth: GrowthConfig = field(default_factory=GrowthConfig)

    def __post_init__(self):
        w = (self.weight_extend, self.weight_fluctuate, self.weight_reweight)
        if any(x < 0 for x in w) or sum(w) <= 0:
            raise StructureError("proposal weights must be nonnegative with positive sum")
        if self.max_dimension > 2:
            raise UnsupportedError("real growth is capped at dimension 2")
        if self.temperature <= 0:
            raise StructureError("temperature must be positive")


def metropolis_accept(delta_s: float, rng: random.Random, temperature: float = 1.0) -> bool:
    """Accept with probability min(1, exp(-delta_s / T))."""
    if delta_s <= 0.0:
        return True
    if math.isinf(delta_s):
        return False
    return rng.random() < math.exp(-delta_s / temperature)


def _double_site(x_terms: Sequence[Tuple[object, Cobordism]], dim: int) -> ChainSite:
    """Pair an X layer superposition against itself, collected by isometry key.

    Candidates over different lower components never share a boundary, so
    cross terms only arise within one lower component; candidates are built
    over the same slice with identical boundary ids precisely so those cross
    gluings are defined.
    """
    raw = []
    reps: Dict[object, Triangulation] = {}
    by_slice: Dict[Tuple, List[Tuple[object, Cobordism]]] = {}
    for amp, cob in x_terms:
        sig = (cob.lower_key, tuple(sorted(cob.space.boundary_mark.items())))
        by_slice.setdefault(sig, []).append((amp, cob))
    for group in by_slice.values():
        for a_i, c_i in group:
            for a_j, c_j in group:
                glued = double_cross(c_i, c_j)
                key = iso_key(glued)
                raw.append((a_i * conj(a_j), key))
                reps.setdefault(key, glued)
    state = Superposition.collect(raw)
    reps = {k: reps[k] for k in state.keys()}
    return ChainSite(dim=dim, kind="Y", state=state, reps=reps)


def propose_extend(chain: FormalChain, cfg: SamplerConfig, rng: random.Random) -> Optional[FormalChain]:
    """Grow the next X site over the frontier and double it: two new sites."""
    frontier = chain.frontier()
    if frontier is None:
        pts = point_set(cfg.initial_points)
        cob = Cobordism(pts, pts.euler_characteristic())
        x_site = ChainSite(dim=0, kind="X", state=Superposition([(1.0, iso_key(pts))]),
                           x_terms=((1.0, cob),))
        y = mirror_double(cob)
        key = iso_key(y)
        y_site = ChainSite(dim=0, kind="Y", state=Superposition([(1.0, key)]), reps={key: y})
        return chain.extended([x_site, y_site], [GROW, DOUBLE])
    if not frontier.is_euclidean() or frontier.state.is_zero():
        return None
    d_next = frontier.dim + 1
    if frontier.kind == "mock_Y":
        return None
    if d_next > cfg.max_dimension:
        if not cfg.mock_stage or frontier.dim != cfg.max_dimension:
            return None
        return _propose_mock_stage(chain, frontier)
    candidates = cfg.x1_candidates if d_next == 1 else 1
    x_terms: List[Tuple[object, Cobordism]] = []
    for key in sorted(frontier.state.keys(), key=str):
        b = frontier.state.amplitude(key)
        rep = frontier.reps.get(key)
        if rep is None:
            return None
        grown = grow_superposed(b, rep, cfg.growth, candidates, rng, lower_key=key)
        x_terms.extend(grown.terms)
    x_state = Superposition([(amp, iso_key(c.space)) for amp, c in x_terms])
    x_site = ChainSite(dim=d_next, kind="X", state=x_state, x_terms=tuple(x_terms))
    y_site = _double_site(x_terms, d_next)
    return chain.extended([x_site, y_site], [GROW, DOUBLE])


def _propose_mock_stage(chain: FormalChain, frontier: ChainSite) -> FormalChain:
    """Enter the opaque-ket stage: two cobounding kets per component, all of
    whose mutual gluings are one closed class."""
    x_terms: List[Tuple[object, str]] = []
    raw = []
    w = 1.0 / math.sqrt(2.0)
    for i, key in enumerate(sorted(frontier.state.keys(), key=str)):
        b = frontier.state.amplitude(key)
        a_amp = b * w
        b_amp = b * w
        x_terms.append((a_amp, f"A|{i}"))
        x_terms.append((b_amp, f"B|{i}"))
        total = (
            a_amp * conj(a_amp) + a_amp * conj(b_amp)
            + b_amp * conj(a_amp) + b_amp * conj(b_amp)
        )
        raw.append((total, f"S|{i}"))
    x_site = ChainSite(
        dim=MOCK_DIM, kind="mock_X",
        state=Superposition(x_terms),
        x_terms=tuple(x_terms),
    )
    y_site = ChainSite(dim=MOCK_DIM, kind="mock_Y", state=Superposition.collect(raw))
    return chain.extended([x_site, y_site], [GROW, DOUBLE])


def _mock_redouble(x_terms: Sequence[Tuple[object, str]]) -> ChainSite:
    by_comp: Dict[str, List[Tuple[object, str]]] = {}
    for amp, ket in x_terms:
        comp = ket.split("|", 1)[1]
        by_comp.setdefault(comp, []).append((amp, ket))
    raw = []
    for comp, terms in by_comp.items():
        total = None
        for a_i, _ in terms:
            for a_j, _ in terms:
                term = a_i * conj(a_j)
                total = term if total is None else total + term
        raw.append((total, f"S|{comp}"))
    return ChainSite(dim=MOCK_DIM, kind="mock_Y", state=Superposition.collect(raw))


def propose_fluctuate(chain: FormalChain, cfg: SamplerConfig, rng: random.Random) -> Optional[FormalChain]:
    """Apply one random Pachner move to one random term of the frontier."""
    frontier = chain.frontier()
    if frontier is None or frontier.kind != "Y" or frontier.dim < 1:
        return None
    if frontier.state.is_zero():
        return None
    keys = sorted(frontier.state.keys(), key=str)
    key = keys[rng.randrange(len(keys))]
    rep = frontier.reps.get(key)
    if rep is None:
        return None
    moves = moves_for(rep)
    if not moves:
        return None
    move = moves[rng.randrange(len(moves))]
    try:
        new_rep = apply_pachner(rep, move)
    except (MoveError, GeometryError):
        return None
    new_key = iso_key(new_rep)
    old_state = frontier.state
    new_state = old_state.map_key(key, new_key)
    moved_amp = old_state.amplitude(key)
    pairs: List[Tuple[object, object]] = [(moved_amp, new_state.amplitude(new_key))]
    for k in keys:
        if k != key:
            pairs.append((old_state.amplitude(k), new_state.amplitude(k)))
    step_rec = FluctuationStep(dim=frontier.dim, moved_amp=moved_amp, amp_pairs=tuple(pairs))
    reps = {k: r for k, r in frontier.reps.items() if k in new_state}
    if new_key in new_state:
        reps[new_key] = reps.get(new_key, new_rep)
    site = ChainSite(dim=frontier.dim, kind="Y", state=new_state, reps=reps)
    return chain.extended([site], [FLUCTUATE], [step_rec])


def propose_reweight(chain: FormalChain, cfg: SamplerConfig, rng: random.Random) -> Optional[FormalChain]:
    """Flip the sign of one candidate amplitude in the latest fresh double.

    Norm-preserving, so the volume of the X site is untouched; the double is
    rebuilt from the reweighted amplitudes.
    """
    if len(chain.sites) < 2 or not chain.links or chain.links[-1] != DOUBLE:
        return None
    x_site = chain.sites[-2]
    if len(x_site.x_terms) < 2:
        return None
    idx = rng.randrange(len(x_site.x_terms))
    new_terms = list(x_site.x_terms)
    amp, ket = new_terms[idx]
    new_terms[idx] = (amp * -1, ket)
    if x_site.kind == "mock_X":
        new_x = ChainSite(
            dim=x_site.dim, kind="mock_X",
            state=Superposition([(a, k) for a, k in new_terms]),
            x_terms=tuple(new_terms),
        )
        new_y = _mock_redouble(new_terms)
    else:
        new_x = ChainSite(
            dim=x_site.dim, kind="X",
            state=Superposition([(a, iso_key(c.space)) for a, c in new_terms]),
            x_terms=tuple(new_terms),
        )
        new_y = _double_site(new_terms, x_site.dim)
    return chain.with_last_pair_replaced(new_x, new_y)


PROPOSALS = {
    "extend": propose_extend,
    "fluctuate": propose_fluctuate,
    "reweight": propose_reweight,
}


@dataclass
class StepInfo:
    kind: str
    accepted: bool
    delta_s: float = 0.0


def step(
    chain: FormalChain,
    p: ActionParams,
    cfg: SamplerConfig,
    rng: random.Random,
) -> Tuple[FormalChain, StepInfo]:
    """One Metropolis step: propose extend/fluctuate/reweight, accept by exp(-dS)."""
    if chain.terminated:
        return chain, StepInfo("terminated", False)
    kinds = ["extend", "fluctuate", "reweight"]
    weights = [cfg.weight_extend, cfg.weight_fluctuate, cfg.weight_reweight]
    kind = rng.choices(kinds, weights=weights, k=1)[0]
    try:
        proposal = PROPOSALS[kind](chain, cfg, rng)
    except (EulerConstraintError, SuperpositionForbiddenError, FormalChainError):
        return chain, StepInfo(kind, False)
    if proposal is None:
        return chain, StepInfo(kind, False)
    s_old = total_action(chain, p).total
    s_new = total_action(proposal, p).total
    delta = (s_new - s_old)
    if not metropolis_accept(delta, rng, cfg.temperature):
        return chain, StepInfo(kind, False, delta)
    terminated, at_dim = detect_termination(proposal)
    if terminated:
        proposal = replace(proposal, terminated_dim=at_dim)
    return proposal, StepInfo(kind, True, delta)


@dataclass
class ChainStats:
    termination_histogram: Dict[int, int]
    unterminated: int
    mean_y_norm2: Dict[int, float]
    acceptance: Dict[str, Tuple[int, int]]  # kind -> (accepted, proposed)
    trace: List[Tuple[int, int, float, float, float, float, int]]
    seed: int
    chains: int
    sweeps: int

    def as_dict(self) -> dict:
        return {
            "termination_histogram": {str(k): v for k, v in sorted(self.termination_histogram.items())},
            "unterminated": self.unterminated,
            "mean_y_norm2": {str(k): v for k, v in sorted(self.mean_y_norm2.items())},
            "acceptance": {k: {"accepted": a, "proposed": n} for k, (a, n) in sorted(self.acceptance.items())},
            "seed": self.seed,
            "chains": self.chains,
            "sweeps": self.sweeps,
        }


def run(cfg: SamplerConfig, p: ActionParams) -> ChainStats:
    """Sample independent chains; reproducible bit-for-bit from the seed."""
    histogram: Dict[int, int] = {}
    unterminated = 0
    acceptance: Dict[str, List[int]] = {}
    trace: List[Tuple[int, int, float, float, float, float, int]] = []
    norm_acc: Dict[int, List[float]] = {}
    for ci in range(cfg.chains):
        rng = random.Random(f"{cfg.seed}:{ci}")
        chain = FormalChain.start()
        for sweep in range(cfg.sweeps):
            chain, info = step(chain, p, cfg, rng)
            if info.kind != "terminated":
                acc = acceptance.setdefault(info.kind, [0, 0])
                acc[1] += 1
                acc[0] += int(info.accepted)
            br = total_action(chain, p)
            term_d = chain.terminated_dim if chain.terminated else -1
            trace.append(
                (sweep, ci, br.total, br.curvature + br.cosmological, br.volume, br.kinetic, term_d)
            )
        if chain.terminated:
            histogram[chain.terminated_dim] = histogram.get(chain.terminated_dim, 0) + 1
        else:
            unterminated += 1
        for site in chain.euclidean_sites():
            norm_acc.setdefault(site.dim, []).append(float(site.state.norm2()))
    mean = {d: math.fsum(v) / len(v) for d, v in norm_acc.items()}
    return ChainStats(
        termination_histogram=histogram,
        unterminated=unterminated,
        mean_y_norm2=mean,
        acceptance={k: (a, n) for k, (a, n) in acceptance.items()},
        trace=trace,
        seed=cfg.seed,
        chains=cfg.chains,
        sweeps=cfg.sweeps,
    )


# -- enumerable toy space -----------------------------------------------------------


def sample_discrete(actions: Sequence[float], sweeps: int, seed: int,
                    temperature: float = 1.0) -> List[int]:
    """Metropolis over an explicit finite state set with uniform proposals.

    Uses the same acceptance rule as the chain sampler; returns visit counts.
    The stationary distribution is exp(-S_i/T) / Z.
    """
    n = len(actions)
    if n < 2:
        raise StructureError("need at least two states")
    rng = random.Random(f"{seed}:toy")
    state = 0
    counts = [0] * n
    for _ in range(sweeps):
        other = rng.randrange(n - 1)
        if other >= state:
            other += 1
        if metropolis_accept(actions[other] - actions[state], rng, temperature):
            state = other
        counts[state] += 1
    return counts


# -- the cancellation example as a chain ----------------------------------------------


def example_cancellation_chain(fluctuations: int = 2) -> FormalChain:
    """The fluctuation-cancellation example as a chain fragment.

    One arc of one edge and one arc of two edges over the same two endpoints,
    with exact amplitudes +1 and -1 (the example is stated unnormalized).
    Doubling collects to circles of 2, 3, 4 edges with amplitudes 1, -2, 1;
    one subdivision of the 2-circle and one merge of the 4-circle land all
    three terms on the 3-edge circle, where they cancel exactly.
    """
    from .topo import arc

    a1 = arc(1)
    a2 = arc(2, upper_id=1)
    c1 = Cobordism(a1, 1)
    c2 = Cobordism(a2, 1)
    x_terms = ((Fraction(1), c1), (Fraction(-1), c2))
    x_site = ChainSite(
        dim=1, kind="X",
        state=Superposition([(amp, iso_key(c.space)) for amp, c in x_terms]),
        x_terms=x_terms,
    )
    y_site = _double_site(x_terms, 1)
    chain = FormalChain((x_site, y_site), (GROW, DOUBLE))
    rng = random.Random("example")
    for _ in range(fluctuations):
        nxt = _example_fluctuation(chain)
        if nxt is None:
            break
        chain = nxt
    terminated, at_dim = detect_termination(chain)
    if terminated:
        chain = replace(chain, terminated_dim=at_dim)
    return chain


def _example_fluctuation(chain: FormalChain) -> Optional[FormalChain]:
    """Move the smallest circle up or the largest down toward 3 edges."""
    from .topo import MERGE_2_1, SUBDIVIDE_1_2

    frontier = chain.frontier()
    sizes = {k: len(r.edges) for k, r in frontier.reps.items()}
    if not sizes:
        return None
    small = min(sizes, key=sizes.get)
    big = max(sizes, key=sizes.get)
    if sizes[small] < 3:
        key, rep = small, frontier.reps[small]
        move = next(m for m in moves_for(rep) if m.kind == SUBDIVIDE_1_2)
    elif sizes[big] > 3:
        key, rep = big, frontier.reps[big]
        move = next(m for m in moves_for(rep) if m.kind == MERGE_2_1)
    else:
        return None
    new_rep = apply_pachner(rep, move)
    new_key = iso_key(new_rep)
    old_state = frontier.state
    new_state = old_state.map_key(key, new_key)
    moved_amp = old_state.amplitude(key)
    pairs = [(moved_amp, new_state.amplitude(new_key))]
    for k in sorted(old_state.keys(), key=str):
        if k != key:
            pairs.append((old_state.amplitude(k), new_state.amplitude(k)))
    rec = FluctuationStep(dim=1, moved_amp=moved_amp, amp_pairs=tuple(pairs))
    reps = {k: r for k, r in frontier.reps.items() if k in new_state}
    if new_key in new_state:
        reps.setdefault(new_key, new_rep)
    site = ChainSite(dim=1, kind="Y", state=new_state, reps=reps)
    return chain.extended([site], [FLUCTUATE], [rec])
