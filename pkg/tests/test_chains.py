"""Formal chains: structure, proposals, sampler behaviour, toy stationarity."""

import math
import random
from fractions import Fraction

import pytest

from formalchain.action import ActionParams, total_action
from formalchain.chains import (
    ChainSite,
    FormalChain,
    SamplerConfig,
    detect_termination,
    example_cancellation_chain,
    metropolis_accept,
    propose_extend,
    propose_fluctuate,
    propose_reweight,
    run,
    sample_discrete,
    step,
    validate_chain,
)
from formalchain.errors import StructureError
from formalchain.superpose import Superposition
from formalchain.topo import iso_key, point_set


def default_params(**kw):
    base = dict(
        g=(0.5, 1.0, 6.0), f=(0.01, 0.01, 0.01),
        Lambda=(0.05, 0.0, 0.5), c=(1.0, 1.0, 1.0),
    )
    base.update(kw)
    return ActionParams(**base)


def default_cfg(**kw):
    base = dict(
        seed=0, chains=4, sweeps=30,
        weight_extend=0.25, weight_fluctuate=0.55, weight_reweight=0.2,
    )
    base.update(kw)
    return SamplerConfig(**base)


# -- cancellation example --------------------------------------------------------


def test_example_chain_terminates_exactly():
    chain = example_cancellation_chain()
    terminated, at_dim = detect_termination(chain)
    assert terminated and at_dim == 1
    assert chain.sites[-1].state.is_zero()
    # exact arithmetic all the way through
    fresh = example_cancellation_chain(fluctuations=0)
    amps = sorted(
        (len(rep.edges), fresh.sites[-1].state.amplitude(key))
        for key, rep in fresh.sites[-1].reps.items()
    )
    assert [(n, a) for n, a in amps] == [
        (2, Fraction(1)), (3, Fraction(-2)), (4, Fraction(1))
    ]


def test_example_chain_validates():
    validate_chain(example_cancellation_chain())
    validate_chain(example_cancellation_chain(fluctuations=1))


def test_detect_termination_nonzero():
    chain = example_cancellation_chain(fluctuations=1)
    terminated, at_dim = detect_termination(chain)
    assert not terminated and at_dim is None


def test_detect_termination_empty_chain():
    assert detect_termination(FormalChain.start()) == (False, None)


def test_detect_termination_matches_norm_threshold():
    chain = example_cancellation_chain()
    site = chain.sites[-1]
    assert float(site.state.norm2()) <= (1e-12) ** 2


# -- proposals -------------------------------------------------------------------


def test_extend_from_empty_builds_x0_y0():
    rng = random.Random(0)
    chain = propose_extend(FormalChain.start(), default_cfg(), rng)
    assert chain is not None
    validate_chain(chain)
    assert [s.kind for s in chain.sites] == ["X", "Y"]
    assert chain.sites[0].dim == 0
    y = chain.sites[1]
    assert float(y.state.norm2()) == pytest.approx(1.0)


def test_extend_chain_through_dimensions():
    rng = random.Random(1)
    cfg = default_cfg()
    chain = FormalChain.start()
    for _ in range(4):
        nxt = propose_extend(chain, cfg, rng)
        if nxt is None:
            break
        chain = nxt
        validate_chain(chain)
    dims = [s.dim for s in chain.sites]
    assert dims[:4] == [0, 0, 1, 1]
    assert dims[4:6] == [2, 2]
    # mock stage after dimension 2
    assert dims[6:] == [4, 4]
    kinds = [s.kind for s in chain.sites]
    assert kinds[-1] == "mock_Y"


def test_grow_steps_respect_euler_constraint():
    # every accepted grow in a sampler run satisfies chi(X) = chi(lower slice)
    rng = random.Random(2)
    cfg = default_cfg()
    p = default_params()
    chain = FormalChain.start()
    checked = 0
    for _ in range(120):
        chain, info = step(chain, p, cfg, rng)
        if chain.terminated:
            break
    for site, link in zip(chain.sites, chain.links):
        if link == "grow" and site.kind == "X":
            for amp, cob in site.x_terms:
                assert cob.space.euler_characteristic() == cob.lower_chi
                checked += 1
    assert checked > 0


def test_fluctuate_moves_one_term():
    rng = random.Random(3)
    chain = example_cancellation_chain(fluctuations=0)
    out = propose_fluctuate(chain, default_cfg(), rng)
    assert out is not None
    validate_chain(out)
    assert out.links[-1] == "fluctuate"
    assert len(out.steps) == 1


def test_reweight_requires_fresh_double():
    rng = random.Random(4)
    chain = example_cancellation_chain(fluctuations=1)
    assert propose_reweight(chain, default_cfg(), rng) is None
    fresh = example_cancellation_chain(fluctuations=0)
    out = propose_reweight(fresh, default_cfg(), rng)
    assert out is not None
    validate_chain(out)
    # norm of the X site is preserved
    assert float(out.sites[-2].state.norm2()) == pytest.approx(
        float(fresh.sites[-2].state.norm2())
    )


def test_metropolis_rules():
    rng = random.Random(5)
    assert metropolis_accept(0.0, rng)
    assert metropolis_accept(-3.0, rng)
    assert not metropolis_accept(math.inf, rng)
    n = sum(metropolis_accept(1.0, rng) for _ in range(4000))
    assert abs(n / 4000 - math.exp(-1.0)) < 0.03


def test_sampler_reproducible_bit_for_bit():
    cfg = default_cfg(chains=6, sweeps=40, seed=99)
    p = default_params()
    a = run(cfg, p)
    b = run(cfg, p)
    assert a.as_dict() == b.as_dict()
    assert a.trace == b.trace


def test_sampler_zero_sweeps_empty_histogram():
    stats = run(default_cfg(sweeps=0, chains=3), default_params())
    assert stats.termination_histogram == {}
    assert stats.unterminated == 3


def test_sampler_chains_validate():
    rng = random.Random(6)
    cfg = default_cfg()
    p = default_params()
    chain = FormalChain.start()
    for _ in range(80):
        chain, _ = step(chain, p, cfg, rng)
        validate_chain(chain)


def test_mock_chain_cancellation():
    # drive a chain to the mock stage and flip the sign: Y collects to zero
    rng = random.Random(7)
    cfg = default_cfg()
    chain = FormalChain.start()
    for _ in range(6):
        nxt = propose_extend(chain, cfg, rng)
        if nxt is None:
            break
        chain = nxt
    assert chain.sites[-1].kind == "mock_Y"
    assert not chain.sites[-1].state.is_zero()
    flipped = chain
    for _ in range(40):
        out = propose_reweight(flipped, cfg, rng)
        if out is not None:
            flipped = out
        if flipped.sites[-1].state.is_zero():
            break
    terminated, at_dim = detect_termination(flipped)
    assert terminated and at_dim == 4


def test_toy_space_stationarity():
    actions = [0.0, 1.0, 2.5]
    sweeps = 100000
    counts = sample_discrete(actions, sweeps, seed=11)
    z = sum(math.exp(-s) for s in actions)
    expected = [sweeps * math.exp(-s) / z for s in actions]
    chi2 = sum((c - e) ** 2 / e for c, e in zip(counts, expected))
    # dof = 2: the p-value is exp(-chi2 / 2); demand p > 0.01
    p_value = math.exp(-chi2 / 2)
    assert p_value > 0.01
    # and the same seed is bit-identical
    assert counts == sample_discrete(actions, sweeps, seed=11)


def test_toy_space_needs_two_states():
    with pytest.raises(StructureError):
        sample_discrete([1.0], 10, seed=0)


def test_sampler_runs_with_partial_layers_and_circles():
    # foliation singularities and extra closed components must stay priced,
    # deterministic, and structurally valid, never crash the sampler
    from formalchain.growth import GrowthConfig

    cfg = SamplerConfig(
        seed=21, chains=4, sweeps=50,
        weight_extend=0.3, weight_fluctuate=0.5, weight_reweight=0.2,
        growth=GrowthConfig(layer="partial", topology_change=True, p_circle=0.3),
    )
    p = default_params(singular_penalty=50.0)
    a = run(cfg, p)
    b = run(cfg, p)
    assert a.as_dict() == b.as_dict()
    total = sum(a.termination_histogram.values()) + a.unterminated
    assert total == cfg.chains


def test_superposed_growth_can_shed_circles():
    import random as _random
    from formalchain.growth import GrowthConfig, grow_superposed

    cfg = GrowthConfig(topology_change=True, p_circle=0.9)
    rng = _random.Random(2)
    seen = False
    for _ in range(10):
        sg = grow_superposed(1.0, point_set(1), cfg, 2, rng)
        if any(c.space.component_count() > 1 for _, c in sg.terms):
            seen = True
        for _, c in sg.terms:
            assert c.space.euler_characteristic() == c.lower_chi
    assert seen


def test_stats_histogram_consistency():
    cfg = default_cfg(chains=8, sweeps=60, seed=13)
    stats = run(cfg, default_params())
    total = sum(stats.termination_histogram.values()) + stats.unterminated
    assert total == cfg.chains
    for kind, (acc, prop) in stats.acceptance.items():
        assert 0 <= acc <= prop
