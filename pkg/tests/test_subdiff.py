import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epilim.extreal import InputError
from epilim.measure import MeasureSpace, SimpleFunction, spike_sequence
from epilim.subdiff import (
    INTEGRAND_LIBRARY,
    Certificate,
    GrowthCondition,
    IntegrandSequence,
    central_slope,
    diff_quotient,
    frechet_certificate,
    global_lower_bound_checks,
    growth_certificate,
    hadamard_directional_subderivate,
    ioffe_criterion,
    lcp_check,
    library_base_points,
    library_integrand,
    replay_witness,
)
from epilim.tails import Tail

SP = MeasureSpace.atoms([0.25, 0.5, 0.25])


def sf(v):
    return SimpleFunction(SP, np.array(v, dtype=float))


def test_certificate_needs_witness_when_refuted():
    with pytest.raises(InputError):
        Certificate("refuted", None, [])
    with pytest.raises(InputError):
        Certificate("maybe", None, [])


def test_quotient_of_square():
    f = library_integrand("square")
    q = diff_quotient(f, sf([1.0, 0.0, -1.0]), sf([1.0, 1.0, 1.0]), 0.5)
    assert q.tolist() == [2.5, 0.5, -1.5]


def test_abs_at_kink():
    f = library_integrand("abs")
    x0 = sf([0.0, 0.0, 0.0])
    assert frechet_certificate(f, x0, sf([0.5, -1.0, 1.0])).verdict == "certified"
    cert = frechet_certificate(f, x0, sf([1.5, 0.0, 0.0]))
    assert cert.verdict == "refuted" and replay_witness(cert)


def test_concave_kink_has_no_subgradient():
    f = library_integrand("neg-abs")
    x0 = sf([0.0, 0.0, 0.0])
    for xs in ([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]):
        cert = frechet_certificate(f, x0, sf(xs))
        assert cert.verdict == "refuted" and replay_witness(cert)


def test_global_inequality_variants():
    f = library_integrand("square")
    x0 = sf([1.0, 0.0, -2.0])
    assert global_lower_bound_checks(f, x0, sf([2.0, 0.0, -4.0]), "mr").verdict == "certified"
    bad = global_lower_bound_checks(f, x0, sf([2.5, 0.0, -4.0]), "mr")
    assert bad.verdict == "refuted" and replay_witness(bad)


def test_blowup_refutes_square_root():
    cert = global_lower_bound_checks(library_integrand("neg-sqrt"), sf([0.0] * 3), variant="wh")
    assert cert.verdict == "refuted" and replay_witness(cert)
    assert global_lower_bound_checks(library_integrand("cubic"), sf([0.0] * 3), variant="wh").verdict == "certified"


def test_growth_certificate_with_lp_allowance():
    f = library_integrand("half-square")
    x0 = sf([1.0, -1.0, 0.0])
    cert = growth_certificate(f, x0, sf([1.0, -1.0, 0.0]), GrowthCondition("lp", p=1.0))
    assert cert.verdict == "certified"


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(INTEGRAND_LIBRARY)), st.sampled_from(["zero", "one", "minus-half", "alternating", "ramp"]))
def test_certificates_imply_frechet(name, point):
    f = library_integrand(name)
    x0 = library_base_points(SP)[point]
    xs = central_slope(f, x0)
    fr = frechet_certificate(f, x0, xs)
    for other in (growth_certificate(f, x0, xs), global_lower_bound_checks(f, x0, xs, "mr")):
        if other.verdict == "certified":
            assert fr.verdict == "certified"
    for c in (fr,):
        if c.verdict == "refuted":
            assert replay_witness(c)


def test_hadamard_bracket_for_abs():
    f = library_integrand("abs")
    br = hadamard_directional_subderivate(f, sf([0.0, 0.0, 0.0]), sf([1.0, -1.0, 2.0]))
    assert br.lower <= br.upper
    assert abs(br.upper - (0.25 + 0.5 + 0.5)) <= 1e-9


def test_lcp_refuted_by_negative_spike():
    sp = MeasureSpace.dyadic(8)
    spike = spike_sequence(sp, horizon=1 << 12)
    fseq = IntegrandSequence.constant(library_integrand("neg-abs"))
    cert = lcp_check(fseq, spike, sp)
    assert cert.verdict == "refuted" and replay_witness(cert)
    bounded = spike_sequence(sp, power=0.5, horizon=1 << 12)
    assert lcp_check(fseq, bounded, sp).verdict == "certified"


def test_ioffe_on_nonnegative_integrand():
    fseq = IntegrandSequence(lambda n: library_integrand("abs"), Tail.constant())
    cert = ioffe_criterion(fseq, sf([0.0, 1.0, -1.0]))
    assert cert.verdict == "certified"
