import numpy as np
import pytest
from pydantic import ValidationError

from opmean.utils.exceptions import ExceptionDimensionMismatch, ExceptionInvalidData, ExceptionPositivity
from opmean.v1._shared.schemas import HermitianMatrix, MeanKind, MeanKindId, SigmaMeasure
from opmean.v1.hermat.palette import get_function
from opmean.v1.hermat.service import apply_spectral, congruence_action, loewner_margin, random_hpd
from opmean.v1.means.service import (
    CongruenceFrame,
    Route,
    eta_average,
    harm_mean,
    hh_functional,
    log_mean,
    log_mean_harmonic_form,
    mean,
    nabla_mean,
    pal_log_mean,
    sharp_mean,
    sharp_path,
    transpose_mean,
    wlog_geom,
    wlog_harm,
)
from opmean.v1.measure.service import integrate_sigma


def _close(X: HermitianMatrix, Y: HermitianMatrix, tol: float) -> bool:
    return np.linalg.norm(X.entries - Y.entries, 2) <= tol * (1.0 + np.linalg.norm(Y.entries, 2))


def test_congruence_frame_lifts_identity(random_pair):
    A, B = random_pair
    frame = CongruenceFrame(A, B)
    np.testing.assert_allclose(frame.lift(np.ones_like(frame.c)), A.entries, atol=1e-10)
    np.testing.assert_allclose(frame.lift(frame.c), B.entries, atol=1e-10)


def test_congruence_frame_batched_lift(random_pair):
    A, B = random_pair
    frame = CongruenceFrame(A, B)
    stack = frame.lift(np.stack([np.ones_like(frame.c), frame.c]))
    assert stack.shape == (2, A.dim, A.dim)
    np.testing.assert_allclose(stack[1], B.entries, atol=1e-10)


def test_sharp_mean_of_diagonal_squares():
    value = sharp_mean(HermitianMatrix.diag([4.0, 1.0]), HermitianMatrix.diag([9.0, 16.0]), 0.5)
    np.testing.assert_allclose(value.entries, np.diag([6.0, 4.0]), atol=1e-12)


def test_elementary_means_at_endpoints(random_pair):
    A, B = random_pair
    for mean_fn in (nabla_mean, harm_mean, sharp_mean):
        assert _close(mean_fn(A, B, 0.0), A, 1e-12)
        assert _close(mean_fn(A, B, 1.0), B, 1e-12)


def test_elementary_means_are_ordered(random_pairs):
    # harmonic <= geometric <= arithmetic
    for A, B in random_pairs:
        for lam in (0.2, 0.5, 0.9):
            assert loewner_margin(harm_mean(A, B, lam), sharp_mean(A, B, lam)) >= -1e-10
            assert loewner_margin(sharp_mean(A, B, lam), nabla_mean(A, B, lam)) >= -1e-10


def test_sharp_mean_is_symmetric_under_transpose(random_pair):
    A, B = random_pair
    assert _close(sharp_mean(A, B, 0.3), transpose_mean(MeanKindId.SHARP, A, B, 0.7), 1e-10)


def test_logarithmic_mean_has_two_forms(random_pairs, spec):
    for A, B in random_pairs:
        assert _close(log_mean(A, B, spec), log_mean_harmonic_form(A, B, spec), 1e-8)


@pytest.mark.parametrize("route", [Route.INTEGRAL, Route.REPRESENTATIVE])
def test_weighted_means_reduce_to_log_mean_at_half(route, random_pairs, spec):
    for A, B in random_pairs:
        target = log_mean(A, B, spec)
        assert _close(wlog_harm(A, B, 0.5, spec, route), target, 1e-8)
        assert _close(wlog_geom(A, B, 0.5, spec, route), target, 1e-8)
        assert _close(pal_log_mean(A, B, 0.5), target, 1e-8)


def test_routes_agree_on_noncommuting_pairs(random_pairs, spec):
    for A, B in random_pairs:
        for lam in (0.1, 0.6, 0.95):
            integral = wlog_harm(A, B, lam, spec, Route.INTEGRAL)
            representative = wlog_harm(A, B, lam, spec, Route.REPRESENTATIVE)
            assert _close(integral, representative, 1e-8)
            integral = wlog_geom(A, B, lam, spec, Route.INTEGRAL)
            representative = wlog_geom(A, B, lam, spec, Route.REPRESENTATIVE)
            assert _close(integral, representative, 1e-8)


def test_weighted_means_at_point_masses(random_pair, spec):
    A, B = random_pair
    assert _close(wlog_harm(A, B, 0.0, spec), A, 1e-14)
    assert _close(wlog_geom(A, B, 1.0, spec), B, 1e-14)


def test_weighted_means_lie_between_harmonic_and_arithmetic(random_pairs, spec):
    for A, B in random_pairs:
        for lam in (0.3, 0.75):
            low = harm_mean(A, B, lam)
            high = nabla_mean(A, B, lam)
            for value in (wlog_harm(A, B, lam, spec), wlog_geom(A, B, lam, spec)):
                assert loewner_margin(low, value) >= -1e-9
                assert loewner_margin(value, high) >= -1e-9


def test_example_values(example_pair, spec):
    A, B = example_pair
    for route in Route:
        np.testing.assert_allclose(
            np.diag(wlog_harm(A, B, 0.75, spec, route).entries), [1.725800, 1.222843], atol=1e-5
        )
        np.testing.assert_allclose(
            np.diag(wlog_geom(A, B, 0.75, spec, route).entries), [1.696427, 1.200385], atol=1e-5
        )
    np.testing.assert_allclose(np.diag(pal_log_mean(A, B, 0.75).entries), [1.705101, 1.208813], atol=1e-5)


def test_complex_operands(complex_pair, spec):
    A, B = complex_pair
    value = wlog_geom(A, B, 0.4, spec, Route.INTEGRAL)
    assert value.is_complex
    assert _close(value, wlog_geom(A, B, 0.4, spec, Route.REPRESENTATIVE), 1e-8)


def test_mean_dispatch(example_pair, spec):
    A, B = example_pair
    assert _close(mean(MeanKind(id=MeanKindId.LOGM), A, B, spec), log_mean(A, B, spec), 1e-12)
    assert _close(mean(MeanKind(id=MeanKindId.HARM, weight=0.25), A, B), harm_mean(A, B, 0.25), 1e-12)
    assert _close(
        mean(MeanKind(id=MeanKindId.WLOG_GEOM, weight=0.25), A, B, spec), wlog_geom(A, B, 0.25, spec), 1e-12
    )


def test_mean_kind_validation():
    with pytest.raises(ValidationError):
        MeanKind(id=MeanKindId.SHARP)
    with pytest.raises(ValidationError):
        MeanKind(id=MeanKindId.PAL_LOG, weight=1.0)
    with pytest.raises(ValidationError):
        MeanKind(id=MeanKindId.LOGM, weight=0.3)


def test_means_reject_bad_operands(random_pair):
    A, _ = random_pair
    with pytest.raises(ExceptionPositivity):
        sharp_mean(A, HermitianMatrix.diag([1.0, -1.0, 2.0]), 0.5)
    with pytest.raises(ExceptionDimensionMismatch):
        harm_mean(A, HermitianMatrix.identity(2), 0.5)
    with pytest.raises(ExceptionInvalidData):
        pal_log_mean(A, A, 0.0)
    with pytest.raises(ExceptionInvalidData):
        nabla_mean(A, A, 1.5)


def test_eta_average_of_square_at_half(random_pair, spec):
    A, B = random_pair
    value = eta_average(get_function("square"), A, B, 0.5, spec)
    expected = (A.entries @ A.entries + B.entries @ B.entries) / 3.0 + (
        A.entries @ B.entries + B.entries @ A.entries
    ) / 6.0
    np.testing.assert_allclose(value.entries, expected, atol=1e-9)


def test_hh_functional_is_a_mixture(random_pair, spec):
    A, B = random_pair
    f = get_function("inv")
    mixed = hh_functional(f, A, B, 0.3, 0.25, spec)
    expected = 0.75 * eta_average(f, A, B, 0.3, spec).entries + 0.25 * eta_average(f, A, B, 0.7, spec).entries
    np.testing.assert_allclose(mixed.entries, expected, atol=1e-10)


def test_hh_functional_with_zero_alpha_is_eta_average(random_pair, spec):
    A, B = random_pair
    f = get_function("log")
    assert _close(hh_functional(f, A, B, 0.6, 0.0, spec), eta_average(f, A, B, 0.6, spec), 1e-12)


def test_sigma_integral_of_spectral_path(random_pair, spec):
    A, B = random_pair
    f = get_function("pow_0.5")
    measure = SigmaMeasure(lam=0.4, alpha=0.5)
    value = integrate_sigma(lambda t: apply_spectral(f, (1.0 - t) * A.entries + t * B.entries), measure, spec)
    assert _close(value, hh_functional(f, A, B, 0.4, 0.5, spec), 1e-9)


def test_scalar_logarithmic_mean():
    value = log_mean(HermitianMatrix(entries=[[1.0]]), HermitianMatrix(entries=[[2.0]]))
    assert value.entries[0, 0] == pytest.approx(1.0 / np.log(2.0), abs=1e-10)


def test_logarithmic_mean_is_symmetric(random_pair, spec):
    A, B = random_pair
    assert _close(log_mean(A, B, spec), log_mean(B, A, spec), 1e-9)


@pytest.mark.parametrize(
    "kind",
    [
        MeanKind(id=MeanKindId.HARM, weight=0.3),
        MeanKind(id=MeanKindId.SHARP, weight=0.3),
        MeanKind(id=MeanKindId.LOGM),
        MeanKind(id=MeanKindId.PAL_LOG, weight=0.3),
        MeanKind(id=MeanKindId.WLOG_HARM, weight=0.3),
        MeanKind(id=MeanKindId.WLOG_GEOM, weight=0.3),
    ],
    ids=lambda kind: kind.id.value,
)
def test_mean_axioms(kind, random_pairs, spec):
    for A, B in random_pairs[:3]:
        # idempotence
        assert _close(mean(kind, A, A, spec), A, 1e-8)
        # congruence invariance
        C = random_hpd(A.dim, 5.0, 99).entries
        moved = mean(kind, congruence_action(C, A), congruence_action(C, B), spec)
        assert _close(moved, congruence_action(C, mean(kind, A, B, spec)), 1e-8)
        # monotonicity in the first argument
        bigger = A.entries + np.eye(A.dim)
        assert loewner_margin(mean(kind, A, B, spec), mean(kind, bigger, B, spec)) >= -1e-8


def test_weighted_means_are_not_weight_symmetric(example_pair, spec):
    A, B = example_pair
    forward = wlog_geom(A, B, 0.75, spec)
    mirrored = wlog_geom(B, A, 0.25, spec)
    assert abs(forward.entries[0, 0] - mirrored.entries[0, 0]) > 1e-3
    assert _close(wlog_geom(A, B, 0.5, spec), wlog_geom(B, A, 0.5, spec), 1e-9)


def test_weighted_means_are_distinct_on_the_example(example_pair, spec):
    A, B = example_pair
    values = [
        np.diag(wlog_harm(A, B, 0.75, spec).entries),
        np.diag(wlog_geom(A, B, 0.75, spec).entries),
        np.diag(pal_log_mean(A, B, 0.75).entries),
    ]
    for i in range(3):
        for j in range(i + 1, 3):
            assert np.min(np.abs(values[i] - values[j])) > 5e-3


def test_hh_functional_mirror_symmetry(random_pair, spec):
    A, B = random_pair
    f = get_function("xlogx")
    assert _close(hh_functional(f, A, B, 0.3, 0.2, spec), hh_functional(f, A, B, 0.7, 0.8, spec), 1e-9)


def test_hh_functional_of_inverse_is_inverse_log_mean(random_pair, spec):
    A, B = random_pair
    value = hh_functional(get_function("inv"), A, B, 0.35, 0.0, spec)
    np.testing.assert_allclose(
        value.entries, np.linalg.inv(wlog_harm(A, B, 0.35, spec, Route.INTEGRAL).entries), atol=1e-9
    )


def test_sharp_path_matches_geometric_mean(random_pairs, complex_pair):
    for A, B in [*random_pairs, complex_pair]:
        nodes = np.array([0.0, 0.2, 0.5, 0.9, 1.0])
        stack = sharp_path(A, B)(nodes)
        assert stack.shape == (5, A.dim, A.dim)
        np.testing.assert_allclose(stack[0], A.entries, atol=1e-10)
        np.testing.assert_allclose(stack[-1], B.entries, atol=1e-10)
        for t, value in zip(nodes[1:-1], stack[1:-1]):
            assert _close(HermitianMatrix(entries=value), sharp_mean(A, B, t), 1e-10)
