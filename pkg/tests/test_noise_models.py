import math

import numpy as np
import pytest
import scipy.optimize

from screenot.errors import DomainError
from screenot.matrix_lab import singular_values
from screenot.noise_models import NoiseKind, NoiseSpec, SignalSpec, gen_noise, gen_signal, make_rng, rows_for


@pytest.mark.parametrize(
    ("value", "expected"),
    [
        ("MarcenkoPastur", NoiseKind.MARCENKO_PASTUR),
        ("marcenko_pastur", NoiseKind.MARCENKO_PASTUR),
        ("fisher3n", NoiseKind.FISHER3N),
        ("AR1", NoiseKind.AR1),
        (NoiseKind.MIX2, NoiseKind.MIX2),
    ],
)
def test_noise_kind_parse(value: str, expected: NoiseKind) -> None:
    assert NoiseKind.parse(value) is expected


def test_noise_kind_parse_rejects_unknown_names() -> None:
    with pytest.raises(ValueError, match="Unknown noise kind"):
        NoiseKind.parse("Cauchy")


def test_noise_spec_validation_and_label() -> None:
    assert NoiseSpec("ar1", 0.5, rho=0.2).label == "AR1(0.2)"
    assert NoiseSpec(NoiseKind.UNIF, 1.0).label == "Unif"
    with pytest.raises(DomainError):
        NoiseSpec(NoiseKind.UNIF, 1.5)
    with pytest.raises(DomainError):
        NoiseSpec(NoiseKind.AR1, 0.5, rho=1.0)


@pytest.mark.parametrize("spikes", [(1.0, 2.0), (2.0, 2.0), (1.0, -1.0), (math.inf,)])
def test_signal_spec_rejects_invalid_spikes(spikes: tuple[float, ...]) -> None:
    with pytest.raises(DomainError):
        SignalSpec(spikes)


@pytest.mark.parametrize(("p", "gamma", "n"), [(500, 0.5, 1000), (300, 0.3, 1000), (100, 1.0, 100), (10, 0.75, 14)])
def test_rows_for(p: int, gamma: float, n: int) -> None:
    assert rows_for(p, gamma) == n


def test_make_rng_streams() -> None:
    first = make_rng(3, spawn_key=(100, 0)).standard_normal(4)

    np.testing.assert_array_equal(first, make_rng(3, spawn_key=(100, 0)).standard_normal(4))
    assert not np.array_equal(first, make_rng(3, spawn_key=(100, 1)).standard_normal(4))
    assert make_rng(3, algorithm="Philox").standard_normal() != make_rng(3).standard_normal()
    with pytest.raises(DomainError):
        make_rng(3, algorithm="MT19937")


@pytest.mark.parametrize("kind", list(NoiseKind))
def test_noise_is_reproducible(kind: NoiseKind) -> None:
    spec = NoiseSpec(kind, 0.5, seed=9)

    Z = gen_noise(spec, 40, 20)

    assert Z.shape == (40, 20)
    assert np.all(np.isfinite(Z))
    np.testing.assert_array_equal(Z, gen_noise(spec, 40, 20))
    np.testing.assert_array_equal(Z, gen_noise(spec, 40, 20, make_rng(9)))


def test_padded_identity_has_unit_singular_values() -> None:
    Z = gen_noise(NoiseSpec(NoiseKind.PADDED_IDENTITY, 0.5), 20, 10)

    np.testing.assert_allclose(singular_values(Z), np.ones(10))


def test_ar1_without_memory_is_white_noise() -> None:
    Z = gen_noise(NoiseSpec(NoiseKind.AR1, 0.5, rho=0.0), 30, 15, make_rng(2))

    np.testing.assert_allclose(Z, make_rng(2).standard_normal((30, 15)) / math.sqrt(30))


def test_ar1_rows_follow_the_recursion() -> None:
    rho = 0.4
    Z = gen_noise(NoiseSpec(NoiseKind.AR1, 0.5, rho=rho), 30, 15, make_rng(2))
    innovations = make_rng(2).standard_normal((30, 15)) / math.sqrt(30)

    np.testing.assert_allclose(Z[0], innovations[0])
    np.testing.assert_allclose(Z[1:] - rho * Z[:-1], (1 - rho) * innovations[1:], atol=1e-12)


def test_marcenko_pastur_edge() -> None:
    p, gamma = 800, 0.5
    Z = gen_noise(NoiseSpec(NoiseKind.MARCENKO_PASTUR, gamma), rows_for(p, gamma), p, make_rng(6))

    values = singular_values(Z)

    assert values[0] == pytest.approx(1.0 + math.sqrt(gamma), abs=0.05)
    assert values[-1] == pytest.approx(1.0 - math.sqrt(gamma), abs=0.05)


def test_correlated_columns_scale_the_columns() -> None:
    assert {kind for kind in NoiseKind if kind.correlated_columns} == {NoiseKind.CHI10, NoiseKind.MIX2, NoiseKind.UNIF}
    Z = gen_noise(NoiseSpec(NoiseKind.MIX2, 0.5), 4000, 20, make_rng(8))

    variances = np.sum(Z * Z, axis=0)

    # column variances are drawn from {1, 10}
    assert np.all((np.abs(variances - 1.0) < 0.2) | (np.abs(variances - 10.0) < 2.0))


@pytest.mark.parametrize("gamma", [0.5, 1.0])
def test_fisher_product_edge_matches_free_product(gamma: float) -> None:
    p = 800
    Z = gen_noise(NoiseSpec(NoiseKind.FISHER3N, gamma), rows_for(p, gamma), p, make_rng(10))
    squared_edge = scipy.optimize.minimize_scalar(
        lambda t: (1 + t) * (1 + gamma * t) * (1 + t / 3) / t, bounds=(1e-3, 10.0), method="bounded"
    ).fun

    assert singular_values(Z)[0] == pytest.approx(math.sqrt(squared_edge), abs=0.05)


def test_fisher_ratio_follows_wachter_edge() -> None:
    # E[S2] = gamma * I and the inverse of a 3p-by-p Wishart factor has mean 3/2
    p, gamma = 400, 0.5
    n = rows_for(p, gamma)
    Z = gen_noise(NoiseSpec(NoiseKind.FISHER_F, gamma), n, p, make_rng(10))
    W1 = make_rng(10).standard_normal((n, p)) / math.sqrt(n)
    squared_edge = scipy.optimize.minimize_scalar(
        lambda t: 3 * (1 + t) * (1 + gamma * t) / (t * (2 - t)), bounds=(1e-3, 2 - 1e-3), method="bounded"
    ).fun

    assert singular_values(Z)[0] == pytest.approx(math.sqrt(squared_edge / gamma), rel=0.03)
    assert np.trace(Z.T @ Z) / p == pytest.approx(np.trace(W1.T @ W1) / p * 1.5 / gamma, rel=0.05)


@pytest.mark.parametrize(("n", "p"), [(10, 20), (0, 5)])
def test_noise_shape_validation(n: int, p: int) -> None:
    with pytest.raises(DomainError):
        gen_noise(NoiseSpec(NoiseKind.MARCENKO_PASTUR, 0.5), n, p)


def test_signal_has_prescribed_singular_values() -> None:
    X = gen_signal(SignalSpec((5.0, 2.0), seed=4), 40, 30)

    values = singular_values(X)

    np.testing.assert_allclose(values[:2], [5.0, 2.0], rtol=1e-12)
    np.testing.assert_allclose(values[2:], 0.0, atol=1e-12)
    np.testing.assert_array_equal(X, gen_signal(SignalSpec((5.0, 2.0), seed=4), 40, 30))


def test_empty_signal_is_zero() -> None:
    assert not np.any(gen_signal(SignalSpec(), 5, 3))


def test_signal_rank_cannot_exceed_dimensions() -> None:
    with pytest.raises(DomainError):
        gen_signal(SignalSpec((3.0, 2.0, 1.0)), 5, 2)
