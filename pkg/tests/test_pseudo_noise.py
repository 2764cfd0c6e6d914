"""Tests for the pseudo-noise prostheses and the Kolmogorov-Smirnov distance."""

import numpy as np
import pytest

from screenot.errors import DomainError, RankBoundError
from screenot.matrix_lab import singular_values
from screenot.noise_models import NoiseKind, NoiseSpec, SignalSpec, gen_noise, gen_signal, make_rng
from screenot.pseudo_noise import (
    SingularSpectrum,
    Strategy,
    impute,
    ks_distance,
    pseudo_noise_cdf,
    transport_to_zero,
    winsorize,
)
from screenot.spectral import AtomicCDF

FIVE = SingularSpectrum.of([5.0, 4.0, 3.0, 2.0, 1.0])


@pytest.mark.parametrize(
    ("value", "expected"),
    [
        ("0", Strategy.TRANSPORT_TO_ZERO),
        ("zero", Strategy.TRANSPORT_TO_ZERO),
        ("transport_to_zero", Strategy.TRANSPORT_TO_ZERO),
        ("W", Strategy.WINSORIZE),
        ("winsorize", Strategy.WINSORIZE),
        ("i", Strategy.IMPUTE),
        (" Impute ", Strategy.IMPUTE),
        (Strategy.IMPUTE, Strategy.IMPUTE),
    ],
)
def test_strategy_parse(value: str, expected: Strategy) -> None:
    assert Strategy.parse(value) is expected


def test_strategy_parse_rejects_unknown_names() -> None:
    with pytest.raises(ValueError, match="Unknown strategy"):
        Strategy.parse("median")


def test_singular_spectrum_normalizes_orientation() -> None:
    spectrum = SingularSpectrum(np.array([1.0, 3.0, 2.0]), n=3, p=10)

    assert (spectrum.n, spectrum.p) == (10, 3)
    assert spectrum.gamma == pytest.approx(0.3)
    assert spectrum.values.tolist() == [3.0, 2.0, 1.0]


@pytest.mark.parametrize(
    ("values", "n", "p"),
    [
        ([1.0, 2.0], 5, 3),
        ([1.0, -2.0], 2, 2),
        ([1.0, np.nan], 2, 2),
        ([1.0], 0, 1),
    ],
)
def test_singular_spectrum_rejects_invalid_input(values: list[float], n: int, p: int) -> None:
    with pytest.raises(DomainError):
        SingularSpectrum(np.array(values), n, p)


def test_transport_to_zero() -> None:
    assert transport_to_zero(FIVE, 2).atoms.tolist() == [3.0, 2.0, 1.0, 0.0, 0.0]


def test_winsorize() -> None:
    assert winsorize(FIVE, 2).atoms.tolist() == [3.0, 3.0, 3.0, 2.0, 1.0]


def test_impute_reconstructs_an_upper_tail() -> None:
    atoms = impute(FIVE, 2).atoms

    # anchor y[3] = 3 and reference y[5] = 1, exponent 2/3
    expected_top = 3.0 + 2.0 / (2.0 ** (2.0 / 3.0) - 1.0)
    expected_second = 3.0 + 2.0 ** (1.0 / 3.0)
    assert atoms[0] == pytest.approx(expected_top, rel=1e-14)
    assert atoms[1] == pytest.approx(expected_second, rel=1e-14)
    assert atoms[2:].tolist() == [3.0, 2.0, 1.0]


@pytest.mark.parametrize("strategy", list(Strategy))
def test_prostheses_keep_p_atoms(strategy: Strategy) -> None:
    spectrum = SingularSpectrum.of(np.linspace(1.0, 3.0, 21))
    cdf = pseudo_noise_cdf(spectrum, 5, strategy)

    assert cdf.p == spectrum.p
    assert cdf.atoms[-1] >= 0


@pytest.mark.parametrize("strategy", list(Strategy))
def test_zero_rank_bound_keeps_the_spectrum(strategy: Strategy) -> None:
    assert pseudo_noise_cdf(FIVE, 0, strategy).atoms.tolist() == FIVE.values.tolist()


@pytest.mark.parametrize(
    ("strategy", "k"),
    [
        (Strategy.TRANSPORT_TO_ZERO, 5),
        (Strategy.WINSORIZE, 5),
        (Strategy.IMPUTE, 3),
        (Strategy.IMPUTE, -1),
        (Strategy.WINSORIZE, -1),
    ],
)
def test_rank_bound_violations(strategy: Strategy, k: int) -> None:
    with pytest.raises(RankBoundError):
        pseudo_noise_cdf(FIVE, k, strategy)


def test_largest_admissible_rank_bounds() -> None:
    assert transport_to_zero(FIVE, 4).edge == 1.0
    assert winsorize(FIVE, 4).atoms.tolist() == [1.0] * 5
    assert impute(FIVE, 2).p == 5


def test_ks_distance_counts_in_integers() -> None:
    F = AtomicCDF([1.0, 2.0, 3.0])
    G = AtomicCDF([1.0, 2.0, 4.0])

    assert ks_distance(F, G) == 1 / 3
    assert ks_distance(G, F) == 1 / 3
    assert ks_distance(F, F) == 0.0


def test_ks_distance_between_different_sizes() -> None:
    assert ks_distance(AtomicCDF([1.0]), AtomicCDF([1.0, 2.0])) == 0.5


def test_ks_distance_tolerance_ties_close_atoms() -> None:
    F = AtomicCDF([1.0, 2.0])
    G = AtomicCDF([1.0 + 1e-12, 2.0])

    assert ks_distance(F, G) == 0.5
    assert ks_distance(F, G, atol=1e-9) == 0.0
    with pytest.raises(DomainError):
        ks_distance(F, G, atol=-1.0)


@pytest.mark.parametrize(
    ("strategy", "expected"),
    [(Strategy.TRANSPORT_TO_ZERO, 3 / 8), (Strategy.WINSORIZE, 0.0), (Strategy.IMPUTE, 0.0)],
)
def test_pseudo_noise_of_aligned_spikes_meets_rank_bound(strategy: Strategy, expected: float) -> None:
    # padded identity noise plus spikes on its own singular vectors: y = (6, 4, 1, ..., 1)
    noise = AtomicCDF(np.ones(8))
    observed = SingularSpectrum(np.array([6.0, 4.0, *[1.0] * 6]), n=12, p=8)

    pseudo = pseudo_noise_cdf(observed, 3, strategy)

    assert ks_distance(pseudo, noise) == expected
    assert ks_distance(pseudo, noise) <= 3 / 8


@pytest.mark.parametrize("strategy", list(Strategy))
@pytest.mark.parametrize("kind", [NoiseKind.MARCENKO_PASTUR, NoiseKind.MIX2, NoiseKind.PADDED_IDENTITY])
def test_pseudo_noise_stays_close_to_noise_spectrum(kind: NoiseKind, strategy: Strategy) -> None:
    # interlacing moves at most r empirical atoms, the prosthesis at most k
    n, p, k = 120, 60, 6
    spikes = (8.0, 4.0, 2.0, 1.0)
    rng = make_rng(7, spawn_key=(p,))
    X = gen_signal(SignalSpec(spikes), n, p, rng)
    Z = gen_noise(NoiseSpec(kind, p / n), n, p, rng)
    observed = SingularSpectrum(singular_values(X + Z), n, p)
    noise = AtomicCDF(singular_values(Z))

    pseudo = pseudo_noise_cdf(observed, k, strategy)

    assert ks_distance(pseudo, noise, atol=1e-9) <= (k + len(spikes)) / p


@pytest.mark.slow
def test_pseudo_noise_rank_bound_on_random_instances() -> None:
    rng = np.random.default_rng(31)
    kinds = list(NoiseKind)
    for instance in range(200):
        p = int(rng.choice([100, 500]))
        gamma = float(rng.choice([0.5, 1.0]))
        n = int(round(p / gamma))
        k = int(rng.integers(1, 21))
        rank = int(rng.integers(0, k + 1))
        spikes = tuple(np.sort(rng.uniform(0.2, 10.0, size=rank))[::-1])
        kind = kinds[instance % len(kinds)]
        stream = make_rng(instance)
        X = gen_signal(SignalSpec(spikes), n, p, stream)
        Z = gen_noise(NoiseSpec(kind, gamma), n, p, stream)
        observed = SingularSpectrum(singular_values(X + Z), n, p)
        noise = AtomicCDF(singular_values(Z))

        for strategy in Strategy:
            pseudo = pseudo_noise_cdf(observed, k, strategy)
            assert ks_distance(pseudo, noise, atol=1e-9) <= (k + rank) / p, (kind, strategy, k, rank)
