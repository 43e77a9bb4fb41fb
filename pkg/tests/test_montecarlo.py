# =============================================================================
# tests/test_montecarlo.py — Tests de la génération de paires
# =============================================================================

import numpy as np
import pytest
from scipy import stats

from app.errors import CapacityError, DomainError
from app.generators.montecarlo import (
    CorrelationSampler,
    PairBatch,
    PairSample,
    SourceConfig,
    generate_pairs,
    iter_pair_chunks,
    pair_arrival_times,
    phi_support,
    sample_detuning,
)
from app.models.spectral import DispersiveMedium
from app.physics.spectra import flat, gaussian, rectangle, sinc_phase_matching, wavelength_to_omega

OMEGA_P = float(wavelength_to_omega(457.9))
OMEGA_S0 = float(wavelength_to_omega(850.0))
WIDTH = 5e13  # rad/s


def _source(phi=None, pair_rate=1e5, duration=1.0, seed=3) -> SourceConfig:
    return SourceConfig(
        pair_rate=pair_rate,
        duration=duration,
        omega_p=OMEGA_P,
        omega_s0=OMEGA_S0,
        omega_i0=OMEGA_P - OMEGA_S0,
        phi=phi or rectangle(0.0, WIDTH),
        rng_seed=seed,
    )


# ---------------------------------------------------------------------------
# Source
# ---------------------------------------------------------------------------

def test_nombre_de_paires_poissonien():
    batch = generate_pairs(_source())
    assert abs(len(batch) - 1e5) < 5 * np.sqrt(1e5)


def test_instants_tries_dans_la_duree():
    batch = generate_pairs(_source(duration=0.3))
    assert np.all(np.diff(batch.birth_time) >= 0)
    assert batch.birth_time.min() >= 0 and batch.birth_time.max() < 0.3


def test_rectangle_support_respecte():
    batch = generate_pairs(_source())
    assert np.all(np.abs(batch.nu) <= WIDTH / 2)


def test_conservation_energie_exacte():
    """ω_s + ω_i == ω_p en virgule flottante, pour chaque paire."""
    batch = generate_pairs(_source(phi=gaussian(0.0, WIDTH)))
    assert np.all(batch.omega_s + batch.omega_i == OMEGA_P)


def test_energie_incoherente_refusee():
    with pytest.raises(ValueError):
        SourceConfig(pair_rate=1.0, duration=1.0, omega_p=OMEGA_P, omega_s0=OMEGA_S0,
                     omega_i0=OMEGA_P - OMEGA_S0 + 1e9, phi=rectangle(0.0, WIDTH))


def test_desaccord_gaussien_test_ks():
    """|Φ|² gaussienne de largeur w en amplitude ⇒ ν ~ N(0, w/(4√ln2))."""
    rng = np.random.default_rng(11)
    nu = sample_detuning(gaussian(0.0, WIDTH), rng, 20_000)
    sigma = WIDTH / (4 * np.sqrt(np.log(2)))
    assert stats.kstest(nu, "norm", args=(0.0, sigma)).pvalue > 1e-3


def test_support_sinc_et_flat():
    low, high = phi_support(sinc_phase_matching(gvm=1e-10))
    assert low == -high and high > 0
    with pytest.raises(DomainError):
        phi_support(flat())


def test_determinisme_par_graine():
    a = generate_pairs(_source(seed=5))
    b = generate_pairs(_source(seed=5))
    c = generate_pairs(_source(seed=6))
    np.testing.assert_array_equal(a.birth_time, b.birth_time)
    np.testing.assert_array_equal(a.nu, b.nu)
    assert len(a) != len(c) or not np.array_equal(a.nu, c.nu)


def test_capacite_depassee():
    with pytest.raises(CapacityError):
        generate_pairs(_source(pair_rate=1e10, duration=1.0))


# ---------------------------------------------------------------------------
# Blocs
# ---------------------------------------------------------------------------

def test_blocs_couvrent_la_duree():
    config = _source(duration=0.25)
    chunks = list(iter_pair_chunks(config, 0.1))
    assert [k for k, _ in chunks] == [0, 1, 2]
    for k, batch in chunks:
        assert np.all(batch.birth_time >= 0.1 * k)
        assert np.all(batch.birth_time < min(0.1 * (k + 1), 0.25) + 1e-12)
    total = PairBatch.concatenate([batch for _, batch in chunks])
    assert np.all(np.diff(total.birth_time) >= 0)
    assert abs(len(total) - 25_000) < 5 * np.sqrt(25_000)


def test_blocs_reproductibles_et_independants_de_la_cle():
    config = _source(duration=0.2)
    premier = dict(iter_pair_chunks(config, 0.1, spawn_key=(1, 4)))
    second = dict(iter_pair_chunks(config, 0.1, spawn_key=(1, 4)))
    autre = dict(iter_pair_chunks(config, 0.1, spawn_key=(1, 5)))
    np.testing.assert_array_equal(premier[1].nu, second[1].nu)
    assert not np.array_equal(premier[1].nu[:10], autre[1].nu[:10])


def test_capacite_par_bloc():
    """Une longue acquisition passe par blocs tant que chaque bloc tient."""
    config = _source(pair_rate=1e9, duration=10.0)
    k, batch = next(iter_pair_chunks(config, 1e-4))
    assert k == 0 and len(batch) > 0


def test_lot_vide_et_acces_par_index():
    assert len(PairBatch.empty()) == 0
    batch = generate_pairs(_source(duration=0.001))
    paire = batch[0]
    assert isinstance(paire, PairSample)
    assert paire.omega_s + paire.omega_i == OMEGA_P


# ---------------------------------------------------------------------------
# Instants d'arrivée
# ---------------------------------------------------------------------------

def test_arrivee_retards_de_groupe():
    chemin = DispersiveMedium(inverse_group_velocity=1 / 2e8, length=2.0)  # 10 ns
    paire = PairSample(birth_time=1e-3, nu=0.0, omega_s=OMEGA_S0, omega_i=OMEGA_P - OMEGA_S0)
    t1, t2 = pair_arrival_times(paire, chemin, DispersiveMedium())
    assert t1 == pytest.approx(1e-3 + 1e-8, abs=1e-18)
    assert t2 == pytest.approx(1e-3, abs=1e-18)


def test_arrivee_avec_correlation():
    batch = generate_pairs(_source(duration=0.05))
    tau = np.linspace(-1e-11, 1e-11, 2001)
    sampler = CorrelationSampler(tau, np.exp(-0.5 * (tau / 2e-12) ** 2))
    t1, t2 = pair_arrival_times(batch, DispersiveMedium(), DispersiveMedium(),
                                sampler, np.random.default_rng(0))
    ecarts = t2 - t1
    assert np.std(ecarts) == pytest.approx(2e-12, rel=0.05)
    np.testing.assert_allclose((t1 + t2) / 2, batch.birth_time, rtol=0, atol=1e-15)


def test_sampler_sans_correlation():
    rng = np.random.default_rng(0)
    assert np.all(CorrelationSampler.none().sample(rng, 10) == 0)
    with pytest.raises(DomainError):
        pair_arrival_times(generate_pairs(_source(duration=0.001)), DispersiveMedium(),
                           DispersiveMedium(), CorrelationSampler.none())
