import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pulseforge.metrics import (
    CSV_COLUMNS,
    MetricReport,
    ProbeError,
    effective_dimension,
    entanglement_capability,
    epd,
    expressivity,
    fidelity_histogram,
    haar_bin_mass,
    haar_bin_masses,
    haar_pdf,
    kl_divergence,
    mw_q,
    profile,
    qfi_matrix,
    sample_fidelities,
    unitary_rank,
    worker_count,
)
from pulseforge.qcore import zero_state
from pulseforge.templates import TemplateSpec, sample_parameters
from tests.conftest import random_state, random_unitary

PULSE_1Q = TemplateSpec("PULSE_1Q", 1)


class TestHaar:
    def test_pdf_examples(self):
        assert haar_pdf(0.37, 2) == 1
        assert haar_pdf(0.0, 4) == 3
        assert haar_pdf(0.5, 4) == pytest.approx(0.75)
        with pytest.raises(ValueError):
            haar_pdf(1.2, 4)

    def test_bin_mass_examples(self):
        assert haar_bin_mass(0.3, 0.32, 2) == pytest.approx(0.02)
        assert haar_bin_mass(0.0, 1.0, 4) == pytest.approx(1.0)
        assert haar_bin_mass(0.0, 0.5, 4) == pytest.approx(0.875)
        with pytest.raises(ValueError):
            haar_bin_mass(0.5, 0.5, 4)

    @pytest.mark.parametrize("dim", [2, 4, 8, 16])
    def test_masses_normalized(self, dim):
        assert abs(haar_bin_masses(50, dim).sum() - 1) <= 1e-12

    def test_mass_matches_pdf_quadrature(self):
        from scipy.integrate import quad

        for dim in (4, 8):
            assert haar_bin_mass(0.2, 0.7, dim) == pytest.approx(quad(haar_pdf, 0.2, 0.7, args=(dim,))[0], rel=1e-10)


class TestKL:
    def test_examples(self):
        p = np.full(4, 0.25)
        assert kl_divergence(p, p) == 0
        assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2))
        delta = np.zeros(50)
        delta[-1] = 1
        assert kl_divergence(delta, haar_bin_masses(50, 2)) == pytest.approx(math.log(50))

    def test_support_error(self):
        with pytest.raises(ValueError):
            kl_divergence([0.5, 0.5], [1.0, 0.0])
        with pytest.raises(ValueError):
            kl_divergence([1.0], [0.5, 0.5])

    @given(st.lists(st.floats(0, 1), min_size=2, max_size=20), st.integers(0, 2**31))
    def test_gibbs(self, raw, seed):
        p = np.array(raw)
        if p.sum() == 0:
            p[0] = 1
        q = np.random.default_rng(seed).random(len(p)) + 1e-3
        assert kl_divergence(p / p.sum(), q / q.sum()) >= 0


class TestQ:
    def test_product(self, rng):
        psi = np.kron(random_state(rng, 1), random_state(rng, 1))
        assert mw_q(psi) == pytest.approx(0, abs=1e-10)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_ghz(self, n):
        psi = np.zeros(2**n)
        psi[0] = psi[-1] = 1 / math.sqrt(2)
        assert mw_q(psi) == pytest.approx(1, abs=1e-10)

    def test_partial_entanglement(self):
        t = math.pi / 8
        assert mw_q([math.cos(t), 0, 0, math.sin(t)]) == pytest.approx(0.5, abs=1e-12)

    def test_single_qubit(self):
        with pytest.raises(ValueError):
            mw_q(zero_state(1))

    def test_local_unitary_invariance(self, rng):
        for n in (2, 3, 4):
            psi = random_state(rng, n)
            local = np.array([[1.0]])
            for _ in range(n):
                local = np.kron(random_unitary(rng, 2), local)
            assert mw_q(local @ psi) == pytest.approx(mw_q(psi), abs=1e-9)


def exact_pulse_fidelity_masses(device, bins=50, draws=2_000_000, seed=99):
    """Bloch-sphere law of the 1-qubit amp/angle pulse: rotation angle pi*amp/cal about an in-plane axis."""
    rng = np.random.default_rng(seed)
    t1, t2 = (math.pi * rng.uniform(-1, 1, (2, draws)) / device.cal_amplitude)
    dphi = rng.uniform(0, 2 * math.pi, draws)
    f = 0.5 * (1 + np.cos(t1) * np.cos(t2) + np.sin(t1) * np.sin(t2) * np.cos(dphi))
    counts, _ = np.histogram(f, bins=bins, range=(0, 1))
    return counts / draws


class TestExpressivity:
    def test_rz_delta(self):
        spec = TemplateSpec("RZ", 1)
        hist = fidelity_histogram(spec, n_samples=500)
        assert hist.counts[-1] == 500
        assert expressivity(spec, n_samples=500) == pytest.approx(math.log(50), abs=1e-9)

    def test_zero_amplitude_window_is_delta(self, device):
        from pulseforge.constraints import ConstraintSpec

        # amplitudes squeezed near zero leave |0> almost untouched
        c = ConstraintSpec(amplitude_range=(-1e-6, 1e-6))
        assert fidelity_histogram(PULSE_1Q, device, 200, constraints=c).counts[-1] == 200

    def test_pulse_histogram_follows_bloch_law(self, device):
        hist = fidelity_histogram(PULSE_1Q, device, n_samples=5000, seed=0)
        expected = 5000 * exact_pulse_fidelity_masses(device)
        assert hist.counts.sum() == 5000
        assert np.all(np.abs(hist.counts - expected) <= 5 * np.sqrt(expected) + 2)

    def test_histogram_edges_uniform(self):
        hist = fidelity_histogram(PULSE_1Q, n_samples=10, bins=20)
        np.testing.assert_allclose(np.diff(hist.edges), 0.05)

    def test_deterministic_and_worker_invariant(self):
        spec = TemplateSpec("HE", 2)
        a = sample_fidelities(spec, n_samples=600, seed=5, n_jobs=1)
        b = sample_fidelities(spec, n_samples=600, seed=5, n_jobs=3)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, sample_fidelities(spec, n_samples=600, seed=6))

    def test_prefix_stable(self):
        # per-sample streams: a shorter run is a prefix of a longer one
        spec = TemplateSpec("RX", 1)
        np.testing.assert_array_equal(sample_fidelities(spec, n_samples=300)[:120], sample_fidelities(spec, n_samples=120))


class TestEntanglement:
    def test_product_template(self):
        res = entanglement_capability(TemplateSpec("PULSE_1Q", 3), n_samples=50)
        assert abs(res.mean) <= 1e-10

    def test_one_qubit_rejected(self):
        with pytest.raises(ValueError):
            entanglement_capability(PULSE_1Q, n_samples=5)

    def test_values_in_range(self):
        res = entanglement_capability(TemplateSpec("BLOCK", 3), n_samples=60, seed=2)
        assert np.all((res.values >= 0) & (res.values <= 1))
        assert res.max == res.values.max()


def worker_env(monkeypatch):
    monkeypatch.setenv("PULSEFORGE_THREADS", "2")
    return worker_count(8)


def test_thread_cap(monkeypatch):
    assert worker_env(monkeypatch) == 2
    monkeypatch.delenv("PULSEFORGE_THREADS")
    assert worker_count(None) == 1


class TestQFI:
    def test_rz_is_zero(self):
        q = qfi_matrix(TemplateSpec("RZ", 1), None, [0.7])
        np.testing.assert_allclose(q.matrix, 0, atol=1e-8)
        assert epd(q) == 0

    def test_pulse_rank_two(self, device):
        q = qfi_matrix(PULSE_1Q, device, [0.13, 1.1])
        assert np.sum(np.linalg.eigvalsh(q.matrix) > 1e-6) == 2
        assert epd(q) == 2

    def test_symmetric_psd(self, device, rng):
        for name, n in [("HE", 2), ("DECAY", 3), ("RAND_11", 3), ("BLOCKPULSE_2Q", 2)]:
            spec = TemplateSpec(name, n, seed=1)
            theta = sample_parameters(spec, rng=rng, interior={"amplitude": 0.01, "duration": 16}).values
            m = qfi_matrix(spec, device, theta).matrix
            np.testing.assert_allclose(m, m.T, atol=1e-9)
            assert np.linalg.eigvalsh(m).min() >= -1e-8

    def test_matches_analytic_bloch_metric(self, device):
        # |psi> sits at polar angle t = pi*amp/cal: F_amp,amp = (dt/damp)^2 / 4, F_angle,angle = sin(t)^2 / 4
        amp, phi = 0.13, 1.1
        t = math.pi * amp / device.cal_amplitude
        q = qfi_matrix(PULSE_1Q, device, [amp, phi]).matrix
        # central differences carry a relative error of about (k eps)^2 / 6, k = pi / cal
        assert q[0, 0] == pytest.approx((math.pi / device.cal_amplitude) ** 2 / 4, rel=1e-4)
        assert q[1, 1] == pytest.approx(math.sin(t) ** 2 / 4, rel=1e-4)
        assert q[0, 1] == pytest.approx(0, abs=1e-6)

    def test_richardson(self, device):
        theta = [0.31, 2.0]
        f = [qfi_matrix(PULSE_1Q, device, theta, epsilon=e).matrix for e in (4e-3, 2e-3, 1e-3)]
        d1, d2 = np.abs(f[0] - f[1]).max(), np.abs(f[1] - f[2]).max()
        assert 3.0 < d1 / d2 < 5.0

    def test_probe_error_names_coordinate(self, device):
        with pytest.raises(ProbeError, match="parameter 0"):
            qfi_matrix(PULSE_1Q, device, [1.0, 0.5])

    def test_duration_probe(self, device):
        spec = TemplateSpec("DECAY", 2)
        theta = sample_parameters(spec, rng=3, interior={"amplitude": 0.01, "duration": 16}).values
        assert 0 < epd(qfi_matrix(spec, device, theta)) <= 6


class TestEPD:
    def test_examples(self):
        assert effective_dimension(PULSE_1Q) == 2
        assert effective_dimension(TemplateSpec("RZ", 1)) == 0
        assert effective_dimension(TemplateSpec("RXCX2Q", 2)) == 3

    def test_pure_state_bound(self, rng):
        for name, n in [("HE", 2), ("BLOCK", 2), ("RAND_9", 2), ("DECAY", 3), ("UNIVERSAL2Q", 2)]:
            spec = TemplateSpec(name, n, seed=int(rng.integers(100)))
            rank = effective_dimension(spec, n_points=3, seed=int(rng.integers(100)))
            from pulseforge.templates import n_params

            assert rank <= min(n_params(spec), 2 ** (n + 1) - 2)

    def test_empty_matrix(self):
        from pulseforge.metrics import QFIMatrix

        assert epd(QFIMatrix(np.zeros((0, 0)), np.zeros(0))) == 0

    def test_unitary_rank_route(self, device):
        assert unitary_rank(PULSE_1Q, [0.13, 1.1], device) == 2
        spec = TemplateSpec("UNIVERSAL2Q", 2)
        theta = np.random.default_rng(0).uniform(0, 2 * np.pi, 15)
        assert unitary_rank(spec, theta) == 15
        assert unitary_rank(TemplateSpec("DRESSED_2Q", 2), sample_parameters(TemplateSpec("DRESSED_2Q", 2), rng=4, interior={"amplitude": 0.01}).values, device) <= 11


class TestReport:
    def test_profile(self, device):
        r = profile(TemplateSpec("HE", 2), device, n_samples=100, ent_samples=50, epd_points=3)
        assert r.n_params == 7 and r.n_cr == 1
        assert r.epd <= 6
        assert 0 <= r.ent_mean_q <= r.ent_max_q <= 1
        assert r.duration_min_dt <= r.duration_dt
        assert r.samples == 100 and r.ent_samples == 50
        row = r.csv_row()
        assert len(row) == len(CSV_COLUMNS) and row[0] == "HE"
        assert "histogram" not in r.to_dict()

    def test_single_qubit_profile_leaves_ent_blank(self):
        r = profile(PULSE_1Q, n_samples=50, metrics=("expr", "ent"))
        assert r.ent_mean_q is None and r.epd is None
        assert r.csv_row()[CSV_COLUMNS.index("ent_mean_q")] == ""

    def test_epd_bound_enforced(self):
        with pytest.raises(ValueError):
            MetricReport("X", 1, 1, None, None, None, 3, 2, 0, 0, 0, 0)
