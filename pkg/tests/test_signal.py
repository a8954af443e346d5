import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from dampid import signal as sg
from dampid.core import ModalState
from dampid.errors import DomainError
from dampid.systems import closed_form, make_model

SYSTEMS = [("wave", 3.0), ("wave", -3.0), ("schrodinger", 0.7), ("strings", 3.0)]


def random_state(model, N, rng, decay=3.0):
    idx = model.indices(N)
    w = (1.0 + np.abs(idx).astype(float)) ** -decay
    return ModalState(idx, w * (rng.uniform(-1, 1, idx.size) + 1j * rng.uniform(-1, 1, idx.size)))


def brute_norm(fn, a, b, n=200001):
    t = np.linspace(a, b, n)
    return math.sqrt(integrate.simpson(np.abs(fn(t)) ** 2, x=t))


# -- synthesis ---------------------------------------------------------------


def test_zero_state_synthesizes_zero():
    m = make_model("wave", q=3)
    sig = sg.ModalSignal.from_state(m, 3.0, ModalState.zeros(m.indices(10)))
    assert not np.any(sig(np.linspace(0, 5, 11)))


def test_schrodinger_single_mode_magnitude():
    m = make_model("schrodinger")
    sig = sg.ModalSignal.from_state(m, 0.7, ModalState.single(m.indices(3), 1))
    # sqrt(2) e^0.7 = 2.847880; the quoted 2.84823 is a slip in the last digits
    assert abs(abs(sig(1.0)) - math.sqrt(2) * math.exp(0.7)) < 1e-13
    assert abs(abs(sig(1.0)) - 2.84788) < 1e-5


def test_wave_constant_mode_is_real_exponential():
    m = make_model("wave", q=3)
    sig = sg.ModalSignal.from_state(m, 3.0, ModalState.single([0], 0))
    t = np.linspace(0, 3, 31)
    y = sig(t)
    assert np.max(np.abs(y.imag)) == 0
    assert np.all(np.diff(y.real) > 0)
    assert abs(sig(2.0) - 2.0) < 1e-14


def test_synthesize_overflow():
    m = make_model("wave", q=3)
    sig = sg.ModalSignal.from_state(m, 3.0, ModalState.single([0], 0))
    with pytest.raises(OverflowError):
        sig(2100.0)
    with pytest.raises(OverflowError):
        sg.window_l2_norm(sig, 1500.0, 1100.0 + 1000.0)


def test_modal_signal_validation():
    with pytest.raises(ValueError):
        sg.ModalSignal(0.0, 2.0, [1, 2], K=[1])
    with pytest.raises(ValueError):
        sg.ModalSignal(0.0, 2.0, [1])


@pytest.mark.parametrize("system,q", SYSTEMS)
def test_periodicity(system, q, rng):
    m = make_model(system, q=q)
    # t + L itself rounds (~1e-14 at t ~ 50) and labels up to ~1.6e5 amplify that,
    # so the state is the smooth class used throughout
    sig = sg.ModalSignal.from_state(m, q, random_state(m, 200, rng))
    t = rng.uniform(0, 50, 100)
    P0 = sig.periodic_part(t)
    P1 = sig.periodic_part(t + m.L)
    assert np.max(np.abs(P1 - P0)) < 1e-10 * np.max(np.abs(P0))


def test_grid_nodes_match_direct_synthesis(rng):
    for system, q in SYSTEMS:
        m = make_model(system, q=q)
        sig = sg.ModalSignal.from_state(m, q, random_state(m, 300, rng))
        g = sg.sample_grid(sig, 3.0, 64)
        assert np.allclose(g.samples, sig(g.t), atol=1e-11)


# -- disturbances ------------------------------------------------------------


def test_disturbance_values_at_zero():
    assert abs(sg.DisturbanceSpec.example("wave")(0.0) - (2 * math.sin(1) + 3)) < 1e-15
    assert abs(sg.DisturbanceSpec.example("wave")(0.0) - 4.68294) < 1e-5
    assert sg.DisturbanceSpec.example("schrodinger")(0.0) == 3j


def test_apply_none_is_identity():
    g = sg.GridSignal(0.0, 0.1, np.arange(5) + 1j)
    assert sg.apply_disturbance(g, sg.DisturbanceSpec.none()) is g


def test_apply_example_disturbance():
    g = sg.GridSignal(0.0, 0.5, np.zeros(3))
    out = sg.apply_disturbance(g, sg.DisturbanceSpec.example("wave"))
    assert abs(out.samples[0] - (2 * math.sin(1) + 3)) < 1e-15


@pytest.mark.parametrize("kind", ["wave", "schrodinger", "strings"])
def test_example_bounds_hold(kind):
    spec = sg.DisturbanceSpec.example(kind)
    assert spec.check_bound(60.0)
    t = np.linspace(0, 60, 600001)
    # the closed-form M is tight: within 1% of the sampled sup
    assert np.max(np.abs(spec(t))) > 0.97 * spec.bound(60.0)


def test_custom_expression():
    spec = sg.DisturbanceSpec("custom", expr="sin(t) + 0.5j*cos(3*t)")
    assert abs(spec(0.0) - 0.5j) < 1e-15
    assert sg.DisturbanceSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ValueError):
        sg.DisturbanceSpec("bogus")


def test_noise_reproducible():
    g = sg.GridSignal(0.0, 0.01, np.exp(np.linspace(0, 1, 500)))
    spec = sg.DisturbanceSpec.noise(0.03, 12345)
    a = sg.apply_disturbance(g, spec).samples
    b = sg.apply_disturbance(g, spec).samples
    assert a.tobytes() == b.tobytes()
    c = sg.apply_disturbance(g, sg.DisturbanceSpec.noise(0.03, 12346)).samples
    assert not np.array_equal(a, c)
    assert np.max(np.abs(a / g.samples - 1)) <= 0.03


def test_noise_needs_seed():
    with pytest.raises(ValueError):
        sg.DisturbanceSpec("multiplicative_noise", level=0.01)


# -- window norms ------------------------------------------------------------


def test_constant_signal_norm():
    g = sg.GridSignal(0.0, 0.01, np.ones(201))
    assert abs(sg.window_l2_norm(g, 0.0, 2.0) - math.sqrt(2)) < 1e-14
    const = sg.ModalSignal(0.0, 2.0, [1.0], K=[0])
    assert abs(sg.window_l2_norm(const, 0.0, 2.0) - math.sqrt(2)) < 1e-14


def test_grid_window_outside_domain():
    g = sg.GridSignal(0.0, 0.01, np.ones(201))
    with pytest.raises(DomainError):
        sg.window_l2_norm(g, 1.0, 2.5)


@pytest.mark.parametrize("a,b", [(0.0, 1.0), (1.3, 2.2), (2.0, 7.5)])
def test_schrodinger_single_mode_norm(a, b):
    m = make_model("schrodinger")
    sig = sg.ModalSignal.from_state(m, 0.7, ModalState.single([1], 1))
    ref = math.sqrt(2 * (math.exp(1.4 * b) - math.exp(1.4 * a)) / 1.4)
    assert abs(sg.window_l2_norm(sig, a, b) - ref) < 1e-13 * ref


def test_example_norm_ratio_is_half():
    m = make_model("wave", q=-3)
    data = closed_form("sin_cos", amp0=-3.0, freq0=math.pi, amp1=math.pi, freq1=math.pi)
    st_ = m.project(-3.0, data, m.indices(200))
    sig = sg.ModalSignal.from_state(m, -3.0, st_)
    r = sg.window_l2_norm(sig, 2.0, 2.5) / sg.window_l2_norm(sig, 0.0, 0.5)
    assert abs(r - 0.5) < 1e-13


@pytest.mark.parametrize("system,q", SYSTEMS)
def test_exact_norm_against_brute_force(system, q, rng):
    m = make_model(system, q=q)
    sig = sg.ModalSignal.from_state(m, q, random_state(m, 30, rng))
    for a, b in [(0.3, 1.1), (2.0, 5.7)]:
        ref = brute_norm(sig, a, b, 400001)
        assert abs(sg.window_l2_norm(sig, a, b) - ref) < 1e-9 * ref


def test_cauchy_and_arithmetic_engines_agree(rng):
    m = make_model("wave", q=3)
    st_ = random_state(m, 40, rng)
    sig = sg.ModalSignal.from_state(m, 3.0, st_)
    # the same signal given by raw frequencies takes the separable route
    raw = sg.ModalSignal(sig.f, sig.L, sig.c, mu=sig.mu)
    a, b = np.array([0.2, 2.0, 3.3]), np.array([0.9, 4.5, 9.0])
    assert np.allclose(sg.window_sq_norms(sig, a, b), sg.window_sq_norms(raw, a, b), rtol=1e-12)


@pytest.mark.parametrize("system,q", SYSTEMS)
def test_window_shift_identity_exact(system, q, rng):
    m = make_model(system, q=q)
    L = m.L
    for _ in range(5):
        sig = sg.ModalSignal.from_state(m, q, random_state(m, 50, rng))
        T1 = rng.uniform(L, 3 * L)
        T2 = T1 + rng.uniform(0.1, 2 * L)
        near = sg.window_l2_norm(sig, T1, T2)
        far = sg.window_l2_norm(sig, T1 - L, T2 - L)
        assert abs(near - math.exp(m.f(q) * L) * far) < 1e-10 * near


@pytest.mark.parametrize("system,q", SYSTEMS)
def test_window_shift_identity_grid(system, q, rng):
    m = make_model(system, q=q)
    L = m.L
    sig = sg.ModalSignal.from_state(m, q, random_state(m, 10, rng))
    # dt resolves the top frequency by a wide margin
    mu_max = float(np.max(np.abs(sig.mu)))
    M = int(math.ceil(L / ((2 * math.pi / mu_max) / 200)))
    g = sg.sample_grid(sig, 4 * L, M)
    T1 = 1.37 * L
    T2 = T1 + 0.81 * L
    near = sg.window_l2_norm(g, T1, T2)
    far = sg.window_l2_norm(g, T1 - L, T2 - L)
    assert abs(near - math.exp(m.f(q) * L) * far) < 1e-6 * near


@pytest.mark.parametrize("system,q", SYSTEMS)
def test_engines_agree(system, q, rng):
    m = make_model(system, q=q)
    sig = sg.ModalSignal.from_state(m, q, random_state(m, 50 if system != "schrodinger" else 20, rng))
    mu_max = float(np.max(np.abs(sig.mu)))
    dt = (2 * math.pi / mu_max) / 20
    M = int(math.ceil(m.L / dt))
    g = sg.sample_grid(sig, 2 * m.L, M)
    a, b = 0.4 * m.L, 1.7 * m.L
    ex = sg.window_l2_norm(sig, a, b)
    assert abs(sg.window_l2_norm(g, a, b) - ex) < 1e-6 * ex


@given(st.floats(0.0, 3.0), st.floats(0.05, 3.0), st.floats(-2.0, 2.0))
def test_norm_scales_with_amplitude(a, width, logc):
    sig = sg.ModalSignal(0.3, 2.0, [1.0, 0.5j, -0.2], K=[-1, 0, 4])
    c = math.exp(logc)
    n1 = sg.window_l2_norm(sig, a, a + width)
    n2 = sg.window_l2_norm(sig.scaled(c), a, a + width)
    assert abs(n2 - c * n1) <= 1e-12 * c * n1 + 1e-300


# -- weighted integrals ------------------------------------------------------


def test_weighted_integral_examples():
    const = sg.ModalSignal(0.0, 2.0, [1.0], K=[0])
    assert abs(sg.weighted_exponential_integral(const, 0.0, 0.0, 2.0) - 2.0) < 1e-15
    lam = 0.3 + 1j * math.pi
    e = sg.ModalSignal(0.3, 2.0, [1.0], K=[1])
    assert abs(sg.weighted_exponential_integral(e, lam, 0.0, 2.0) - 2.0) < 1e-14
    for mi in range(-3, 4):
        ym = sg.ModalSignal(0.0, 2.0, [1.0], K=[mi])
        for n in range(-3, 4):
            v = sg.weighted_exponential_integral(ym, 1j * n * math.pi, 0.0, 2.0)
            assert abs(v - (2.0 if mi == n else 0.0)) < 1e-14


@pytest.mark.parametrize("system,q", SYSTEMS)
def test_weighted_integral_fft_path_matches_direct(system, q, rng):
    m = make_model(system, q=q)
    sig = sg.ModalSignal.from_state(m, q, random_state(m, 80, rng))
    idx = m.indices(60)
    lam = m.eigenvalue(q, idx)
    fast = sg.weighted_exponential_integral(sig, lam, 1.3, 1.3 + m.L)
    z = sig.f + 1j * sig.mu[None, :] - lam[:, None]
    direct = sg._float_window(z, 1.3, 1.3 + m.L) @ sig.c
    assert np.max(np.abs(fast - direct)) < 1e-11 * np.max(np.abs(direct))


# -- disturbed signals -------------------------------------------------------


@pytest.mark.parametrize("system,q", SYSTEMS)
def test_disturbed_signal_against_brute_force(system, q, rng):
    m = make_model(system, q=q)
    sig = sg.ModalSignal.from_state(m, q, random_state(m, 25, rng))
    spec = sg.DisturbanceSpec.example(system) if system != "wave" else sg.DisturbanceSpec.example("wave")
    ds = sg.disturb(sig, spec, 3 * m.L, 512)
    for a, b in [(0.1234, 1.5), (m.L, 2.5 * m.L)]:
        ref = brute_norm(ds, a, b, 400001)
        assert abs(sg.window_l2_norm(ds, a, b) - ref) < 1e-9 * ref
    lam = m.eigenvalue(q, m.indices(5))
    t = np.linspace(0.7, 0.7 + m.L, 400001)
    yd = ds(t)
    ref = np.array([integrate.simpson(yd * np.exp(-l * t), x=t) for l in lam])
    got = sg.weighted_exponential_integral(ds, lam, 0.7, 0.7 + m.L)
    assert np.max(np.abs(got - ref)) < 1e-8 * np.max(np.abs(ref))


def test_disturbed_to_grid_consistent(rng):
    m = make_model("wave", q=3)
    sig = sg.ModalSignal.from_state(m, 3.0, random_state(m, 25, rng))
    ds = sg.disturb(sig, sg.DisturbanceSpec.example("wave"), 4.0, 256)
    g = ds.to_grid()
    assert np.allclose(g.samples, ds(g.t), atol=1e-11)


def test_disturbance_record_bound():
    m = make_model("wave", q=3)
    sig = sg.ModalSignal.from_state(m, 3.0, ModalState.single([0], 0))
    ds = sg.disturb(sig, sg.DisturbanceSpec.noise(0.01, 7), 4.0, 256)
    assert np.all(np.abs(ds.record) <= ds.bound_M + 1e-15)


# -- CSV ---------------------------------------------------------------------


def test_csv_round_trip_is_bit_exact(tmp_path, rng):
    g = sg.GridSignal(0.0, 2.0 / 2048, rng.normal(size=300) + 1j * rng.normal(size=300))
    p = tmp_path / "y.csv"
    g.to_csv(p)
    assert p.read_text().splitlines()[0] == "t,re,im"
    back = sg.GridSignal.from_csv(p)
    assert back.samples.tobytes() == g.samples.tobytes()
    assert np.array_equal(back.t, g.t)


def test_csv_rejects_nonuniform(tmp_path):
    p = tmp_path / "y.csv"
    p.write_text("t,re,im\n0,1,0\n0.1,1,0\n0.3,1,0\n")
    with pytest.raises(DomainError):
        sg.GridSignal.from_csv(p)


def test_signal_domain():
    g = sg.GridSignal(1.0, 0.5, np.ones(5))
    assert sg.signal_domain(g) == (1.0, 3.0)
    assert sg.signal_domain(sg.ModalSignal(0.0, 2.0, [1.0], K=[0]))[1] == math.inf
