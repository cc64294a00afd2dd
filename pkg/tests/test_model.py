import math

import numpy as np
import pytest

from stap_sim import effective, model
from stap_sim.model import Scheme, SchemeSpec

R2 = math.sqrt(2)


def spec_of(scheme, **kw):
    return SchemeSpec(scheme, **kw)


@pytest.mark.parametrize("kw", [dict(t_f=0), dict(v=-1), dict(epsilon=0.0), dict(gamma=-0.1),
                                dict(epsilon=math.pi / 2)])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        SchemeSpec(Scheme.FPT, **kw)


def test_spec_epsilon_message():
    with pytest.raises(ValueError, match="diverges"):
        SchemeSpec(Scheme.FPT, epsilon=0.0)


def test_ghz_needs_two_atoms():
    with pytest.raises(ValueError):
        SchemeSpec(Scheme.GHZ, m=1)
    assert SchemeSpec(Scheme.GHZ).m == 3


def test_fpt_basis():
    b = model.build_basis(spec_of(Scheme.FPT))
    assert b.dim == 8
    assert b.labels[0] == "f g;00;0" and b.labels[6] == "g f;00;0"
    assert b.absorbing == (7,) and b.labels[7] == "g g;00;0"
    assert b.initial == (0,) and b.target == (6,)


def test_transfer_basis():
    b = model.build_basis(spec_of(Scheme.TRANSFER))
    assert b.dim == 12 and len(b.absorbing) == 1


@pytest.mark.parametrize("scheme", list(Scheme))
def test_basis_invariants(scheme):
    spec = spec_of(scheme)
    b = model.build_basis(spec)
    assert len(set(b.labels)) == b.dim
    assert b.target
    h = model.hamiltonian_fn(spec, model.stap_protocol(spec))
    for t in np.linspace(0, spec.t_f, 11):
        for i in b.absorbing:
            assert np.linalg.norm(h(t)[:, i]) == 0
    assert abs(np.linalg.norm(model.initial_state(spec)) - 1) < 1e-15
    assert abs(np.linalg.norm(model.target_state(spec)) - 1) < 1e-15


def test_fpt_couplings():
    spec = SchemeSpec(Scheme.FPT, v=1.3, lam=0.8)
    p = model.stap_protocol(spec)
    h0 = model.build_hamiltonian(spec, p, 0.0)
    assert h0[1, 0] == 0 and abs(h0[5, 6] - p.omega0) < 1e-15
    h = model.build_hamiltonian(spec, p, 3.7).real
    assert h[2, 1] == 0.8 and h[3, 2] == 1.3 and h[3, 4] == 1.3 and h[5, 4] == 0.8
    static = h.copy()
    for i, j in [(1, 0), (5, 6), (2, 1), (3, 2), (3, 4), (5, 4)]:
        static[i, j] = static[j, i] = 0
    assert not static.any()


def test_hamiltonian_time_range():
    spec = spec_of(Scheme.FPT)
    with pytest.raises(ValueError):
        model.build_hamiltonian(spec, model.stap_protocol(spec), 10.5)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_hamiltonian_hermitian(scheme):
    spec = spec_of(scheme)
    h = model.hamiltonian_fn(spec, model.stap_protocol(spec))
    for t in np.linspace(0, spec.t_f, 7):
        assert np.max(np.abs(h(t) - h(t).conj().T)) <= 1e-12


@pytest.mark.parametrize("scheme", list(Scheme))
def test_chain_isomorphism(scheme):
    spec = spec_of(scheme)
    emb = model.chain_embedding(spec)
    assert np.allclose(emb.conj().T @ emb, np.eye(7), atol=1e-15)
    p = model.stap_protocol(spec)
    o1, o2 = p.pulses()
    h = model.hamiltonian_fn(spec, p)
    for t in np.linspace(0, spec.t_f, 101):
        chain = effective.chain_hamiltonian(o1(t), o2(t), spec.v, spec.lam)
        assert np.max(np.abs(h(t) @ emb - emb @ chain)) <= 1e-12


def test_transfer_equals_fpt_in_chain_frame():
    tr, fpt = spec_of(Scheme.TRANSFER), spec_of(Scheme.FPT)
    emb = model.chain_embedding(tr)
    ht = model.hamiltonian_fn(tr, model.stap_protocol(tr))
    hf = model.hamiltonian_fn(fpt, model.stap_protocol(fpt))
    for t in np.linspace(0, 10, 101):
        assert np.max(np.abs(emb.conj().T @ ht(t) @ emb - hf(t)[:7, :7])) <= 1e-12
    assert np.allclose(model.initial_state(tr), emb[:, 0])
    assert np.allclose(model.target_state(tr), emb[:, 6])


def test_w2_equals_twoatom():
    w2 = spec_of(Scheme.W, m=2)
    b2 = spec_of(Scheme.BELL_TWOATOM)
    iso = model.w_to_twoatom_map(w2)
    assert np.allclose(iso.conj().T @ iso, np.eye(8))
    hw = model.hamiltonian_fn(w2, model.stap_protocol(w2))
    hb = model.hamiltonian_fn(b2, model.stap_protocol(b2))
    for t in np.linspace(0, 10, 101):
        assert np.max(np.abs(iso.conj().T @ hb(t) @ iso - hw(t))) <= 1e-12
    assert np.allclose(iso @ model.target_state(w2), model.target_state(b2))


def test_ghz_two_atoms_is_bell_aux():
    g, a = spec_of(Scheme.GHZ, m=2), spec_of(Scheme.BELL_AUX)
    assert model.build_basis(g).labels == model.build_basis(a).labels
    assert model.label_map(spec_of(Scheme.GHZ, m=5), a)["a g g g g;00;0"] == "a g;00;0"


def test_coupling_conventions():
    lam = 1.0
    h0, _, _ = model.hamiltonian_parts(spec_of(Scheme.BELL_TWOATOM))
    assert h0[2, 1] == lam and abs(h0[5, 4] - lam / R2) < 1e-15 and abs(h0[7, 4] - lam / R2) < 1e-15
    h0, _, _ = model.hamiltonian_parts(spec_of(Scheme.TRANSFER))
    assert all(abs(h0[i, j] - lam / R2) < 1e-15 for i, j in [(1, 2), (3, 2), (6, 8), (9, 8)])


@pytest.mark.parametrize("scheme,count", [(Scheme.FPT, 7), (Scheme.BELL_TWOATOM, 9),
                                          (Scheme.TRANSFER, 11), (Scheme.W, 7)])
def test_lindblad_counts(scheme, count):
    ops = model.build_lindblads(spec_of(scheme, kappa_c=0.1, kappa_f=0.1, gamma=0.1))
    assert len(ops) == count
    assert len(ops.effective()) == count


def test_lindblad_amplitudes_and_closure():
    spec = spec_of(Scheme.FPT, kappa_c=0.04, kappa_f=0.09, gamma=0.16)
    ops = model.build_lindblads(spec)
    amps = dict(zip(ops.tags, [np.abs(o).max() for o in ops.ops]))
    assert amps["cavity1"] == pytest.approx(0.2) and amps["fiber"] == pytest.approx(0.3)
    assert amps["atom1->f"] == pytest.approx(math.sqrt(0.08))
    for op in ops.ops:
        assert op.shape == (8, 8)


def test_zero_rates_give_empty_set():
    assert len(model.build_lindblads(spec_of(Scheme.FPT)).effective()) == 0


def test_targets():
    assert np.allclose(model.target_state(spec_of(Scheme.FPT)), np.eye(8)[6])
    aux = model.target_state(spec_of(Scheme.BELL_AUX))
    assert aux[6] == pytest.approx(-1 / R2) and aux[8] == pytest.approx(1 / R2)
    w3 = spec_of(Scheme.W, m=3)
    b = model.build_basis(w3)
    assert model.target_state(w3)[b.index("g W;00;0")] == 1
