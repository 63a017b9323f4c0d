import math

import pytest

try:
    import _core as b
except ImportError:  # installed package layout
    import binfilt as b


def test_build_and_measures():
    f = b.dyadic_filtration(1, 4)
    assert f.atom_count == 31
    assert f.split_count == 15
    leaves = f.leaves()
    assert len(leaves) == 16
    assert math.isclose(sum(f.measure(a) for a in leaves), 1.0, abs_tol=1e-12)


def test_split_ids_and_relatives():
    f = b.Filtration.unit_cube(1)
    k = f.apply_split(0, 0, "1/4")
    assert k == 1
    assert f.children(0) == (1, 2)
    assert math.isclose(f.measure(1), 0.25)
    assert f.buddy(1) == 2
    assert f.chain_of(2) == [0, 2]
    with pytest.raises(ValueError):
        f.apply_split(0, 0, 0.5)  # not a leaf any more


def test_json_round_trip():
    f = b.random_filtration(3, 2, 12, 6)
    g = b.Filtration.from_json(f.to_json())
    assert g.to_json() == f.to_json()


def test_haar_values():
    vs, vl = b.haar_values(0.25, 0.75)
    assert math.isclose(vs, math.sqrt(3.0), rel_tol=1e-14)
    assert math.isclose(vl, -1.0 / math.sqrt(3.0), rel_tol=1e-14)
    # zero mean, unit norm
    assert math.isclose(vs * 0.25 + vl * 0.75, 0.0, abs_tol=1e-14)
    assert math.isclose(vs * vs * 0.25 + vl * vl * 0.75, 1.0, rel_tol=1e-14)


def test_conditions_on_dyadic():
    f = b.dyadic_filtration(1, 6)
    rep = b.w2s_report(f, "constant", p=2.0, tau=1.0, rho=0.5)
    assert rep["strategy"] == "closed-form"
    assert rep["max_ratio"] == pytest.approx(1.0)
    w1 = b.w1_report(f, "constant", p=2.0, tau=1.0, rho=0.5)
    assert w1["max_ratio"] == pytest.approx(1.0)


def test_lambda_sequence_sums():
    seq = b.lambda_sequence(0.5, 10)
    vals = seq["values"]
    assert len(vals) == 2**10 + 1
    assert sum(vals) <= 3.0
    assert sum(v**0.5 for v in vals) == pytest.approx(2 + 10 / 2)


def test_thm42_separation():
    filt, chains = b.thm42_filtration(1.0, 2.0, 6)
    assert len(chains) == 6
    assert len(chains[3]) == 2**4 + 1


def test_greedy_curve_monotone():
    f = b.dyadic_filtration(1, 4)
    errors = b.greedy_errors(f, "constant", p=2.0, target="x", terms=10)
    assert len(errors) == 11
    for a, c in zip(errors, errors[1:]):
        assert c <= a + 1e-12
    dict_errors = b.dictionary_errors(f, "constant", p=2.0, target="x", terms=10)
    assert dict_errors[10] <= dict_errors[0]


def test_estimate_bi():
    f = b.dyadic_filtration(1, 4)
    rep = b.estimate_bi(f, "constant", p=2.0, tau=1.0, n=2, budget=120, seed=3)
    assert rep["atoms"] >= 1.0
    assert rep["rings"] > 0.0
    assert rep["n_term"] > 0.0


def test_special_scan_and_example55():
    filt, chain = b.example55_chain(16, 2.0, 1.0, 1, "9/10")
    ok = b.special_1d_scan(filt, chain, 2.0, 1.0, 1)
    bad = b.special_1d_scan(filt, chain, 2.0, 1.0, 2)
    assert ok["max_ratio"] < bad["max_ratio"] * 10  # both finite
    assert bad["subchains"] == ok["subchains"]


def test_hermite():
    assert b.choose_j(0.01, 0.5, 2, 2.0) == 0
    norms = b.hermite_norms(0.2, 0.1, 2.0, 2)
    assert all(n < 50 for n in norms)
    assert norms[-1] == pytest.approx(1.0)  # U_r = identity


def test_tau_norm():
    assert b.tau_norm([1.0, 1.0], 0.5) == pytest.approx(4.0)
