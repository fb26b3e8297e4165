import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boundkey.analysis import (
    ERASURE_CONFIGS,
    ErasureConfig,
    coherent_information_erasure,
    dw_rate_ccq,
    entropy_class_c,
    entropy_max_spider_y,
    entropy_supremum_rho_u,
    erasure_components_numeric,
    erasure_threshold_d,
    maximize_1d,
    noise_threshold_dw,
    rho_u_supremum_objective,
    rho_u_supremum_point,
    spider_y_point,
)
from boundkey.linops import Operator, von_neumann_entropy
from boundkey.states import (
    ClassParams,
    XYPair,
    class_c_state,
    fourier_unitary,
    hadamard,
    lambda_tilde,
    private_bit,
    xy_from_unitary,
)
from oracles import random_unitary, ref_entropy

seeds = st.integers(0, 2**32 - 1)
H_XY = xy_from_unitary(hadamard().data, "hadamard")
TILDE = ClassParams(2, lambda_tilde(H_XY.norm_x_gamma), 1.0, 1.0)


def test_entropy_tilde_point():
    # mpmath closed form h(lt) + 2 lt + (1 - lt)
    assert entropy_class_c(TILDE, H_XY).total == pytest.approx(2.564446521977064, abs=1e-12)
    assert entropy_class_c(TILDE, H_XY).total == pytest.approx(2.564, abs=1e-3)


def test_entropy_rho_u_supremum_point():
    params = ClassParams(2, 2 / 3, math.sqrt(0.5), 0.0)
    assert entropy_class_c(params, H_XY).total == pytest.approx(3.318879858516394, abs=1e-12)


def test_entropy_single_pbit_unimodular():
    xy = xy_from_unitary(fourier_unitary(3).data)
    s = entropy_class_c(ClassParams(3, 1.0, 1.0, 0.0), xy)
    assert s.total == pytest.approx(2 * math.log2(3), abs=1e-12)
    assert von_neumann_entropy(private_bit(xy.X)) == pytest.approx(2 * math.log2(3), abs=1e-10)


@given(seeds, st.integers(2, 3), st.floats(0, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_closed_form_entropy_matches_eigensolve(seed, d, p, alpha, beta):
    xy = xy_from_unitary(random_unitary(d, np.random.default_rng(seed)))
    params = ClassParams(d, p, alpha, beta)
    closed = entropy_class_c(params, xy).total
    assert closed == pytest.approx(ref_entropy(class_c_state(params, xy).data), abs=1e-9)


def test_maximize_1d_finds_interior_and_edge_maxima():
    m = maximize_1d(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, grid=101)
    assert m.argmax == pytest.approx(0.3, abs=1e-5)
    edge = maximize_1d(lambda x: x, 0.0, 2.0, grid=11)
    assert edge.argmax == pytest.approx(2.0) and edge.value == pytest.approx(2.0)


def test_rho_u_supremum_d2():
    value, p = entropy_supremum_rho_u(2)
    assert p == pytest.approx(2 / 3, abs=1e-6)
    assert value == pytest.approx(3.318879858516394, abs=1e-9)
    assert rho_u_supremum_objective(0.5 + 1e-9, 2) < value


def test_rho_u_supremum_grows_with_d():
    values = [entropy_supremum_rho_u(d)[0] for d in (2, 3, 4)]
    # mpmath evaluations at p_max = 1/(1 + 1/d)
    np.testing.assert_allclose(values, [3.318879858516394, 4.392968164157907, 5.170950594454669], atol=1e-9)
    assert values[0] < values[1] < values[2]


def test_rho_u_supremum_point_matches_state_entropy():
    params, xy = rho_u_supremum_point(3)
    assert params.p == pytest.approx(0.75)
    assert entropy_class_c(params, xy).total == pytest.approx(ref_entropy(class_c_state(params, xy).data), abs=1e-9)


def test_spider_y_maximum():
    m = entropy_max_spider_y(grid=2001)
    assert m.value == pytest.approx(3.524, abs=5e-3)
    assert m.q == pytest.approx(0.683, abs=1e-2)
    # frozen from an independent dense scan of full-state eigensolves, see below
    assert m.value == pytest.approx(3.52394, abs=2e-5)


def test_spider_y_maximum_against_dense_oracle():
    qs = np.linspace(0.5, 1.0, 201)
    vals = []
    for q in qs:
        params, xy = spider_y_point(q)
        vals.append(ref_entropy(class_c_state(params, xy).data))
    k = int(np.argmax(vals))
    assert qs[k] == pytest.approx(0.683, abs=5e-3)
    assert entropy_max_spider_y(grid=2001).value >= vals[k] - 1e-12
    assert vals[k] == pytest.approx(3.52394, abs=1e-4)


def test_spider_y_endpoint_is_rho_u_family():
    params, xy = spider_y_point(1.0)
    assert params.p == pytest.approx(2 / 3)
    assert entropy_class_c(params, xy).total == pytest.approx(3.318879858516394, abs=1e-12)


@given(st.floats(0, 1))
def test_spider_y_objective_symmetric(q):
    a = entropy_class_c(*spider_y_point(q)).total
    b = entropy_class_c(*spider_y_point(1 - q)).total
    assert a == pytest.approx(b, abs=1e-12)


# erasure


@pytest.mark.parametrize(
    "config, d, icoh",
    [
        # full-state marginals of the pbit mixture, independent of the block formulas
        ("tilde_unimodular", 10, -0.011943227622021269),
        ("tilde_unimodular", 11, 0.0018348733439945697),
        ("beta0", 21, -0.001970637862864777),
        ("beta0", 22, 0.005927650351845504),
    ],
)
def test_erasure_icoh_frozen(config, d, icoh):
    report = coherent_information_erasure(*ERASURE_CONFIGS[config].point(d))
    assert report.icoh == pytest.approx(icoh, abs=1e-9)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("config", sorted(ERASURE_CONFIGS))
def test_erasure_components_match_marginals(config, d):
    params, xy = ERASURE_CONFIGS[config].point(d)
    report = coherent_information_erasure(params, xy)
    numeric = erasure_components_numeric(class_c_state(params, xy))
    for key, value in numeric.items():
        assert getattr(report, key) == pytest.approx(value, abs=1e-8)


@given(seeds, st.floats(0, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_erasure_components_random_generators(seed, p, alpha, beta):
    xy = xy_from_unitary(random_unitary(2, np.random.default_rng(seed)))
    params = ClassParams(2, p, alpha, beta)
    report = coherent_information_erasure(params, xy)
    numeric = erasure_components_numeric(class_c_state(params, xy))
    for key, value in numeric.items():
        assert getattr(report, key) == pytest.approx(value, abs=1e-8)


def test_erasure_thresholds():
    assert erasure_threshold_d(ERASURE_CONFIGS["tilde_unimodular"], 15) == 11
    assert erasure_threshold_d(ERASURE_CONFIGS["beta0"], 25) == 22
    assert erasure_threshold_d(ERASURE_CONFIGS["tilde_unimodular"], 10) is None


def test_erasure_noisy_config_has_no_threshold():
    assert erasure_threshold_d(ErasureConfig("flat", 0.0, 0.0, p=0.5), 12) is None


def test_erasure_rank_one_pure_limit():
    x = np.zeros((4, 4), dtype=complex)
    x[0, 0] = 1
    X = Operator(x, (2, 2))
    report = coherent_information_erasure(ClassParams(2, 1.0, 1.0, 0.0), XYPair(X, X, 1.0))
    assert math.isfinite(report.icoh)
    assert report.S == pytest.approx(0.0, abs=1e-12)


def test_erasure_dimension_cap():
    with pytest.raises(ValueError):
        coherent_information_erasure(*ERASURE_CONFIGS["beta0"].point(5), d_cap=4)


# Devetak-Winter


def test_dw_rate_of_pbit_is_one_bit():
    assert dw_rate_ccq(private_bit(H_XY.X)) == pytest.approx(1.0, abs=1e-10)


def test_dw_rate_tilde_frozen():
    # independent oracle: rank-sized purification and explicit Holevo quantity
    rho = class_c_state(TILDE, H_XY)
    assert dw_rate_ccq(rho) == pytest.approx(0.02133991564984017, abs=1e-12)


def test_dw_noise_threshold_tilde():
    eps = noise_threshold_dw(class_c_state(TILDE, H_XY))
    assert 0.003 < eps < 0.008
    # brentq on the independent oracle rate
    assert eps == pytest.approx(0.005062174885807782, abs=1e-6)


def test_dw_noise_threshold_pbit_exceeds_tilde():
    assert noise_threshold_dw(private_bit(H_XY.X)) > 0.005


def test_dw_noise_threshold_requires_positive_rate():
    with pytest.raises(ValueError):
        noise_threshold_dw(class_c_state(ClassParams(2, 0.5, 0, 0), H_XY))
