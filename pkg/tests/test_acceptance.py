"""Acceptance criteria 1-8, each at its stated tolerance and runtime budget.

Every test records a single PASS/FAIL line, collected in the
``acceptance criteria`` section of the terminal summary.
"""

import math
import time

import numpy as np

from boundkey.analysis import (
    ERASURE_CONFIGS,
    coherent_information_erasure,
    entropy_class_c,
    entropy_max_spider_y,
    entropy_supremum_rho_u,
    erasure_components_numeric,
    erasure_threshold_d,
    noise_threshold_dw,
    rho_u_supremum_point,
    spider_y_point,
)
from boundkey.criteria import (
    alpha_1,
    apply_twisting,
    ccq_state,
    error_probability,
    general_key_condition,
    key_condition_class_c,
    key_condition_spider,
    ppt_analytic_class_c,
    ppt_numeric,
    privacy_squeezed,
    separability_conditions,
    spider_blocks,
    tolerable_noise_recurrence,
    twirl_xx,
    twirl_xx_flagged,
    twirl_zz,
    twisting_unitary,
)
from boundkey.linops import (
    Operator,
    ab_blocks,
    hermitian_eigenvalues,
    partial_transpose,
    purify,
    trace_distance,
    trace_norm,
)
from boundkey.states import (
    ClassParams,
    class_c_state,
    fourier_unitary,
    hadamard,
    lambda_tilde,
    private_bit,
    reconstruct_from_terms,
    rho_h_flag_form,
    two_qubit_decomposition,
    x_operator,
    xy_from_unitary,
)
from oracles import random_spider, random_unitary, ref_entropy

H_XY = xy_from_unitary(hadamard().data, "hadamard")


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def _finish(acceptance, number, checks, elapsed, budget):
    checks = dict(checks)
    checks[f"runtime {elapsed:.2f}s < {budget}s"] = elapsed < budget
    failed = [name for name, ok in checks.items() if not ok]
    detail = "; ".join(checks) + (f" || FAILED: {'; '.join(failed)}" if failed else "")
    acceptance(number, not failed, detail)
    assert not failed, detail


def test_criterion_1_x_gamma_norms(acceptance):
    checks = {}
    with Timer() as t:
        xh = x_operator(hadamard())
        svd = trace_norm(partial_transpose(xh.X, [1]))
        checks["Hadamard 1/sqrt2"] = abs(xh.norm_x_gamma - 1 / math.sqrt(2)) <= 1e-10 and abs(svd - 1 / math.sqrt(2)) <= 1e-10
        for d in range(2, 7):
            xo = x_operator(fourier_unitary(d))
            svd = trace_norm(partial_transpose(xo.X, [1]))
            want = 1 / math.sqrt(d)
            checks[f"Fourier d={d}"] = abs(xo.norm_x_gamma - want) <= 1e-10 and abs(svd - want) <= 1e-10
    _finish(acceptance, 1, checks, t.elapsed, 1)


def test_criterion_2_boundary_ppt_state(acceptance):
    with Timer() as t:
        params = ClassParams(2, 1 / (1 + 1 / math.sqrt(2)), 1.0, 1.0)
        rho = class_c_state(params, H_XY)
        lmin = hermitian_eigenvalues(partial_transpose(rho, [1, 3])).eigenvalues[-1]
    _finish(acceptance, 2, {f"min eig {lmin:.2e} in [-1e-8, 1e-8]": -1e-8 <= lmin <= 1e-8}, t.elapsed, 1)


def test_criterion_3_key_and_ppt_path(acceptance):
    checks = {}
    with Timer() as t:
        norm = H_XY.norm_x_gamma
        ps = np.linspace(0.51, 0.66, 22)[1:-1]
        ok = []
        for p in ps:
            a1 = alpha_1(p, norm)
            params = ClassParams(2, p, min(1.0, a1), min(1.0, 1 / a1))
            ok.append(ppt_numeric(class_c_state(params, H_XY)).holds and key_condition_class_c(params).holds)
        checks[f"{sum(ok)}/{len(ps)} path points PPT and key"] = len(ps) == 20 and all(ok)
        a1 = alpha_1(0.5, norm)
        endpoint = ClassParams(2, 0.5, min(1.0, a1), min(1.0, 1 / a1))
        checks["p=0.5 separable"] = separability_conditions(endpoint, norm, hadamard().data).holds
    _finish(acceptance, 3, checks, t.elapsed, 5)


def test_criterion_4_tolerable_noise(acceptance):
    with Timer() as t:
        params = ClassParams.from_lambdas([lambda_tilde(H_XY.norm_x_gamma), 0.0, 1 - lambda_tilde(H_XY.norm_x_gamma), 0.0], 2)
        delta = tolerable_noise_recurrence(params)
        dw = noise_threshold_dw(class_c_state(params, H_XY))
        ratio = delta / dw
    checks = {
        f"recurrence {delta:.5f} = 0.155 +- 0.001": abs(delta - 0.155) <= 0.001,
        f"DW threshold {dw:.5f} in (0.003, 0.008)": 0.003 < dw < 0.008,
        f"ratio {ratio:.2f} in (25, 40)": 25 < ratio < 40,
    }
    _finish(acceptance, 4, checks, t.elapsed, 30)


def test_criterion_5_entropy_table(acceptance):
    checks = {}
    with Timer() as t:
        tilde = ClassParams(2, lambda_tilde(H_XY.norm_x_gamma), 1.0, 1.0)
        s_tilde = entropy_class_c(tilde, H_XY).total
        sup, p_sup = entropy_supremum_rho_u(2)
        sup_params, sup_xy = rho_u_supremum_point(2, p_sup)
        spider = entropy_max_spider_y()
        spider_params, spider_xy = spider_y_point(spider.q)
        agree = [
            abs(entropy_class_c(pr, xy).total - ref_entropy(class_c_state(pr, xy).data))
            for pr, xy in [(tilde, H_XY), (sup_params, sup_xy), (spider_params, spider_xy)]
        ]
        checks[f"closed form vs eigensolve max diff {max(agree):.1e} <= 1e-9"] = max(agree) <= 1e-9
        checks[f"tilde {s_tilde:.4f} = 2.564 +- 0.001"] = abs(s_tilde - 2.564) <= 0.001
        checks[f"rho_U sup {sup:.4f} = 3.319 +- 0.001 at p={p_sup:.4f}"] = abs(sup - 3.319) <= 0.001 and abs(p_sup - 2 / 3) <= 1e-4
        checks[f"spider-Y max {spider.value:.4f} = 3.524 +- 0.005"] = abs(spider.value - 3.524) <= 0.005
        checks[f"spider-Y q {spider.q:.4f} = 0.683 +- 0.01"] = abs(spider.q - 0.683) <= 0.01
    _finish(acceptance, 5, checks, t.elapsed, 30)


def test_criterion_6_erasure_thresholds(acceptance):
    checks = {}
    with Timer() as t:
        d_tilde = erasure_threshold_d(ERASURE_CONFIGS["tilde_unimodular"], 30)
        d_beta0 = erasure_threshold_d(ERASURE_CONFIGS["beta0"], 30)
        checks[f"tilde/unimodular threshold {d_tilde} == 11"] = d_tilde == 11
        checks[f"beta=0 threshold {d_beta0} == 22"] = d_beta0 == 22
        worst = 0.0
        for config in ERASURE_CONFIGS.values():
            for d in range(2, 7):
                params, xy = config.point(d)
                report = coherent_information_erasure(params, xy)
                numeric = erasure_components_numeric(class_c_state(params, xy))
                worst = max(worst, *(abs(getattr(report, k) - v) for k, v in numeric.items()))
        checks[f"components vs marginals max diff {worst:.1e} <= 1e-8"] = worst <= 1e-8
    _finish(acceptance, 6, checks, t.elapsed, 600)


def _ppt_sample(rng):
    gen = rng.integers(3)
    U = [np.eye(2), hadamard().data, fourier_unitary(3).data][gen]
    xy = xy_from_unitary(U)
    p = rng.uniform(0.01, 0.99)
    a1 = alpha_1(p, xy.norm_x_gamma)
    alpha = rng.uniform(-1, 1) * min(1.0, a1)
    beta = rng.uniform(-1, 1) * min(1.0, 1 / a1)
    return ClassParams(U.shape[0], p, alpha, beta), xy


def test_criterion_7_property_suites(acceptance):
    rng = np.random.default_rng(7)
    checks = {}
    with Timer() as t:
        # analytic PPT => numeric PPT, sampled inside the analytic region
        sound = 0
        for _ in range(500):
            params, xy = _ppt_sample(rng)
            assert ppt_analytic_class_c(params, xy.norm_x_gamma).holds
            sound += ppt_numeric(class_c_state(params, xy)).holds
        checks[f"analytic => numeric PPT {sound}/500"] = sound == 500

        worst_flag = worst_dec = 0.0
        for _ in range(50):
            params = ClassParams(2, rng.uniform(), rng.uniform(), rng.uniform())
            worst_flag = max(worst_flag, np.abs(rho_h_flag_form(params).state.data - class_c_state(params, H_XY).data).max())
            U = random_unitary(2, rng)
            xy = xy_from_unitary(U)
            params = ClassParams(2, rng.uniform(), rng.uniform(-1, 1), rng.uniform(-1, 1) * xy.norm_x_gamma)
            rebuilt = reconstruct_from_terms(two_qubit_decomposition(U, params))
            worst_dec = max(worst_dec, np.abs(rebuilt.data - class_c_state(params, xy).data).max())
        checks[f"flag form {worst_flag:.1e} <= 1e-10"] = worst_flag <= 1e-10
        checks[f"two-qubit decomposition {worst_dec:.1e} <= 1e-10"] = worst_dec <= 1e-10

        worst_ccq = worst_diagram = 0.0
        for _ in range(50):
            rho, _ = random_spider(rng)
            s = rho.side // 4
            twist = [random_unitary(s, rng) for _ in range(4)]
            psi, env = purify(rho, full=True)
            big = twisting_unitary(twist, rho.dims[2:]).data
            moved = (big @ psi.reshape(rho.side, env)).reshape(-1)
            a = ccq_state(rho, psi).operator
            b = ccq_state(apply_twisting(rho, twist), moved).operator
            worst_ccq = max(worst_ccq, trace_distance(a, b))
            top = privacy_squeezed(spider_blocks(twirl_xx_flagged(twirl_zz(rho))))
            bottom = twirl_xx(twirl_zz(privacy_squeezed(spider_blocks(rho))))
            worst_diagram = max(worst_diagram, np.abs(top.data - bottom.data).max())
        checks[f"ccq twisting invariance {worst_ccq:.1e} <= 1e-9"] = worst_ccq <= 1e-9
        checks[f"twirl diagram {worst_diagram:.1e} <= 1e-10"] = worst_diagram <= 1e-10

        agree = 0
        worst_pe = 0.0
        for _ in range(200):
            rho, _ = random_spider(rng)
            blocks = spider_blocks(rho)
            agree += general_key_condition(rho).holds == key_condition_spider(blocks).holds
            n = blocks.norms()
            pe = error_probability(blocks)
            worst_pe = max(worst_pe, abs(0.5 * math.sqrt(pe * (1 - pe)) - math.sqrt(n["C"] * n["E"])))
        checks[f"general vs spider key verdicts {agree}/200"] = agree == 200
        checks[f"p_e identity {worst_pe:.1e} <= 1e-12"] = worst_pe <= 1e-12
    _finish(acceptance, 7, checks, t.elapsed, 120)


def test_criterion_8_antihermitian_pbit(acceptance):
    with Timer() as t:
        d = np.kron(np.diag([1j, -1j]) / 2, np.eye(2)) / 2
        D = Operator(d, (2, 2))
        g = private_bit(D)
        verdict = general_key_condition(g)
        herm = trace_norm(d + d.conj().T)
        block = ab_blocks(g)[0, 3]
    checks = {
        "D antihermitian": np.abs(d + d.conj().T).max() == 0 and np.allclose(block, d / 2),
        f"||D + D^dagger|| = {herm:.1e} == 0": herm == 0,
        f"general key condition holds (margin {verdict.margin:.3f})": verdict.holds,
    }
    _finish(acceptance, 8, checks, t.elapsed, 1)
