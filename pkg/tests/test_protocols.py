from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from ds3sim.group import OMEGA, OMEGA_BAR
from ds3sim.lattice import LayoutError, ProtocolSites, embed_on_links, get_layout
from ds3sim.protocols import (F_SIGNED_REFERENCE, F_SQUARED_EXPECTED, R_MATRIX_EXPECTED, ProtocolContext,
                              ProtocolError, commutator_norm, enumerate_sign_family, extract_F_squared, extract_R,
                              fusion_check, full_report, phase_identity_residuals, run_dense_protocols,
                              two_qudit_overlap, two_qudit_overlap_sum, verify_exchange_relation)
from ds3sim.qudit import LinearOperator
from ds3sim.ribbons import builtin_G_ribbons

from conftest import load_product_listing

R_DIAG = np.diag(R_MATRIX_EXPECTED)


@pytest.mark.parametrize('ctx_name', ['ctx1', 'ctx2'])
def test_r_matrix(ctx_name, request):
    r = extract_R(request.getfixturevalue(ctx_name))
    assert np.max(np.abs(r.diagonal - [OMEGA_BAR, OMEGA_BAR, OMEGA])) < 1e-10
    assert np.allclose(r.state_norms, 1, atol=1e-10)
    off = r.cross_overlaps - np.diag(np.diag(r.cross_overlaps))
    assert np.max(np.abs(off)) < 1e-10


def test_r_invariants(ctx1):
    r = extract_R(ctx1).diagonal
    assert np.allclose(np.abs(r), 1, atol=1e-10)
    assert np.allclose(r ** 3, 1, atol=1e-10)
    assert abs(r[0] - r[1]) < 1e-10 and abs(r[2] - np.conj(r[0])) < 1e-10


@pytest.mark.parametrize('ctx_name', ['ctx1', 'ctx2'])
def test_f_squared(ctx_name, request):
    f = extract_F_squared(request.getfixturevalue(ctx_name))
    assert np.max(np.abs(f.f_matrix - F_SQUARED_EXPECTED)) < 1e-10


def test_f_squared_invariants_and_raw_overlaps(ctx1):
    f = extract_F_squared(ctx1)
    m = f.f_matrix
    assert np.max(np.abs(m.imag)) < 1e-10
    assert np.allclose(m.real, m.real.T, atol=1e-10)
    assert np.allclose(m.real.sum(axis=0), 1, atol=1e-10) and np.allclose(m.real.sum(axis=1), 1, atol=1e-10)
    assert np.all(m.real > -1e-10) and np.all(m.real < 1 + 1e-10)
    assert abs(f.raw_overlaps[0, 0] - 0.25) < 1e-10
    assert abs(f.raw_overlaps[0, 2] - OMEGA / 4) < 1e-10
    assert abs(f.raw_overlaps[2, 2]) < 1e-10


def test_gg_overlap_vanishes_through_ribbon_trace(ctx1):
    f1, f2 = ctx1.f1, ctx1.f2
    phi21 = [math.sqrt(2) * ctx1.projector('G'), f2, f1]
    assert abs(ctx1.overlap(phi21, [f2] + phi21)) < 1e-12
    local = builtin_G_ribbons()[1]
    assert abs(local.trace()) < 1e-14 and abs(local.sum_entries()) < 1e-14


@pytest.mark.parametrize('ctx_name', ['ctx1', 'ctx2'])
def test_phase_identity(ctx_name, request):
    assert phase_identity_residuals(request.getfixturevalue(ctx_name)).max() < 1e-10


@pytest.mark.parametrize('ctx_name', ['ctx1', 'ctx2'])
def test_fusion_identities(ctx_name, request):
    d = fusion_check(request.getfixturevalue(ctx_name))
    assert set(d) == {'A', 'B', 'G'}
    assert max(d.values()) < 1e-10


def test_exchange_rule():
    rep = verify_exchange_relation()
    assert rep == {'positions': 36, 'same_pattern': True, 'max_residual': pytest.approx(0, abs=1e-12),
                   'passed': True}


def test_first_product_listing_reproduced():
    f1, f2 = builtin_G_ribbons()
    assert np.max(np.abs((f1 @ f2).to_dense() - load_product_listing('f1_f2'))) < 1e-12


def test_second_product_listing_has_single_erratum():
    f1, f2 = builtin_G_ribbons()
    diff = np.abs((f2 @ f1).to_dense() - load_product_listing('f2_f1')) > 1e-9
    rows, cols = np.nonzero(diff)
    # |e,e><c,c2|: listed as 1, the computed entry and the phase rule both give omega
    assert list(zip(rows, cols)) == [(0, 6 + 2)]
    assert abs((f2 @ f1).to_dense()[0, 8] - OMEGA) < 1e-12


def test_sign_family():
    sf = enumerate_sign_family(F_SQUARED_EXPECTED)
    assert len(sf.candidates) == 8
    assert any(np.max(np.abs(c - F_SIGNED_REFERENCE)) < 1e-10 for c in sf.candidates)
    mask = np.zeros((3, 3), bool)
    mask[[0, 1, 2, 2], [2, 2, 0, 1]] = True
    for cand, comm in zip(sf.candidates, sf.commutators):
        assert np.allclose(cand ** 2, F_SQUARED_EXPECTED, atol=1e-10)
        assert np.allclose(cand @ cand.T, np.eye(3), atol=1e-10)
        assert np.allclose(comm[~mask], 0, atol=1e-10)
        assert np.allclose(np.abs(comm[mask]), math.sqrt(6) / 2, atol=1e-10)
    assert sf.min_commutator_norm == pytest.approx(math.sqrt(6), abs=1e-10)


def test_sign_family_rejects_bad_input():
    with pytest.raises(ValueError):
        enumerate_sign_family(np.eye(2))
    with pytest.raises(ValueError):
        enumerate_sign_family(-np.eye(3))


@pytest.mark.parametrize('f, expected', [(F_SIGNED_REFERENCE, math.sqrt(6)), (np.eye(3), 0.0)])
def test_commutator_norm(f, expected):
    assert commutator_norm(R_DIAG, f) == pytest.approx(expected, abs=1e-12)


def test_commutator_norm_shape_mismatch():
    with pytest.raises(ValueError):
        commutator_norm(np.eye(3), np.eye(2))


def test_two_qudit_overlap_simple_operators():
    f1, f2 = builtin_G_ribbons()
    assert two_qudit_overlap(LinearOperator.identity(2)) == pytest.approx(1)
    assert abs(two_qudit_overlap(f2)) < 1e-14
    for op in (f1, f2, f1 @ f2, LinearOperator.identity(2)):
        assert abs(two_qudit_overlap(op) - two_qudit_overlap_sum(op)) < 1e-14
    with pytest.raises(ProtocolError):
        two_qudit_overlap(LinearOperator.identity(1))


def test_two_qudit_overlap_matches_lattice_for_protocol_words(ctx1, dense_ctx):
    words = []
    for x in 'ABG':
        for order in ((1, 2), (2, 1)):
            fs = [dense_ctx.f1 if k == 1 else dense_ctx.f2 for k in order]
            words.append([dense_ctx.projector(x)] + fs)
    for bra in words:
        for ket in words:
            op = dense_ctx.word(bra).H @ dense_ctx.word(ket)
            full = ctx1.expectation(embed_on_links(ctx1.layout, op, (3, 4)))
            assert abs(two_qudit_overlap(op) - full) < 1e-10


def test_two_qudit_marginal_is_uniform(ctx1):
    # every diagonal basis projector on the two ribbon qudits has weight 1/36 in the vacuum
    for k in range(36):
        proj = LinearOperator.from_entries([(k, k, 1.0)], 2)
        full = ctx1.expectation(embed_on_links(ctx1.layout, proj, (3, 4)))
        assert abs(full - 1 / 36) < 1e-12
        assert abs(two_qudit_overlap(proj) - 1 / 36) < 1e-12


def test_dense_protocols_agree_with_lattice(ctx1):
    dr, df = run_dense_protocols()
    assert np.max(np.abs(dr.diagonal - extract_R(ctx1).diagonal)) < 1e-10
    assert np.max(np.abs(df.f_matrix - extract_F_squared(ctx1).f_matrix)) < 1e-10
    assert dr.state_norms.shape == (3, 2)


def test_dense_context_needs_two_link_vertex():
    with pytest.raises(LayoutError):
        ProtocolContext('plaquette2', dense=True)


def test_wrong_geometry_raises(vacuum1):
    lay = replace(get_layout('plaquette1'), protocol=ProtocolSites(1, (3, 4), 2))
    with pytest.raises(ProtocolError):
        extract_R(ProtocolContext(lay, vacuum=vacuum1))


def test_full_report_passes_and_is_deterministic():
    a, b = full_report('plaquette1'), full_report('plaquette1')
    assert a.passed
    assert a.to_json() == b.to_json()
    assert set(a.to_json()) == {'r_matrix', 'f_squared', 'sign_family', 'checks'}
    assert a.to_json()['sign_family']['count'] == 8
