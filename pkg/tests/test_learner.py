import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qoneway import measures
from qoneway.experiments import claim_event, suite_protocols
from qoneway.learner import (
    CompiledProtocol,
    ContractViolation,
    DegenerateGuessError,
    InternalConsistencyError,
    LearnerConfig,
    TranscriptRecord,
    audit_progress,
    compile_deterministic_protocol,
    decode_transcript,
    deficit,
    encode_transcript,
    oriented_projector,
    run_learning,
    update_guess,
)
from qoneway.protocol import (
    PartialFunction,
    ProtocolInvariantError,
    QuantumOneWayProtocol,
    constant_function,
    random_protocol,
)
from qoneway.sampling import make_rng, random_density_matrix, random_projector

from conftest import seeds

KET0 = np.diag([1.0, 0.0])


def test_config_bounds_and_grid():
    cfg = LearnerConfig(1e-4)
    assert cfg.trigger == pytest.approx(0.1)
    assert cfg.quantum_precision == pytest.approx(1e-8)
    assert cfg.grid_bits == 27  # ceil(log2(1e8))
    assert LearnerConfig().grid_bits == 40
    with pytest.raises(ValueError):
        LearnerConfig(1e-3)
    with pytest.raises(ValueError):
        LearnerConfig(0.0)


def test_quantize_rounds_down_with_floor_and_clamp():
    cfg = LearnerConfig(1e-4)
    assert cfg.quantize(0.0) == 0
    assert cfg.quantize(3.7e-8) == 3
    assert cfg.quantize(1e-12) == 1  # never rounds a positive error to zero
    assert cfg.quantize(0.3) == cfg.grid_max
    assert cfg.grid_value(cfg.grid_max) == pytest.approx(1e-4)


def test_oriented_projector():
    p = random_projector(4, 2, make_rng(0))
    assert np.allclose(oriented_projector(p, 1), p)
    assert np.allclose(oriented_projector(p, 0), np.eye(4) - p)
    assert np.allclose(oriented_projector(oriented_projector(p, 0), 0), p)
    with pytest.raises(ValueError):
        oriented_projector(p, 2)


def test_update_from_maximally_mixed_with_zero_error_gives_q():
    new = update_guess(np.eye(2) / 2, KET0, 0.0)
    assert np.allclose(new, KET0)


def test_update_with_eps_equal_deficit_is_pinching():
    rng = make_rng(1)
    sigma = random_density_matrix(4, rng)
    q = random_projector(4, 2, rng)
    a = deficit(sigma, q)
    assert np.allclose(update_guess(sigma, q, a), measures.pinch(sigma, q), atol=1e-14)


def test_update_contracts():
    with pytest.raises(ContractViolation):
        update_guess(np.eye(2) / 2, KET0, 0.0, trigger=0.6)
    with pytest.raises(DegenerateGuessError):
        update_guess(np.diag([0.0, 1.0]), KET0, 0.0)
    with pytest.raises(ValueError):
        update_guess(np.eye(2) / 2, KET0, 1.5)


@given(seeds, st.sampled_from([2, 4, 8]), st.sampled_from([1e-4, 1e-6]))
def test_progress_claim_and_trace_restoration(seed, d, eps):
    event, _ = claim_event(d, eps, make_rng(seed))
    assert event.progress >= event.deficit / 2 - 1e-8
    assert event.trace_restored <= 1e-10


@given(seeds, st.sampled_from([2, 4, 8]), st.sampled_from([1e-4, 1e-6]))
def test_quantization_neighbour_changes_progress_little(seed, d, eps):
    cfg = LearnerConfig(eps)
    event, (rho, sigma, q) = claim_event(d, eps, make_rng(seed))
    idx = cfg.quantize(event.eps_y)
    before = measures.relative_entropy(rho, sigma)
    gains = []
    for j in (idx, idx + 1) if idx < cfg.grid_max else (idx, idx - 1):
        new = update_guess(sigma, q, cfg.grid_value(j), trigger=cfg.trigger)
        gains.append(before - measures.relative_entropy(rho, new, support_threshold=0.0))
    assert abs(gains[0] - gains[1]) < event.deficit / 4


def test_transcript_round_trip_and_length():
    cfg = LearnerConfig(1e-4)
    recs = [TranscriptRecord(5, 1, 17), TranscriptRecord(30, 0, cfg.grid_max)]
    bits = encode_transcript(recs, 5, cfg.grid_bits)
    assert len(bits) == 2 * (5 + 1 + cfg.grid_bits)
    assert bits.startswith("00101" + "1")  # big-endian y, then the value bit
    assert decode_transcript(bits, 5, cfg.grid_bits) == recs
    with pytest.raises(ValueError):
        decode_transcript(bits[:-1], 5, cfg.grid_bits)


def test_planted_prior_equal_to_message_needs_no_update():
    p0, _ = random_protocol(2, 3, 16, 1e-4, 8)
    rho = p0.messages[0]
    f = PartialFunction(np.array([_row(p0, 0)]))
    p = QuantumOneWayProtocol(np.array([rho]), p0.measurements, 1e-4, prior=rho)
    run = run_learning(p, f, 0, LearnerConfig(1e-4))
    assert run.updates == 0
    assert all(run.decisions[y] == f(0, y) for y in f.defined_columns(0))


def _row(p, x):
    acc = np.einsum("yij,ji->y", p.measurements, p.messages[x]).real
    return np.where(acc >= 1 - p.epsilon, 1, np.where(acc <= p.epsilon, 0, -1))


def test_constant_function_identity_measurements_no_updates_zero_cost():
    rng = make_rng(2)
    msgs = np.array([random_density_matrix(4, rng) for _ in range(3)])
    p = QuantumOneWayProtocol(msgs, np.array([np.eye(4)] * 5), 1e-4)
    f = constant_function(3, 5)
    det = compile_deterministic_protocol(p, f, LearnerConfig(1e-4))
    assert det.cost == 0
    assert all(run.updates == 0 for run in det.runs.values())
    assert audit_progress(det.runs[0]).lines == []
    assert audit_progress(det.runs[0]).passed


def test_single_forced_update_from_maximally_mixed():
    # one qubit, message close to |0>, Bob starts from I/2 and must update once
    eps = 1e-4
    rho = np.diag([1 - 1e-5, 1e-5])
    p = QuantumOneWayProtocol(np.array([rho]), np.array([KET0]), eps)
    f = PartialFunction.from_rows(["1"])
    run = run_learning(p, f, 0, LearnerConfig(eps))
    assert run.updates == 1
    u = run.audit[0]
    assert u.deficit == pytest.approx(0.5)
    assert u.progress >= u.deficit / 2
    assert audit_progress(run).passed


def test_random_q2_run_bounds():
    eps = 1e-4
    p, f = random_protocol(2, 6, 16, eps, 11)
    cfg = LearnerConfig(eps)
    for x in range(f.x_count):
        run = run_learning(p, f, x, cfg)
        assert all(run.decisions[y] == f(x, y) for y in f.defined_columns(x))
        assert run.updates <= 2 * p.q / (5 * math.sqrt(eps))
        assert run.updates <= math.ceil(p.prior_relative_entropy(x) / (5 * math.sqrt(eps))) + 1


def test_single_x_cost_is_transcript_length():
    p, f = random_protocol(2, 1, 12, 1e-4, 4)
    det = compile_deterministic_protocol(p, f, LearnerConfig(1e-4))
    assert det.cost == len(det.message(0)) == det.runs[0].updates * det.record_bits


def test_q1_suite_matches_function_within_cost_bound():
    cfg = LearnerConfig(1e-4)
    for seed in range(10):
        p, f = random_protocol(1, 4, 8, 1e-4, seed)
        det = compile_deterministic_protocol(p, f, cfg)
        for x in range(4):
            out = det.bob_decisions(det.message(x))
            assert all(out[y] == f(x, y) for y in f.defined_columns(x))
        assert det.cost <= det.cost_bound(p.prior_budget)


def test_hundred_random_runs_audit_clean():
    cfg = LearnerConfig(1e-4)
    runs = 0
    for p, f in suite_protocols(100, 2024, 1e-4):
        for x in range(f.x_count):
            run = run_learning(p, f, x, cfg)
            report = audit_progress(run)
            assert report.passed, [line.detail for line in report.failures]
            # a finite start never turns infinite
            assert all(math.isfinite(u.entropy_after) for u in run.audit)
            runs += 1
    assert runs >= 100


def test_learning_refuses_protocol_above_epsilon():
    p, f = random_protocol(1, 2, 4, 1e-4, 1)
    with pytest.raises(ProtocolInvariantError):
        run_learning(p, f, 0, LearnerConfig(1e-6))


def test_compile_detects_tampered_replay(monkeypatch):
    p, f = random_protocol(2, 4, 10, 1e-4, 6)
    real = CompiledProtocol.bob_decisions

    def flipped(self, message):
        out = real(self, message)
        return [1 - out[0]] + out[1:]

    monkeypatch.setattr(CompiledProtocol, "bob_decisions", flipped)
    with pytest.raises(InternalConsistencyError):
        compile_deterministic_protocol(p, f, LearnerConfig(1e-4))
