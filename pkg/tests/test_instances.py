import numpy as np
import pytest

from qoneway import proofs
from qoneway.instances import (
    InstanceInvariantError,
    InstanceSyntaxError,
    ProtocolBundle,
    bundled_instance_path,
    format_instance,
    parse_instance,
    parse_instance_file,
    write_instance_file,
)
from qoneway.protocol import PartialFunction, QuantumOneWayProtocol, random_protocol
from qoneway.sampling import random_density_matrix


def test_bundle_round_trip():
    p, f = random_protocol(1, 3, 5, 1e-4, 11)
    back = parse_instance(format_instance(ProtocolBundle(f, p)))
    assert isinstance(back, ProtocolBundle)
    assert np.array_equal(back.function.values, f.values)
    for a, b in zip(back.protocol.messages, p.messages):
        assert np.array_equal(a, b)
    for a, b in zip(back.protocol.measurements, p.measurements):
        assert np.array_equal(a, b)
    assert back.protocol.epsilon == p.epsilon
    assert np.array_equal(back.protocol.prior, p.prior)


def test_protocol_alone_round_trip():
    p, _ = random_protocol(2, 2, 4, 1e-4, 3)
    back = parse_instance(format_instance(p))
    assert isinstance(back, QuantumOneWayProtocol)
    assert back.prior_budget == p.prior_budget


def test_majix_round_trip():
    inst = proofs.majix_instance(121, 0, 5, k=7)
    assert parse_instance(format_instance(inst)) == inst


def test_lsd_round_trip():
    inst = proofs.lsd_instance(8, 0.3, 2)
    assert parse_instance(format_instance(inst)) == inst


def test_function_round_trip():
    f = PartialFunction.from_rows(["01*", "1*0"])
    back = parse_instance(format_instance(f))
    assert back.to_rows() == f.to_rows()


def test_states_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    states = {"rho": random_density_matrix(4, rng), "sigma": random_density_matrix(4, rng)}
    path = tmp_path / "s.txt"
    write_instance_file(path, states)
    back = parse_instance_file(path)
    assert back.keys() == states.keys()
    for k in states:
        assert np.array_equal(back[k], states[k])


def test_syntax_error_reports_line_and_column():
    with pytest.raises(InstanceSyntaxError, match=r"^<string>:3:2:") as info:
        parse_instance("[function]\n01\n0x\n")
    assert (info.value.line, info.value.column) == (3, 2)


def test_file_name_appears_in_errors(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("[function]\n0?\n")
    with pytest.raises(InstanceSyntaxError, match="bad.txt:2:2"):
        parse_instance_file(path)


def test_unknown_section():
    with pytest.raises(InstanceSyntaxError, match="unknown section"):
        parse_instance("[nonsense]\n")


def test_content_before_header():
    with pytest.raises(InstanceSyntaxError, match=":1:1:"):
        parse_instance("01\n[function]\n")


def test_single_cell_function():
    f = parse_instance("# tiny\n[function]\n1\n")
    assert isinstance(f, PartialFunction)
    assert f.values.shape == (1, 1)


def test_non_unit_trace_message_rejected():
    p, _ = random_protocol(1, 2, 2, 1e-4, 0)
    text = format_instance(p).replace("[messages]\nx 0\n", "[messages]\nx 0\n2.0,0.0 0.0,0.0\n0.0,0.0 0.0,0.0\n# old\n", 1)
    # drop the two original rows of message 0 by commenting them out
    lines = text.splitlines()
    i = lines.index("# old")
    lines[i + 1] = "# " + lines[i + 1]
    lines[i + 2] = "# " + lines[i + 2]
    with pytest.raises(InstanceInvariantError) as info:
        parse_instance("\n".join(lines) + "\n")
    assert info.value.invariant == "message trace"


def test_protocol_without_measurements():
    with pytest.raises(InstanceInvariantError):
        parse_instance("[protocol]\nepsilon 0.01\n[messages]\nx 0\n1 0\n0 0\n")


def test_majix_bad_size_rejected():
    with pytest.raises(InstanceInvariantError):
        parse_instance("[majix]\nn 10\nx 0000000000\nI 0 1 2\n")


def test_bundled_files_parse():
    assert isinstance(parse_instance_file(bundled_instance_path("demo_q1.txt")), ProtocolBundle)
    f = parse_instance_file(bundled_instance_path("xor_shift_n4.txt"))
    assert f.values.shape == (64, 64)
