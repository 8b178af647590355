import numpy as np
import pytest

from zetagap import FiniteChain, random_lazy_chain
from zetagap.errors import ParseError, ValidationError
from zetagap.fileio import (
    atomic_write_text,
    format_chain,
    load_chain,
    load_kv,
    load_matrix,
    load_vector,
    parse_chain_text,
    parse_kv_text,
    parse_mixture_text,
    save_chain,
    save_kv,
    save_matrix,
)
from zetagap.rng import derive_rng

CHAIN_TEXT = "2\n0.75 0.25\n0.25 0.75\n"

MIXTURE_TEXT = """2 3
0.5
0.5 0.5 0.0
0.75 0.25 0.0
0.25 0.75 0.0
0.25 0.25 0.5
0.5
0.0 0.5 0.5
0.5 0.25 0.25
0.0 0.75 0.25
0.0 0.25 0.75
"""


class TestChainFiles:
    def test_parse_without_stationary(self):
        chain = parse_chain_text(CHAIN_TEXT)
        assert chain.d == 2
        assert np.allclose(chain.pi, [0.5, 0.5])

    def test_round_trip(self, tmp_path):
        chain = random_lazy_chain(5, derive_rng(200))
        path = tmp_path / "chain.txt"
        save_chain(chain, path)
        back = load_chain(path)
        assert np.array_equal(back.P, chain.P)
        assert np.array_equal(back.pi, chain.pi)

    def test_parse_error_carries_line_number(self):
        with pytest.raises(ParseError, match="line 3"):
            parse_chain_text("2\n0.75 0.25\n0.25 oops\n")
        with pytest.raises(ParseError, match="line 2"):
            parse_chain_text("2\n0.75 0.25 0.1\n0.25 0.75\n")
        with pytest.raises(ParseError, match="line 5"):
            parse_chain_text(CHAIN_TEXT + "0.5 0.5\nextra extra\n")

    def test_non_reversible_names_pair(self):
        text = "3\n0.5 0.3 0.2\n0.1 0.7 0.2\n0.2 0.2 0.6\n0.3333 0.3333 0.3334\n"
        with pytest.raises(ValidationError, match=r"pair \(\d,\d\)"):
            parse_chain_text(text)

    def test_format_matches_layout(self):
        chain = FiniteChain(np.array([[0.75, 0.25], [0.25, 0.75]]))
        lines = format_chain(chain).strip().split("\n")
        assert lines[0] == "2"
        assert len(lines) == 4


class TestMixtureFiles:
    def test_parse_without_masks(self):
        spec = parse_mixture_text(MIXTURE_TEXT)
        assert len(spec.components) == 2
        assert spec.components[0].mask is None
        assert spec.components[0].weight == 0.5

    def test_parse_with_mask_line(self):
        with_mask = MIXTURE_TEXT.rstrip() + "\n1 1 0\n"
        spec = parse_mixture_text(with_mask)
        assert spec.components[1].mask is not None
        assert spec.components[1].mask.tolist() == [True, True, False]

    def test_bad_mask_values(self):
        bad = MIXTURE_TEXT.rstrip() + "\n1 2 0\n"
        with pytest.raises(ParseError, match="mask"):
            parse_mixture_text(bad)

    def test_missing_rows(self):
        truncated = "\n".join(MIXTURE_TEXT.split("\n")[:6])
        with pytest.raises(ParseError):
            parse_mixture_text(truncated)

    def test_component_validations_apply(self):
        bad = MIXTURE_TEXT.replace("0.75 0.25 0.0", "0.9 0.1 0.0", 1)
        with pytest.raises(ValidationError):
            parse_mixture_text(bad)


class TestMatrixFiles:
    def test_round_trip(self, tmp_path):
        rng = derive_rng(201)
        A = rng.standard_normal((4, 3))
        save_matrix(A, tmp_path / "a.txt")
        assert np.array_equal(load_matrix(tmp_path / "a.txt"), A)

    def test_vector(self, tmp_path):
        save_matrix([[1.5], [2.5]], tmp_path / "v.txt")
        assert load_vector(tmp_path / "v.txt").tolist() == [1.5, 2.5]

    def test_ragged_rejected(self, tmp_path):
        (tmp_path / "bad.txt").write_text("1 2\n3\n")
        with pytest.raises(ParseError, match="line 2"):
            load_matrix(tmp_path / "bad.txt")


class TestKvFiles:
    def test_parse_and_round_trip(self, tmp_path):
        text = "# comment\np = 500\ncells = fp:1%,fn:2\n"
        pairs = parse_kv_text(text)
        assert pairs == {"p": "500", "cells": "fp:1%,fn:2"}
        save_kv(pairs, tmp_path / "c.txt")
        assert load_kv(tmp_path / "c.txt") == pairs

    def test_bad_line(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_kv_text("a=1\nnot a pair\n")


class TestAtomicWrite:
    def test_no_temp_residue(self, tmp_path):
        target = tmp_path / "out.txt"
        atomic_write_text(target, "payload")
        assert target.read_text() == "payload"
        assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]

    def test_overwrites_atomically(self, tmp_path):
        target = tmp_path / "out.txt"
        atomic_write_text(target, "one")
        atomic_write_text(target, "two")
        assert target.read_text() == "two"
