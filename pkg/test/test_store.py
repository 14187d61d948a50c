import json

import numpy as np
import pytest

from zeroday.errors import DataError, MissingArtifact
from zeroday.parallel import BLOCK_ROWS, map_row_blocks
from zeroday.seeding import STREAMS, SeedPlan
from zeroday.store import (
    FORMAT_VERSION,
    fingerprint,
    load_document,
    save_document,
    store_converter,
)


class TestDocuments:
    def test_round_trip(self, tmp_path):
        path = save_document(tmp_path / "a" / "doc.json", "zeroday.test", {"x": [1, 2]})
        document = load_document(path, "zeroday.test")
        assert document == {"format": "zeroday.test", "version": FORMAT_VERSION, "x": [1, 2]}
        assert not (tmp_path / "a" / "doc.json.write").exists()

    def test_one_of_several_kinds(self, tmp_path):
        path = save_document(tmp_path / "doc.json", "zeroday.b", {})
        assert load_document(path, ("zeroday.a", "zeroday.b"))["format"] == "zeroday.b"

    def test_wrong_kind(self, tmp_path):
        path = save_document(tmp_path / "doc.json", "zeroday.other", {})
        with pytest.raises(DataError, match="zeroday.other"):
            load_document(path, "zeroday.test")

    def test_wrong_version(self, tmp_path):
        path = tmp_path / "doc.json"
        path.write_text(json.dumps({"format": "zeroday.test", "version": 99}))
        with pytest.raises(DataError, match="version 99"):
            load_document(path, "zeroday.test")

    def test_not_json(self, tmp_path):
        path = tmp_path / "doc.json"
        path.write_text("{not json")
        with pytest.raises(DataError):
            load_document(path, "zeroday.test")

    def test_missing(self, tmp_path):
        with pytest.raises(DataError):
            load_document(tmp_path / "doc.json", "zeroday.test")
        with pytest.raises(MissingArtifact, match="zeroday preprocess"):
            load_document(tmp_path / "doc.json", "zeroday.test", producer="preprocess")


class TestConverter:
    def test_arrays_keep_their_shape(self):
        a = np.arange(6.0).reshape(2, 3) / 7
        data = store_converter.unstructure(a)
        assert data["shape"] == [2, 3]
        restored = store_converter.structure(json.loads(json.dumps(data)), np.ndarray)
        assert np.array_equal(restored, a)

    def test_fingerprint_ignores_key_order(self):
        assert fingerprint({"a": 1, "b": [1.5]}) == fingerprint({"b": [1.5], "a": 1})
        assert fingerprint({"a": 1}) != fingerprint({"a": 2})


class TestSeedPlan:
    def test_streams_are_distinct_and_stable(self):
        plan = SeedPlan(42)
        seeds = [plan.sub_seed(name) for name in STREAMS]
        assert len(set(seeds)) == len(STREAMS)
        assert seeds == [SeedPlan(42).sub_seed(name) for name in STREAMS]
        assert plan.sub_seed("init") != SeedPlan(43).sub_seed("init")

    def test_generators_follow_the_sub_seed(self):
        plan = SeedPlan(1)
        assert plan.generator("split").random() == plan.generator("split").random()

    def test_recorded_seeds(self):
        recorded = SeedPlan(5).as_dict()
        assert recorded["global"] == 5
        assert recorded["generator"] == "PCG64"
        assert set(STREAMS) <= set(recorded)

    def test_unsigned(self):
        with pytest.raises(ValueError):
            SeedPlan(-1)


class TestRowBlocks:
    def test_single_block(self):
        X = np.arange(12.0).reshape(4, 3)
        assert np.array_equal(map_row_blocks(lambda b: b.sum(axis=1), X, 4), X.sum(axis=1))

    @pytest.mark.parametrize("threads", [1, 2, 7])
    def test_order_and_values_independent_of_threads(self, threads):
        X = np.random.default_rng(0).normal(size=(3 * BLOCK_ROWS + 17, 5))

        def fn(block):
            return np.tanh(block) @ np.arange(5.0)

        result = map_row_blocks(fn, X, threads)
        assert np.array_equal(result, map_row_blocks(fn, X, 1))
        assert np.allclose(result, fn(X))
