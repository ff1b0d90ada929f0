import struct

import numpy as np
import pytest

from cfgrid import InputError, read_tensor, read_tensors, write_tensor, write_tensors


class TestRoundTrip:
    def test_float64_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        tensors = {
            "a": rng.standard_normal((3, 4)),
            "b": rng.standard_normal(7),
            "c": rng.standard_normal((2, 3, 5)),
        }
        path = tmp_path / "t.cfgt"
        write_tensors(path, tensors)
        back = read_tensors(path)
        assert list(back) == ["a", "b", "c"]
        for name, array in tensors.items():
            assert back[name].dtype == np.float64
            assert np.array_equal(back[name], array)

    def test_float32_keeps_width(self, tmp_path):
        rng = np.random.default_rng(1)
        array = rng.standard_normal((4, 4)).astype(np.float32)
        path = tmp_path / "t.cfgt"
        write_tensors(path, {"x": array})
        back = read_tensors(path)["x"]
        assert back.dtype == np.float32
        assert np.array_equal(back, array)

    def test_integer_input_stored_as_float64(self, tmp_path):
        path = tmp_path / "t.cfgt"
        write_tensors(path, {"n": np.arange(6).reshape(2, 3)})
        back = read_tensors(path)["n"]
        assert back.dtype == np.float64
        assert np.array_equal(back, np.arange(6).reshape(2, 3))

    def test_scalar_and_empty_shapes(self, tmp_path):
        path = tmp_path / "t.cfgt"
        write_tensors(path, {"s": np.float64(2.5), "e": np.zeros((0, 3))})
        back = read_tensors(path)
        assert back["s"].shape == ()
        assert back["s"] == 2.5
        assert back["e"].shape == (0, 3)

    def test_empty_mapping(self, tmp_path):
        path = tmp_path / "t.cfgt"
        write_tensors(path, {})
        assert read_tensors(path) == {}

    def test_deterministic_bytes(self, tmp_path):
        rng = np.random.default_rng(2)
        tensors = {"w": rng.standard_normal((5, 5)), "b": rng.standard_normal(5)}
        p1, p2 = tmp_path / "a.cfgt", tmp_path / "b.cfgt"
        write_tensors(p1, tensors)
        write_tensors(p2, tensors)
        assert p1.read_bytes() == p2.read_bytes()

    def test_single_tensor_helpers(self, tmp_path):
        path = tmp_path / "one.cfgt"
        array = np.linspace(0.0, 1.0, 9).reshape(3, 3)
        write_tensor(path, array)
        assert np.array_equal(read_tensor(path), array)

    def test_read_tensor_rejects_multiple_entries(self, tmp_path):
        path = tmp_path / "two.cfgt"
        write_tensors(path, {"a": np.zeros(2), "b": np.zeros(2)})
        with pytest.raises(InputError, match="expected exactly 1"):
            read_tensor(path)

    def test_non_contiguous_input(self, tmp_path):
        rng = np.random.default_rng(3)
        base = rng.standard_normal((6, 6))
        view = base[::2, ::3]
        path = tmp_path / "t.cfgt"
        write_tensors(path, {"v": view})
        assert np.array_equal(read_tensors(path)["v"], view)


class TestValidation:
    def write_valid(self, tmp_path):
        path = tmp_path / "t.cfgt"
        write_tensors(path, {"x": np.arange(4.0)})
        return path

    def test_empty_name_rejected_on_write(self, tmp_path):
        with pytest.raises(InputError, match="nonempty"):
            write_tensors(tmp_path / "t.cfgt", {"": np.zeros(1)})

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="cannot read"):
            read_tensors(tmp_path / "absent.cfgt")

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "t.cfgt"
        path.write_bytes(b"NOPE" + b"\x00" * 8)
        with pytest.raises(InputError, match="bad magic"):
            read_tensors(path)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "t.cfgt"
        path.write_bytes(b"CFGT" + struct.pack("<II", 9, 0))
        with pytest.raises(InputError, match="version 9"):
            read_tensors(path)

    def test_truncated_payload(self, tmp_path):
        path = self.write_valid(tmp_path)
        data = path.read_bytes()
        path.write_bytes(data[:-4])
        with pytest.raises(InputError, match="truncated"):
            read_tensors(path)

    def test_trailing_bytes(self, tmp_path):
        path = self.write_valid(tmp_path)
        path.write_bytes(path.read_bytes() + b"\x00\x00")
        with pytest.raises(InputError, match="trailing"):
            read_tensors(path)

    def test_unknown_dtype_code(self, tmp_path):
        path = tmp_path / "t.cfgt"
        entry = struct.pack("<H", 1) + b"x" + struct.pack("<BB", 7, 1) + struct.pack("<I", 0)
        path.write_bytes(b"CFGT" + struct.pack("<II", 1, 1) + entry)
        with pytest.raises(InputError, match="dtype code 7"):
            read_tensors(path)

    def test_duplicate_names_rejected(self, tmp_path):
        path = self.write_valid(tmp_path)
        data = path.read_bytes()
        # double the single entry and patch the count to 2
        entry = data[12:]
        patched = data[:4] + struct.pack("<II", 1, 2) + entry + entry
        path.write_bytes(patched)
        with pytest.raises(InputError, match="duplicate"):
            read_tensors(path)

    def test_returned_arrays_are_writable_copies(self, tmp_path):
        path = self.write_valid(tmp_path)
        array = read_tensors(path)["x"]
        array[0] = 99.0
        assert read_tensors(path)["x"][0] == 0.0
