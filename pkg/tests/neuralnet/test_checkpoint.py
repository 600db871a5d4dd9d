"""
Checkpoint tests.
Byte layout, round trips and rejection of damaged or foreign files.
"""
import json
import struct

import numpy as np
import pytest

from trademark_phonetics.checkpoint import MAGIC, load_checkpoint, save_checkpoint
from trademark_phonetics.errors import FormatVersionMismatch, IoError
from trademark_phonetics.neuralnet import AdamState, CnnConfig, adam_step, init_params, loss_and_grads


@pytest.fixture
def trained_state(tiny_cnn_config):
    """Parameters and Adam moments after two optimizer steps."""
    params = init_params(tiny_cnn_config)
    state = AdamState.initial(params)
    batch = np.random.default_rng(0).random((4, 2, 8, 8))
    for step in range(2):
        _, grads = loss_and_grads(params, batch, [0, 1, 0, 1], np.random.default_rng(step))
        adam_step(params, grads, state, tiny_cnn_config)
    return params, state


@pytest.mark.neuralnet
@pytest.mark.smoke
class TestCheckpointRoundTrip:
    """Save then load."""

    def test_params_and_state(self, tmp_path, tiny_cnn_config, trained_state):
        """Weights, moments and step counter survive a round trip."""
        params, state = trained_state
        path = tmp_path / "model.pfcnn"
        save_checkpoint(params, state, tiny_cnn_config, path)
        loaded, loaded_state, config = load_checkpoint(path, expected=tiny_cnn_config)
        assert config == tiny_cnn_config
        assert loaded_state.t == 2
        for name, array in params.arrays():
            np.testing.assert_array_equal(getattr(loaded, name), array)
            np.testing.assert_array_equal(getattr(loaded_state.m, name), getattr(state.m, name))
            np.testing.assert_array_equal(getattr(loaded_state.v, name), getattr(state.v, name))

    def test_params_only(self, tmp_path, tiny_cnn_config, trained_state):
        """A checkpoint may omit the optimizer state."""
        params, _ = trained_state
        path = tmp_path / "model.pfcnn"
        save_checkpoint(params, None, tiny_cnn_config, path)
        _, state, _ = load_checkpoint(path)
        assert state is None

    def test_byte_layout(self, tmp_path, tiny_cnn_config, trained_state):
        """Magic, header length, JSON header, then little-endian arrays."""
        params, state = trained_state
        path = tmp_path / "model.pfcnn"
        save_checkpoint(params, state, tiny_cnn_config, path)
        data = path.read_bytes()
        assert data.startswith(MAGIC)
        (length,) = struct.unpack_from("<I", data, len(MAGIC))
        header = json.loads(data[len(MAGIC) + 4:len(MAGIC) + 4 + length])
        assert header == {
            "format": 1,
            "config": tiny_cnn_config.to_dict(),
            "adam_t": 2,
            "has_state": True,
        }
        n_values = sum(int(np.prod(shape)) for shape in tiny_cnn_config.param_shapes().values())
        assert len(data) == len(MAGIC) + 4 + length + 3 * 4 * n_values
        first = np.frombuffer(data, dtype="<f4", count=4, offset=len(MAGIC) + 4 + length)
        np.testing.assert_array_equal(first, params.conv1_w.ravel()[:4])

    def test_saving_is_deterministic(self, tmp_path, tiny_cnn_config, trained_state):
        """Saving twice gives identical bytes."""
        params, state = trained_state
        save_checkpoint(params, state, tiny_cnn_config, tmp_path / "a.pfcnn")
        save_checkpoint(params, state, tiny_cnn_config, tmp_path / "b.pfcnn")
        assert (tmp_path / "a.pfcnn").read_bytes() == (tmp_path / "b.pfcnn").read_bytes()


@pytest.mark.neuralnet
class TestCheckpointRejection:
    """Damaged, foreign and mismatched files."""

    def _saved(self, tmp_path, config, params, state=None):
        path = tmp_path / "model.pfcnn"
        save_checkpoint(params, state, config, path)
        return path

    def test_truncated(self, tmp_path, tiny_cnn_config, trained_state):
        """A short file is refused."""
        params, state = trained_state
        path = self._saved(tmp_path, tiny_cnn_config, params, state)
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(FormatVersionMismatch):
            load_checkpoint(path)

    def test_padded(self, tmp_path, tiny_cnn_config, trained_state):
        """Trailing bytes are refused."""
        params, _ = trained_state
        path = self._saved(tmp_path, tiny_cnn_config, params)
        path.write_bytes(path.read_bytes() + b"\0\0\0\0")
        with pytest.raises(FormatVersionMismatch):
            load_checkpoint(path)

    def test_bad_magic(self, tmp_path):
        """A foreign file is refused."""
        path = tmp_path / "foreign.bin"
        path.write_bytes(b"PK\x03\x04" + b"\0" * 64)
        with pytest.raises(FormatVersionMismatch):
            load_checkpoint(path)

    def test_header_runs_past_end(self, tmp_path):
        """A header longer than the file is refused."""
        path = tmp_path / "short.pfcnn"
        path.write_bytes(MAGIC + struct.pack("<I", 1000) + b"{}")
        with pytest.raises(FormatVersionMismatch):
            load_checkpoint(path)

    @pytest.mark.parametrize("header", [b"[]", b"42", b'"pf"', b"null", b"not json"])
    def test_header_not_an_object(self, tmp_path, header):
        """JSON that is not an object is a format error, not a crash."""
        path = tmp_path / "odd.pfcnn"
        path.write_bytes(MAGIC + struct.pack("<I", len(header)) + header)
        with pytest.raises(FormatVersionMismatch):
            load_checkpoint(path)

    def test_architecture_mismatch(self, tmp_path, tiny_cnn_config, trained_state):
        """Loading into a different architecture is refused."""
        params, _ = trained_state
        path = self._saved(tmp_path, tiny_cnn_config, params)
        wider = CnnConfig(**{**tiny_cnn_config.to_dict(), "fc1_units": 16})
        with pytest.raises(FormatVersionMismatch):
            load_checkpoint(path, expected=wider)

    def test_save_rejects_wrong_shapes(self, tmp_path, tiny_cnn_config, trained_state):
        """Parameters must match the config being saved."""
        params, _ = trained_state
        wider = CnnConfig(**{**tiny_cnn_config.to_dict(), "fc1_units": 16})
        with pytest.raises(FormatVersionMismatch):
            save_checkpoint(params, None, wider, tmp_path / "model.pfcnn")

    def test_missing_file(self, tmp_path):
        """A missing checkpoint is an I/O error."""
        with pytest.raises(IoError):
            load_checkpoint(tmp_path / "missing.pfcnn")
