import numpy as np
import pytest

from ians.array_model import ArrayGeometry, nsbf_weights
from ians.candidates import (
    AngleGrid,
    apply_beamformer,
    candidates_to_time,
    dump_candidate_wavs,
    generate_candidates,
)
from ians.dsp import Spectrogram, StftConfig, Waveform, stft

GEOM = ArrayGeometry()
CFG = StftConfig()
FS = 16000


def _spec(data):
    return Spectrogram(np.asarray(data, dtype=complex), CFG, FS)


def _random_spec(rng, frames=8):
    return _spec(rng.standard_normal((frames, 257)) + 1j * rng.standard_normal((frames, 257)))


class TestAngleGrid:
    def test_default_grid(self):
        grid = AngleGrid()
        assert len(grid) == 91
        assert grid.angles[0] == 0.0
        assert grid.angles[-1] == 180.0
        assert np.all(np.diff(grid.angles) == 2.0)

    def test_membership_is_exact_to_tenth_degree(self):
        grid = AngleGrid()
        assert grid.index_of(80.0) == 40
        assert grid.index_of(80.04) == 40  # canonicalizes to 80.0
        assert grid.index_of(1.0) is None
        assert grid.index_of(80.1) is None

    def test_validation(self):
        with pytest.raises(ValueError):
            AngleGrid(np.array([10.0]))
        with pytest.raises(ValueError):
            AngleGrid(np.array([10.0, 5.0]))
        with pytest.raises(ValueError):
            AngleGrid(np.array([-2.0, 50.0]))

    def test_with_step(self):
        grid = AngleGrid.with_step(45.0)
        np.testing.assert_array_equal(grid.angles, [0.0, 45.0, 90.0, 135.0, 180.0])


class TestApplyBeamformer:
    def test_passthrough_weights(self, rng):
        X1, X2 = _random_spec(rng), _random_spec(rng)
        from ians.array_model import BeamWeights

        w = BeamWeights(
            theta_d=0.0, phi=90.0,
            per_bin=np.stack([np.ones(257), np.zeros(257)], axis=-1).astype(complex),
        )
        Y = apply_beamformer(w, X1, X2)
        np.testing.assert_array_equal(Y.data, X1.data)

    def test_zero_inputs(self):
        X = _spec(np.zeros((4, 257)))
        w = nsbf_weights(0.0, 45.0)
        Y = apply_beamformer(w, X, X)
        assert np.all(Y.data == 0)

    def test_plane_wave_is_nulled(self, rng):
        """Channels built from the null angle's steering vectors come out
        at the noise floor."""
        phi = 57.0
        theta_d = 10.0
        omega = CFG.bin_frequencies(FS)
        base = rng.standard_normal((6, 257)) + 1j * rng.standard_normal((6, 257))
        phase = np.exp(-1j * GEOM.phase_shift(phi, omega))
        X1 = _spec(base)
        X2 = _spec(base * phase[None, :])
        w = nsbf_weights(theta_d, phi)
        Y = apply_beamformer(w, X1, X2)
        assert np.linalg.norm(Y.data) < 1e-10 * np.linalg.norm(X1.data)

    def test_shape_mismatch_rejected(self, rng):
        X1 = _random_spec(rng, frames=4)
        X2 = _random_spec(rng, frames=5)
        with pytest.raises(ValueError):
            apply_beamformer(nsbf_weights(0.0, 45.0), X1, X2)


class TestGenerateCandidates:
    def test_default_grid_psi_zero(self, rng):
        X1, X2 = _random_spec(rng), _random_spec(rng)
        cs = generate_candidates(X1, X2, psi=0.0)
        assert len(cs) == 91
        assert cs.passthrough_index == 0
        assert cs.candidates[0] is X1  # bit-exact passthrough
        np.testing.assert_array_equal(cs.candidates[0].data, X1.data)

    def test_psi_80_passthrough_at_index_40(self, rng):
        X1, X2 = _random_spec(rng), _random_spec(rng)
        cs = generate_candidates(X1, X2, psi=80.0)
        assert cs.passthrough_index == 40
        np.testing.assert_array_equal(cs.candidates[40].data, X1.data)

    def test_off_grid_psi_has_no_passthrough(self, rng):
        X1, X2 = _random_spec(rng), _random_spec(rng)
        cs = generate_candidates(X1, X2, psi=1.0)
        assert cs.passthrough_index is None
        for cand in cs.candidates:
            assert cand is not X1

    def test_linearity_pre_normalization(self, rng):
        X1, X2 = _random_spec(rng), _random_spec(rng)
        a = 2.5
        cs = generate_candidates(X1, X2, psi=0.0)
        cs_scaled = generate_candidates(_spec(a * X1.data), _spec(a * X2.data), psi=0.0)
        for c, cs_ in zip(cs.candidates, cs_scaled.candidates):
            np.testing.assert_allclose(cs_.data, a * c.data, atol=1e-9)

    def test_deterministic_and_grid_ordered(self, rng):
        X1, X2 = _random_spec(rng), _random_spec(rng)
        cs1 = generate_candidates(X1, X2, psi=0.0)
        cs2 = generate_candidates(X1, X2, psi=0.0)
        for c1, c2 in zip(cs1.candidates, cs2.candidates):
            np.testing.assert_array_equal(c1.data, c2.data)

    def test_candidate_count_matches_any_grid(self, rng):
        X1, X2 = _random_spec(rng), _random_spec(rng)
        grid = AngleGrid.with_step(10.0)
        cs = generate_candidates(X1, X2, psi=0.0, grid=grid)
        assert len(cs) == len(grid) == 19


class TestCandidatesToTime:
    def test_normalized_or_silent(self, rng, speech_2s):
        X1 = stft(speech_2s, CFG)
        shifted = Waveform(np.roll(speech_2s.samples, 1), FS)
        X2 = stft(shifted, CFG)
        cs = generate_candidates(X1, X2, psi=0.0, grid=AngleGrid.with_step(30.0))
        waves = candidates_to_time(cs)
        assert len(waves) == len(cs)
        for wf in waves:
            if not wf.is_silent:
                assert np.max(np.abs(wf.samples)) == 1.0

    def test_silent_candidate_flagged(self):
        """A beamformer whose null and steer angles coincide is the zero
        filter; its candidate must come back silent, not normalized."""
        w = nsbf_weights(30.0, 30.0)
        X = _spec(np.ones((4, 257)))
        Y = apply_beamformer(w, X, X)
        from ians.dsp import istft, peak_normalize

        wf = peak_normalize(istft(Y))
        assert wf.is_silent


def test_dump_candidate_wavs(tmp_path, rng, speech_2s):
    X1 = stft(speech_2s, CFG)
    X2 = stft(speech_2s, CFG)
    grid = AngleGrid.with_step(90.0)
    cs = generate_candidates(X1, X2, psi=0.0, grid=grid)
    waves = candidates_to_time(cs)
    paths = dump_candidate_wavs(tmp_path, waves, grid)
    assert [p.split("/")[-1] for p in paths] == [
        "cand_phi_000.wav", "cand_phi_090.wav", "cand_phi_180.wav"
    ]
