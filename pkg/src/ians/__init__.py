"""Dual-microphone speech enhancement by intelligibility-aware null steering.

A bank of null-steering beamformers is swept over a grid of null angles;
every candidate output is scored by an intelligibility function (the
built-in intrusive metric against a clean reference, or an external
non-intrusive scorer plugin) and the best-scoring candidate wins.
"""

from ians.array_model import (
    ArrayGeometry,
    BeamWeights,
    nsbf_weights,
    projection_matrix,
    steering_vector,
)
from ians.candidates import (
    AngleGrid,
    CandidateSet,
    apply_beamformer,
    candidates_to_time,
    generate_candidates,
)
from ians.dsp import (
    Spectrogram,
    StftConfig,
    Waveform,
    WindowKind,
    istft,
    peak_normalize,
    read_wav,
    resample,
    stft,
    write_wav,
)
from ians.engine import IansResult, run_ians, run_ians_dual, run_t_nsbf
from ians.room import (
    ImpulseResponse,
    RoomScenario,
    StereoCapture,
    image_source_rir,
    place_source,
    plane_wave_capture,
    simulate_capture,
)
from ians.scoring import (
    PluginHandle,
    ScorerError,
    ScorerKind,
    ScorerSpec,
    ScoreVector,
    score_all,
    score_oracle,
    score_plugin,
)
from ians.stoi import StoiConfig, remove_silence, stoi, third_octave_energies

__version__ = "0.1.0"

__all__ = [
    "AngleGrid",
    "ArrayGeometry",
    "BeamWeights",
    "CandidateSet",
    "IansResult",
    "ImpulseResponse",
    "PluginHandle",
    "RoomScenario",
    "ScoreVector",
    "ScorerError",
    "ScorerKind",
    "ScorerSpec",
    "Spectrogram",
    "StereoCapture",
    "StftConfig",
    "StoiConfig",
    "Waveform",
    "WindowKind",
    "apply_beamformer",
    "candidates_to_time",
    "generate_candidates",
    "image_source_rir",
    "istft",
    "nsbf_weights",
    "peak_normalize",
    "place_source",
    "plane_wave_capture",
    "projection_matrix",
    "read_wav",
    "remove_silence",
    "resample",
    "run_ians",
    "run_ians_dual",
    "run_t_nsbf",
    "score_all",
    "score_oracle",
    "score_plugin",
    "simulate_capture",
    "steering_vector",
    "stft",
    "stoi",
    "third_octave_energies",
    "write_wav",
]
