"""Shoebox room simulation: image-source impulse responses, source
placement on a circle around the reference microphone, and SIR-controlled
two-channel capture synthesis.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.signal import fftconvolve

from ians.array_model import ArrayGeometry
from ians.dsp import Waveform

_SINC_HALF = 40  # 81-tap Hann-windowed sinc for fractional delays


@dataclass(frozen=True)
class ImpulseResponse:
    """Room impulse response taps at a fixed sample rate."""

    taps: np.ndarray
    sample_rate: int

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if not np.all(np.isfinite(taps)):
            raise ValueError("impulse response contains non-finite taps")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    def __len__(self) -> int:
        return self.taps.shape[0]

    @property
    def energy(self) -> float:
        return float(np.sum(self.taps**2))


@dataclass(frozen=True)
class StereoCapture:
    """Two-channel capture plus the geometry it was recorded with.

    The image/gamma diagnostics are populated by `simulate_capture` so
    tests and reports can inspect the pre-mix components; they are not
    required by the enhancement pipeline.
    """

    ch1: Waveform
    ch2: Waveform
    geometry: ArrayGeometry
    speech_images: tuple | None = None
    interference_images: tuple | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.ch1.sample_rate != self.ch2.sample_rate:
            raise ValueError("channel sample rates differ")
        if len(self.ch1) != len(self.ch2):
            raise ValueError("channel lengths differ")

    @property
    def sample_rate(self) -> int:
        return self.ch1.sample_rate


@dataclass(frozen=True)
class RoomScenario:
    """Simulation layout: shoebox room, two-mic array on the x axis, and a
    speech plus an interference source on a circle around the reference
    (right-hand) microphone."""

    room_dims: tuple = (5.0, 6.0, 4.0)
    rt60: float = 0.15
    mic_center: tuple = (2.5, 3.0, 1.0)
    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    speech_angle: float = 90.0
    interference_angle: float = 22.5
    source_distance: float = 1.5
    sir_db: float = 0.0
    max_image_order: int = 17
    sample_rate: int = 16000
    rng_seed: int = 0

    def __post_init__(self):
        if len(self.room_dims) != 3 or len(self.mic_center) != 3:
            raise ValueError("room_dims and mic_center must be 3-vectors")
        if self.rt60 < 0:
            raise ValueError(f"rt60 must be non-negative, got {self.rt60}")
        if self.source_distance <= 0:
            raise ValueError("source_distance must be positive")
        if self.max_image_order < 0:
            raise ValueError("max_image_order must be non-negative")
        for mic in self.mic_positions():
            _check_inside(mic, self.room_dims, "microphone")

    def mic_positions(self) -> tuple:
        """(reference mic, second mic); the array lies along +x with the
        reference microphone on the right."""
        center = np.asarray(self.mic_center, dtype=np.float64)
        half = np.array([self.geometry.spacing / 2.0, 0.0, 0.0])
        return (center + half, center - half)

    @classmethod
    def from_json(cls, path) -> "RoomScenario":
        with open(path) as fh:
            raw = json.load(fh)
        if "geometry" in raw:
            raw["geometry"] = ArrayGeometry(**raw["geometry"])
        for key in ("room_dims", "mic_center"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    def to_json(self, path) -> None:
        raw = asdict(self)
        raw["geometry"] = {"spacing": self.geometry.spacing,
                           "sound_speed": self.geometry.sound_speed}
        with open(path, "w") as fh:
            json.dump(raw, fh, indent=2)


def _check_inside(pos, room_dims, label: str) -> None:
    pos = np.asarray(pos, dtype=np.float64)
    dims = np.asarray(room_dims, dtype=np.float64)
    if np.any(pos <= 0.0) or np.any(pos >= dims):
        raise ValueError(f"{label} position {pos.tolist()} is outside the room {dims.tolist()}")


def place_source(scenario: RoomScenario, angle_deg: float) -> np.ndarray:
    """Source position at `source_distance` from the reference microphone,
    in the horizontal plane of the array. 0 deg is endfire along +x."""
    mic1, _ = scenario.mic_positions()
    rad = np.radians(angle_deg)
    pos = mic1 + scenario.source_distance * np.array([np.cos(rad), np.sin(rad), 0.0])
    _check_inside(pos, scenario.room_dims, "source")
    return pos


def _sabine_reflection(room_dims, rt60: float) -> float:
    lx, ly, lz = room_dims
    volume = lx * ly * lz
    surface = 2.0 * (lx * ly + lx * lz + ly * lz)
    absorption = 0.161 * volume / (rt60 * surface)
    if absorption > 1.0:
        raise ValueError(
            f"rt60={rt60} s is unreachable in this room: Sabine absorption "
            f"{absorption:.3f} exceeds 1"
        )
    return float(np.sqrt(1.0 - absorption))


def _fractional_impulses(length: int, delays: np.ndarray, amps: np.ndarray) -> np.ndarray:
    """Accumulate Hann-windowed sinc pulses at fractional sample delays."""
    h = np.zeros(length)
    rel = np.arange(-_SINC_HALF, _SINC_HALF + 1)
    centers = np.round(delays).astype(np.int64)
    idx = centers[:, None] + rel[None, :]
    t = idx - delays[:, None]
    half = _SINC_HALF + 0.5
    window = np.where(np.abs(t) <= half, 0.5 * (1.0 + np.cos(np.pi * t / half)), 0.0)
    contrib = amps[:, None] * np.sinc(t) * window
    valid = (idx >= 0) & (idx < length)
    np.add.at(h, idx[valid], contrib[valid])
    return h


def image_source_rir(
    room_dims,
    src_pos,
    mic_pos,
    rt60: float,
    max_order: int,
    sample_rate: int,
    sound_speed: float = 343.0,
) -> ImpulseResponse:
    """Image-source impulse response with uniform wall reflectivity.

    Every image at distance d contributes a Hann-windowed-sinc pulse of
    amplitude reflection^n_reflections / (4 pi d) at delay d/c. The
    reflection coefficient comes from Sabine's formula for the requested
    rt60; rt60 = 0 gives the anechoic (direct path only) response.
    """
    src = np.asarray(src_pos, dtype=np.float64)
    mic = np.asarray(mic_pos, dtype=np.float64)
    dims = np.asarray(room_dims, dtype=np.float64)
    _check_inside(src, dims, "source")
    _check_inside(mic, dims, "microphone")
    if max_order < 0:
        raise ValueError("max_order must be non-negative")

    if rt60 == 0.0:
        reflection = 0.0
        max_order = 0
    else:
        reflection = _sabine_reflection(dims, rt60)

    # 1-D image coordinates and reflection counts per axis, combined by
    # broadcasting into the 3-D image lattice.
    reach = max_order // 2 + 1
    coords, counts = [], []
    for axis in range(3):
        ax_coords, ax_counts = [], []
        for r in range(-reach, reach + 1):
            for parity in (0, 1):
                n_refl = abs(r + parity) + abs(r)
                if n_refl > max_order:
                    continue
                ax_coords.append((1 - 2 * parity) * src[axis] + 2.0 * r * dims[axis])
                ax_counts.append(n_refl)
        coords.append(np.asarray(ax_coords))
        counts.append(np.asarray(ax_counts))

    order = (
        counts[0][:, None, None]
        + counts[1][None, :, None]
        + counts[2][None, None, :]
    )
    keep = order <= max_order
    dx = coords[0][:, None, None] - mic[0]
    dy = coords[1][None, :, None] - mic[1]
    dz = coords[2][None, None, :] - mic[2]
    dist = np.sqrt(np.broadcast_to(dx * dx + dy * dy + dz * dz, order.shape))[keep]
    n_refl = order[keep]

    amps = (reflection**n_refl if reflection > 0.0 else (n_refl == 0).astype(np.float64))
    amps = amps / (4.0 * np.pi * dist)
    delays = dist / sound_speed * sample_rate
    length = int(np.ceil(delays.max())) + _SINC_HALF + 2
    taps = _fractional_impulses(length, delays, amps)
    return ImpulseResponse(taps, sample_rate)


def simulate_capture(
    scenario: RoomScenario,
    speech: Waveform,
    interference: Waveform,
) -> StereoCapture:
    """Render both sources through their room responses and mix them at
    the requested SIR, defined at the reference microphone."""
    if speech.sample_rate != scenario.sample_rate:
        raise ValueError("speech sample rate does not match the scenario")
    if interference.sample_rate != scenario.sample_rate:
        raise ValueError("interference sample rate does not match the scenario")

    speech_pos = place_source(scenario, scenario.speech_angle)
    interf_pos = place_source(scenario, scenario.interference_angle)
    mics = scenario.mic_positions()

    def render(signal: Waveform, src_pos) -> list:
        images = []
        for mic in mics:
            rir = image_source_rir(
                scenario.room_dims, src_pos, mic, scenario.rt60,
                scenario.max_image_order, scenario.sample_rate,
                scenario.geometry.sound_speed,
            )
            images.append(fftconvolve(signal.samples, rir.taps))
        return images

    speech_images = render(speech, speech_pos)
    interf_images = render(interference, interf_pos)
    length = max(len(v) for v in speech_images + interf_images)
    speech_images = [np.pad(v, (0, length - len(v))) for v in speech_images]
    interf_images = [np.pad(v, (0, length - len(v))) for v in interf_images]

    speech_energy = float(np.sum(speech_images[0] ** 2))
    interf_energy = float(np.sum(interf_images[0] ** 2))
    if speech_energy == 0.0:
        raise ValueError("speech image at the reference microphone is silent")
    if interf_energy == 0.0:
        raise ValueError("interference image at the reference microphone is silent")
    gamma = float(np.sqrt(speech_energy / (interf_energy * 10.0 ** (scenario.sir_db / 10.0))))

    fs = scenario.sample_rate
    ch = [Waveform(s + gamma * i, fs) for s, i in zip(speech_images, interf_images)]
    return StereoCapture(
        ch1=ch[0], ch2=ch[1], geometry=scenario.geometry,
        speech_images=tuple(Waveform(v, fs) for v in speech_images),
        interference_images=tuple(Waveform(v, fs) for v in interf_images),
        gamma=gamma,
    )


def _fractional_delay(x: np.ndarray, delay_samples: float) -> np.ndarray:
    """Delay a signal by a (possibly fractional, possibly negative) number
    of samples with an 81-tap Hann-windowed sinc."""
    rel = np.arange(-_SINC_HALF, _SINC_HALF + 1)
    t = rel - delay_samples
    half = _SINC_HALF + 0.5
    kernel = np.where(np.abs(t) <= half, np.sinc(t) * 0.5 * (1.0 + np.cos(np.pi * t / half)), 0.0)
    full = np.convolve(x, kernel)
    return full[_SINC_HALF : _SINC_HALF + len(x)]


def plane_wave_capture(
    speech: Waveform,
    interference: Waveform,
    speech_angle: float,
    interference_angle: float,
    sir_db: float,
    geom: ArrayGeometry = ArrayGeometry(),
) -> StereoCapture:
    """Ideal anechoic far-field capture: each source reaches the second
    microphone with the pure inter-mic delay of its arrival angle, and
    the mix is SIR-scaled at the reference microphone."""
    if speech.sample_rate != interference.sample_rate:
        raise ValueError("sample rates differ")
    fs = speech.sample_rate
    n = min(len(speech), len(interference))
    s, i = speech.samples[:n], interference.samples[:n]
    if not np.any(s) or not np.any(i):
        raise ValueError("silent source; SIR undefined")
    gamma = float(np.sqrt(np.sum(s**2) / (np.sum(i**2) * 10.0 ** (sir_db / 10.0))))

    def tdoa(angle_deg: float) -> float:
        return geom.spacing / geom.sound_speed * np.cos(np.radians(angle_deg)) * fs

    ch1 = s + gamma * i
    ch2 = _fractional_delay(s, tdoa(speech_angle)) + gamma * _fractional_delay(
        i, tdoa(interference_angle)
    )
    return StereoCapture(
        ch1=Waveform(ch1, fs), ch2=Waveform(ch2, fs), geometry=geom, gamma=gamma,
    )
