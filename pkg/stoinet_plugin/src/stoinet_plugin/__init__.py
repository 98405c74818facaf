"""Reference scorer plugin: serves utterance-level intelligibility
predictions from a pretrained CNN-BLSTM assessment model (or a protocol
stub) over the ians-scorer-v1 stdio protocol."""

__version__ = "0.1.0"
