"""Deterministic simulator for SAC-controlled RIS-aided underlay cognitive
radio under reward-poisoning attacks."""

__version__ = "0.1.0"
