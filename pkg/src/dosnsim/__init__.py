"""Simulator for membership-driven access control in decentralized social
network groups: three enforcement models over an in-memory DHT substrate,
with a cost-model crypto provider and a benchmark harness."""

__version__ = "0.1.0"
