"""Test suite for phasekit."""
