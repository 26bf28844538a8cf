"""Test suite for Robust Game Solver."""
