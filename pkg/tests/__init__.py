"""Unit tests for the Lorentz toolkit."""
