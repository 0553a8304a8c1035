"""Tests for embedlouvain."""
