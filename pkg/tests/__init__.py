"""Tests for qotto."""
