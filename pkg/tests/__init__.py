"""Tests for sensbounds."""
