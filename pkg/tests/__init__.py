"""Test suite for the cubemixer package."""
