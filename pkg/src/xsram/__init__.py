"""Behavioral simulator of in-memory Boolean compute in SRAM arrays."""
