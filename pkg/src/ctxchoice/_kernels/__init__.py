"""Kernel backends: compiled extension plus a pure-Python twin."""
