"""Hermitian geometry services built on the core calculus"""
