"""Command-line surface and report documents"""
