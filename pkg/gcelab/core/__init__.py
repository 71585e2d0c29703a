"""Linear-algebra and frame calculus primitives"""
