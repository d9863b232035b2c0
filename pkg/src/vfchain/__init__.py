"""Exact combinatorial and homological tools for flow categories,
stratified corner models, Novikov Floer complexes and their bimodules."""

__version__ = "0.1.0"
