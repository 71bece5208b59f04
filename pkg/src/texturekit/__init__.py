"""Handcrafted texture features, tree/SVM classifiers and Shapley attribution for mpMRI patches."""

__version__ = "0.1.0"
