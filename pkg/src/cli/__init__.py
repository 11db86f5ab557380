"""
CLI interfaces for scenarios, ad-hoc attacks and graph export.
"""
