"""
The 'verify' package checks the fast paths against oracles.
"""

from .suites import SUITES, CaseResult, SuiteResult, run_suites

__all__ = ['SUITES', 'CaseResult', 'SuiteResult', 'run_suites']
