from towercert.verifier.config import VerifierConfig, load_config
from towercert.verifier.report import CheckReport, SuiteReport, emit_report
from towercert.verifier.suite import run_suite


__all__ = ["CheckReport", "SuiteReport", "VerifierConfig", "emit_report", "load_config", "run_suite"]
