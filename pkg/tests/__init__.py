"""cvdyn test suite."""
