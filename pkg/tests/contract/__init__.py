"""Contract compliance tests."""
