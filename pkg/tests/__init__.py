"""Unit tests for yambo-data-r2q-spark-job."""
