"""Labeled data ingest, synthetic generators and SU sampling"""
