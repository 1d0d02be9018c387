"""Benchmarks, granulation, landmarks, training and run storage"""
