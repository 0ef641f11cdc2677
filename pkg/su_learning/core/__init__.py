"""Losses, risk estimators, solvers, trainers, prior estimation, model selection and the clustering baseline"""
