"""Тесты chirpsim"""
