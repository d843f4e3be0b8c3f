"""Модуль Monte Carlo экспериментов и командной строки"""

__version__ = "0.1.0"
