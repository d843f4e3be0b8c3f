"""Модуль для синтеза chirp-сигналов, корреляций и приёма"""
