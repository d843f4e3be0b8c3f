"""Модуль моделей канала: AWGN, замирания Райса и AG-канал с многолучёвостью"""
