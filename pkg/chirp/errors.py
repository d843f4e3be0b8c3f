"""Исключения симулятора"""


class ChirpDomainError(ValueError):
    """Параметр вне области определения операции"""


class ProfileError(ChirpDomainError):
    """
    Некорректный профиль AG-канала

    Args:
        key: Ключ профиля, вызвавший ошибку (например, 'tap3.power_db')
        message: Описание ошибки
    """

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")
