class QnnmiError(Exception):
    exit_code = 1


class ConfigError(QnnmiError, ValueError):
    exit_code = 2


class DataError(QnnmiError, ValueError):
    exit_code = 3


class NumericalError(QnnmiError, ArithmeticError):
    exit_code = 4
