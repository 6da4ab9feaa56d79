"""Input validation helpers."""


class ValidationError(Exception):
    pass


def check_array(data):
    if data is None:
        raise ValidationError("data must not be None")
    return list(data)


def check_consistent_length(left, right):
    if len(left) != len(right):
        raise ValidationError("length mismatch")
