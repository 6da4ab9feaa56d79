"""Left open.


def first():
    return 1
