from .validation import check_array, check_consistent_length
