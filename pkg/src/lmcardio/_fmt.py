def fmt_float(x):
    """Decimal text that round-trips a float64 exactly (17 significant digits)."""
    return format(float(x), ".17g")
