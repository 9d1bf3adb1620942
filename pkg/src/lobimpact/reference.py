"""Published reference values for the 23 SZSE A-share stocks (year 2003).

These are targets for qualitative comparison only; the underlying tick data
are proprietary and are not reproduced by the synthetic flow.
"""

from __future__ import annotations

from .trades import StockMeta

# code, C_tot, C (million shares), z (%), <r_PB>, <r_PS>, <r_FB>, <r_FS> (x1000), N (thousand)
_TABLE = """\
000001 1945.8 1406.5 149.9 1.19 -1.21 0.03 -0.05 889.7
000002 1152.3  929.5 166.8 1.55 -1.54 0.04 -0.05 509.4
000009  958.8  579.1 210.5 2.23 -2.25 0.05 -0.06 448.0
000012  377.9  107.1 529.5 1.63 -1.61 0.08 -0.10 290.4
000016  399.1  224.0 182.3 1.86 -1.87 0.08 -0.10 188.6
000021  732.9  199.5 309.3 1.35 -1.37 0.07 -0.09 411.6
000024  327.2  170.2 151.9 1.65 -1.63 0.09 -0.09 133.6
000027 1202.5  486.0 206.0 1.63 -1.63 0.06 -0.05 313.9
000063  667.3  250.8 227.6 1.27 -1.24 0.07 -0.06 265.5
000066  458.5  181.0 231.6 1.57 -1.59 0.08 -0.09 277.7
000088  585.0  124.9 169.5 1.63 -1.60 0.10 -0.09  97.2
000089  799.8  287.8 216.6 1.63 -1.64 0.06 -0.07 189.1
000406  364.0  265.8 231.5 1.56 -1.58 0.05 -0.07 271.4
000429  953.4  274.1 118.2 2.35 -2.37 0.08 -0.09 117.4
000488  526.1  235.6 136.8 1.72 -1.62 0.14 -0.17 120.1
000539 1994.1  391.5 114.0 1.88 -1.85 0.10 -0.14 114.7
000541  275.9  146.7  95.2 1.56 -1.54 0.09 -0.09  68.7
000550  519.2  117.5 604.5 1.60 -1.59 0.08 -0.09 346.7
000581  348.0  215.9 123.5 1.84 -1.80 0.10 -0.10  94.0
000625  876.7  168.0 582.8 1.60 -1.61 0.08 -0.10 397.6
000709 1955.0  565.8 125.7 2.02 -2.04 0.04 -0.05 207.8
000720  479.7  277.1  82.2 0.98 -1.15 0.05 -0.08 132.2
000778  621.5  219.1 183.1 1.38 -1.33 0.07 -0.07 157.3
"""


def _rows():
    for line in _TABLE.splitlines():
        code, *vals = line.split()
        yield code, [float(v) for v in vals]


STOCK_META: dict[str, StockMeta] = {
    code: StockMeta(code, v[0], v[1], v[2], v[7] * 1000) for code, v in _rows()}
MEAN_RETURNS_X1000: dict[str, dict[str, float]] = {
    code: dict(zip(("PB", "PS", "FB", "FS"), v[3:7])) for code, v in _rows()}
CODES = tuple(STOCK_META)

# capitalization-scaling search, unnormalized returns vs size over its average
LFM_EXPONENTS = {
    "PB": {"delta": 0.0069, "gamma": -0.0481, "R": 0.0157},
    "PS": {"delta": -0.0106, "gamma": -0.0570, "R": 0.0239},
    "FB": {"delta": 0.0020, "gamma": 0.4174, "R": 0.1969},
    "FS": {"delta": -0.0417, "gamma": 0.2615, "R": 0.0739},
}
# same search on daily-normalized sizes
LC_EXPONENTS = {
    "PB": {"delta": 0.100, "gamma": -0.036, "R": 0.017},
    "PS": {"delta": 0.074, "gamma": -0.029, "R": 0.018},
    "FB": {"delta": 0.291, "gamma": 0.196, "R": 0.096},
    "FS": {"delta": 0.432, "gamma": -0.026, "R": 0.113},
}
# exponent relation on sizes and returns pooled over all stocks
RELATION_ALL = {
    "buy": {"alpha_omega": 2.30, "alpha_r": 3.45, "ratio": 0.67, "alpha": 0.66, "D": 0.01},
    "sell": {"alpha_omega": 2.36, "alpha_r": 3.44, "ratio": 0.69, "alpha": 0.69, "D": 0.00},
}
IMPACT_EXPONENTS_ALL = {"FB": (0.66, 0.03), "FS": (0.69, 0.03)}
RETURN_TAIL_BUY = (3.45, 0.17)
SIZE_TAIL_BUY = (2.30, 0.10)
ZERO_SHIFT_FRACTION = {"FB": 0.9105, "FS": 0.8942}
TAIL_RANGE = (15.9, 141.0)
