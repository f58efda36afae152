"""Generate the bundled synthetic price file (data/sample_prices.csv).

One-factor model over business days 2023-10-02 .. 2024-09-30. The output is
committed; rerunning with the same seed reproduces it exactly.
"""
import numpy as np
import pandas as pd

SEED = 20231001
TICKERS = [
    "ALDR", "BRXN", "CVLT", "DMRK", "ELNO", "FYRA", "GANT", "HOLV",
    "IRDX", "JUNO", "KESL", "LUMA", "MORV", "NTRA", "OPLX", "PRSM",
    "QUIL", "RAVN", "SOLT", "TYRE", "UMBR", "VESK", "WOLD", "XANT",
]

rng = np.random.default_rng(SEED)
dates = pd.bdate_range("2023-10-02", "2024-09-30")
t = len(dates)
k = len(TICKERS)

market = rng.normal(0.0007, 0.009, size=t - 1)
beta = rng.uniform(0.4, 1.6, size=k)
alpha = rng.normal(0.0002, 0.0006, size=k)
idio = rng.uniform(0.008, 0.022, size=k)
returns = alpha + np.outer(market, beta) + rng.normal(size=(t - 1, k)) * idio

start = rng.uniform(20.0, 300.0, size=k)
prices = np.vstack([start, start * np.cumprod(1.0 + returns, axis=0)])

frame = pd.DataFrame(np.round(prices, 4), index=dates.strftime("%Y-%m-%d"), columns=TICKERS)
frame.index.name = "date"
frame.to_csv("sample_prices.csv", float_format="%.4f")
