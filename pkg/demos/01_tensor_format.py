#!/usr/bin/env python3
# Tensor file format walkthrough: write, inspect, read back, and see how
# malformed payloads are rejected with precise byte offsets.

import numpy as np

from scenesearch import read_tensor, write_tensor
from scenesearch.errors import TensorFormatError

t = np.array([[1.5, -2.0, 3.25], [0.0, 7.0, -1.0]], dtype=np.float32)
data = write_tensor(t)

print("tensor shape:", t.shape)
print("payload bytes:", len(data), "(8 magic + 4 rank + 16 dims + 24 data)")
print("magic:", data[:8])
print("first 32 bytes:", data[:32].hex(" "))

back = read_tensor(data)
print("round-trip equal:", np.array_equal(back, t), "| dtype:", back.dtype)

# Every violation names itself and points at the offending byte.
for label, payload in [
    ("bad magic", b"XXXXXXXX" + data[8:]),
    ("truncated", data[:-2]),
    ("trailing bytes", data + b"\x00"),
]:
    try:
        read_tensor(payload)
    except TensorFormatError as err:
        print(f"{label:>14}: code={err.code!r} offset={err.offset}")
