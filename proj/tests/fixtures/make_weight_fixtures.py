#!/usr/bin/env python3
"""Writes the small MAFus / recovery weight archives and their expected outputs.

Independent numpy implementation; re-run only when the fixtures must change.
"""
import json
import struct
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
rng = np.random.RandomState(20240611)


def q(*shape, scale=1.0):
    # multiples of 1/16 so float32 storage is exact
    return np.round(rng.uniform(-1, 1, size=shape) * scale * 16) / 16


def write_archive(path, tensors):
    entries, payload, offset = [], b"", 0
    for name, arr in tensors:
        data = np.asarray(arr, dtype="<f4").tobytes()
        entries.append({"name": name, "dtype": "float32-le", "shape": list(np.shape(arr)),
                        "offset": offset, "nbytes": len(data)})
        payload += data
        offset += len(data)
    header = json.dumps({"format": "shadowbench-tensors", "version": 1, "tensors": entries}).encode()
    path.write_bytes(struct.pack("<Q", len(header)) + header + payload)


def softmax_rows(x):
    e = np.exp(x - x.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def conv(x, w, b, relu=True):
    # x: C x H x W, w: O x C x k x k, stride 1, same padding
    o, c, k, _ = w.shape
    p = (k - 1) // 2
    h, wd = x.shape[1:]
    xp = np.pad(x, ((0, 0), (p, p), (p, p)))
    out = np.zeros((o, h, wd))
    for oc in range(o):
        for y in range(h):
            for xx in range(wd):
                out[oc, y, xx] = b[oc] + np.sum(w[oc] * xp[:, y:y + k, xx:xx + k])
    return np.maximum(out, 0) if relu else out


CF, CT, INNER, H, W = 2, 3, 2, 2, 3
mafus = {}
for s, c in (("f", CF), ("t", CT)):
    mafus[s] = {"theta": q(c, INNER), "phi": q(c, INNER), "g": q(c, INNER), "z": q(INNER, c)}
gamma = {"weight": q(2, CF + CT), "bias": np.array([0.25, 0.5]), "bn_scale": np.array([1.5, 0.75]),
         "bn_shift": np.array([0.125, -0.0625]), "bn_mean": np.array([0.0625, -0.125]),
         "bn_var": np.array([2.0, 0.5]), "bn_eps": np.array([1e-5])}

tensors = []
for s in ("f", "t"):
    for k in ("theta", "phi", "g", "z"):
        tensors.append((f"mafus.{s}.{k}", mafus[s][k]))
for k in ("weight", "bias", "bn_scale", "bn_shift", "bn_mean", "bn_var", "bn_eps"):
    tensors.append((f"mafus.gamma.{k}", gamma[k]))
write_archive(HERE / "mafus_small.sbt", tensors)

F = q(1, CF, H, W, scale=2.0)
T = q(1, CT, H, W, scale=2.0)


def mafus_forward(F, T):
    Xf = F[0].reshape(CF, -1).T  # HW x C
    Xt = T[0].reshape(CT, -1).T
    cat = np.concatenate([Xf, Xt], axis=1)
    g32 = lambda k: gamma[k].astype(np.float32).astype(np.float64)
    pre = cat @ g32("weight").T + g32("bias")
    bn = (pre - g32("bn_mean")) / np.sqrt(g32("bn_var") + g32("bn_eps")[0]) * g32("bn_scale") + g32("bn_shift")
    gam = np.maximum(bn, 0)
    gf, gt = gam[:, 0], gam[:, 1]
    Lf = (Xf @ mafus["f"]["theta"]) @ (Xf @ mafus["f"]["phi"]).T
    Lt = (Xt @ mafus["t"]["theta"]) @ (Xt @ mafus["t"]["phi"]).T
    Af = softmax_rows(Lf + gt[None, :] * Lt)
    At = softmax_rows(Lt + gf[None, :] * Lf)
    Zf = (Af @ (Xf @ mafus["f"]["g"])) @ mafus["f"]["z"] + Xf
    Zt = (At @ (Xt @ mafus["t"]["g"])) @ mafus["t"]["z"] + Xt
    return np.concatenate([Zf.T.reshape(CF, H, W), Zt.T.reshape(CT, H, W)])[None]


C1, C2, C3 = 2, 1, 1
layers = [("conv1_1", C1, C1, 3), ("conv1_2", C1, C1, 3), ("conv2_1", C1, C2, 3), ("conv2_2", C2, C2, 3),
          ("conv3_1", C2, C3, 3), ("conv3_2", C3, C3, 3), ("conv_fuse", C1 + C2 + C3, C1, 1)]
rec = {}
tensors = []
for name, cin, cout, k in layers:
    rec[name] = (q(cout, cin, k, k, scale=0.5), q(cout, scale=0.25))
    tensors += [(f"recovery.{name}.weight", rec[name][0]), (f"recovery.{name}.bias", rec[name][1])]
write_archive(HERE / "recovery_small.sbt", tensors)

R = q(1, C1, 3, 4, scale=2.0)


def recovery_forward(x):
    a = conv(x, *rec["conv1_1"])
    b1 = conv(a, *rec["conv1_2"])
    b = conv(b1, *rec["conv2_1"])
    b2 = conv(b, *rec["conv2_2"])
    c = conv(b2, *rec["conv3_1"])
    b3 = conv(c, *rec["conv3_2"])
    return conv(np.concatenate([b1, b2, b3]), *rec["conv_fuse"])[None]


expected = {
    "F": {"shape": list(F.shape), "values": F.ravel().tolist()},
    "T": {"shape": list(T.shape), "values": T.ravel().tolist()},
    "mafus_out": {"shape": [1, CF + CT, H, W], "values": mafus_forward(F, T).ravel().tolist()},
    "R": {"shape": list(R.shape), "values": R.ravel().tolist()},
    "recovery_out": {"shape": [1, C1, 3, 4], "values": recovery_forward(R[0]).ravel().tolist()},
}
(HERE / "weights_expected.json").write_text(json.dumps(expected, indent=1) + "\n")
